"""Keep the README's quick-start snippet executable."""

import re
from pathlib import Path


def test_quick_start_snippet_runs():
    text = Path(__file__).resolve().parent.parent.joinpath("README.md").read_text()
    match = re.search(r"## Quick start\n\n```python\n(.*?)```", text, re.S)
    assert match, "README quick-start block missing"
    namespace = {}
    exec(compile(match.group(1), "README-quickstart", "exec"), namespace)
    assert [str(v) for v in namespace["outputs"]] == ["-1/2", "3/4", "-1/4", "3/8"]
