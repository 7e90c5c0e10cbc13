"""Build script for the optional compiled kernel backend.

The package is pure Python; `exactrnn._ratcore_c` is a Cython twin of
`exactrnn._ratcore_py` used for the hot rational-arithmetic loops. If
Cython or a C compiler is unavailable the extension is skipped and the
package runs on the pure backend.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; fall back to pure Python if not."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping compiled kernels ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: skipping {ext.name} ({exc}); using pure Python")


try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/exactrnn/_ratcore_c.pyx"],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
