"""Compare the compiled rational kernels against the pure-Python fallback.

Swaps the kernel bindings in place, so one process times both backends on
the same workloads: dense rational matrix products, a symmetric-step
network forward pass, and a counter-machine ReLU-network trace.

Run:  python benchmarks/bench_kernels.py
"""

import random
import time
from contextlib import contextmanager

from exactrnn import kernels
from exactrnn import _ratcore_py as pure

try:
    from exactrnn import _ratcore_c as compiled
except ImportError:
    compiled = None

KERNEL_NAMES = ("rnorm", "radd", "rmul", "vdot", "vec_mat", "mat_vec", "mat_mul", "sparse_affine")


@contextmanager
def backend(impl):
    saved = {name: getattr(kernels, name) for name in KERNEL_NAMES}
    for name in KERNEL_NAMES:
        setattr(kernels, name, getattr(impl, name))
    try:
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def bench_matmul():
    from exactrnn.linalg import RMatrix
    from exactrnn.rational import Rational

    rng = random.Random(0)
    mats = [
        RMatrix(
            [[Rational(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(8)]
             for _ in range(8)]
        )
        for _ in range(40)
    ]
    start = time.perf_counter()
    acc = RMatrix.identity(8)
    for m in mats:
        acc = acc @ m
    for _ in range(3):
        for a in mats[:20]:
            for b in mats[20:]:
                a @ b
    return time.perf_counter() - start


def bench_dnet_imm():
    from exactrnn.delta_gadgets import build_dnet_imm, dnet_imm_forward

    rng = random.Random(1)
    stream = [rng.choice((-1, 0, 1)) for _ in range(9 * 100)]
    start = time.perf_counter()
    dnet_imm_forward(build_dnet_imm(), stream)
    return time.perf_counter() - start


def bench_cm_rnn():
    from exactrnn.automata import build_conn_counter_machine
    from exactrnn.problems import SortedDetConnInstance, encode_conn_unary
    from exactrnn.relu_nets import cm_to_mlp_rnn, run_mlp_rnn

    rnn = cm_to_mlp_rnn(build_conn_counter_machine())
    inst = SortedDetConnInstance(
        n=300, s=250, t=300, edges=((250, 275), (275, 300))
    )
    stream = encode_conn_unary(inst)
    start = time.perf_counter()
    for _ in range(4):
        run_mlp_rnn(rnn, stream, track_precision=False)
    return time.perf_counter() - start


WORKLOADS = [
    ("dense 8x8 rational products", bench_matmul),
    ("symmetric-step product net, 100 matrices", bench_dnet_imm),
    ("connectivity ReLU-net trace, ~1.1k tokens x4", bench_cm_rnn),
]


def main():
    if compiled is None:
        print("compiled backend not available; showing pure timings only")
    rows = []
    for label, fn in WORKLOADS:
        with backend(pure):
            t_pure = fn()
        if compiled is not None:
            with backend(compiled):
                t_comp = fn()
            rows.append((label, t_pure, t_comp, t_pure / t_comp))
        else:
            rows.append((label, t_pure, None, None))
    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'pure':>8}  {'cython':>8}  {'speedup':>7}")
    for label, t_pure, t_comp, speedup in rows:
        if t_comp is None:
            print(f"{label:<{width}}  {t_pure:>7.3f}s")
        else:
            print(f"{label:<{width}}  {t_pure:>7.3f}s  {t_comp:>7.3f}s  {speedup:>6.2f}x")


if __name__ == "__main__":
    main()
