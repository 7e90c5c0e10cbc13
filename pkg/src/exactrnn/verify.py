"""Construction-vs-oracle verification registry.

Each named verification runs one construction against an independent
reference (brute-force product, automaton run, breadth-first search, dense
linear algebra) for a number of seeded trials and reports the first
counterexample, if any, with full token streams and canonical rational
values so failures replay standalone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .automata import (
    Wfa,
    build_conn_counter_machine,
    cm_run,
    scripted_stack_machine,
    sm_run,
    wfa_eval,
    wfa_prefix_values,
    wfa_is_deterministic,
)
from .delta_gadgets import build_dnet_imm, build_dnet_wfa, dnet_imm_forward, dnet_wfa_forward
from .linalg import RMatrix, RVector, RelaxedPermutation
from .lrnn import (
    LinStep,
    PdStep,
    dwfa_to_pd,
    lrnn_run_scan,
    lrnn_run_sequential,
    pd_closed_form,
    pd_tree_product,
)
from .problems import (
    IDENTITY3,
    conn_oracle,
    encode_conn_unary,
    mat3_mul,
    random_sorted_instance,
    reachable,
    reduce_to_sorted,
    rng_for,
)
from .rational import Rational
from .relu_nets import cm_to_mlp_rnn, run_mlp_rnn, sm_to_mlp_rnn
from .rwkv_gadgets import build_rwkv_imm, build_rwkv_wfa, rwkv_imm_forward, rwkv_wfa_forward

WFA_ENTRIES = [Rational(-1), Rational(-1, 2), Rational(0), Rational(1, 2), Rational(1)]


@dataclass
class VerifyResult:
    name: str
    trials: int
    passed: bool
    counterexample: str | None = None
    notes: list = field(default_factory=list)


def random_wfa(rng, n_states: int, n_symbols: int) -> Wfa:
    sigma = tuple("abcdefgh"[:n_symbols])
    mats = {
        s: RMatrix(
            [[rng.choice(WFA_ENTRIES) for _ in range(n_states)] for _ in range(n_states)]
        )
        for s in sigma
    }
    alpha = RVector([rng.choice(WFA_ENTRIES) for _ in range(n_states)])
    omega = RVector([rng.choice(WFA_ENTRIES) for _ in range(n_states)])
    return Wfa(n_states, sigma, mats, alpha, omega)


def random_dwfa(rng, n_states: int, n_symbols: int) -> Wfa:
    """Column-deterministic automaton: each matrix is routing times diagonal."""
    sigma = tuple("abcdefgh"[:n_symbols])
    nonzero = [v for v in WFA_ENTRIES if v != Rational(0)]
    mats = {}
    for s in sigma:
        m = RMatrix.zeros(n_states, n_states)
        for j in range(n_states):
            if rng.random() < 0.9:
                i = rng.randrange(n_states)
                w = rng.choice(nonzero)
                m.nums[i * n_states + j] = w.num
                m.dens[i * n_states + j] = w.den
        mats[s] = m
    alpha = RVector.zeros(n_states)
    alpha.nums[rng.randrange(n_states)] = 1
    omega = RVector([rng.choice(WFA_ENTRIES) for _ in range(n_states)])
    wfa = Wfa(n_states, sigma, mats, alpha, omega)
    assert wfa_is_deterministic(wfa)
    return wfa


def _dump_stream(word) -> str:
    return " ".join(str(tok) for tok in word)


def _dump_wfa(a: Wfa) -> str:
    lines = [f"states={a.n_states} alphabet={list(a.alphabet)}"]
    lines.append("alpha=" + str(a.alpha))
    lines.append("omega=" + str(a.omega))
    for sym in a.alphabet:
        lines.append(f"M[{sym!r}]=" + str(a.matrices[sym]))
    return "\n".join(lines)


def _imm_stream(rng, blocks: int) -> list:
    return [rng.choice((-1, 0, 1)) for _ in range(9 * blocks)]


def _imm_oracle(stream) -> list:
    p = IDENTITY3
    for base in range(0, len(stream), 9):
        p = mat3_mul(p, tuple(stream[base : base + 9]))
    return [Rational(e) for e in p]


# ---------------------------------------------------------------------------
# Verifiers


def verify_rwkv_wfa(trials=50, seed=0, states=3, alphabet=3, length=None, **_):
    name = "rwkv-wfa"
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        n = rng.randint(1, states)
        a = random_wfa(rng, n, rng.randint(1, alphabet))
        max_len = length if length is not None else 6 * (2 * n)
        word = [rng.choice(a.alphabet) for _ in range(rng.randint(0, max_len))]
        got = rwkv_wfa_forward(build_rwkv_wfa(a), word)
        want = wfa_prefix_values(a, word)
        if got != want:
            t = next(i for i, (g, w) in enumerate(zip(got, want)) if g != w)
            return VerifyResult(
                name, trial + 1, False,
                f"trial {trial}: word={_dump_stream(word)}\n"
                f"prefix {t + 1}: expected {want[t]} actual {got[t]}\n"
                + _dump_wfa(a),
            )
    return VerifyResult(name, trials, True)


def verify_dnet_wfa(trials=50, seed=0, states=3, alphabet=3, length=None, **_):
    name = "dnet-wfa"
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        n = rng.randint(1, states)
        a = random_wfa(rng, n, rng.randint(1, alphabet))
        m = 8 * n * n + 5 * n + 1
        max_len = length if length is not None else 2 * m + rng.randint(1, 12)
        word = [rng.choice(a.alphabet) for _ in range(max_len)]
        net = build_dnet_wfa(a)
        got = dnet_wfa_forward(net, word)
        want = wfa_prefix_values(a, word)
        if got != want:
            t = next(i for i, (g, w) in enumerate(zip(got, want)) if g != w)
            prog_index = t % m
            bounds = (n + 1, n + 1 + 8 * n * n, n + 1 + 8 * n * n + n, m)
            phase = next(p for p, b in enumerate(bounds, start=1) if prog_index < b)
            return VerifyResult(
                name, trial + 1, False,
                f"trial {trial}: word={_dump_stream(word)}\n"
                f"prefix {t + 1} (phase {phase}, program step {prog_index + 1}"
                f" of block {t // m + 1}): expected {want[t]} actual {got[t]}\n"
                + _dump_wfa(a),
            )
    return VerifyResult(name, trials, True)


def verify_rwkv_imm(trials=20, seed=0, blocks=20, **_):
    name = "rwkv-imm"
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        stream = _imm_stream(rng, rng.randint(1, blocks))
        got = rwkv_imm_forward(build_rwkv_imm(), stream)
        want = _imm_oracle(stream)
        if got != want:
            return VerifyResult(
                name, trial + 1, False,
                f"trial {trial}: stream={_dump_stream(stream)}\n"
                f"expected {[str(v) for v in want]}\nactual   {[str(v) for v in got]}",
            )
    return VerifyResult(name, trials, True)


def verify_dnet_imm(trials=3, seed=0, blocks=100, **_):
    name = "dnet-imm"
    net = build_dnet_imm()
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        stream = _imm_stream(rng, rng.randint(1, blocks))
        got = dnet_imm_forward(net, stream)
        want = _imm_oracle(stream)
        if got != want:
            return VerifyResult(
                name, trial + 1, False,
                f"trial {trial}: {len(stream) // 9} matrices\n"
                f"stream={_dump_stream(stream)}\n"
                f"expected {[str(v) for v in want]}\nactual   {[str(v) for v in got]}",
            )
    return VerifyResult(name, trials, True)


def verify_cm_rnn(trials=200, seed=0, nodes=200, mlp_trials=20, **_):
    name = "cm-rnn"
    machine = build_conn_counter_machine()
    rnn = cm_to_mlp_rnn(machine)
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        inst = random_sorted_instance(rng, max_n=nodes)
        stream = encode_conn_unary(inst)
        want = conn_oracle(inst)
        got, trace = cm_run(machine, stream)
        if got != want:
            return VerifyResult(
                name, trial + 1, False,
                f"trial {trial}: instance={inst}\nstream={_dump_stream(stream)}\n"
                f"expected {int(want)} actual {int(got)}",
            )
        if trial < mlp_trials:
            res = run_mlp_rnn(rnn, stream, track_precision=False)
            if res.accept != want:
                return VerifyResult(
                    name, trial + 1, False,
                    f"trial {trial}: network decision {int(res.accept)}"
                    f" != oracle {int(want)}\nstream={_dump_stream(stream)}",
                )
            for t, (h, conf) in enumerate(zip(res.states, trace)):
                if rnn.decode(h) != conf:
                    return VerifyResult(
                        name, trial + 1, False,
                        f"trial {trial}: trace diverges at step {t}:"
                        f" machine {conf} network {rnn.decode(h)}\n"
                        f"stream={_dump_stream(stream)}",
                    )
    return VerifyResult(name, trials, True)


STACK_OP_PAIRS = tuple(
    (a, b)
    for a in ("push0", "push1", "pop", "noop")
    for b in ("push0", "push1", "pop", "noop")
)


def symbolic_stack_oracle(ops):
    """List-based stacks mapped through the halving encoding; returns the
    per-step encoded stack tuples for a 2-stack op program."""
    stacks = ([], [])
    out = [tuple(_encode_bits(s) for s in stacks)]
    for pair in ops:
        for s, op in zip(stacks, pair):
            if op == "push0":
                s.append(0)
            elif op == "push1":
                s.append(1)
            elif op == "pop":
                if s:
                    s.pop()
        out.append(tuple(_encode_bits(s) for s in stacks))
    return out


def _encode_bits(bits) -> Rational:
    s = Rational(1)
    for b in bits:
        s = Rational(b) + Rational(1, 2) * s
    return s


def verify_sm_rnn(trials=50, seed=0, length=100, **_):
    name = "sm-rnn"
    machine = scripted_stack_machine(2, STACK_OP_PAIRS)
    rnn = sm_to_mlp_rnn(machine)
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        prog = [rng.choice(STACK_OP_PAIRS) for _ in range(length)]
        _, trace = sm_run(machine, prog)
        oracle = symbolic_stack_oracle(prog)
        for t, ((_, stacks), want) in enumerate(zip(trace, oracle)):
            if stacks != want:
                return VerifyResult(
                    name, trial + 1, False,
                    f"trial {trial}: symbolic oracle diverges at step {t}\n"
                    f"program={_dump_stream(prog)}\n"
                    f"expected {tuple(str(v) for v in want)}"
                    f" actual {tuple(str(v) for v in stacks)}",
                )
        res = run_mlp_rnn(rnn, prog, track_precision=False)
        for t, (h, conf) in enumerate(zip(res.states, trace)):
            if rnn.decode(h) != conf:
                return VerifyResult(
                    name, trial + 1, False,
                    f"trial {trial}: network trace diverges at step {t}\n"
                    f"program={_dump_stream(prog)}",
                )
    return VerifyResult(name, trials, True)


def random_pd_step(rng, d: int) -> PdStep:
    pi = RelaxedPermutation(tuple(rng.randrange(d) for _ in range(d)))
    diag = RVector([rng.choice(WFA_ENTRIES) for _ in range(d)])
    return PdStep(pi, diag)


def verify_pd_product(trials=200, seed=0, dim=5, length=64, **_):
    name = "pd-product"
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        d = rng.randint(1, dim)
        n = rng.randint(1, length)
        steps = [random_pd_step(rng, d) for _ in range(n)]
        dense = RMatrix.identity(d)
        for s in steps:
            dense = dense @ s.to_matrix()
        closed = pd_closed_form(steps)
        tree, _ = pd_tree_product(steps)
        if closed.to_matrix() != dense or tree.to_matrix() != dense:
            return VerifyResult(
                name, trial + 1, False,
                f"trial {trial}: d={d} n={n}\nsteps={steps}\n"
                f"dense={dense}\nclosed={closed.to_matrix()}\ntree={tree.to_matrix()}",
            )
    return VerifyResult(name, trials, True)


def verify_dwfa_pd(trials=20, seed=0, states=4, words=500, length=24, **_):
    name = "dwfa-pd"
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        a = random_dwfa(rng, rng.randint(1, states), rng.randint(1, 3))
        rec = dwfa_to_pd(a)
        for w_idx in range(words):
            word = [rng.choice(a.alphabet) for _ in range(rng.randint(0, length))]
            want = wfa_eval(a, word) > Rational(0)
            got = rec.accepts(word)
            if got != want:
                return VerifyResult(
                    name, trial + 1, False,
                    f"trial {trial} word {w_idx}: word={_dump_stream(word)}\n"
                    f"value={wfa_eval(a, word)} expected accept={want} actual={got}\n"
                    + _dump_wfa(a),
                )
    return VerifyResult(name, trials, True)


def random_det_graph(rng, max_n=12):
    """Arbitrary deterministic graph: one out-edge for a subset of nodes,
    target chosen without its own out-edge."""
    n = rng.randint(2, max_n)
    t = rng.randint(1, n)
    edges = []
    for i in range(1, n + 1):
        if i != t and rng.random() < 0.7:
            edges.append((i, rng.randint(1, n)))
    s = rng.randint(1, n)
    return n, tuple(edges), s, t


def verify_reduction(trials=500, seed=0, **_):
    name = "reduction"
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        n, edges, s, t = random_det_graph(rng)
        inst = reduce_to_sorted(n, edges, s, t)
        want = reachable(edges, s, t)
        got = conn_oracle(inst)
        bfs_out = reachable(inst.edges, inst.s, inst.t)
        sources = [i for i, _ in inst.edges]
        sorted_ok = all(a < b for a, b in zip(sources, sources[1:]))
        if got != want or bfs_out != want or not sorted_ok:
            return VerifyResult(
                name, trial + 1, False,
                f"trial {trial}: graph n={n} edges={edges} s={s} t={t}\n"
                f"expected {want} chased {got} bfs {bfs_out} sorted {sorted_ok}",
            )
    return VerifyResult(name, trials, True)


def random_linstep(rng, d: int) -> LinStep:
    a = RMatrix([[rng.choice(WFA_ENTRIES) for _ in range(d)] for _ in range(d)])
    b = RMatrix([[rng.choice(WFA_ENTRIES) for _ in range(d)] for _ in range(d)])
    return LinStep(a, b)


def verify_scan_depth(trials=200, seed=0, dim=4, length=64, depth_lengths=(1024, 4096), **_):
    name = "scan-depth"
    for trial in range(trials):
        rng = rng_for(seed, name, trial)
        d = rng.randint(1, dim)
        n = rng.randint(1, length)
        steps = [random_linstep(rng, d) for _ in range(n)]
        seq = lrnn_run_sequential(steps)
        scan, stats = lrnn_run_scan(steps)
        bound = 2 * math.ceil(math.log2(n)) if n > 1 else 0
        if scan != seq:
            return VerifyResult(
                name, trial + 1, False,
                f"trial {trial}: scan != sequential at n={n} d={d}",
            )
        if stats.depth > bound:
            return VerifyResult(
                name, trial + 1, False,
                f"trial {trial}: depth {stats.depth} exceeds bound {bound} at n={n}",
            )
    rng = rng_for(seed, name, "depth")
    for n in depth_lengths:
        steps = [random_linstep(rng, 1) for _ in range(n)]
        _, stats = lrnn_run_scan(steps)
        bound = 2 * math.ceil(math.log2(n))
        if stats.depth > bound:
            return VerifyResult(
                name, trials, False,
                f"depth {stats.depth} exceeds bound {bound} at n={n}",
            )
    return VerifyResult(name, trials, True)


REGISTRY = {
    "rwkv-wfa": (
        "coordinate-overwrite network tracks weighted-automaton prefix values",
        verify_rwkv_wfa,
    ),
    "rwkv-imm": (
        "18-coordinate overwrite network computes iterated 3x3 products",
        verify_rwkv_imm,
    ),
    "dnet-wfa": (
        "symmetric-step network tracks weighted-automaton prefix values",
        verify_dnet_wfa,
    ),
    "dnet-imm": (
        "19-coordinate symmetric-step network computes iterated 3x3 products",
        verify_dnet_imm,
    ),
    "cm-rnn": (
        "counter machine solves connectivity; ReLU network mirrors its trace",
        verify_cm_rnn,
    ),
    "sm-rnn": (
        "stack encodings match list oracle; ReLU network mirrors the machine",
        verify_sm_rnn,
    ),
    "pd-product": (
        "permutation-diagonal closed form and tree product match dense products",
        verify_pd_product,
    ),
    "dwfa-pd": (
        "compiled one-layer recognizer matches automaton threshold decisions",
        verify_dwfa_pd,
    ),
    "reduction": (
        "layered copy reduction preserves reachability and sortedness",
        verify_reduction,
    ),
    "scan-depth": (
        "balanced scan equals sequential evaluation within the depth bound",
        verify_scan_depth,
    ),
}
