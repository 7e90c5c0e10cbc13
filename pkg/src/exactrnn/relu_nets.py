"""Exact ReLU-network simulation of counter machines and stack machines.

The building blocks are classic piecewise-linear gadgets, used only on
inputs where their outputs are exactly 0 or 1: an equality-to-zero test and
a threshold with tolerance 1/3 (valid on integers), finite lookup tables
realized as AND units over one-hot encodings, and bounded-range selectors.

Counter values are carried as a difference of two nonnegative coordinates,
which makes increments and decrements a single ReLU re-split and avoids
any unbounded conditional reset in the step function (a fixed
piecewise-linear map cannot gate an unbounded value, so machines that
reset counters of unbounded magnitude are only supported under an explicit
magnitude bound).

Stack values are carried twice: the canonical halving encoding (value in
[0, 2], empty = 1) that defines the machine's trace, and a quartering
mirror whose achievable values keep a fixed gap around every decision
threshold (top bit and emptiness), so the branch logic is exact at any
depth. All stack quantities are bounded by constants, so branch selection
uses constant-bound gating.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .automata import CounterMachine, StackMachine, _all_masks
from .linalg import RMatrix, RVector
from .rational import PrecisionReport, Rational, raw_value_bits

_ZERO = Rational(0)
_ONE = Rational(1)


# ---------------------------------------------------------------------------
# Networks


@dataclass(frozen=True)
class Layer:
    weights: RMatrix
    bias: RVector
    relu: bool


class ReluMlp:
    """Feedforward stack of affine layers with ReLU on marked layers."""

    def __init__(self, layers):
        self.layers = list(layers)
        self._sparse = None

    @property
    def in_dim(self) -> int:
        return self.layers[0].weights.cols

    @property
    def out_dim(self) -> int:
        return self.layers[-1].weights.rows

    def _compiled(self):
        if self._sparse is None:
            compiled = []
            for layer in self.layers:
                w = layer.weights
                idx, wn, wd = [], [], []
                for i in range(w.rows):
                    cols, nums, dens = [], [], []
                    base = i * w.cols
                    for j in range(w.cols):
                        if w.nums[base + j] != 0:
                            cols.append(j)
                            nums.append(w.nums[base + j])
                            dens.append(w.dens[base + j])
                    idx.append(tuple(cols))
                    wn.append(tuple(nums))
                    wd.append(tuple(dens))
                compiled.append(
                    (
                        tuple(idx),
                        tuple(wn),
                        tuple(wd),
                        tuple(layer.bias.nums),
                        tuple(layer.bias.dens),
                        layer.relu,
                    )
                )
            self._sparse = compiled
        return self._sparse

    def eval_raw(self, nums, dens, observe=None):
        for idx, wn, wd, bn, bd, relu in self._compiled():
            nums, dens = kernels.sparse_affine(idx, wn, wd, bn, bd, nums, dens, relu)
            if observe is not None:
                observe(nums, dens)
        return nums, dens

    def __call__(self, x: RVector) -> RVector:
        nums, dens = self.eval_raw(x.nums, x.dens)
        return RVector._raw(nums, dens)


class _Rows:
    """Sparse layer under construction: rows of (index, weight) terms."""

    def __init__(self, in_dim: int):
        self.in_dim = in_dim
        self.terms = []
        self.biases = []
        self.names = {}

    def add(self, terms, bias=_ZERO, name=None) -> int:
        i = len(self.terms)
        self.terms.append([(j, _coerce(w)) for j, w in terms])
        self.biases.append(_coerce(bias))
        if name is not None:
            self.names[name] = i
        return i

    def passthrough(self, j: int, name=None) -> int:
        return self.add([(j, _ONE)], name=name)

    def layer(self, relu: bool) -> Layer:
        w = RMatrix.zeros(len(self.terms), self.in_dim)
        for i, row in enumerate(self.terms):
            for j, weight in row:
                w.nums[i * self.in_dim + j] = weight.num
                w.dens[i * self.in_dim + j] = weight.den
        return Layer(weights=w, bias=RVector(self.biases), relu=relu)


def _coerce(v) -> Rational:
    return v if isinstance(v, Rational) else Rational(v)


# ---------------------------------------------------------------------------
# Stand-alone gadget fragments


def gadget_eq_zero() -> ReluMlp:
    """1 iff the scalar input is 0; exact when |input| is 0 or >= 1/3."""
    l1 = _Rows(1)
    l1.add([(0, 1)])
    l1.add([(0, -1)])
    l2 = _Rows(2)
    l2.add([(0, -3), (1, -3)], bias=_ONE)
    return ReluMlp([l1.layer(relu=True), l2.layer(relu=True)])


def gadget_threshold(theta=_ZERO) -> ReluMlp:
    """1 iff input >= theta; exact when input >= theta or <= theta - 1/3."""
    theta = _coerce(theta)
    l1 = _Rows(1)
    l1.add([(0, 3)], bias=_ONE - theta * 3)
    l1.add([(0, 3)], bias=-theta * 3)
    l2 = _Rows(2)
    l2.add([(0, 1), (1, -1)])
    return ReluMlp([l1.layer(relu=True), l2.layer(relu=False)])


def gadget_lut(group_sizes, table) -> ReluMlp:
    """Exact lookup over a product of one-hot groups.

    ``table`` maps key tuples (one index per group) to output vectors; the
    input is the concatenation of the groups' one-hot encodings.
    """
    offsets = []
    total = 0
    for size in group_sizes:
        offsets.append(total)
        total += size
    out_dim = len(next(iter(table.values())))
    keys = sorted(table)
    l1 = _Rows(total)
    for key in keys:
        terms = [(offsets[g] + idx, 1) for g, idx in enumerate(key)]
        l1.add(terms, bias=Rational(1 - len(group_sizes)))
    l2 = _Rows(len(keys))
    row_terms = [[] for _ in range(out_dim)]
    for unit, key in enumerate(keys):
        for o, val in enumerate(table[key]):
            val = _coerce(val)
            if val != _ZERO:
                row_terms[o].append((unit, val))
    for o in range(out_dim):
        l2.add(row_terms[o])
    return ReluMlp([l1.layer(relu=True), l2.layer(relu=False)])


def gadget_select(n_branches: int, bound: int = 8) -> ReluMlp:
    """Select the branch value whose one-hot selector bit is active.

    Input is [selector one-hot (n) | values (n)]; output is the selected
    value. Exact when every value lies in [-bound, bound].
    """
    b = Rational(bound)
    l1 = _Rows(2 * n_branches)
    for i in range(n_branches):
        l1.add([(n_branches + i, 1), (i, b)], bias=-b)
        l1.add([(n_branches + i, -1), (i, b)], bias=-b)
    l2 = _Rows(2 * n_branches)
    l2.add([(2 * i, 1) for i in range(n_branches)]
           + [(2 * i + 1, -1) for i in range(n_branches)])
    return ReluMlp([l1.layer(relu=True), l2.layer(relu=False)])


# ---------------------------------------------------------------------------
# Recurrent wrapper


@dataclass
class MlpRnn:
    """State recurrence h_t = update([h_{t-1} | onehot(x_t)]).

    ``decode`` (attached by the compilers) maps a hidden state back to the
    simulated machine's configuration.
    """

    state_dim: int
    token_index: dict
    update: ReluMlp
    h0: RVector
    acceptor: ReluMlp
    decode: object = None


@dataclass
class MlpRunResult:
    accept: bool
    states: list
    precision: PrecisionReport | None


def run_mlp_rnn(rnn: MlpRnn, tokens, track_precision: bool = True) -> MlpRunResult:
    """Exact forward pass; optionally measures every intermediate value
    (all post-activation layer outputs plus the running state)."""
    max_bits = 0
    total_bits = 0

    def observe(nums, dens):
        nonlocal max_bits, total_bits
        for n, d in zip(nums, dens):
            b = raw_value_bits(n, d)
            total_bits += b
            if b > max_bits:
                max_bits = b

    watcher = observe if track_precision else None
    if track_precision:
        observe(rnn.h0.nums, rnn.h0.dens)
    nums, dens = list(rnn.h0.nums), list(rnn.h0.dens)
    in_dim = rnn.update.in_dim
    n_tokens = len(rnn.token_index)
    states = [RVector._raw(list(nums), list(dens))]
    for tok in tokens:
        try:
            hot = rnn.token_index[tok]
        except KeyError:
            raise ValueError(f"unknown token {tok!r}") from None
        xn = nums + [0] * n_tokens
        xd = dens + [1] * n_tokens
        xn[rnn.state_dim + hot] = 1
        if len(xn) != in_dim:
            raise ValueError("state/input dimension mismatch")
        nums, dens = rnn.update.eval_raw(xn, xd, observe=watcher)
        states.append(RVector._raw(list(nums), list(dens)))
    on, od = rnn.acceptor.eval_raw(nums, dens, observe=watcher)
    accept = on[0] > 0
    report = PrecisionReport(max_bits, total_bits) if track_precision else None
    return MlpRunResult(accept=accept, states=states, precision=report)


# ---------------------------------------------------------------------------
# Table factoring: drop the mask bits a (state, symbol) entry ignores


def _mask_support(entries: dict, k: int) -> tuple:
    """Bits on which the mask-indexed table genuinely depends."""
    support = []
    for bit in range(k):
        for mask in entries:
            other = tuple(
                (1 - v) if i == bit else v for i, v in enumerate(mask)
            )
            if entries[mask] != entries[other]:
                support.append(bit)
                break
    return tuple(support)


def _support_patterns(support, k):
    for bits in range(1 << len(support)):
        pattern = {b: (bits >> i) & 1 for i, b in enumerate(support)}
        full = tuple(pattern.get(i, 0) for i in range(k))
        yield pattern, full


# ---------------------------------------------------------------------------
# Counter machine compiler


def cm_to_mlp_rnn(m: CounterMachine, reset_bound: int | None = None) -> MlpRnn:
    """Compile a counter machine into an exact recurrent ReLU network.

    Hidden state: [state one-hot | positive parts | negative parts], with
    counter i decoded as the difference of its two parts. Machines whose
    transitions use the reset op on counters of unbounded magnitude need
    ``reset_bound`` (exactness then holds while |counter| stays below it);
    machines without resets are exact unconditionally.
    """
    states = list(m.states)
    sigma = list(m.alphabet)
    k = m.n_counters
    nq, ns = len(states), len(sigma)
    qi = {q: i for i, q in enumerate(states)}
    state_dim = nq + 2 * k
    in_dim = state_dim + ns

    has_reset = any("x0" in ops for ops in m.updates.values())
    if has_reset and reset_bound is None:
        raise ValueError(
            "machine resets counters; an explicit reset_bound is required"
        )

    # input layout: q 0..nq-1, c+ nq..nq+k-1, c- nq+k..nq+2k-1, x tail
    q_at = lambda i: i
    cp_at = lambda i: nq + i
    cm_at = lambda i: nq + k + i
    x_at = lambda s: state_dim + s

    # L1: passthrough + split differences for the zero tests
    l1 = _Rows(in_dim)
    for i in range(state_dim + ns):
        l1.passthrough(i)
    a_at = [l1.add([(cp_at(i), 1), (cm_at(i), -1)]) for i in range(k)]
    b_at = [l1.add([(cp_at(i), -1), (cm_at(i), 1)]) for i in range(k)]

    # L2: passthrough + zero flags z_i = relu(1 - 3a - 3b)
    l2 = _Rows(len(l1.terms))
    for i in range(state_dim + ns):
        l2.passthrough(i)
    z_at = [
        l2.add([(a_at[i], -3), (b_at[i], -3)], bias=_ONE) for i in range(k)
    ]

    # per (state, symbol): factor the mask-indexed entries
    pair_units = []  # (unit row in L3, delta state, ops)
    l3 = _Rows(len(l2.terms))
    cp3 = [l3.passthrough(cp_at(i)) for i in range(k)]
    cm3 = [l3.passthrough(cm_at(i)) for i in range(k)]
    for q in states:
        for s_idx, sym in enumerate(sigma):
            entries = {}
            for mask in _all_masks(k):
                key = (q, sym, mask)
                entries[mask] = (m.transition[key], m.updates[key])
            support = _mask_support(entries, k)
            for pattern, representative in _support_patterns(support, k):
                terms = [(q_at(qi[q]), 1), (x_at(s_idx), 1)]
                bias = Rational(1 - 2 - len(support))
                for bit, val in pattern.items():
                    if val == 1:
                        terms.append((z_at[bit], 1))
                    else:
                        terms.append((z_at[bit], -1))
                        bias = bias + _ONE
                unit = l3.add(terms, bias=bias)
                pair_units.append((unit, *entries[representative]))

    # L4: next state one-hots and counter re-splits
    l4 = _Rows(len(l3.terms))
    for p in states:
        terms = [(unit, 1) for unit, nxt, _ in pair_units if nxt == p]
        l4.add(terms)
    piece_rows = []  # only used when resets are present
    for i in range(k):
        move = []
        reset = []
        for unit, _, ops in pair_units:
            if ops[i] == "+1":
                move.append((unit, 1))
            elif ops[i] == "-1":
                move.append((unit, -1))
            elif ops[i] == "x0":
                reset.append(unit)
        plus = [(cp3[i], 1), (cm3[i], -1)] + move
        minus = [(cp3[i], -1), (cm3[i], 1)] + [(u, -w) for u, w in move]
        if not has_reset:
            l4.add(plus)
            l4.add(minus)
        else:
            bound = Rational(reset_bound)
            plus_main = l4.add(plus + [(u, -bound) for u in reset])
            minus_main = l4.add(minus + [(u, -bound) for u in reset])
            copy_row = l4.add(
                [(cp3[i], 1)] + [(u, bound) for u in reset], bias=-bound
            )
            piece_rows.append((plus_main, minus_main, copy_row))

    layers = [
        l1.layer(relu=True),
        l2.layer(relu=True),
        l3.layer(relu=True),
        l4.layer(relu=True),
    ]
    if has_reset:
        l5 = _Rows(len(l4.terms))
        for p in range(nq):
            l5.passthrough(p)
        for i in range(k):
            plus_main, minus_main, copy_row = piece_rows[i]
            l5.add([(plus_main, 1), (copy_row, 1)])
        for i in range(k):
            plus_main, minus_main, copy_row = piece_rows[i]
            l5.add([(minus_main, 1), (copy_row, 1)])
        layers.append(l5.layer(relu=False))
    else:
        # reorder L4 rows into [q' | c+' | c-'] with a linear shuffle
        l5 = _Rows(len(l4.terms))
        for p in range(nq):
            l5.passthrough(p)
        for i in range(k):
            l5.passthrough(nq + 2 * i)
        for i in range(k):
            l5.passthrough(nq + 2 * i + 1)
        layers.append(l5.layer(relu=False))

    update = ReluMlp(layers)

    # acceptor: zero flags again, then membership units over (state, mask)
    a1 = _Rows(state_dim)
    for i in range(nq):
        a1.passthrough(i)
    aa = [a1.add([(cp_at(i), 1), (cm_at(i), -1)]) for i in range(k)]
    ab = [a1.add([(cp_at(i), -1), (cm_at(i), 1)]) for i in range(k)]
    a2 = _Rows(len(a1.terms))
    for i in range(nq):
        a2.passthrough(i)
    az = [a2.add([(aa[i], -3), (ab[i], -3)], bias=_ONE) for i in range(k)]
    a3 = _Rows(len(a2.terms))
    acc_units = []
    for q in states:
        accepted = {mask for (qq, mask) in m.accepting if qq == q}
        if not accepted:
            continue
        entries = {mask: (mask in accepted) for mask in _all_masks(k)}
        support = _mask_support(entries, k)
        for pattern, representative in _support_patterns(support, k):
            if not entries[representative]:
                continue
            terms = [(qi[q], 1)]
            bias = Rational(1 - 1 - len(support))
            for bit, val in pattern.items():
                if val == 1:
                    terms.append((az[bit], 1))
                else:
                    terms.append((az[bit], -1))
                    bias = bias + _ONE
            acc_units.append(a3.add(terms, bias=bias))
    a4 = _Rows(len(a3.terms))
    a4.add([(u, 1) for u in acc_units], bias=Rational(-1, 2))
    acceptor = ReluMlp(
        [a1.layer(relu=True), a2.layer(relu=True), a3.layer(relu=True), a4.layer(relu=False)]
    )

    h0 = RVector.zeros(state_dim)
    h0.nums[qi[m.start]] = 1

    def decode(h: RVector):
        hot = [i for i in range(nq) if h.nums[i] != 0]
        if len(hot) != 1 or h[hot[0]] != _ONE:
            raise AssertionError("state block is not one-hot")
        counters = tuple(
            int(h[nq + i].num) - int(h[nq + k + i].num) for i in range(k)
        )
        return states[hot[0]], counters

    return MlpRnn(
        state_dim=state_dim,
        token_index={sym: i for i, sym in enumerate(sigma)},
        update=update,
        h0=h0,
        acceptor=acceptor,
        decode=decode,
    )


# ---------------------------------------------------------------------------
# Stack machine compiler

_QUARTER = Rational(1, 4)
_GATE_BOUND = Rational(8)


def sm_to_mlp_rnn(m: StackMachine) -> MlpRnn:
    """Compile a stack machine into an exact recurrent ReLU network.

    Hidden state: [state one-hot | halving encodings | quartering mirrors].
    The halving encodings are the machine's own stack values and define the
    decoded trace; the mirrors (push maps c to (2v+1)/4 + c/4, starting at
    0) keep a fixed 1/4 gap around the top-bit and emptiness thresholds at
    any depth, so the branch flags are exact. All stack values live in
    [0, 4], so branch selection gates with a constant bound.
    """
    states = list(m.states)
    sigma = list(m.alphabet)
    k = m.n_stacks
    nq, ns = len(states), len(sigma)
    qi = {q: i for i, q in enumerate(states)}
    state_dim = nq + 2 * k
    in_dim = state_dim + ns

    s_at = lambda i: nq + i
    c_at = lambda i: nq + k + i
    x_at = lambda s: state_dim + s

    # L1: passthrough + threshold pieces and emptiness flags from mirrors
    l1 = _Rows(in_dim)
    for i in range(in_dim):
        l1.passthrough(i)
    p1 = [l1.add([(c_at(i), 4)], bias=Rational(-2)) for i in range(k)]
    p2 = [l1.add([(c_at(i), 4)], bias=Rational(-3)) for i in range(k)]
    e1 = [l1.add([(c_at(i), -4)], bias=_ONE) for i in range(k)]

    # L2: head bits h = p1 - p2, table heads th = h + e
    l2 = _Rows(len(l1.terms))
    for i in range(in_dim):
        l2.passthrough(i)
    e2 = [l2.passthrough(e1[i]) for i in range(k)]
    h2 = [l2.add([(p1[i], 1), (p2[i], -1)]) for i in range(k)]
    th2 = [l2.add([(p1[i], 1), (p2[i], -1), (e1[i], 1)]) for i in range(k)]

    # L3: key units over (state, symbol, table-head pattern)
    l3 = _Rows(len(l2.terms))
    s3 = [l3.passthrough(s_at(i)) for i in range(k)]
    c3 = [l3.passthrough(c_at(i)) for i in range(k)]
    e3 = [l3.passthrough(e2[i]) for i in range(k)]
    h3 = [l3.passthrough(h2[i]) for i in range(k)]
    pair_units = []
    for q in states:
        for s_idx, sym in enumerate(sigma):
            entries = {}
            for heads in _all_masks(k):
                key = (q, sym, heads)
                entries[heads] = (m.transition[key], m.stack_ops[key])
            support = _mask_support(entries, k)
            for pattern, representative in _support_patterns(support, k):
                terms = [(qi[q], 1), (x_at(s_idx), 1)]
                bias = Rational(1 - 2 - len(support))
                for bit, val in pattern.items():
                    if val == 1:
                        terms.append((th2[bit], 1))
                    else:
                        terms.append((th2[bit], -1))
                        bias = bias + _ONE
                unit = l3.add(terms, bias=bias)
                pair_units.append((unit, *entries[representative]))

    # L4: next state, per-stack op one-hots; carry s, c, h, e
    l4 = _Rows(len(l3.terms))
    q4 = [
        l4.add([(unit, 1) for unit, nxt, _ in pair_units if nxt == p])
        for p in states
    ]
    s4 = [l4.passthrough(s3[i]) for i in range(k)]
    c4 = [l4.passthrough(c3[i]) for i in range(k)]
    e4 = [l4.passthrough(e3[i]) for i in range(k)]
    h4 = [l4.passthrough(h3[i]) for i in range(k)]
    u4 = {}
    for i in range(k):
        for op in ("push0", "push1", "pop", "noop"):
            rows = [(unit, 1) for unit, _, ops in pair_units if ops[i] == op]
            u4[(i, op)] = l4.add(rows)

    # L5: branch gates; carry q', s, c
    l5 = _Rows(len(l4.terms))
    q5 = [l5.passthrough(q4[p]) for p in range(nq)]
    s5 = [l5.passthrough(s4[i]) for i in range(k)]
    c5 = [l5.passthrough(c4[i]) for i in range(k)]
    gates = {}
    for i in range(k):
        gates[(i, "push0")] = l5.passthrough(u4[(i, "push0")])
        gates[(i, "push1")] = l5.passthrough(u4[(i, "push1")])
        gates[(i, "noop")] = l5.passthrough(u4[(i, "noop")])
        gates[(i, "pop_empty")] = l5.add(
            [(u4[(i, "pop")], 1), (e4[i], 1)], bias=-_ONE
        )
        gates[(i, "pop_b1")] = l5.add(
            [(u4[(i, "pop")], 1), (h4[i], 1)], bias=-_ONE
        )
        gates[(i, "pop_b0")] = l5.add(
            [(u4[(i, "pop")], 1), (h4[i], -1), (e4[i], -1)]
        )

    # candidate linear forms per branch: (s terms, s bias, c terms, c bias)
    def branch_forms(i):
        return {
            "push0": (((s5[i], Rational(1, 2)),), _ZERO,
                      ((c5[i], _QUARTER),), _QUARTER),
            "push1": (((s5[i], Rational(1, 2)),), _ONE,
                      ((c5[i], _QUARTER),), Rational(3, 4)),
            "noop": (((s5[i], 1),), _ZERO, ((c5[i], 1),), _ZERO),
            "pop_empty": (((s5[i], 1),), _ZERO, ((c5[i], 1),), _ZERO),
            "pop_b1": (((s5[i], 2),), Rational(-2), ((c5[i], 4),), Rational(-3)),
            "pop_b0": (((s5[i], 2),), _ZERO, ((c5[i], 4),), -_ONE),
        }

    # L6: gated candidates
    l6 = _Rows(len(l5.terms))
    q6 = [l6.passthrough(q5[p]) for p in range(nq)]
    cand = {}
    for i in range(k):
        for branch, (s_terms, s_bias, c_terms, c_bias) in branch_forms(i).items():
            g = gates[(i, branch)]
            cand[(i, branch, "s")] = l6.add(
                list(s_terms) + [(g, _GATE_BOUND)], bias=s_bias - _GATE_BOUND
            )
            cand[(i, branch, "c")] = l6.add(
                list(c_terms) + [(g, _GATE_BOUND)], bias=c_bias - _GATE_BOUND
            )

    # L7: assemble new state
    l7 = _Rows(len(l6.terms))
    for p in range(nq):
        l7.passthrough(q6[p])
    branches = ("push0", "push1", "noop", "pop_empty", "pop_b1", "pop_b0")
    for i in range(k):
        l7.add([(cand[(i, br, "s")], 1) for br in branches])
    for i in range(k):
        l7.add([(cand[(i, br, "c")], 1) for br in branches])

    update = ReluMlp(
        [
            l1.layer(relu=True),
            l2.layer(relu=True),
            l3.layer(relu=True),
            l4.layer(relu=True),
            l5.layer(relu=True),
            l6.layer(relu=True),
            l7.layer(relu=False),
        ]
    )

    a1 = _Rows(state_dim)
    a1.add(
        [(qi[q], 1) for q in states if q in m.accepting], bias=Rational(-1, 2)
    )
    acceptor = ReluMlp([a1.layer(relu=False)])

    h0 = RVector.zeros(state_dim)
    h0.nums[qi[m.start]] = 1
    for i in range(k):
        h0.nums[nq + i] = 1  # halving encodings start at the empty value 1

    def decode(h: RVector):
        hot = [i for i in range(nq) if h.nums[i] != 0]
        if len(hot) != 1 or h[hot[0]] != _ONE:
            raise AssertionError("state block is not one-hot")
        stacks = tuple(h[nq + i] for i in range(k))
        return states[hot[0]], stacks

    return MlpRnn(
        state_dim=state_dim,
        token_index={sym: i for i, sym in enumerate(sigma)},
        update=update,
        h0=h0,
        acceptor=acceptor,
        decode=decode,
    )
