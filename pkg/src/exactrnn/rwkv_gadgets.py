"""Coordinate-overwrite gadget programs and the networks built from them.

The primitive is a matrix U(dst; c) that replaces one coordinate of a row
vector with the dot product of the whole row against a coefficient vector
c (with c[dst] = 0). A single diag-minus-rank-one head transition realizes
any such overwrite, so a router that streams one overwrite per token lets a
purely multiplicative head apply arbitrary matrix products: a block of m
input symbols is factored offline into per-token overwrites applied with a
one-block delay, and a per-position completion vector finishes the pending
block at readout time.

Two networks are provided: one that tracks any weighted finite automaton's
prefix values, and one that accumulates a product of streamed 3x3 matrices
in an 18-coordinate state by ping-ponging between two halves.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import Wfa
from .kernels import rmul, vdot
from .linalg import RMatrix, RVector
from .lrnn import RwkvStep
from .rational import Rational

PAD = None  # pre-sequence padding pseudo-symbol

_ZERO = Rational(0)
_ONE = Rational(1)


@dataclass(frozen=True)
class OverwriteSpec:
    """Overwrite coordinate ``dst`` with <row, c>; requires c[dst] = 0."""

    dst: int
    c: RVector

    def __post_init__(self):
        if not (0 <= self.dst < len(self.c)):
            raise ValueError("dst out of range")
        if self.c[self.dst] != _ZERO:
            raise ValueError("coefficient at dst must be zero")

    @property
    def dim(self) -> int:
        return len(self.c)


def overwrite_matrix(spec: OverwriteSpec) -> RMatrix:
    """Identity with column dst replaced by c."""
    d = spec.dim
    m = RMatrix.identity(d)
    for i in range(d):
        k = i * d + spec.dst
        m.nums[k] = spec.c.nums[i]
        m.dens[k] = spec.c.dens[i]
    return m


def apply_overwrite_row(r: RVector, spec: OverwriteSpec) -> RVector:
    """Row action of U(dst; c) in O(d)."""
    nums = list(r.nums)
    dens = list(r.dens)
    n, d = vdot(r.nums, r.dens, spec.c.nums, spec.c.dens)
    nums[spec.dst] = n
    dens[spec.dst] = d
    return RVector._raw(nums, dens)


def apply_overwrite_col(u: RVector, spec: OverwriteSpec) -> RVector:
    """Column action of U(dst; c) in O(d): u + u[dst] * (c - e_dst)."""
    un, ud = u.nums[spec.dst], u.dens[spec.dst]
    nums = list(u.nums)
    dens = list(u.dens)
    if un == 0:
        return RVector._raw(nums, dens)
    for i in range(spec.dim):
        cn = spec.c.nums[i]
        if cn != 0:
            pn, pd = rmul(un, ud, cn, spec.c.dens[i])
            q = Rational._make(nums[i], dens[i]) + Rational._make(pn, pd)
            nums[i], dens[i] = q.num, q.den
    nums[spec.dst] = 0
    dens[spec.dst] = 1
    return RVector._raw(nums, dens)


def rwkv_params_for_overwrite(spec: OverwriteSpec) -> RwkvStep:
    """Head parameters whose transition matrix equals the overwrite:
    w all-ones, a = e_dst, kappa = e_dst - c, removal strength 1."""
    d = spec.dim
    e_dst = RVector.basis(spec.dst, d)
    return RwkvStep(
        w=RVector.ones(d),
        a=e_dst,
        kappa=e_dst - spec.c,
        lam=_ONE,
        v=RVector.zeros(d),
        k_tilde=RVector.zeros(d),
    )


def factor_apply_matrix(p: RMatrix) -> list:
    """Factor the map [x | s] -> [xP | xP] into 2n overwrites (dim 2n).

    The first n overwrites write the columns of xP into the scratch half,
    reading only the main half; the last n copy scratch back over main.
    """
    if p.rows != p.cols:
        raise ValueError("matrix must be square")
    n = p.rows
    specs = []
    for j in range(n):
        c = RVector.zeros(2 * n)
        for i in range(n):
            k = i * n + j
            c.nums[i] = p.nums[k]
            c.dens[i] = p.dens[k]
        specs.append(OverwriteSpec(dst=n + j, c=c))
    for j in range(n):
        specs.append(OverwriteSpec(dst=j, c=RVector.basis(n + j, 2 * n)))
    return specs


# ---------------------------------------------------------------------------
# Finite-window router


def window_key(t: int, tokens, window: int):
    """Router key at position t (1-based): residue of t in 1..window plus
    the last ``window`` tokens newest-first, padded with PAD before the
    sequence start."""
    residue = ((t - 1) % window) + 1
    recent = tuple(
        tokens[t - 1 - back] if t - 1 - back >= 0 else PAD for back in range(window)
    )
    return residue, recent


class RouterTable:
    """Explicit finite lookup: entries are a pure function of the key
    (position residue, recent-token window) and are materialized on demand.
    """

    def __init__(self, window: int, entry_fn):
        self.window = window
        self._entry_fn = entry_fn
        self._cache = {}

    def query(self, key):
        entry = self._cache.get(key)
        if entry is None:
            entry = self._entry_fn(key)
            self._cache[key] = entry
        return entry

    def query_at(self, t: int, tokens):
        return self.query(window_key(t, tokens, self.window))


@dataclass(frozen=True)
class RwkvRouterEntry:
    factor: OverwriteSpec
    params: RwkvStep
    completion: RVector | None


# ---------------------------------------------------------------------------
# Weighted-automaton tracking network


class RwkvWfaNet:
    """Tracks alpha . M[w_1..w_t] . omega at every position.

    Arithmetic dimension 2n (main half plus scratch). Blocks of m = 2n
    symbols are factored into 2n overwrites and streamed with a one-block
    delay; the router key is (t mod 2m, last 2m tokens). The state row
    starts as [alpha | alpha], written by a single additive update on the
    first token (the first padding-block factor fixes the same value, so
    applying it there is a no-op).
    """

    def __init__(self, wfa: Wfa):
        self.wfa = wfa
        self.n = wfa.n_states
        self.m = 2 * self.n
        self.dim = 2 * self.n
        self.initial_row = wfa.alpha.concat(wfa.alpha)
        self._factors = {}
        self.router = RouterTable(2 * self.m, self._entry)

    def block_factors(self, block) -> list:
        specs = self._factors.get(block)
        if specs is None:
            prod = RMatrix.identity(self.n)
            for sym in block:
                if sym is not PAD:
                    prod = prod @ self.wfa.matrix(sym)
            specs = factor_apply_matrix(prod)
            self._factors[block] = specs
        return specs

    def _entry(self, key) -> RwkvRouterEntry:
        residue, recent = key
        m = self.m
        tau = ((residue - 1) % m) + 1
        # previous completed block, oldest symbol first
        block = tuple(recent[back] for back in range(tau + m - 1, tau - 1, -1))
        factors = self.block_factors(block)
        spec = factors[tau - 1]
        # completion: remaining block factors applied to the in-progress
        # block product acting on the final weights
        v = self.wfa.omega
        for back in range(tau):
            sym = recent[back]
            if sym is not PAD:
                v = self.wfa.matrix(sym).apply_col(v)
        u = v.concat(RVector.zeros(self.n))
        for i in range(len(factors) - 1, tau - 1, -1):
            u = apply_overwrite_col(u, factors[i])
        return RwkvRouterEntry(
            factor=spec, params=rwkv_params_for_overwrite(spec), completion=u
        )


def build_rwkv_wfa(wfa: Wfa) -> RwkvWfaNet:
    return RwkvWfaNet(wfa)


def rwkv_wfa_forward(net: RwkvWfaNet, word) -> list:
    """Scalar outputs at every position 1..|word|."""
    tokens = list(word)
    row = net.initial_row
    out = []
    for t in range(1, len(tokens) + 1):
        entry = net.router.query_at(t, tokens)
        row = apply_overwrite_row(row, entry.factor)
        out.append(row.dot(entry.completion))
    return out


# ---------------------------------------------------------------------------
# Iterated 3x3 product network


class RwkvImmNet:
    """Accumulates the running product of streamed 3x3 matrices.

    State is 18 coordinates: two 9-coordinate halves holding row-major
    vectorizations. During block L (nine tokens) the nine overwrites
    compute (active half) . B(A^(L-1)) into the inactive half, where B is
    the block-diagonal embedding of the previous block's matrix and padding
    acts as the identity matrix. The halves alternate with block parity.
    Outputs exist only at the final position, where nine completion
    readouts fold in the final block's matrix.
    """

    WINDOW = 18

    def __init__(self):
        vec_i3 = RVector([1, 0, 0, 0, 1, 0, 0, 0, 1])
        self.initial_row = vec_i3.concat(RVector.zeros(9))
        self.router = RouterTable(self.WINDOW, self._entry)

    @staticmethod
    def _matrix_from(tokens_oldest_first) -> list:
        vals = [
            _ONE if tok is PAD and (k % 4 == 0) else
            _ZERO if tok is PAD else
            (tok if isinstance(tok, Rational) else Rational(tok))
            for k, tok in enumerate(tokens_oldest_first)
        ]
        return [vals[0:3], vals[3:6], vals[6:9]]

    def _entry(self, key) -> RwkvRouterEntry:
        residue, recent = key
        tau = ((residue - 1) % 9) + 1
        parity = 0 if residue <= 9 else 1
        prev_block = [recent[back] for back in range(tau + 8, tau - 1, -1)]
        a_prev = self._matrix_from(prev_block)
        i, j = divmod(tau - 1, 3)
        dst = 9 * (1 - parity) + 3 * i + j
        c = RVector.zeros(18)
        for k in range(3):
            val = a_prev[k][j]
            c.nums[9 * parity + 3 * i + k] = val.num
            c.dens[9 * parity + 3 * i + k] = val.den
        spec = OverwriteSpec(dst=dst, c=c)
        return RwkvRouterEntry(
            factor=spec, params=rwkv_params_for_overwrite(spec), completion=None
        )

    def final_readouts(self, key) -> list:
        """Nine completion vectors at the last position, row-major."""
        residue, recent = key
        if ((residue - 1) % 9) + 1 != 9:
            raise ValueError("final readout only at a block boundary")
        parity = 0 if residue <= 9 else 1
        dest_half = 1 - parity
        a_last = self._matrix_from([recent[back] for back in range(8, -1, -1)])
        outs = []
        for i in range(3):
            for j in range(3):
                u = RVector.zeros(18)
                for k in range(3):
                    val = a_last[k][j]
                    u.nums[9 * dest_half + 3 * i + k] = val.num
                    u.dens[9 * dest_half + 3 * i + k] = val.den
                outs.append(u)
        return outs


def build_rwkv_imm() -> RwkvImmNet:
    return RwkvImmNet()


def rwkv_imm_forward(net: RwkvImmNet, stream) -> list:
    """Nine row-major entries of the product of the streamed matrices."""
    tokens = [tok if isinstance(tok, Rational) else Rational(tok) for tok in stream]
    if not tokens or len(tokens) % 9 != 0:
        raise ValueError("stream length must be a positive multiple of 9")
    row = net.initial_row
    for t in range(1, len(tokens) + 1):
        entry = net.router.query_at(t, tokens)
        row = apply_overwrite_row(row, entry.factor)
    key = window_key(len(tokens), tokens, net.WINDOW)
    return [row.dot(u) for u in net.final_readouts(key)]
