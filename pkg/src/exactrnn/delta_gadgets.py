"""Symmetric rank-one step algebra and the networks built from it.

The only multiplicative primitive here is H(beta, k) = I - beta k k^T.
Products of these steps realize coordinate scaling (k one-hot), unit
transvections (three steps), scaled adds through a temp register (eight
steps), and finally an explicit program of 8n^2+5n+1 steps that applies an
arbitrary n x n matrix to a row vector using n scratch coordinates and one
temp coordinate. Streaming such programs through a finite-window router
yields networks for weighted-automaton tracking and iterated 3x3 matrix
products, mirroring the coordinate-overwrite networks but with symmetric
steps only. Two router primitives are also constructed explicitly: a
cyclic position counter driven by two alternating steps, and an exact
token buffer that overwrites one matrix column per step.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import Wfa
from .kernels import radd, rmul, vdot
from .linalg import RMatrix, RVector
from .rational import Rational
from .rwkv_gadgets import PAD, RouterTable, window_key

_ZERO = Rational(0)
_ONE = Rational(1)
_TWO = Rational(2)
_HALF = Rational(1, 2)
_THIRD = Rational(1, 3)


@dataclass(frozen=True)
class HStep:
    """Multiplicative step I - beta k k^T; beta is unrestricted."""

    beta: Rational
    k: RVector

    @property
    def dim(self) -> int:
        return len(self.k)

    @property
    def is_identity(self) -> bool:
        return self.beta == _ZERO or all(n == 0 for n in self.k.nums)


def identity_hstep(d: int) -> HStep:
    return HStep(_ZERO, RVector.zeros(d))


def out_of_range_betas(steps, low=_ZERO, high=_TWO) -> list:
    """Report (index, beta) for steps whose beta falls outside (low, high).

    Trained heads usually constrain beta to such an interval; the gadget
    programs here need values like 2, 1/2, and 1/3, so out-of-range betas
    are reported, never rejected.
    """
    return [
        (i, s.beta)
        for i, s in enumerate(steps)
        if not (low < s.beta < high)
    ]


def h_matrix(step: HStep, d: int | None = None) -> RMatrix:
    d = step.dim if d is None else d
    if step.dim != d:
        raise ValueError("dimension mismatch")
    return RMatrix.identity(d) - RMatrix.outer(step.k, step.k).scaled(step.beta)


def apply_h_row(r: RVector, step: HStep) -> RVector:
    """Row action r (I - beta k k^T) = r - beta (r . k) k^T in O(d)."""
    if step.is_identity:
        return r
    sn, sd = vdot(r.nums, r.dens, step.k.nums, step.k.dens)
    if sn == 0:
        return r
    fn, fd = rmul(step.beta.num, step.beta.den, sn, sd)
    nums = list(r.nums)
    dens = list(r.dens)
    for i in range(step.dim):
        kn = step.k.nums[i]
        if kn != 0:
            pn, pd = rmul(fn, fd, kn, step.k.dens[i])
            nums[i], dens[i] = radd(nums[i], dens[i], -pn, pd)
    return RVector._raw(nums, dens)


def apply_h_col(u: RVector, step: HStep) -> RVector:
    """Column action (I - beta k k^T) u; same formula by symmetry."""
    return apply_h_row(u, step)


def unit_transvection(src: int, dst: int, d: int) -> list:
    """Three steps whose product adds coordinate src into dst exactly."""
    if src == dst:
        raise ValueError("src and dst must differ")
    if not (0 <= src < d and 0 <= dst < d):
        raise ValueError("index out of range")
    u = RVector.zeros(d)
    u.nums[src] = 1
    u.nums[dst] = 1
    w = RVector.zeros(d)
    w.nums[src] = 1
    w.nums[dst] = 2
    return [
        HStep(_TWO, u),
        HStep(_HALF, RVector.basis(src, d)),
        HStep(_THIRD, w),
    ]


def coordinate_scale(j: int, s: Rational, d: int) -> HStep:
    """Scale coordinate j by s: H(1 - s, e_j)."""
    return HStep(_ONE - s, RVector.basis(j, d))


def scaled_add(src: int, dst: int, tmp: int, lam: Rational, d: int) -> list:
    """Eight steps realizing dst += lam * src, assuming the temp coordinate
    is zero on entry; it is returned to zero."""
    if len({src, dst, tmp}) != 3:
        raise ValueError("src, dst, tmp must be distinct")
    steps = []
    steps += unit_transvection(src, tmp, d)
    steps.append(coordinate_scale(tmp, lam, d))
    steps += unit_transvection(tmp, dst, d)
    steps.append(coordinate_scale(tmp, _ZERO, d))
    return steps


@dataclass(frozen=True)
class ApplyMatrixProgram:
    """Step program mapping [x | s | t] to [xP | xP | 0] in dim 2n+1.

    Four phases: clear scratch and temp (n+1 steps), accumulate xP into
    scratch by scaled adds (8n^2 steps), clear main (n), copy scratch back
    by transvections (3n). Total 8n^2 + 5n + 1.
    """

    n: int
    steps: tuple
    phase_bounds: tuple  # cumulative step counts after phases 1..4

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def __len__(self):
        return len(self.steps)

    def phase_of(self, index: int) -> int:
        for phase, bound in enumerate(self.phase_bounds, start=1):
            if index < bound:
                return phase
        raise IndexError(index)


def apply_matrix_program(p: RMatrix) -> ApplyMatrixProgram:
    if p.rows != p.cols:
        raise ValueError("matrix must be square")
    n = p.rows
    d = 2 * n + 1
    tmp = 2 * n
    steps = []
    for j in range(n):
        steps.append(coordinate_scale(n + j, _ZERO, d))
    steps.append(coordinate_scale(tmp, _ZERO, d))
    b1 = len(steps)
    for j in range(n):
        for i in range(n):
            steps += scaled_add(i, n + j, tmp, p[i, j], d)
    b2 = len(steps)
    for i in range(n):
        steps.append(coordinate_scale(i, _ZERO, d))
    b3 = len(steps)
    for j in range(n):
        steps += unit_transvection(n + j, j, d)
    b4 = len(steps)
    expected = 8 * n * n + 5 * n + 1
    if b4 != expected:
        raise AssertionError(f"program length {b4} != {expected}")
    return ApplyMatrixProgram(n=n, steps=tuple(steps), phase_bounds=(b1, b2, b3, b4))


# ---------------------------------------------------------------------------
# Router primitive 1: cyclic position counter from two alternating steps

# Exact parameters: the two-step composition has finite order m, so the
# state sequence is periodic with period 2m. Over the rationals such a
# composition exists only for m in {1, 2, 3, 4, 6} (its nontrivial action
# is at most two-dimensional, forcing a rational trace of a primitive m-th
# root pair); for other m the composition below has infinite order, the
# first 2m states are still pairwise distinct, and the decoder covers one
# period only.
_EXACT_COUNTER_PARAMS = {
    1: (2, (_TWO, (1, 0)), (_TWO, (1, 0))),
    2: (2, (_TWO, (1, 0)), (_TWO, (0, 1))),
    3: (3, (Rational(3), (1, 0, 0)), (_HALF, (1, 1, 1))),
    4: (2, (_TWO, (1, 0)), (_ONE, (1, 1))),
    6: (3, (_ONE, (1, 1, 0)), (_THIRD, (1, 2, 1))),
}

_GENERIC_COUNTER_PARAMS = (2, (_TWO, (Rational(3, 5), Rational(4, 5))), (_TWO, (1, 0)))


class ModCounter:
    """Position counter: one fixed step on odd positions, another on even
    positions, state decoded back to t mod 2m by exact-value lookup."""

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("m must be >= 1")
        self.m = m
        self.period = 2 * m
        params = _EXACT_COUNTER_PARAMS.get(m, _GENERIC_COUNTER_PARAMS)
        d, (b1, k1), (b2, k2) = params
        self.dim = d
        self.odd_step = HStep(b1, RVector(list(k1)))
        self.even_step = HStep(b2, RVector(list(k2)))
        self.exact_period = m in _EXACT_COUNTER_PARAMS
        self._init_table()

    def _init_table(self):
        for cand in ((1, 2), (1, 3), (2, 5), (3, 7)):
            init = RVector(list(cand) + [5] * (self.dim - 2))
            states = self._roll(init, self.period)
            keys = [self._key(s) for s in states]
            if len(set(keys)) == self.period:
                if self.exact_period:
                    nxt = apply_h_row(states[-1], self.step_at(self.period))
                    if self._key(nxt) != keys[0]:
                        continue
                self.init = init
                self.table = {k: t for t, k in enumerate(keys)}
                return
        raise AssertionError(f"no initial state yields {self.period} distinct values")

    @staticmethod
    def _key(state: RVector):
        return tuple(zip(state.nums, state.dens))

    def step_at(self, t: int) -> HStep:
        return self.odd_step if t % 2 == 1 else self.even_step

    def _roll(self, state: RVector, count: int) -> list:
        out = [state]
        for t in range(1, count):
            out.append(apply_h_row(out[-1], self.step_at(t)))
        return out

    def run(self, n_steps: int) -> list:
        """States after 0..n_steps steps."""
        return self._roll(self.init, n_steps + 1)

    def decode(self, state: RVector) -> int:
        """Map a state back to t mod 2m."""
        try:
            return self.table[self._key(state)]
        except KeyError:
            raise ValueError("state outside the decoded period") from None


def mod2m_counter(m: int) -> ModCounter:
    return ModCounter(m)


# ---------------------------------------------------------------------------
# Router primitive 2: exact token buffer by column overwrite


class TokenBuffer:
    """Matrix-state buffer: writing with beta = 1 and a one-hot slot key
    replaces exactly one column with the one-hot token vector; fixed
    queries read the slots back. Slots are used cyclically, so after at
    least L writes the reads recover the last L tokens exactly."""

    def __init__(self, sigma_count: int, slots: int):
        if sigma_count < 1 or slots < 1:
            raise ValueError("need at least one symbol and one slot")
        self.sigma_count = sigma_count
        self.slots = slots
        self.dim = sigma_count + 1 + slots  # token one-hots + blank + selectors
        self.state = RMatrix.zeros(self.dim, self.dim)
        self.writes = 0

    def slot_key(self, slot: int) -> RVector:
        return RVector.basis(self.sigma_count + 1 + slot, self.dim)

    def write(self, token_index: int):
        """One update step: S <- S (I - e e^T) + v e^T for the cyclic slot."""
        if not (0 <= token_index < self.sigma_count):
            raise ValueError("token index out of range")
        slot = self.writes % self.slots
        col = self.sigma_count + 1 + slot
        d = self.dim
        for i in range(d):
            k = i * d + col
            self.state.nums[k] = 1 if i == token_index else 0
            self.state.dens[k] = 1
        self.writes += 1

    def read_slot(self, slot: int) -> RVector:
        """Fixed-query read of one slot's stored one-hot token."""
        return self.state.apply_col(self.slot_key(slot))

    def last_tokens(self, count: int) -> list:
        """Most recent ``count`` token indices, newest first."""
        if count > min(self.writes, self.slots):
            raise ValueError("not enough writes buffered")
        out = []
        for back in range(count):
            slot = (self.writes - 1 - back) % self.slots
            column = self.read_slot(slot)
            hits = [i for i in range(self.sigma_count) if column[i] != _ZERO]
            if len(hits) != 1:
                raise AssertionError("slot does not hold a one-hot token")
            out.append(hits[0])
        return out


def column_buffer(sigma_count: int, slots: int) -> TokenBuffer:
    return TokenBuffer(sigma_count, slots)


# ---------------------------------------------------------------------------
# Weighted-automaton tracking network


@dataclass(frozen=True)
class DnetRouterEntry:
    factor: HStep
    completion: RVector | None


class DnetWfaNet:
    """Tracks alpha . M[w_1..w_t] . omega with symmetric steps only.

    Arithmetic dimension 2n+1 (main, scratch, temp). Block length is the
    program length m = 8n^2+5n+1; the router key is (t mod 2m, last 2m
    tokens) and blocks stream with a one-block delay. The row state starts
    as [alpha | 0 | 0], written by one additive update on the first token
    (the first factor of the padding block clears an already-zero scratch
    coordinate, so the uniform stream is unaffected).
    """

    def __init__(self, wfa: Wfa):
        self.wfa = wfa
        self.n = wfa.n_states
        self.m = 8 * self.n * self.n + 5 * self.n + 1
        self.dim = 2 * self.n + 1
        self.initial_row = wfa.alpha.concat(RVector.zeros(self.n + 1))
        self._programs = {}
        self.router = RouterTable(2 * self.m, self._entry)

    def block_program(self, block) -> ApplyMatrixProgram:
        prog = self._programs.get(block)
        if prog is None:
            prod = RMatrix.identity(self.n)
            for sym in block:
                if sym is not PAD:
                    prod = prod @ self.wfa.matrix(sym)
            prog = apply_matrix_program(prod)
            self._programs[block] = prog
        return prog

    def _entry(self, key) -> DnetRouterEntry:
        residue, recent = key
        m = self.m
        tau = ((residue - 1) % m) + 1
        block = tuple(recent[back] for back in range(tau + m - 1, tau - 1, -1))
        prog = self.block_program(block)
        v = self.wfa.omega
        for back in range(tau):
            sym = recent[back]
            if sym is not PAD:
                v = self.wfa.matrix(sym).apply_col(v)
        u = v.concat(RVector.zeros(self.n + 1))
        for i in range(len(prog.steps) - 1, tau - 1, -1):
            u = apply_h_col(u, prog.steps[i])
        return DnetRouterEntry(factor=prog.steps[tau - 1], completion=u)


def build_dnet_wfa(wfa: Wfa) -> DnetWfaNet:
    return DnetWfaNet(wfa)


def dnet_wfa_forward(net: DnetWfaNet, word) -> list:
    """Scalar outputs at every position 1..|word|."""
    tokens = list(word)
    row = net.initial_row
    out = []
    for t in range(1, len(tokens) + 1):
        entry = net.router.query_at(t, tokens)
        row = apply_h_row(row, entry.factor)
        out.append(row.dot(entry.completion))
    return out


# ---------------------------------------------------------------------------
# Iterated 3x3 product network

SUPERBLOCK_MATRICES = 78
SUPERBLOCK_TOKENS = 9 * SUPERBLOCK_MATRICES  # 702
_ARITH_STEPS = 8 * 81 + 5 * 9 + 1  # 694, program length for n = 9
IDENTITY_PAD_STEPS = SUPERBLOCK_TOKENS - _ARITH_STEPS  # 8


class DnetImmNet:
    """Iterated 3x3 products with symmetric steps.

    The 9-dimensional vectorized product state lives in an arithmetic
    dimension of 19 (main 9, scratch 9, temp 1). Matrices are grouped into
    superblocks of 78 (702 tokens); each full superblock's block-diagonal
    product is factored into 694 steps padded with 8 identity steps, and
    superblocks stream with a one-superblock delay. The final, possibly
    partial, superblock is applied only inside the nine completion
    readouts at the last position.
    """

    def __init__(self):
        vec_i3 = RVector([1, 0, 0, 0, 1, 0, 0, 0, 1])
        self.dim = 19
        self.initial_row = vec_i3.concat(RVector.zeros(10))
        self._programs = {}
        self.router = RouterTable(2 * SUPERBLOCK_TOKENS, self._entry)

    @staticmethod
    def _embed3(a: RMatrix) -> RMatrix:
        out = RMatrix.zeros(9, 9)
        for b in range(3):
            for i in range(3):
                for j in range(3):
                    k = (3 * b + i) * 9 + (3 * b + j)
                    src = i * 3 + j
                    out.nums[k] = a.nums[src]
                    out.dens[k] = a.dens[src]
        return out

    def _matrices_from(self, tokens_oldest_first) -> list:
        mats = []
        for base in range(0, len(tokens_oldest_first), 9):
            chunk = tokens_oldest_first[base : base + 9]
            vals = [
                _ONE if tok is PAD and k % 4 == 0 else
                _ZERO if tok is PAD else
                (tok if isinstance(tok, Rational) else Rational(tok))
                for k, tok in enumerate(chunk)
            ]
            mats.append(RMatrix([vals[0:3], vals[3:6], vals[6:9]]))
        return mats

    def superblock_product(self, mats) -> RMatrix:
        prod = RMatrix.identity(9)
        for a in mats:
            prod = prod @ self._embed3(a)
        return prod

    def superblock_program(self, block_tokens) -> list:
        """Padded 702-step program for one full superblock's product."""
        steps = self._programs.get(block_tokens)
        if steps is None:
            if all(tok is PAD for tok in block_tokens):
                steps = tuple(
                    identity_hstep(self.dim) for _ in range(SUPERBLOCK_TOKENS)
                )
            else:
                prod = self.superblock_product(self._matrices_from(block_tokens))
                prog = apply_matrix_program(prod)
                steps = prog.steps + tuple(
                    identity_hstep(self.dim) for _ in range(IDENTITY_PAD_STEPS)
                )
            self._programs[block_tokens] = steps
        return steps

    def _entry(self, key) -> DnetRouterEntry:
        residue, recent = key
        tau = ((residue - 1) % SUPERBLOCK_TOKENS) + 1
        block = tuple(
            recent[back] for back in range(tau + SUPERBLOCK_TOKENS - 1, tau - 1, -1)
        )
        steps = self.superblock_program(block)
        return DnetRouterEntry(factor=steps[tau - 1], completion=None)

    def final_readouts(self, key) -> list:
        """Nine completion vectors at the final position, row-major order."""
        residue, recent = key
        tau = ((residue - 1) % SUPERBLOCK_TOKENS) + 1
        if tau % 9 != 0:
            raise ValueError("final readout only at a matrix boundary")
        prev_block = tuple(
            recent[back] for back in range(tau + SUPERBLOCK_TOKENS - 1, tau - 1, -1)
        )
        steps = self.superblock_program(prev_block)
        partial = [recent[back] for back in range(tau - 1, -1, -1)]
        pi_final = self.superblock_product(self._matrices_from(partial))
        outs = []
        for j in range(9):
            u = pi_final.col(j).concat(RVector.zeros(10))
            for i in range(len(steps) - 1, tau - 1, -1):
                u = apply_h_col(u, steps[i])
            outs.append(u)
        return outs


def build_dnet_imm() -> DnetImmNet:
    return DnetImmNet()


def dnet_imm_forward(net: DnetImmNet, stream) -> list:
    """Nine row-major entries of the product of the streamed matrices."""
    tokens = [tok if isinstance(tok, Rational) else Rational(tok) for tok in stream]
    if not tokens or len(tokens) % 9 != 0:
        raise ValueError("stream length must be a positive multiple of 9")
    row = net.initial_row
    for t in range(1, len(tokens) + 1):
        entry = net.router.query_at(t, tokens)
        row = apply_h_row(row, entry.factor)
    key = window_key(len(tokens), tokens, net.router.window)
    return [row.dot(u) for u in net.final_readouts(key)]
