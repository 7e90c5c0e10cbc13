"""Benchmark instances, encoders, brute-force oracles, and generators.

Three task families: sorted deterministic graph connectivity (unary token
streams), iterated 3x3 matrix multiplication over a prime modulus, and
iterated 3x3 matrix multiplication over the integers. Generators are pure
functions of (parameters, seed); dataset files are line-delimited JSON and
byte-identical across runs with the same seed.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass

# ---------------------------------------------------------------------------
# Seeding: every stream of randomness is derived from one 64-bit seed by
# hashing (seed, *labels); no ambient entropy anywhere.


def split_seed(seed: int, *labels) -> int:
    text = str(seed) + "".join(f"/{p}" for p in labels)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(seed: int, *labels) -> random.Random:
    return random.Random(split_seed(seed, *labels))


# ---------------------------------------------------------------------------
# Sorted deterministic graph connectivity

BOS = "$"
MARK = "0"
SEP = "|"
END = "#"


@dataclass(frozen=True)
class SortedDetConnInstance:
    """Source, target, and a deterministic topologically numbered edge list.

    Sources are strictly increasing and every edge goes forward (j > i), so
    each node has at most one out-edge and following them from s either
    reaches t or stops.
    """

    n: int
    s: int
    t: int
    edges: tuple

    def __post_init__(self):
        if not (1 <= self.s <= self.n and 1 <= self.t <= self.n):
            raise ValueError("s/t out of range")
        prev = 0
        for i, j in self.edges:
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"edge ({i},{j}) out of range")
            if i <= prev:
                raise ValueError("edge sources must be strictly increasing")
            if j <= i:
                raise ValueError(f"edge ({i},{j}) is not forward")
            prev = i


def conn_oracle(inst: SortedDetConnInstance) -> bool:
    """Follow the unique out-edge chain from s; true iff t is reached."""
    succ = dict(inst.edges)
    node = inst.s
    while True:
        if node == inst.t:
            return True
        if node not in succ:
            return False
        node = succ[node]


def reachable(edges, s: int, t: int) -> bool:
    """Breadth-first reachability for arbitrary directed edge lists."""
    adj = {}
    for i, j in edges:
        adj.setdefault(i, []).append(j)
    seen = {s}
    frontier = [s]
    while frontier:
        nxt = []
        for u in frontier:
            if u == t:
                return True
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return t in seen


def encode_conn_unary(inst: SortedDetConnInstance) -> list:
    """BOS, 0^s, '|', then 0^i '|' 0^j '|' per edge, then 0^t, '#'."""
    tokens = [BOS]
    tokens += [MARK] * inst.s
    tokens.append(SEP)
    for i, j in inst.edges:
        tokens += [MARK] * i
        tokens.append(SEP)
        tokens += [MARK] * j
        tokens.append(SEP)
    tokens += [MARK] * inst.t
    tokens.append(END)
    return tokens


def decode_conn_unary(tokens) -> SortedDetConnInstance:
    if not tokens or tokens[0] != BOS or tokens[-1] != END:
        raise ValueError("stream must be delimited by BOS and end marker")
    blocks = []
    count = 0
    for tok in tokens[1:-1]:
        if tok == MARK:
            count += 1
        elif tok == SEP:
            blocks.append(count)
            count = 0
        else:
            raise ValueError(f"unexpected token {tok!r}")
    blocks.append(count)
    if len(blocks) % 2 != 0:
        raise ValueError("malformed block structure")
    s, t = blocks[0], blocks[-1]
    pair_vals = blocks[1:-1]
    edges = tuple(
        (pair_vals[k], pair_vals[k + 1]) for k in range(0, len(pair_vals), 2)
    )
    n = max([s, t] + [v for e in edges for v in e])
    return SortedDetConnInstance(n=n, s=s, t=t, edges=edges)


def reduce_to_sorted(n: int, edges, s: int, t: int) -> SortedDetConnInstance:
    """Layered copy construction turning any deterministic graph into a
    sorted deterministic one with the same s-to-t reachability.

    Copy h of edge (i, j) runs from layer h to layer h+1; every copy of t
    feeds one fresh final node, so t is reachable from s in the input iff
    the final node is reachable from s in the output.
    """
    out_deg = {}
    for i, j in edges:
        out_deg[i] = out_deg.get(i, 0) + 1
    if any(c > 1 for c in out_deg.values()):
        raise ValueError("input graph is not deterministic")
    if t in out_deg:
        raise ValueError("target must have no outgoing edge")
    m = len(edges)
    v_final = n * (m + 1) + 1
    new_edges = []
    for h in range(m):
        base = h * n
        layer = [(i + base, j + base + n) for i, j in edges]
        layer.append((t + base, v_final))
        new_edges.extend(sorted(layer))
    new_edges.append((t + m * n, v_final))
    return SortedDetConnInstance(
        n=v_final, s=s, t=v_final, edges=tuple(new_edges)
    )


def gen_conn(n_range, p: float, label: bool, rng: random.Random) -> SortedDetConnInstance:
    """Two-bucket chain instance with the requested connectivity label.

    Vertices are split into two buckets; consecutive members of each bucket
    are chained by edges. The first and last vertex share a bucket exactly
    for positive instances. Remaining vertices join the first bucket
    independently with probability p. A drawn size of n yields n+1 vertices
    (ids 1..n+1) and the query runs from the first to the last.
    """
    if not (0.0 < p < 1.0):
        raise ValueError("p must be in (0, 1)")
    lo, hi = n_range
    size = rng.randint(lo, hi)
    v = max(2, size + 1)  # vertices 1..v; query is 1 -> v
    bucket = [False] * (v + 1)
    bucket[1] = True
    bucket[v] = label
    for node in range(2, v):
        bucket[node] = rng.random() < p
    edges = []
    for flag in (True, False):
        members = [node for node in range(1, v + 1) if bucket[node] == flag]
        edges += [(a, b) for a, b in zip(members, members[1:])]
    inst = SortedDetConnInstance(n=v, s=1, t=v, edges=tuple(sorted(edges)))
    if conn_oracle(inst) != label:
        raise AssertionError("generator produced an instance with the wrong label")
    return inst


def random_sorted_instance(
    rng: random.Random, max_n: int = 200, max_edges: int = 8
) -> SortedDetConnInstance:
    """Uniform-ish valid instance: random forward edges with sorted sources.

    The target is drawn from the nodes without an out-edge, matching the
    reduction's contract; a single left-to-right pass can then decide
    reachability by whether the walk from s ends at t.
    """
    n = rng.randint(2, max_n)
    k = rng.randint(0, min(max_edges, n - 1))
    sources = sorted(rng.sample(range(1, n), k)) if k else []
    edges = tuple((i, rng.randint(i + 1, n)) for i in sources)
    source_set = set(sources)
    t = rng.choice([v for v in range(1, n + 1) if v not in source_set])
    return SortedDetConnInstance(n=n, s=rng.randint(1, n), t=t, edges=edges)


# ---------------------------------------------------------------------------
# Iterated 3x3 matrix multiplication. Matrices are tuples of 9 ints in
# row-major order; all oracle arithmetic is plain Python bigint.

IDENTITY3 = (1, 0, 0, 0, 1, 0, 0, 0, 1)


def mat3_mul(a, b, mod: int | None = None, clip: int | None = None):
    out = [0] * 9
    for i in range(3):
        for j in range(3):
            acc = 0
            for k in range(3):
                acc += a[3 * i + k] * b[3 * k + j]
            if mod is not None:
                acc %= mod
            elif clip is not None:
                acc = max(-clip, min(clip, acc))
            out[3 * i + j] = acc
    return tuple(out)


def mat3_det_mod(a, m: int) -> int:
    d = (
        a[0] * (a[4] * a[8] - a[5] * a[7])
        - a[1] * (a[3] * a[8] - a[5] * a[6])
        + a[2] * (a[3] * a[7] - a[4] * a[6])
    )
    return d % m


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    f = 2
    while f * f <= m:
        if m % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class ImmModInstance:
    T: int
    m: int
    q_k: int  # row-major entry index 0..8
    matrices: tuple

    def tokens(self) -> list:
        return [e for mat in self.matrices for e in mat]


@dataclass(frozen=True)
class ImmZInstance:
    T: int
    matrices: tuple
    clip: int | None = None

    def tokens(self) -> list:
        return [e for mat in self.matrices for e in mat]


def imm_mod_oracle(inst: ImmModInstance) -> list:
    """Per-step targets: entry q_k of the running product mod m."""
    p = IDENTITY3
    out = []
    for mat in inst.matrices:
        p = mat3_mul(p, mat, mod=inst.m)
        out.append(p[inst.q_k])
    return out


def imm_z_oracle(inst: ImmZInstance) -> int:
    """Label 1 iff the (0,0) entry of the full product is exactly zero."""
    p = IDENTITY3
    for mat in inst.matrices:
        p = mat3_mul(p, mat, clip=inst.clip)
    return 1 if p[0] == 0 else 0


def gen_imm_mod(T_range, m: int, q_k: int, rng: random.Random) -> ImmModInstance:
    """Matrices over {-1,0,1}, rejection-sampled until invertible mod m."""
    if not is_prime(m):
        raise ValueError("modulus must be prime")
    if not (0 <= q_k <= 8):
        raise ValueError("q_k must index a 3x3 entry (0..8)")
    lo, hi = T_range
    T = rng.randint(lo, hi)
    mats = []
    while len(mats) < T:
        cand = tuple(rng.choice((-1, 0, 1)) for _ in range(9))
        if mat3_det_mod(cand, m) != 0:
            mats.append(cand)
    return ImmModInstance(T=T, m=m, q_k=q_k, matrices=tuple(mats))


ENTRY_WEIGHTS = (45, 10, 45)  # sampling weights for entries -1, 0, 1


def gen_imm_z(
    T_range,
    rng: random.Random,
    clip: int | None = None,
    want_label: int | None = None,
    max_tries: int = 10000,
) -> ImmZInstance:
    """Matrices with entries -1/0/1 drawn with weights 45/10/45; the label
    is computed from the exact integer product unless a clip cap is set.
    Pass ``want_label`` to rejection-sample a balanced split.
    """
    lo, hi = T_range
    for _ in range(max_tries):
        T = rng.randint(lo, hi)
        mats = tuple(
            tuple(rng.choices((-1, 0, 1), weights=ENTRY_WEIGHTS)[0] for _ in range(9))
            for _ in range(T)
        )
        inst = ImmZInstance(T=T, matrices=mats, clip=clip)
        if want_label is None or imm_z_oracle(inst) == want_label:
            return inst
    raise RuntimeError("rejection sampling failed to hit the requested label")


# ---------------------------------------------------------------------------
# Dataset records


def conn_record(inst: SortedDetConnInstance, seed: int) -> dict:
    # tokens carry the unary form; meta carries the compact form
    return {
        "task": "conn",
        "tokens": encode_conn_unary(inst),
        "label": 1 if conn_oracle(inst) else 0,
        "meta": {
            "n": inst.n,
            "s": inst.s,
            "t": inst.t,
            "edges": [list(e) for e in inst.edges],
            "seed": seed,
        },
    }


def imm_mod_record(inst: ImmModInstance, seed: int) -> dict:
    return {
        "task": "imm-mod",
        "tokens": inst.tokens(),
        "targets": imm_mod_oracle(inst),
        "meta": {"T": inst.T, "m": inst.m, "q_k": inst.q_k, "seed": seed},
    }


def imm_z_record(inst: ImmZInstance, seed: int) -> dict:
    meta = {"T": inst.T, "seed": seed}
    if inst.clip is not None:
        meta["clip"] = inst.clip
    return {
        "task": "imm-z",
        "tokens": inst.tokens(),
        "label": imm_z_oracle(inst),
        "meta": meta,
    }


def record_to_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def generate_dataset(task: str, count: int, size_range, seed: int, **kwargs) -> list:
    """Produce ``count`` JSONL lines for one task, deterministically."""
    lines = []
    for idx in range(count):
        rng = rng_for(seed, task, idx)
        if task == "conn":
            label = idx % 2 == 0
            inst = gen_conn(size_range, kwargs.get("p", 0.5), label, rng)
            rec = conn_record(inst, seed)
        elif task == "imm-mod":
            inst = gen_imm_mod(
                size_range, kwargs.get("m", 5), kwargs.get("q_k", 0), rng
            )
            rec = imm_mod_record(inst, seed)
        elif task == "imm-z":
            want = kwargs.get("want_label")
            if kwargs.get("balanced"):
                want = idx % 2
            inst = gen_imm_z(size_range, rng, clip=kwargs.get("clip"), want_label=want)
            rec = imm_z_record(inst, seed)
        else:
            raise ValueError(f"unknown task {task!r}")
        lines.append(record_to_line(rec))
    return lines
