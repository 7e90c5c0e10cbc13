import math
import random

import pytest

from exactrnn.automata import (
    CounterMachine,
    build_conn_counter_machine,
    cm_run,
    scripted_stack_machine,
    sm_run,
    _all_masks,
)
from exactrnn.linalg import RVector
from exactrnn.problems import (
    SortedDetConnInstance,
    conn_oracle,
    encode_conn_unary,
    random_sorted_instance,
)
from exactrnn.rational import Rational
from exactrnn.relu_nets import (
    cm_to_mlp_rnn,
    gadget_eq_zero,
    gadget_lut,
    gadget_select,
    gadget_threshold,
    run_mlp_rnn,
    sm_to_mlp_rnn,
)
from exactrnn.verify import STACK_OP_PAIRS


# --- gadget fragments ---------------------------------------------------------


def test_eq_zero_on_integers():
    g = gadget_eq_zero()
    for x in range(-5, 6):
        want = Rational(1 if x == 0 else 0)
        assert g(RVector([x]))[0] == want


def test_eq_zero_margin_is_documented_precondition():
    g = gadget_eq_zero()
    # |x| >= 1/3 still exact
    assert g(RVector([Rational(1, 3)]))[0] == Rational(0)
    assert g(RVector([Rational(-2, 5)]))[0] == Rational(0)


def test_threshold_on_integers():
    g = gadget_threshold(Rational(0))
    for x in range(-4, 5):
        assert g(RVector([x]))[0] == Rational(1 if x >= 0 else 0)
    g2 = gadget_threshold(Rational(2))
    assert g2(RVector([2]))[0] == Rational(1)
    assert g2(RVector([1]))[0] == Rational(0)


def test_lut_identity_table():
    table = {(i,): [1 if j == i else 0 for j in range(4)] for i in range(4)}
    g = gadget_lut([4], table)
    for i in range(4):
        hot = RVector([1 if j == i else 0 for j in range(4)])
        assert list(g(hot)) == [Rational(v) for v in table[(i,)]]


def test_lut_random_two_group_table():
    rng = random.Random(0)
    table = {
        (a, b): [Rational(rng.randint(-5, 5)) for _ in range(2)]
        for a in range(3)
        for b in range(4)
    }
    g = gadget_lut([3, 4], table)
    for a in range(3):
        for b in range(4):
            hot = RVector(
                [1 if i == a else 0 for i in range(3)]
                + [1 if i == b else 0 for i in range(4)]
            )
            assert list(g(hot)) == table[(a, b)]


def test_select_two_branches():
    g = gadget_select(2)
    out = g(RVector([1, 0, 5, -3]))
    assert out[0] == Rational(5)
    out = g(RVector([0, 1, 5, -3]))
    assert out[0] == Rational(-3)


def test_select_respects_bound():
    g = gadget_select(3, bound=4)
    rng = random.Random(1)
    for _ in range(30):
        pick = rng.randrange(3)
        vals = [Rational(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(3)]
        hot = [1 if i == pick else 0 for i in range(3)]
        out = g(RVector(hot + vals))
        assert out[0] == vals[pick]


# --- counter machine compilation -------------------------------------------------


def constant_machine(ops, alphabet=("x",)):
    k = len(ops)
    transition = {}
    updates = {}
    for sym in alphabet:
        for mask in _all_masks(k):
            transition[("q", sym, mask)] = "q"
            updates[("q", sym, mask)] = ops
    return CounterMachine(
        states=("q",),
        start="q",
        alphabet=alphabet,
        n_counters=k,
        transition=transition,
        updates=updates,
        accepting=frozenset(("q", m) for m in _all_masks(k)),
    )


def test_cm_rnn_constant_counters():
    rnn = cm_to_mlp_rnn(constant_machine(("+0", "+0")))
    res = run_mlp_rnn(rnn, ["x"] * 6)
    for h in res.states:
        assert rnn.decode(h) == ("q", (0, 0))


def test_cm_rnn_counts():
    rnn = cm_to_mlp_rnn(constant_machine(("+1", "-1")))
    res = run_mlp_rnn(rnn, ["x"] * 5)
    assert rnn.decode(res.states[-1]) == ("q", (5, -5))


def test_cm_rnn_conn_instances():
    machine = build_conn_counter_machine()
    rnn = cm_to_mlp_rnn(machine)
    rng = random.Random(2)
    for _ in range(25):
        inst = random_sorted_instance(rng, max_n=40, max_edges=5)
        stream = encode_conn_unary(inst)
        accept, trace = cm_run(machine, stream)
        assert accept == conn_oracle(inst)
        res = run_mlp_rnn(rnn, stream, track_precision=False)
        assert res.accept == accept
        assert [rnn.decode(h) for h in res.states] == trace


def test_cm_rnn_reset_needs_bound():
    machine = constant_machine(("x0",))
    with pytest.raises(ValueError):
        cm_to_mlp_rnn(machine)


def test_cm_rnn_reset_with_bound():
    # alternate counting and resetting; exact while values stay under bound
    k = 1
    transition = {}
    updates = {}
    for sym, ops in (("c", ("+1",)), ("r", ("x0",))):
        for mask in _all_masks(k):
            transition[("q", sym, mask)] = "q"
            updates[("q", sym, mask)] = ops
    machine = CounterMachine(
        states=("q",),
        start="q",
        alphabet=("c", "r"),
        n_counters=1,
        transition=transition,
        updates=updates,
        accepting=frozenset(("q", m) for m in _all_masks(k)),
    )
    rnn = cm_to_mlp_rnn(machine, reset_bound=1000)
    word = ["c"] * 7 + ["r"] + ["c"] * 3
    _, trace = cm_run(machine, word)
    res = run_mlp_rnn(rnn, word)
    assert [rnn.decode(h) for h in res.states] == trace
    assert rnn.decode(res.states[-1]) == ("q", (3,))


def test_cm_rnn_precision_logarithmic():
    machine = build_conn_counter_machine()
    rnn = cm_to_mlp_rnn(machine)
    points = []
    for n in (16, 64, 256, 1024):
        inst = SortedDetConnInstance(n=n, s=n, t=n, edges=())
        res = run_mlp_rnn(rnn, encode_conn_unary(inst), track_precision=True)
        points.append((n, res.precision.max_value_bits))
    xs = [math.log2(n) for n, _ in points]
    ys = [bits for _, bits in points]
    xm, ym = sum(xs) / len(xs), sum(ys) / len(ys)
    slope = sum((x - xm) * (y - ym) for x, y in zip(xs, ys)) / sum(
        (x - xm) ** 2 for x in xs
    )
    assert slope <= 1.5


def test_cm_rnn_unknown_token():
    rnn = cm_to_mlp_rnn(constant_machine(("+0",)))
    with pytest.raises(ValueError):
        run_mlp_rnn(rnn, ["?"])


# --- stack machine compilation -----------------------------------------------------


def test_sm_rnn_push_only_matches_formula_iteration():
    machine = scripted_stack_machine(1, (("push0",), ("push1",)))
    rnn = sm_to_mlp_rnn(machine)
    rng = random.Random(3)
    prog = [rng.choice((("push0",), ("push1",))) for _ in range(8)]
    res = run_mlp_rnn(rnn, prog)
    expect = Rational(1)
    for (op,) in prog:
        expect = Rational(1 if op == "push1" else 0) + Rational(1, 2) * expect
    _, stacks = rnn.decode(res.states[-1])
    assert stacks[0] == expect


def test_sm_rnn_push_pop_returns_empty():
    machine = scripted_stack_machine(1, (("push0",), ("pop",)))
    rnn = sm_to_mlp_rnn(machine)
    res = run_mlp_rnn(rnn, [("push0",), ("pop",)])
    _, stacks = rnn.decode(res.states[-1])
    assert stacks[0] == Rational(1)


def test_sm_rnn_random_programs_full_trace():
    machine = scripted_stack_machine(2, STACK_OP_PAIRS)
    rnn = sm_to_mlp_rnn(machine)
    rng = random.Random(4)
    for _ in range(8):
        prog = [rng.choice(STACK_OP_PAIRS) for _ in range(100)]
        _, trace = sm_run(machine, prog)
        res = run_mlp_rnn(rnn, prog, track_precision=False)
        assert [rnn.decode(h) for h in res.states] == trace


def test_sm_rnn_precision_linear():
    machine = scripted_stack_machine(2, STACK_OP_PAIRS)
    rnn = sm_to_mlp_rnn(machine)
    rng = random.Random(5)
    ops = ("push0", "push1", "pop", "noop")
    weights = (3, 3, 1, 1)
    bits = {}
    for n in (32, 256):
        prog = [
            (rng.choices(ops, weights=weights)[0], rng.choices(ops, weights=weights)[0])
            for _ in range(n)
        ]
        res = run_mlp_rnn(rnn, prog, track_precision=True)
        bits[n] = res.precision.max_value_bits
    assert bits[256] >= 4 * bits[32]


def test_padding_token_is_noop():
    pairs = list(STACK_OP_PAIRS) + ["pad"]
    transition = {}
    stack_ops = {}
    for sym in pairs:
        for heads in _all_masks(2):
            transition[("run", sym, heads)] = "run"
            stack_ops[("run", sym, heads)] = (
                ("noop", "noop") if sym == "pad" else sym
            )
    from exactrnn.automata import StackMachine

    machine = StackMachine(
        states=("run",),
        start="run",
        alphabet=tuple(pairs),
        n_stacks=2,
        transition=transition,
        stack_ops=stack_ops,
        accepting=frozenset(("run",)),
    )
    rnn = sm_to_mlp_rnn(machine)
    rng = random.Random(6)
    word = [rng.choice(STACK_OP_PAIRS) for _ in range(10)]
    padded = word + ["pad"] * len(word)
    res_word = run_mlp_rnn(rnn, word, track_precision=False)
    res_pad = run_mlp_rnn(rnn, padded, track_precision=False)
    assert res_pad.states[len(word)] == res_word.states[-1]
    for t in range(len(word), len(padded) + 1):
        assert res_pad.states[t] == res_word.states[-1]


def test_zero_acceptor_rejects():
    from exactrnn.relu_nets import Layer, MlpRnn, ReluMlp
    from exactrnn.linalg import RMatrix

    base = cm_to_mlp_rnn(constant_machine(("+0",)))
    zero_acceptor = ReluMlp(
        [Layer(RMatrix.zeros(1, base.state_dim), RVector.zeros(1), relu=False)]
    )
    rnn = MlpRnn(
        state_dim=base.state_dim,
        token_index=base.token_index,
        update=base.update,
        h0=base.h0,
        acceptor=zero_acceptor,
        decode=base.decode,
    )
    res = run_mlp_rnn(rnn, ["x"] * 3)
    assert not res.accept
