import random

import pytest

from easic import (
    EquivalencePolicy,
    Evaluator,
    ObfuscationConfig,
    blank_state,
    check_equivalence,
    eval_comb,
    program,
    run_obfuscation,
    serialize,
)
from easic.netlist import Cell, LutMask
from easic.sim import SimError, replay_counterexample

from circuits import INV1, ff, lut, netlist, random_comb_netlist


def and_lut_netlist():
    return netlist("andy", ["a", "b"], ["y"],
                   [lut("y", ("a", "b"), LutMask(2, 0x8))])


def test_eval_comb_and_lut():
    nl = and_lut_netlist()
    assert eval_comb(nl, (1, 1)) == (1,)
    assert eval_comb(nl, (1, 0)) == (0,)


def test_eval_tie_only_netlist():
    nl = netlist("tie", ["a"], ["y"], [Cell("y", "TIE1", (), "y")])
    for a in (0, 1):
        assert eval_comb(nl, (a,)) == (1,)


def test_eval_rejects_wrong_vector_length():
    with pytest.raises(SimError, match="primary inputs"):
        eval_comb(and_lut_netlist(), (1,))


def test_static_version_matches_exhaustively(lib):
    rng = random.Random(2)
    nl = random_comb_netlist(rng, n_pis=8, n_cells=25, name="r8")
    res = run_obfuscation(nl, ObfuscationConfig(obf_percent=0, library=lib))
    ea = Evaluator(nl)
    eb = Evaluator(res.netlist)
    for v in range(256):
        vec = [(v >> i) & 1 for i in range(8)]
        assert ea.eval_comb(vec) == eb.eval_comb(vec)


def test_toggle_register():
    cells = [lut("d", ("q",), INV1), ff("q", "d")]
    nl = netlist("tog", [], ["q"], cells, clock="clk")
    ev = Evaluator(nl)
    state = ev.initial_state()
    seen = []
    for _ in range(4):
        state, outs = ev.step(state, ())
        seen.append(outs[0])
    assert seen == [0, 1, 0, 1]


def test_ff_chain_from_constant():
    cells = [
        Cell("one", "TIE1", (), "one"),
        ff("q1", "one"),
        ff("q2", "q1"),
    ]
    nl = netlist("chain2", [], ["q2"], cells, clock="clk")
    ev = Evaluator(nl)
    state = ev.initial_state()
    seen = []
    for _ in range(4):
        state, outs = ev.step(state, ())
        seen.append(outs[0])
    assert seen == [0, 0, 1, 1]


def test_step_respects_ff_init():
    cells = [lut("d", ("q",), INV1), ff("q", "d", init=1)]
    nl = netlist("tog1", [], ["q"], cells, clock="clk")
    ev = Evaluator(nl)
    state, outs = ev.step(ev.initial_state(), ())
    assert outs == (1,)


def test_equivalence_self(designs):
    rep = check_equivalence(designs["cmp4"], designs["cmp4"])
    assert rep.equivalent
    assert rep.mode == "exhaustive"


def test_equivalence_and_vs_or_counterexample():
    a = and_lut_netlist()
    b = netlist("andy", ["a", "b"], ["y"],
                [lut("y", ("a", "b"), LutMask(2, 0xE))])
    rep = check_equivalence(a, b)
    assert not rep.equivalent
    vec = rep.counterexample["vector"]
    assert (vec["a"], vec["b"]) in {(1, 0), (0, 1)}
    assert replay_counterexample(a, b, rep)


def test_equivalence_port_mismatch():
    a = and_lut_netlist()
    b = netlist("other", ["a", "c"], ["y"],
                [lut("y", ("a", "c"), LutMask(2, 0x8))])
    with pytest.raises(SimError, match="port mismatch"):
        check_equivalence(a, b)


def test_policy_auto_selection(designs):
    rep = check_equivalence(designs["adder8"], designs["adder8"])
    assert rep.mode == "exhaustive"  # 16 PIs is within the limit
    rep = check_equivalence(designs["mux16"], designs["mux16"])
    assert rep.mode == "random"      # 20 PIs forces sampling
    rep = check_equivalence(designs["counter8"], designs["counter8"])
    assert rep.mode == "sequential"


def test_unprogrammed_device_is_an_error(designs):
    state = blank_state(designs["cmp4"])
    with pytest.raises(SimError, match="unprogrammed LUT"):
        Evaluator(state)


def test_programmed_device_lock_step(designs, lib):
    nl = designs["sbm29"]
    res = run_obfuscation(nl, ObfuscationConfig(obf_percent=60, library=lib))
    state = program(blank_state(res.netlist), serialize(res.netlist))
    rep = check_equivalence(nl, state,
                            EquivalencePolicy(seed=5, n_cycles=1000))
    assert rep.equivalent
    assert rep.mode == "sequential"
    assert rep.cycles == 1000


def test_seed_determinism(designs):
    a = check_equivalence(designs["mux16"], designs["mux16"],
                          EquivalencePolicy(seed=42))
    b = check_equivalence(designs["mux16"], designs["mux16"],
                          EquivalencePolicy(seed=42))
    assert a == b


def test_sequential_counterexample_replays(designs, lib):
    nl = designs["counter8"]
    res = run_obfuscation(nl, ObfuscationConfig(obf_percent=50, library=lib))
    stream = serialize(res.netlist)
    # flip one support bit of the first chained LUT
    from easic import lut_support

    first_name, first_width = stream.chain[0]
    mask = res.netlist.cells[first_name].mask
    support = sorted(lut_support(mask))
    flip_index = support[0]  # minterm 0 vs its neighbor along a support axis
    bits = list(stream.bits)
    bits[1 << flip_index] ^= 1
    from easic.bitstream import Bitstream

    broken = Bitstream(stream.design, stream.chain, tuple(bits))
    state = program(blank_state(res.netlist), broken)
    rep = check_equivalence(nl, state, EquivalencePolicy(seed=3))
    if not rep.equivalent:
        assert replay_counterexample(nl, state, rep)


def test_counterexample_replay_rejects_equivalent_report(designs):
    rep = check_equivalence(designs["cmp4"], designs["cmp4"])
    assert replay_counterexample(designs["cmp4"], designs["cmp4"], rep) is False


def test_tie_nets_hold_constants_in_every_state():
    cells = [
        Cell("k1", "TIE1", (), "k1"),
        Cell("k0", "TIE0", (), "k0"),
        lut("y", ("k1", "k0"), LutMask(2, 0x6)),
    ]
    nl = netlist("ties", [], ["y"], cells)
    ev = Evaluator(nl)
    values = ev.eval_packed({}, 4)
    assert values["k1"] == 0b1111
    assert values["k0"] == 0
    assert values["y"] == 0b1111
