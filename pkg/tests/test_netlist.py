import random

import pytest

from easic import parse_blif, emit_blif, stats
from easic.netlist import (
    BlifError,
    Cell,
    LutMask,
    MODE_RE,
    MODE_ST,
    NetlistError,
    isomorphic,
)

from circuits import lut, netlist, random_comb_netlist


def test_parse_and_gate_mask():
    nl = parse_blif(".model m\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end\n")
    cell = nl.cells["y"]
    assert cell.kind == "LUT"
    assert cell.mode == MODE_RE
    assert cell.mask == LutMask(2, 0x8)


def test_parse_or_gate_mask():
    nl = parse_blif(".model m\n.inputs a b\n.outputs y\n.names a b y\n1- 1\n-1 1\n.end\n")
    assert nl.cells["y"].mask == LutMask(2, 0xE)


def test_parse_constant_one_becomes_tie():
    nl = parse_blif(".model m\n.outputs y\n.names y\n1\n.end\n")
    assert nl.cells["y"].kind == "TIE1"


def test_parse_constant_zero_empty_cover():
    nl = parse_blif(".model m\n.outputs y\n.names y\n.end\n")
    assert nl.cells["y"].kind == "TIE0"


def test_parse_offset_cover():
    # cover listed with output 0 describes the complement
    nl = parse_blif(".model m\n.inputs a b\n.outputs y\n.names a b y\n11 0\n.end\n")
    assert nl.cells["y"].mask == LutMask(2, 0x7)


def test_parse_dont_care_expansion():
    nl = parse_blif(
        ".model m\n.inputs a b c\n.outputs y\n.names a b c y\n1-0 1\n.end\n"
    )
    # a=1, c=0, b free: minterms 1 and 3
    assert nl.cells["y"].mask.bits == (1 << 1) | (1 << 3)


def test_parse_line_continuation_and_comments():
    text = (
        ".model m\n.inputs a \\\nb\n.outputs y\n"
        "# a comment\n.names a b y\n11 1\n.end\n"
    )
    nl = parse_blif(text)
    assert nl.inputs == ["a", "b"]


def test_parse_latch_forms():
    nl = parse_blif(
        ".model m\n.inputs d\n.outputs q\n.latch d q re clk 0\n.end\n"
    )
    cell = nl.cells["q"]
    assert cell.kind == "FF"
    assert cell.inputs == ("d", "clk")
    assert nl.clock == "clk"

    nl2 = parse_blif(".model m\n.inputs d\n.outputs q\n.latch d q 1\n.end\n")
    assert nl2.cells["q"].init == 1


def test_parse_rejects_seven_inputs():
    cover = ".names a b c d e f g y\n1111111 1\n"
    text = ".model m\n.inputs a b c d e f g\n.outputs y\n" + cover + ".end\n"
    with pytest.raises(BlifError) as err:
        parse_blif(text)
    assert "7 inputs" in str(err.value)
    assert err.value.line == 4


def test_parse_rejects_multiple_drivers():
    text = (
        ".model m\n.inputs a b\n.outputs y\n"
        ".names a y\n1 1\n.names b y\n1 1\n.end\n"
    )
    with pytest.raises(BlifError, match="duplicate cell|multiply driven"):
        parse_blif(text)


def test_parse_rejects_undriven_net():
    text = ".model m\n.inputs a\n.outputs y\n.names a ghost y\n11 1\n.end\n"
    with pytest.raises(BlifError, match="ghost"):
        parse_blif(text)


def test_parse_rejects_combinational_cycle():
    text = (
        ".model m\n.inputs a\n.outputs y\n"
        ".names a y x\n11 1\n.names x y\n1 1\n.end\n"
    )
    with pytest.raises(BlifError, match="cycle"):
        parse_blif(text)


def test_parse_rejects_multiple_clocks():
    text = (
        ".model m\n.inputs d1 d2\n.outputs q1 q2\n"
        ".latch d1 q1 re clkA 0\n.latch d2 q2 re clkB 0\n.end\n"
    )
    with pytest.raises(BlifError, match="clock"):
        parse_blif(text)


def test_parse_error_reports_line_number():
    with pytest.raises(BlifError, match="line 3"):
        parse_blif(".model m\n.inputs a\n.bogus\n.end\n")


def test_roundtrip_corpus(designs):
    for nl in designs.values():
        again = parse_blif(emit_blif(nl))
        assert isomorphic(nl, again)


def test_roundtrip_preserves_static_cells():
    text = (
        ".model m\n.inputs a b s\n.outputs y z t w v\n"
        "# @static AND2\n.names a b y\n11 1\n"
        "# @static MUX2\n.names s a b z\n01- 1\n1-1 1\n"
        "# @static TIE1\n.names t\n1\n"
        "# @static NAND2\n.names a b w\n0- 1\n-0 1\n"
        "# @static NOR2\n.names a b v\n00 1\n.end\n"
    )
    nl = parse_blif(text)
    assert nl.cells["y"].kind == "AND2"
    assert nl.cells["z"].kind == "MUX2"
    assert nl.cells["t"].kind == "TIE1"
    assert nl.cells["w"].kind == "NAND2"
    assert nl.cells["v"].kind == "NOR2"
    assert isomorphic(nl, parse_blif(emit_blif(nl)))


def test_static_annotation_must_match_truth_table():
    text = ".model m\n.inputs a b\n.outputs y\n# @static AND2\n.names a b y\n1- 1\n.end\n"
    with pytest.raises(BlifError, match="truth table"):
        parse_blif(text)


def test_static_lut_mode_roundtrip():
    nl = netlist("m", ["a", "b"], ["y"],
                 [lut("y", ("a", "b"), LutMask(2, 0x9), mode=MODE_ST)])
    again = parse_blif(emit_blif(nl))
    assert again.cells["y"].mode == MODE_ST
    assert isomorphic(nl, again)


def test_mask_canonicality_random_masks():
    rng = random.Random(7)
    for _ in range(200):
        width = rng.randint(1, 6)
        bits = rng.getrandbits(1 << width)
        ins = [f"i{k}" for k in range(width)]
        nl = netlist("m", ins, ["y"], [lut("y", ins, LutMask(width, bits))])
        again = parse_blif(emit_blif(nl))
        assert again.cells["y"].mask.bits == bits


def test_roundtrip_hybrid_after_obfuscation(designs, lib):
    from easic import ObfuscationConfig, run_obfuscation

    res = run_obfuscation(designs["cmp4"],
                          ObfuscationConfig(obf_percent=50, library=lib))
    again = parse_blif(emit_blif(res.netlist))
    assert isomorphic(res.netlist, again)


def test_stats_counts(designs):
    st = stats(designs["sbm29"])
    assert st.lut_total == 29
    assert st.lut_re == 29 and st.lut_st == 0
    assert st.ff_count == 19
    assert st.input_count == 10

    empty = netlist("empty", ["a"], [], [])
    st0 = stats(empty)
    assert st0.lut_total == 0 and st0.ff_count == 0 and st0.gate_count == 0


def test_lutmask_invariants():
    with pytest.raises(NetlistError):
        LutMask(0, 0)
    with pytest.raises(NetlistError):
        LutMask(7, 0)
    with pytest.raises(NetlistError):
        LutMask(2, 0x10)  # five bits in a 4-bit table
    assert LutMask(2, 0x6).lifted(3) == LutMask(3, 0x66)
    assert LutMask(1, 0x2).lifted(2) == LutMask(2, 0xA)


def test_lutmask_eval():
    mask = LutMask(2, 0x8)
    assert mask.eval((1, 1)) == 1
    assert mask.eval((1, 0)) == 0
    assert mask.eval_index(3) == 1


def test_cell_arity_checks():
    with pytest.raises(NetlistError):
        Cell("x", "AND2", ("a",), "x")
    with pytest.raises(NetlistError, match="mode"):
        Cell("x", "AND2", ("a", "b"), "x", mode=MODE_RE)
    with pytest.raises(NetlistError):
        Cell("x", "LUT", ("a", "b"), "x", mask=LutMask(3, 0))


def test_driver_uniqueness_in_constructed_netlist():
    nl = netlist("m", ["a"], ["y"], [lut("y", ("a",), LutMask(1, 0x2))])
    nl.add_cell(lut("dup", ("a",), LutMask(1, 0x1)))
    nl.cells["dup"].output = "y"
    with pytest.raises(NetlistError, match="multiply driven"):
        nl.validate()


def test_emit_blif_deterministic(designs):
    text1 = emit_blif(designs["adder8"])
    text2 = emit_blif(designs["adder8"])
    assert text1 == text2
    assert text1.endswith(".end\n")


def test_random_netlists_roundtrip():
    rng = random.Random(3)
    for k in range(20):
        nl = random_comb_netlist(rng, n_pis=5, n_cells=15, name=f"r{k}")
        assert isomorphic(nl, parse_blif(emit_blif(nl)))
