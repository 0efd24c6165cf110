import json
import shutil

import pytest

from easic import parse_blif, read_bitstream
from easic.cli import main


def run_cli(*args):
    return main([str(a) for a in args])


@pytest.fixture()
def sbm_out(tmp_path, designs_dir):
    out = tmp_path / "run"
    code = run_cli("obfuscate", "--input", designs_dir / "sbm29.blif",
                   "--obf", "95", "--out", out)
    assert code == 0
    return out


def test_obfuscate_outputs(sbm_out):
    names = {p.name for p in sbm_out.iterdir()}
    assert names >= {
        "easic.blif", "easic.v", "easic.ebs", "chain.json", "timing.json",
        "area.json", "constraints.json", "trace.json", "manifest.json",
    }
    trace = json.loads((sbm_out / "trace.json").read_text())
    # 29 LUTs at 95 percent: exactly one conversion
    assert trace["lut_st"] == 1
    assert len(trace["conversions"]) == 1


def test_outputs_self_consume(sbm_out):
    netlist = parse_blif((sbm_out / "easic.blif").read_text())
    stream = read_bitstream(sbm_out / "easic.ebs")
    assert stream.total_len == sum(
        1 << c.mask.width for c in netlist.reconfigurable_luts())
    for name in ("chain.json", "timing.json", "area.json",
                 "constraints.json", "trace.json", "manifest.json"):
        json.loads((sbm_out / name).read_text())


def test_manifest_hashes_are_reproducible(tmp_path, designs_dir):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        assert run_cli("obfuscate", "--input", designs_dir / "adder8.blif",
                       "--obf", "86", "--out", out) == 0
    m1 = (out1 / "manifest.json").read_bytes()
    m2 = (out2 / "manifest.json").read_bytes()
    assert m1 == m2


def test_obf_100_full_bitstream(tmp_path, designs_dir):
    out = tmp_path / "full"
    assert run_cli("obfuscate", "--input", designs_dir / "cmp4.blif",
                   "--obf", "100", "--out", out) == 0
    area = json.loads((out / "area.json").read_text())
    assert area["area_st_um2"] == 0.0
    stream = read_bitstream(out / "easic.ebs")
    original = parse_blif((designs_dir / "cmp4.blif").read_text())
    assert len(stream.chain) == len(original.luts())


def test_obf_0_no_macros(tmp_path, designs_dir):
    out = tmp_path / "none"
    assert run_cli("obfuscate", "--input", designs_dir / "cmp4.blif",
                   "--obf", "0", "--out", out) == 0
    assert read_bitstream(out / "easic.ebs").total_len == 0
    assert "LUT" not in (out / "easic.v").read_text()


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.blif"
    bad.write_text(".model m\n.inputs a\n.outputs y\n.names a y\nzz 1\n.end\n")
    assert run_cli("obfuscate", "--input", bad, "--obf", "50",
                   "--out", tmp_path / "o") == 2


def test_bad_obf_percent_exit_code(tmp_path, designs_dir):
    assert run_cli("obfuscate", "--input", designs_dir / "cmp4.blif",
                   "--obf", "150", "--out", tmp_path / "o") == 3


def test_missing_input_exit_code(tmp_path):
    assert run_cli("obfuscate", "--input", tmp_path / "nope.blif",
                   "--obf", "50", "--out", tmp_path / "o") == 3


def test_sweep_csv(tmp_path, designs_dir, capsys):
    out = tmp_path / "sweep"
    code = run_cli("sweep", "--input", designs_dir / "sbm29.blif",
                   "--levels", "98,95,92,89,86", "--out", out)
    assert code == 0
    lines = (out / "sweep.csv").read_text().strip().split("\n")
    assert lines[0] == "obf,sum_cp_ns,cp_ns,area_re_um2,area_st_um2,lut_re,lut_st"
    st_column = [int(line.split(",")[-1]) for line in lines[1:]]
    assert st_column == [0, 1, 2, 3, 4]


def test_verify_ok(tmp_path, designs_dir, sbm_out):
    assert run_cli("verify", "--golden", designs_dir / "sbm29.blif",
                   "--easic", sbm_out, "--out", tmp_path / "v") == 0
    report = json.loads((tmp_path / "v" / "verify.json").read_text())
    assert report["verdict"] == "equivalent"


def test_verify_detects_flipped_support_bit(tmp_path, designs_dir):
    out = tmp_path / "run"
    assert run_cli("obfuscate", "--input", designs_dir / "adder8.blif",
                   "--obf", "75", "--out", out) == 0

    from easic import lut_support
    from easic.bitstream import Bitstream, write_bitstream

    netlist = parse_blif((out / "easic.blif").read_text())
    stream = read_bitstream(out / "easic.ebs")
    pis = set(netlist.inputs)
    offset = 0
    flip_at = None
    for name, width in stream.chain:
        cell = netlist.cells[name]
        if set(cell.inputs) <= pis:
            support = sorted(lut_support(cell.mask))
            # flip the output for the all-zeros-except-support vector
            flip_at = offset + (1 << support[0])
            break
        offset += 1 << width
    assert flip_at is not None
    bits = list(stream.bits)
    bits[flip_at] ^= 1
    write_bitstream(Bitstream(stream.design, stream.chain, tuple(bits)),
                    out / "easic.ebs")
    code = run_cli("verify", "--golden", designs_dir / "adder8.blif",
                   "--easic", out, "--out", tmp_path / "v")
    assert code == 5
    report = json.loads((tmp_path / "v" / "verify.json").read_text())
    assert report["verdict"] == "counterexample"
    assert report["counterexample"]


def test_verify_corrupted_bitstream_length(tmp_path, designs_dir, sbm_out):
    run_dir = tmp_path / "corrupt"
    shutil.copytree(sbm_out, run_dir)
    ebs = run_dir / "easic.ebs"
    data = bytearray(ebs.read_bytes())
    data[-1] ^= 0xFF
    data = data[:-1]
    ebs.write_bytes(bytes(data))
    assert run_cli("verify", "--golden", designs_dir / "sbm29.blif",
                   "--easic", run_dir, "--out", tmp_path / "v") == 3


def test_attack_structural(tmp_path, designs_dir):
    out = tmp_path / "hist"
    code = run_cli("attack", "structural", "--input",
                   designs_dir / "adder8.blif", "--degree", "2", "--out", out)
    assert code == 0
    hist = json.loads((out / "histogram.json").read_text())
    assert hist["design"] == "adder8"
    assert hist["entries"]
    ranks = (out / "ranks.csv").read_text().strip().split("\n")
    assert ranks[0] == "rank,frequency"
    json.loads((out / "trendline.json").read_text())


def test_attack_structural_static_scope(tmp_path, designs_dir, sbm_out):
    out = tmp_path / "hist"
    code = run_cli("attack", "structural", "--input", sbm_out,
                   "--scope", "static-portion", "--out", out)
    assert code == 0
    hist = json.loads((out / "histogram.json").read_text())
    assert hist["scope"] == "static-portion"
    assert len(hist["entries"]) == 1


def test_attack_structural_empty_scope_warns(tmp_path, designs_dir, capsys):
    run_dir = tmp_path / "run100"
    assert run_cli("obfuscate", "--input", designs_dir / "cmp4.blif",
                   "--obf", "100", "--out", run_dir) == 0
    out = tmp_path / "hist"
    code = run_cli("attack", "structural", "--input", run_dir,
                   "--scope", "static-portion", "--out", out)
    assert code == 0
    assert "empty histogram" in capsys.readouterr().out
    hist = json.loads((out / "histogram.json").read_text())
    assert hist["entries"] == []


def test_attack_corpus_and_composition(tmp_path, designs_dir):
    corpus_dir = tmp_path / "corpus"
    blifs = sorted(designs_dir.glob("*.blif"))
    code = run_cli("attack", "corpus", "--inputs", *blifs,
                   "--out", corpus_dir)
    assert code == 0
    union = json.loads((corpus_dir / "union.json").read_text())
    assert union["m"] > 0
    assert len(list(corpus_dir.glob("*.histogram.json"))) == len(blifs)

    victim_run = tmp_path / "victim"
    assert run_cli("obfuscate", "--input", designs_dir / "lfsr16.blif",
                   "--obf", "40", "--out", victim_run) == 0
    out = tmp_path / "comp"
    code = run_cli("attack", "composition", "--victim", victim_run,
                   "--corpus", corpus_dir, "--out", out)
    assert code == 0
    report = json.loads((out / "composition.json").read_text())
    assert report["classification"] == "self-correlation"
    assert report["matches"][0][0] == "lfsr16"
    space = json.loads((out / "search_space.json").read_text())
    assert space["l4_per_lut"] <= space["l3_per_lut"] <= space["l2_per_lut"]


def test_attack_composition_missing_corpus(tmp_path, designs_dir, sbm_out):
    assert run_cli("attack", "composition", "--victim", sbm_out,
                   "--corpus", tmp_path / "absent",
                   "--out", tmp_path / "c") == 3


def test_attack_bruteforce(tmp_path):
    toy = tmp_path / "toy.blif"
    toy.write_text(
        ".model toy\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end\n"
    )
    run_dir = tmp_path / "run"
    assert run_cli("obfuscate", "--input", toy, "--obf", "100",
                   "--out", run_dir) == 0
    out = tmp_path / "bf"
    code = run_cli("attack", "bruteforce", "--easic", run_dir,
                   "--golden", toy, "--out", out)
    assert code == 0
    report = json.loads((out / "bruteforce.json").read_text())
    assert report["key_bits"] == 4
    recovered = read_bitstream(out / "recovered.ebs")
    assert recovered.total_len == 4


def test_attack_bruteforce_too_many_bits(tmp_path, designs_dir, sbm_out):
    code = run_cli("attack", "bruteforce", "--easic", sbm_out,
                   "--golden", designs_dir / "sbm29.blif",
                   "--max-key-bits", "8", "--out", tmp_path / "bf")
    assert code == 3


def test_custom_library_via_flag(tmp_path, designs_dir):
    import copy
    import json as json_mod

    from easic.techlib import _DEFAULT_CONFIG

    config = copy.deepcopy(_DEFAULT_CONFIG)
    config["luts"]["6"]["delay_ns"] = 0.9
    lib_path = tmp_path / "lib.json"
    lib_path.write_text(json_mod.dumps(config))
    out = tmp_path / "o"
    assert run_cli("obfuscate", "--input", designs_dir / "cmp4.blif",
                   "--obf", "50", "--lib", lib_path, "--out", out) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert str(lib_path) in manifest["config"]["library"]
