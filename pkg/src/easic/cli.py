"""Command-line front end.

Subcommands: obfuscate, sweep, verify, attack (structural | corpus |
composition | bruteforce).  All artifacts are deterministic: running a
command twice on the same inputs produces byte-identical files, which
the run manifest (input/output hashes) makes checkable.

Exit codes: 0 ok, 2 netlist parse error, 3 configuration error,
4 internal invariant violation, 5 equivalence counterexample.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from . import attacks as atk
from . import bitstream as bs
from .netlist import BlifError, LutMask, NetlistError, parse_blif, emit_blif, stats
from .obfuscate import (
    LutOrigin,
    ObfuscationConfig,
    ObfuscationError,
    ObfuscationResult,
    gen_case_constraints,
    run_obfuscation,
    sweep,
    sweep_to_csv,
)
from .sim import EquivalencePolicy, SimError, check_equivalence
from .staticgen import StaticGenError
from .techlib import LibraryError, default_library, load_library_file
from .timing import TimingError, report as timing_report
from .verilog import VerilogEmitError, emit_verilog

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_INTERNAL = 4
EXIT_COUNTEREXAMPLE = 5


class CliConfigError(Exception):
    pass


def _sha256(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _read_text(path) -> str:
    path = Path(path)
    if not path.is_file():
        raise CliConfigError(f"no such file: {path}")
    return path.read_text(encoding="utf-8")


def _write_text(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


def _write_json(path: Path, payload):
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_library(args):
    lib_path = getattr(args, "lib", None) or os.environ.get("EASIC_LIB")
    if lib_path:
        return load_library_file(lib_path), str(lib_path)
    return default_library(), "builtin-default"


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(command, inputs, config, outputs, out_dir):
    manifest = {
        "tool": "easic",
        "version": __version__,
        "command": command,
        "inputs": {name: _sha256(data) for name, data in sorted(inputs.items())},
        "config": config,
        "outputs": {
            name: _sha256((out_dir / name).read_bytes())
            for name in sorted(outputs)
        },
    }
    _write_json(out_dir / "manifest.json", manifest)


# -- obfuscate ---------------------------------------------------------------


def _trace_payload(result: ObfuscationResult) -> dict:
    conversions = []
    for record in result.trace:
        entry = record.to_json_dict()
        origin = result.origins[record.lut]
        entry["mask"] = f"0x{origin.mask.bits:x}"
        entry["network_area_um2"] = origin.network_area
        entry["network_delay_ns"] = origin.network_delay
        conversions.append(entry)
    return {
        "design": result.netlist.name,
        "obf_percent": float(result.config.obf_percent),
        "seed": result.config.seed,
        "lut_total": result.total_luts,
        "lut_re": len(result.l_re),
        "lut_st": len(result.l_st),
        "fallback_count": result.fallback_count,
        "conversions": conversions,
    }


def cmd_obfuscate(args) -> int:
    text = _read_text(args.input)
    netlist = parse_blif(text)
    library, lib_name = _load_library(args)
    config = ObfuscationConfig(obf_percent=args.obf, seed=args.seed,
                               library=library)
    result = run_obfuscation(netlist, config)
    out = _out_dir(args)

    _write_text(out / "easic.blif", emit_blif(result.netlist))
    _write_text(out / "easic.v", emit_verilog(result.netlist))
    stream = bs.serialize(result.netlist)
    bs.write_bitstream(stream, out / "easic.ebs")
    bs.write_chain_manifest(stream, out / "chain.json")
    _write_json(out / "timing.json", timing_report(result.graph).to_json_dict())
    _write_json(out / "area.json", result.area_report().to_json_dict())
    _write_json(out / "constraints.json", gen_case_constraints(result))
    _write_json(out / "trace.json", _trace_payload(result))

    _manifest(
        "obfuscate",
        inputs={Path(args.input).name: text.encode("utf-8")},
        config={
            "obf_percent": float(args.obf),
            "seed": args.seed,
            "library": lib_name,
        },
        outputs=[
            "easic.blif", "easic.v", "easic.ebs", "chain.json",
            "timing.json", "area.json", "constraints.json", "trace.json",
        ],
        out_dir=out,
    )
    st = stats(result.netlist)
    print(
        f"{netlist.name}: {len(result.l_re)} reconfigurable / "
        f"{len(result.l_st)} static LUTs, key {stream.total_len} bits, "
        f"gates {st.gate_count}, outputs in {out}"
    )
    return EXIT_OK


# -- sweep -------------------------------------------------------------------


def _parse_levels(spec_text):
    try:
        levels = [float(part) for part in spec_text.split(",") if part != ""]
    except ValueError as exc:
        raise CliConfigError(f"bad --levels value: {spec_text!r}") from exc
    if not levels:
        raise CliConfigError("--levels is empty")
    return levels


def cmd_sweep(args) -> int:
    text = _read_text(args.input)
    netlist = parse_blif(text)
    library, lib_name = _load_library(args)
    levels = _parse_levels(args.levels)
    rows = sweep(netlist, levels, library=library, seed=args.seed,
                 jobs=args.jobs)
    out = _out_dir(args)
    csv_text = sweep_to_csv(rows)
    _write_text(out / "sweep.csv", csv_text)
    _manifest(
        "sweep",
        inputs={Path(args.input).name: text.encode("utf-8")},
        config={
            "levels": levels,
            "seed": args.seed,
            "library": lib_name,
        },
        outputs=["sweep.csv"],
        out_dir=out,
    )
    sys.stdout.write(csv_text)
    return EXIT_OK


# -- verify ------------------------------------------------------------------


def _load_run_dir(path):
    """Load the netlist + bitstream + conversion trace of an obfuscate run."""
    run = Path(path)
    blif = run / "easic.blif"
    ebs = run / "easic.ebs"
    if not blif.is_file() or not ebs.is_file():
        raise CliConfigError(
            f"{run} is not an obfuscate output directory "
            "(missing easic.blif / easic.ebs)"
        )
    netlist = parse_blif(blif.read_text(encoding="utf-8"))
    stream = bs.read_bitstream(ebs)
    trace = None
    trace_path = run / "trace.json"
    if trace_path.is_file():
        trace = json.loads(trace_path.read_text(encoding="utf-8"))
    return netlist, stream, trace


def cmd_verify(args) -> int:
    golden = parse_blif(_read_text(args.golden))
    netlist, stream, _ = _load_run_dir(args.easic)
    state = bs.blank_state(netlist)
    bs.program(state, stream)
    policy = EquivalencePolicy(seed=args.seed)
    rep = check_equivalence(golden, state, policy)
    out = _out_dir(args)
    _write_json(out / "verify.json", rep.to_json_dict())
    if rep.equivalent:
        print(f"equivalent ({rep.note})")
        return EXIT_OK
    print(f"counterexample found ({rep.note}); see verify.json")
    return EXIT_COUNTEREXAMPLE


# -- attack ------------------------------------------------------------------


def _result_from_run_dir(path) -> ObfuscationResult:
    netlist, stream, trace = _load_run_dir(path)
    if trace is None:
        raise CliConfigError(f"{path}/trace.json is required for this attack")
    origins = {}
    for entry in trace["conversions"]:
        mask = LutMask(entry["width"], int(entry["mask"], 16))
        origins[entry["lut"]] = LutOrigin(
            mask=mask,
            replacement_cells=(),
            network_area=entry.get("network_area_um2", 0.0),
            network_delay=entry.get("network_delay_ns", 0.0),
        )
    config = ObfuscationConfig(obf_percent=trace["obf_percent"],
                               seed=trace.get("seed", 0))
    return ObfuscationResult(
        netlist=netlist,
        l_st=set(origins),
        l_re={c.name for c in netlist.reconfigurable_luts()},
        origins=origins,
        trace=[],
        fallback_count=trace.get("fallback_count", 0),
        config=config,
    )


def _victim_histogram(args):
    source = Path(args.victim)
    if source.is_dir():
        result = _result_from_run_dir(source)
        return atk.pattern_histogram(result, atk.SCOPE_STATIC)
    payload = json.loads(_read_text(source))
    return atk.histogram_from_json(payload)


def _load_corpus_dir(path):
    corpus_dir = Path(path)
    if not corpus_dir.is_dir():
        raise CliConfigError(f"missing corpus directory: {corpus_dir}")
    histograms = []
    for entry in sorted(corpus_dir.glob("*.histogram.json")):
        histograms.append(
            atk.histogram_from_json(json.loads(entry.read_text(encoding="utf-8")))
        )
    if not histograms:
        raise CliConfigError(f"no *.histogram.json files in {corpus_dir}")
    return histograms


def cmd_attack_structural(args) -> int:
    source = Path(args.input)
    if source.is_dir():
        result = _result_from_run_dir(source)
        hist = atk.pattern_histogram(result, args.scope)
    else:
        netlist = parse_blif(_read_text(source))
        hist = atk.pattern_histogram(netlist, args.scope)
    out = _out_dir(args)
    _write_json(out / "histogram.json", hist.to_json_dict())
    ranks = ["rank,frequency"]
    ranks += [f"{e.ident},{e.frequency}" for e in hist.entries]
    _write_text(out / "ranks.csv", "\n".join(ranks) + "\n")
    if not hist.entries:
        print("warning: empty histogram for this scope")
    if args.degree is not None and hist.entries:
        fit = atk.fit_trendline(hist, args.degree)
        _write_json(out / "trendline.json", {
            "degree": fit.degree,
            "coefficients": list(fit.coefficients),
            "max_abs_residual": fit.max_abs_residual,
        })
    print(
        f"{hist.design} [{hist.scope}]: {hist.unique_count} unique patterns, "
        f"{hist.total} LUTs"
    )
    return EXIT_OK


def cmd_attack_corpus(args) -> int:
    out = _out_dir(args)
    histograms = []
    for blif_path in args.inputs:
        netlist = parse_blif(_read_text(blif_path))
        hist = atk.pattern_histogram(netlist, atk.SCOPE_WHOLE)
        histograms.append(hist)
        _write_json(out / f"{netlist.name}.histogram.json", hist.to_json_dict())
    union = atk.corpus_union(histograms)
    _write_json(out / "union.json", {
        "m": union.m,
        "contributing": union.contributing,
        "settling": [
            {"design": d, "new_patterns": n, "cumulative": c}
            for d, n, c in union.settling
        ],
    })
    settling = ["design,new_patterns,cumulative"]
    settling += [f"{d},{n},{c}" for d, n, c in union.settling]
    _write_text(out / "settling.csv", "\n".join(settling) + "\n")
    print(f"corpus of {len(histograms)} designs: m = {union.m} unique patterns")
    return EXIT_OK


def cmd_attack_composition(args) -> int:
    victim = _victim_histogram(args)
    corpus = _load_corpus_dir(args.corpus)
    report = atk.composition_attack(victim, corpus, threshold=args.threshold)
    out = _out_dir(args)
    _write_json(out / "composition.json", report.to_json_dict())
    if Path(args.victim).is_dir():
        result = _result_from_run_dir(args.victim)
        union = atk.corpus_union(corpus)
        space = atk.search_space_report(result, union, report)
        _write_json(out / "search_space.json", space.to_json_dict())
    if report.warning:
        print(f"warning: {report.warning}")
    top = report.matches[0] if report.matches else None
    print(
        f"{victim.design}: {report.classification}"
        + (f" (top match {top[0]}, r={top[1]:.4f})" if top else "")
    )
    return EXIT_OK


def cmd_attack_bruteforce(args) -> int:
    netlist, _, _ = _load_run_dir(args.easic)
    golden = parse_blif(_read_text(args.golden))
    result = atk.brute_force_key(netlist, golden, max_key_bits=args.max_key_bits)
    out = _out_dir(args)
    _write_json(out / "bruteforce.json", result.to_json_dict())
    bs.write_bitstream(result.recovered, out / "recovered.ebs")
    print(
        f"recovered a functionally correct {result.key_bits}-bit key in "
        f"{result.trials} trials"
        + ("" if result.matches_original else " (differs from shipped key)")
    )
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="easic",
        description="Tuneable LUT-netlist obfuscation tool",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("obfuscate", help="convert a LUT netlist to a hybrid")
    p.add_argument("--input", required=True, help="input BLIF netlist")
    p.add_argument("--obf", required=True, type=float,
                   help="percent of LUTs left reconfigurable (0..100)")
    p.add_argument("--lib", help="technology library JSON (or $EASIC_LIB)")
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_obfuscate)

    p = sub.add_parser("sweep", help="obfuscate at several levels, emit CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--levels", required=True,
                   help="comma-separated obfuscation percentages")
    p.add_argument("--lib")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="program the bitstream and check "
                                      "equivalence against a golden netlist")
    p.add_argument("--golden", required=True)
    p.add_argument("--easic", required=True,
                   help="output directory of an obfuscate run")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("attack", help="reverse-engineering analyses")
    attack_sub = p.add_subparsers(dest="attack_command", required=True)

    q = attack_sub.add_parser("structural", help="pattern statistics")
    q.add_argument("--input", required=True,
                   help="BLIF netlist or obfuscate output directory")
    q.add_argument("--scope", default=atk.SCOPE_WHOLE,
                   choices=[atk.SCOPE_WHOLE, atk.SCOPE_STATIC, atk.SCOPE_RECONF])
    q.add_argument("--degree", type=int, default=None,
                   help="fit a polynomial trendline of this degree")
    q.add_argument("--out")
    q.set_defaults(func=cmd_attack_structural)

    q = attack_sub.add_parser("corpus", help="build a histogram database")
    q.add_argument("--inputs", nargs="+", required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_attack_corpus)

    q = attack_sub.add_parser("composition", help="correlate a victim "
                                                  "against known designs")
    q.add_argument("--victim", required=True,
                   help="obfuscate output directory or histogram JSON")
    q.add_argument("--corpus", required=True,
                   help="directory of *.histogram.json files")
    q.add_argument("--threshold", type=float, default=atk.DEFAULT_THRESHOLD)
    q.add_argument("--out")
    q.set_defaults(func=cmd_attack_composition)

    q = attack_sub.add_parser("bruteforce", help="enumerate small keys")
    q.add_argument("--easic", required=True)
    q.add_argument("--golden", required=True)
    q.add_argument("--max-key-bits", type=int, default=20)
    q.add_argument("--out")
    q.set_defaults(func=cmd_attack_bruteforce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BlifError, NetlistError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CliConfigError, LibraryError, ObfuscationError, SimError,
            bs.BitstreamError, atk.AttackError, VerilogEmitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StaticGenError, TimingError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
