"""Delay/area model for static gates, FFs, and reconfigurable LUT macros.

The built-in default library is calibrated so that for every width n
``lut_delay(n) >= n * gate_delay(MUX2)``.  Because a decomposed LUT is a
MUX tree of at most n levels (and the peephole substitutions are never
slower than the MUX2 they replace), this guarantees that converting a
LUT to static logic never slows any path down.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .netlist import GATE_KINDS, KIND_FF, KIND_LUT, MAX_LUT_WIDTH


class LibraryError(Exception):
    """Malformed or incomplete library configuration."""


@dataclass(frozen=True)
class TechLibrary:
    gate_delay: dict  # kind -> ns
    gate_area: dict   # kind -> um^2
    lut_delay: dict   # width -> ns
    lut_area: dict    # width -> um^2
    ff_clk2q: float
    ff_setup: float
    ff_area: float
    calibration_ok: bool = True
    warnings: tuple = field(default_factory=tuple)

    def cell_delay(self, cell) -> float:
        """Pin-to-output delay in ns for any netlist cell."""
        if cell.kind == KIND_LUT:
            return self.lut_delay[cell.mask.width]
        if cell.kind == KIND_FF:
            return self.ff_clk2q
        try:
            return self.gate_delay[cell.kind]
        except KeyError:
            raise LibraryError(f"unknown cell kind {cell.kind}") from None

    def cell_area(self, cell) -> float:
        if cell.kind == KIND_LUT:
            return self.lut_area[cell.mask.width]
        if cell.kind == KIND_FF:
            return self.ff_area
        try:
            return self.gate_area[cell.kind]
        except KeyError:
            raise LibraryError(f"unknown cell kind {cell.kind}") from None


# Stand-in 65nm-flavored numbers.  Only trends matter; the absolute
# values are not tied to any real PDK.
_DEFAULT_CONFIG = {
    "gates": {
        "INV":   {"delay_ns": 0.010, "area_um2": 1.44},
        "BUF":   {"delay_ns": 0.015, "area_um2": 1.80},
        "AND2":  {"delay_ns": 0.035, "area_um2": 2.16},
        "OR2":   {"delay_ns": 0.035, "area_um2": 2.16},
        "NAND2": {"delay_ns": 0.025, "area_um2": 1.80},
        "NOR2":  {"delay_ns": 0.025, "area_um2": 1.80},
        "MUX2":  {"delay_ns": 0.050, "area_um2": 4.32},
        "TIE0":  {"delay_ns": 0.0,   "area_um2": 0.72},
        "TIE1":  {"delay_ns": 0.0,   "area_um2": 0.72},
    },
    "luts": {
        "1": {"delay_ns": 0.080, "area_um2": 62.0},
        "2": {"delay_ns": 0.140, "area_um2": 95.0},
        "3": {"delay_ns": 0.200, "area_um2": 148.0},
        "4": {"delay_ns": 0.270, "area_um2": 228.0},
        "5": {"delay_ns": 0.350, "area_um2": 342.0},
        "6": {"delay_ns": 0.440, "area_um2": 455.0},
    },
    "ff": {"clk2q_ns": 0.120, "setup_ns": 0.050, "area_um2": 9.00},
}


def _require(table, key, what, where):
    if key not in table:
        raise LibraryError(f"missing {what} for {key!r} in {where}")
    return table[key]


def _non_negative(value, what):
    value = float(value)
    if value < 0:
        raise LibraryError(f"negative {what}: {value}")
    return value


def _positive(value, what):
    value = float(value)
    if value <= 0:
        raise LibraryError(f"non-positive {what}: {value}")
    return value


def load_library(config=None) -> TechLibrary:
    """Build a TechLibrary from a config mapping (or the built-in default).

    Unknown keys are rejected.  A library that violates the calibration
    constraint still loads, but carries ``calibration_ok=False`` plus a
    warning; monotone-timing guarantees are void for such libraries.
    """
    if config is None:
        config = _DEFAULT_CONFIG
    unknown = set(config) - {"gates", "luts", "ff"}
    if unknown:
        raise LibraryError(f"unknown library sections: {sorted(unknown)}")

    gates_cfg = _require(config, "gates", "section", "library config")
    unknown = set(gates_cfg) - GATE_KINDS
    if unknown:
        raise LibraryError(f"unknown gate kinds: {sorted(unknown)}")
    gate_delay = {}
    gate_area = {}
    for kind in sorted(GATE_KINDS):
        entry = _require(gates_cfg, kind, "gate entry", "gates")
        unknown = set(entry) - {"delay_ns", "area_um2"}
        if unknown:
            raise LibraryError(f"unknown keys for gate {kind}: {sorted(unknown)}")
        gate_delay[kind] = _non_negative(
            _require(entry, "delay_ns", "delay", kind), f"{kind} delay")
        gate_area[kind] = _positive(
            _require(entry, "area_um2", "area", kind), f"{kind} area")

    luts_cfg = _require(config, "luts", "section", "library config")
    lut_delay = {}
    lut_area = {}
    for width in range(1, MAX_LUT_WIDTH + 1):
        entry = _require(luts_cfg, str(width), "LUT entry", "luts")
        unknown = set(entry) - {"delay_ns", "area_um2"}
        if unknown:
            raise LibraryError(f"unknown keys for LUT{width}: {sorted(unknown)}")
        lut_delay[width] = _non_negative(
            _require(entry, "delay_ns", "delay", f"LUT{width}"),
            f"LUT{width} delay")
        lut_area[width] = _positive(
            _require(entry, "area_um2", "area", f"LUT{width}"),
            f"LUT{width} area")
    unknown = set(luts_cfg) - {str(w) for w in range(1, MAX_LUT_WIDTH + 1)}
    if unknown:
        raise LibraryError(f"unknown LUT widths: {sorted(unknown)}")

    ff_cfg = _require(config, "ff", "section", "library config")
    unknown = set(ff_cfg) - {"clk2q_ns", "setup_ns", "area_um2"}
    if unknown:
        raise LibraryError(f"unknown keys in ff section: {sorted(unknown)}")
    ff_clk2q = _non_negative(
        _require(ff_cfg, "clk2q_ns", "ff clk2q", "ff"), "ff clk2q")
    ff_setup = _non_negative(
        _require(ff_cfg, "setup_ns", "ff setup", "ff"), "ff setup")
    ff_area = _positive(
        _require(ff_cfg, "area_um2", "ff area", "ff"), "ff area")

    warnings = []
    ok = True
    mux_delay = gate_delay["MUX2"]
    for width in range(1, MAX_LUT_WIDTH + 1):
        if lut_delay[width] < width * mux_delay:
            ok = False
            warnings.append(
                f"lut_delay({width})={lut_delay[width]} < "
                f"{width} * MUX2 delay {mux_delay}; "
                "static replacements may be slower than the LUTs they replace"
            )

    return TechLibrary(gate_delay, gate_area, lut_delay, lut_area,
                       ff_clk2q, ff_setup, ff_area,
                       calibration_ok=ok, warnings=tuple(warnings))


def load_library_file(path) -> TechLibrary:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            config = json.load(handle)
        except json.JSONDecodeError as exc:
            raise LibraryError(f"bad library JSON in {path}: {exc}") from exc
    return load_library(config)


def default_library() -> TechLibrary:
    return load_library(None)


def cell_delay(lib: TechLibrary, cell) -> float:
    return lib.cell_delay(cell)


def cell_area(lib: TechLibrary, cell) -> float:
    return lib.cell_area(cell)
