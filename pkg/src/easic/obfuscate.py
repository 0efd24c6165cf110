"""The obfuscation engine.

Given a parsed LUT netlist and a target obfuscation percentage (the
share of LUTs that stays reconfigurable), the engine repeatedly finds
the critical path, picks the slowest reconfigurable LUT on it, and
replaces that LUT with an equivalent static gate network, updating
timing incrementally after every conversion.  Paths that carry no
reconfigurable LUT are excluded from further searches; when every path
is exhausted before the conversion quota is met, the remaining LUTs are
converted in a documented fallback order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

from . import staticgen
from .netlist import Cell, LutMask, Netlist
from .techlib import TechLibrary, default_library
from .timing import (
    TimingGraph,
    build_and_time,
    endpoint_deviations,
    endpoint_worst_path,
    lut_support,
    update_timing,
)


class ObfuscationError(Exception):
    pass


@dataclass
class ObfuscationConfig:
    obf_percent: float
    seed: int = 0
    library: TechLibrary | None = None

    def __post_init__(self):
        if not 0 <= float(self.obf_percent) <= 100:
            raise ObfuscationError(
                f"obfuscation percentage {self.obf_percent} outside [0, 100]"
            )
        if self.library is None:
            self.library = default_library()


def static_target(total_luts: int, obf_percent) -> int:
    """Number of LUTs to convert: floor(total * (100 - obf) / 100).

    Exact decimal arithmetic so that e.g. a 29-LUT design at 98/95/92/
    89/86 percent converts exactly 0/1/2/3/4 LUTs.
    """
    if total_luts < 0:
        raise ObfuscationError("negative LUT count")
    share = (100 - Fraction(repr(float(obf_percent)))) / 100
    return int(floor(total_luts * share))


@dataclass
class ConversionRecord:
    iteration: int
    lut: str
    width: int
    endpoint: str | None
    cp_before: float
    cp_after: float
    fallback: bool = False

    def to_json_dict(self):
        return {
            "iteration": self.iteration,
            "lut": self.lut,
            "width": self.width,
            "endpoint": self.endpoint,
            "cp_before_ns": self.cp_before,
            "cp_after_ns": self.cp_after,
            "fallback": self.fallback,
        }


@dataclass
class LutOrigin:
    """What a converted LUT used to be, and what replaced it."""

    mask: LutMask
    replacement_cells: tuple
    network_area: float
    network_delay: float


@dataclass
class AreaReport:
    area_re: float       # remaining reconfigurable LUT macros
    area_st: float       # gate networks that replaced converted LUTs
    other_static: float  # FFs, pre-existing gates, ties

    def to_json_dict(self):
        return {
            "area_re_um2": self.area_re,
            "area_st_um2": self.area_st,
            "other_static_um2": self.other_static,
        }


@dataclass
class ObfuscationResult:
    netlist: Netlist
    l_st: set
    l_re: set
    origins: dict           # converted lut id -> LutOrigin
    trace: list
    fallback_count: int
    config: ObfuscationConfig
    graph: TimingGraph = field(repr=False, default=None)

    @property
    def total_luts(self):
        return len(self.l_st) + len(self.l_re)

    def area_report(self) -> AreaReport:
        lib = self.config.library
        area_re = sum(lib.cell_area(self.netlist.cells[name])
                      for name in self.l_re)
        area_st = sum(origin.network_area for origin in self.origins.values())
        replacement = set()
        for origin in self.origins.values():
            replacement.update(origin.replacement_cells)
        other = sum(
            lib.cell_area(cell)
            for cell in self.netlist.cells.values()
            if cell.name not in self.l_re and cell.name not in replacement
        )
        return AreaReport(area_re, area_st, other)

    def origin_mask(self, name) -> LutMask:
        return self.origins[name].mask

    def remaining_mask(self, name) -> LutMask:
        return self.netlist.cells[name].mask


def _splice_network(netlist: Netlist, lut: Cell, network: staticgen.GateNetwork,
                    taken=None):
    """Replace a LUT cell by its gate network; returns the new cell names.

    ``taken`` is an optional pre-computed set of occupied names shared
    across many splices (avoids re-scanning the whole netlist per gate).
    """
    netlist.remove_cell(lut.name)
    if taken is None:
        taken = netlist.nets | set(netlist.cells)
    signal_to_net = {f"i{k}": lut.inputs[k] for k in range(len(lut.inputs))}
    signal_to_net[network.output] = lut.output
    new_names = []
    for idx, gate in enumerate(network.cells):
        out_net = signal_to_net.get(gate.output)
        if out_net is None:
            out_net = f"{lut.name}_sg{idx}"
            bump = 0
            while out_net in taken:
                out_net = f"{lut.name}_sg{idx}_{bump}"
                bump += 1
            taken.add(out_net)
            signal_to_net[gate.output] = out_net
        ins = tuple(signal_to_net[s] for s in gate.inputs)
        netlist.add_cell(Cell(out_net, gate.kind, ins, out_net))
        new_names.append(out_net)
    return tuple(new_names)


class _Engine:
    def __init__(self, netlist: Netlist, config: ObfuscationConfig):
        self.config = config
        self.lib = config.library
        self.netlist = netlist.copy()
        self.netlist.validate()
        self.graph = build_and_time(self.netlist, self.lib)
        self.l_re = {c.name for c in self.netlist.reconfigurable_luts()}
        self.l_st = set()
        self.origins = {}
        self.trace = []
        self.fallback_count = 0
        self._taken_names = self.netlist.nets | set(self.netlist.cells)
        self._candidate_cache = {}

    def _find_critical_cached(self, excluded):
        """Same result as timing.find_critical, but the per-endpoint
        candidate lists (worst path + one-level deviations) are cached
        between conversions: excluding a path does not retime the graph,
        so recomputing them would be pure waste."""
        candidates = []
        for triple in self.graph.endpoints():
            endpoint = triple[0]
            cached = self._candidate_cache.get(endpoint)
            if cached is None:
                cached = [endpoint_worst_path(self.graph, triple)]
                self._candidate_cache[endpoint] = cached
            if cached[0].path_id in excluded and len(cached) == 1:
                cached.extend(endpoint_deviations(self.graph, triple, cached[0]))
            for path in cached:
                if path.path_id not in excluded:
                    candidates.append(path)
                    break
        if not candidates:
            return None
        candidates.sort(key=lambda p: (-p.delay, p.endpoint, p.cells))
        return candidates[0]

    def run(self, target: int) -> "ObfuscationResult":
        excluded = set()
        iteration = 0
        while len(self.l_st) < target:
            path = self._find_critical_cached(excluded)
            if path is None:
                break
            lut = self._find_slowest(path)
            if lut is None:
                excluded.add(path.path_id)
                continue
            iteration += 1
            self._convert(lut, iteration, path.endpoint, fallback=False)
        if len(self.l_st) < target:
            for name in self._fallback_order():
                if len(self.l_st) >= target:
                    break
                iteration += 1
                self.fallback_count += 1
                self._convert(self.netlist.cells[name], iteration, None,
                              fallback=True)
        return ObfuscationResult(
            netlist=self.netlist,
            l_st=self.l_st,
            l_re=self.l_re,
            origins=self.origins,
            trace=self.trace,
            fallback_count=self.fallback_count,
            config=self.config,
            graph=self.graph,
        )

    def _find_slowest(self, path):
        """Max-delay reconfigurable LUT on the path; ties prefer the
        latest position on the path, then the cell name."""
        best = None
        best_key = None
        for pos, name in enumerate(path.cells):
            cell = self.netlist.cells[name]
            if not cell.is_reconfigurable:
                continue
            key = (self.graph.cell_delay(cell), pos, name)
            if best_key is None or key > best_key:
                best = cell
                best_key = key
        return best

    def _fallback_order(self):
        """Remaining LUTs by descending delay, then descending fanout,
        then ascending name."""
        fanout = {}
        for cell in self.netlist.cells.values():
            for net in cell.inputs:
                fanout[net] = fanout.get(net, 0) + 1
        for net in self.netlist.outputs:
            fanout[net] = fanout.get(net, 0) + 1
        order = sorted(
            self.l_re,
            key=lambda name: (
                -self.graph.cell_delay(self.netlist.cells[name]),
                -fanout.get(self.netlist.cells[name].output, 0),
                name,
            ),
        )
        return order

    def _convert(self, lut: Cell, iteration, endpoint, fallback):
        cp_before = self.graph.cp()
        network = staticgen.decompose_lut(lut.mask, self.lib)
        new_cells = _splice_network(self.netlist, lut, network,
                                    taken=self._taken_names)
        self.l_re.discard(lut.name)
        self.l_st.add(lut.name)
        self.origins[lut.name] = LutOrigin(
            mask=lut.mask,
            replacement_cells=new_cells,
            network_area=network.area,
            network_delay=network.delay,
        )
        update_timing(self.graph, list(new_cells), structural=True)
        self._candidate_cache.clear()
        cp_after = self.graph.cp()
        self.trace.append(ConversionRecord(
            iteration=iteration,
            lut=lut.name,
            width=lut.mask.width,
            endpoint=endpoint,
            cp_before=cp_before,
            cp_after=cp_after,
            fallback=fallback,
        ))


def run_obfuscation(netlist: Netlist, config: ObfuscationConfig) -> ObfuscationResult:
    """Convert LUTs to static logic until the obfuscation target is met.

    The input netlist is never mutated; the result owns a private copy.
    Identical inputs produce identical results, including the trace.
    """
    engine = _Engine(netlist, config)
    target = static_target(len(engine.l_re), config.obf_percent)
    return engine.run(target)


def gen_case_constraints(result: ObfuscationResult) -> list:
    """Input-forcing constants for every remaining reconfigurable LUT.

    For each LUT pin outside the mask's functional support, emit the
    constant 0 that deactivates the pin so downstream timing/power tools
    see the implemented arc instead of the worst-case one.  LUTs whose
    pins are all in support contribute no entries.
    """
    entries = []
    for name in sorted(result.l_re):
        cell = result.netlist.cells[name]
        support = lut_support(cell.mask)
        for pin in range(cell.mask.width):
            if pin not in support:
                entries.append({"lut_id": name, "pin": f"in{pin}", "constant": 0})
    return entries


SWEEP_CSV_HEADER = "obf,sum_cp_ns,cp_ns,area_re_um2,area_st_um2,lut_re,lut_st"


def sweep_level(netlist: Netlist, level, library=None, seed=0) -> dict:
    from .timing import report as timing_report

    config = ObfuscationConfig(obf_percent=level, seed=seed, library=library)
    result = run_obfuscation(netlist, config)
    rep = timing_report(result.graph)
    area = result.area_report()
    return {
        "obf": level,
        "sum_cp_ns": rep.sum_cp,
        "cp_ns": rep.cp,
        "area_re_um2": area.area_re,
        "area_st_um2": area.area_st,
        "lut_re": len(result.l_re),
        "lut_st": len(result.l_st),
    }


def _sweep_worker(args):
    netlist, level, library, seed = args
    return sweep_level(netlist, level, library, seed)


def sweep(netlist: Netlist, levels, library=None, seed=0, jobs=1) -> list:
    """One obfuscation run per level; rows mirror the sweep CSV columns."""
    for level in levels:
        if not 0 <= float(level) <= 100:
            raise ObfuscationError(f"sweep level {level} outside [0, 100]")
    if jobs > 1 and len(levels) > 1:
        from multiprocessing import Pool

        with Pool(min(jobs, len(levels))) as pool:
            rows = pool.map(
                _sweep_worker,
                [(netlist, lvl, library, seed) for lvl in levels],
            )
        return rows
    return [sweep_level(netlist, lvl, library, seed) for lvl in levels]


def sweep_to_csv(rows) -> str:
    lines = [SWEEP_CSV_HEADER]
    for row in rows:
        lines.append(
            f"{row['obf']},{row['sum_cp_ns']:.6f},{row['cp_ns']:.6f},"
            f"{row['area_re_um2']:.6f},{row['area_st_um2']:.6f},"
            f"{row['lut_re']},{row['lut_st']}"
        )
    return "\n".join(lines) + "\n"
