"""LUT-to-static-logic decomposition.

A masking pattern is turned into an equivalent gate network by building
a reduced ordered BDD (fixed variable order in_0 < in_1 < ... ) and
mapping every internal node to a MUX2, with peephole simplifications
that strip constants and reuse shared nodes.  Every produced network is
verified exhaustively against its source mask before it leaves this
module.
"""

from __future__ import annotations

from dataclasses import dataclass

from .netlist import LutMask
from .techlib import TechLibrary


class StaticGenError(Exception):
    """Internal failure: a generated network disagreed with its mask."""


@dataclass(frozen=True)
class Bdd:
    """Reduced ordered BDD.  Terminals are ids 0/1; internal node ids
    start at 2 and index ``nodes`` as (var, lo, hi) triples."""

    width: int
    nodes: tuple
    root: int

    @property
    def node_count(self):
        return len(self.nodes)

    def node(self, ref):
        return self.nodes[ref - 2]

    def eval(self, values) -> int:
        ref = self.root
        while ref > 1:
            var, lo, hi = self.node(ref)
            ref = hi if values[var] else lo
        return ref


def build_bdd(mask: LutMask) -> Bdd:
    """Shannon-expand the truth table into a reduced ordered BDD."""
    n = mask.width
    nodes = []
    unique = {}
    memo = {}

    def mk(var, lo, hi):
        if lo == hi:
            return lo
        key = (var, lo, hi)
        ref = unique.get(key)
        if ref is None:
            nodes.append(key)
            ref = len(nodes) + 1
            unique[key] = ref
        return ref

    def build(level, table):
        size = 1 << (n - level)
        if table == 0:
            return 0
        if table == (1 << size) - 1:
            return 1
        key = (level, table)
        ref = memo.get(key)
        if ref is not None:
            return ref
        half = size >> 1
        lo_t = 0
        hi_t = 0
        for i in range(half):
            pair = (table >> (2 * i)) & 3
            lo_t |= (pair & 1) << i
            hi_t |= (pair >> 1) << i
        ref = mk(level, build(level + 1, lo_t), build(level + 1, hi_t))
        memo[key] = ref
        return ref

    root = build(0, mask.bits)
    return Bdd(width=n, nodes=tuple(nodes), root=root)


@dataclass(frozen=True)
class NetGate:
    kind: str
    inputs: tuple   # signal names: "i<k>" for LUT pins, "t<k>" for internal
    output: str


@dataclass(frozen=True)
class GateNetwork:
    """Gate-level replacement for one LUT.

    Signals named ``i0..i{n-1}`` are the LUT data pins, ``t*`` are
    internal.  ``output`` is always driven by the last cell in ``cells``
    (a BUF/TIE is inserted when the function collapses to a wire or a
    constant), which keeps netlist splicing trivial.
    """

    width: int
    cells: tuple
    output: str
    depth: int
    delay: float
    area: float
    source_mask: LutMask

    @property
    def gate_count(self):
        return len(self.cells)

    def mux_class_gate_count(self):
        """Gates that realize a BDD node (excludes INV/BUF/TIE plumbing)."""
        return sum(1 for g in self.cells if g.kind in ("AND2", "OR2", "MUX2"))

    def eval_table(self) -> int:
        """Truth table of the network over all 2^width input vectors,
        computed bit-parallel (one int, bit v = output for vector v)."""
        size = 1 << self.width
        full = (1 << size) - 1
        values = {}
        for i in range(self.width):
            values[f"i{i}"] = _input_pattern(i, size)
        for gate in self.cells:
            ins = [values[s] for s in gate.inputs]
            if gate.kind == "INV":
                out = ins[0] ^ full
            elif gate.kind == "BUF":
                out = ins[0]
            elif gate.kind == "AND2":
                out = ins[0] & ins[1]
            elif gate.kind == "OR2":
                out = ins[0] | ins[1]
            elif gate.kind == "MUX2":
                s, a, b = ins
                out = (s & b) | ((s ^ full) & a)
            elif gate.kind == "TIE0":
                out = 0
            elif gate.kind == "TIE1":
                out = full
            else:
                raise StaticGenError(f"unexpected gate kind {gate.kind}")
            values[gate.output] = out
        return values[self.output]


def _input_pattern(i, size):
    """Packed truth table of variable i over vectors 0..size-1."""
    block = 1 << i
    pattern = ((1 << block) - 1) << block
    span = block << 1
    while span < size:
        pattern |= pattern << span
        span <<= 1
    return pattern


def bdd_to_gates(bdd: Bdd, lib: TechLibrary) -> GateNetwork:
    """Map BDD nodes to MUX2 gates with constant-stripping peepholes.

    Rules: MUX(s,0,1) is a wire, MUX(s,1,0) an INV, MUX(s,0,h) an
    AND2(s,h), MUX(s,l,0) an AND2(INV s, l), MUX(s,1,h) an
    OR2(INV s, h), MUX(s,l,1) an OR2(s,l).  Shared BDD nodes share
    gates; inverters on a signal are created once and reused.
    """
    cells = []
    counter = [0]
    inverters = {}
    signal_of = {}

    def fresh():
        name = f"t{counter[0]}"
        counter[0] += 1
        return name

    def emit(kind, ins):
        out = fresh()
        cells.append(NetGate(kind, tuple(ins), out))
        return out

    def inv(sig):
        cached = inverters.get(sig)
        if cached is None:
            cached = emit("INV", (sig,))
            inverters[sig] = cached
        return cached

    def walk(ref):
        cached = signal_of.get(ref)
        if cached is not None:
            return cached
        var, lo, hi = bdd.node(ref)
        sel = f"i{var}"
        if lo == 0 and hi == 1:
            sig = sel
        elif lo == 1 and hi == 0:
            sig = inv(sel)
        elif lo == 0:
            sig = emit("AND2", (sel, walk(hi)))
        elif hi == 0:
            sig = emit("AND2", (inv(sel), walk(lo)))
        elif lo == 1:
            sig = emit("OR2", (inv(sel), walk(hi)))
        elif hi == 1:
            sig = emit("OR2", (sel, walk(lo)))
        else:
            sig = emit("MUX2", (sel, walk(lo), walk(hi)))
        signal_of[ref] = sig
        return sig

    if bdd.root == 0:
        root_sig = emit("TIE0", ())
    elif bdd.root == 1:
        root_sig = emit("TIE1", ())
    else:
        root_sig = walk(bdd.root)
        if root_sig.startswith("i"):
            root_sig = emit("BUF", (root_sig,))

    depth, delay = _levelize(cells, lib)
    area = sum(lib.gate_area[g.kind] for g in cells)
    return GateNetwork(
        width=bdd.width,
        cells=tuple(cells),
        output=root_sig,
        depth=depth,
        delay=delay,
        area=area,
        source_mask=None,
    )


def _levelize(cells, lib):
    depth = {}
    arrival = {}
    worst_depth = 0
    worst_delay = 0.0
    for gate in cells:
        d = 1 + max((depth.get(s, 0) for s in gate.inputs), default=0)
        t = lib.gate_delay[gate.kind] + max(
            (arrival.get(s, 0.0) for s in gate.inputs), default=0.0)
        depth[gate.output] = d
        arrival[gate.output] = t
        worst_depth = max(worst_depth, d)
        worst_delay = max(worst_delay, t)
    return worst_depth, worst_delay


def decompose_lut(mask: LutMask, lib: TechLibrary) -> GateNetwork:
    """Equivalent static logic for one masking pattern, verified.

    The result's function over every input vector equals the mask; a
    mismatch is an internal error and never ships.  Under the calibrated
    default library the network delay never exceeds the LUT delay.
    """
    bdd = build_bdd(mask)
    network = bdd_to_gates(bdd, lib)
    network = GateNetwork(
        width=network.width,
        cells=network.cells,
        output=network.output,
        depth=network.depth,
        delay=network.delay,
        area=network.area,
        source_mask=mask,
    )
    if network.eval_table() != mask.bits:
        raise StaticGenError(
            f"decomposition of {mask} produced a non-equivalent network"
        )
    return network
