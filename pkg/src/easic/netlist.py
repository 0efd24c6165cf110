"""In-memory netlist representation plus the BLIF subset reader/writer.

The netlist is a flat directed graph of cells (LUTs, FFs, static gates,
constants) connected by named nets.  LUT truth tables use the convention
that the first input of a ``.names`` block is ``in_0`` and selects the
least-significant bit of the minterm index: a LUT with inputs
``(in_0 .. in_{n-1})`` outputs ``bit[i]`` of its mask when the inputs
encode ``i`` in binary with ``in_0`` as LSB.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

MODE_RE = "reconfigurable"
MODE_ST = "static"

KIND_LUT = "LUT"
KIND_FF = "FF"

# gate kind -> (arity, truth-table bits under the in_0-is-LSB convention)
GATE_TRUTH = {
    "INV": (1, 0b01),
    "BUF": (1, 0b10),
    "AND2": (2, 0x8),
    "OR2": (2, 0xE),
    "NAND2": (2, 0x7),
    "NOR2": (2, 0x1),
    # MUX2 pins are (S, A, B); output is B when S=1 else A
    "MUX2": (3, 0xE4),
    "TIE0": (0, 0b0),
    "TIE1": (0, 0b1),
}

GATE_KINDS = frozenset(GATE_TRUTH)
MAX_LUT_WIDTH = 6


class NetlistError(Exception):
    """Structural violation in a netlist (bad arity, cycle, driver clash)."""


class BlifError(Exception):
    """BLIF text that does not conform to the supported subset."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class LutMask:
    """Canonical 2^width-bit truth table of a LUT."""

    width: int
    bits: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_LUT_WIDTH:
            raise NetlistError(f"LUT width {self.width} outside 1..{MAX_LUT_WIDTH}")
        if not 0 <= self.bits < (1 << (1 << self.width)):
            raise NetlistError(
                f"mask 0x{self.bits:x} does not fit in {1 << self.width} bits"
            )

    @property
    def table_size(self):
        return 1 << self.width

    def eval_index(self, index: int) -> int:
        return (self.bits >> index) & 1

    def eval(self, values) -> int:
        """Evaluate on a sequence of 0/1 input values (in_0 first)."""
        index = 0
        for i, v in enumerate(values):
            index |= (v & 1) << i
        return (self.bits >> index) & 1

    def lifted(self, width: int) -> "LutMask":
        """View this function as a wider LUT whose extra inputs are ignored.

        The truth table is replicated once per assignment of the unused
        upper inputs, so equal functions lift to equal patterns.
        """
        if width < self.width:
            raise NetlistError("cannot lift a mask to a smaller width")
        copies = 1 << (width - self.width)
        out = 0
        for j in range(copies):
            out |= self.bits << (j * self.table_size)
        return LutMask(width, out)

    def __str__(self):
        return f"LUT{self.width}:0x{self.bits:0{max(1, self.table_size // 4)}x}"


@dataclass
class Cell:
    """One netlist cell.  ``inputs`` are net names in pin order.

    Pin orders: LUT (in_0..in_{n-1}); FF (D, clk); MUX2 (S, A, B);
    two-input gates (A, B); INV/BUF (A); TIE cells have no inputs.
    """

    name: str
    kind: str
    inputs: tuple
    output: str
    mask: LutMask | None = None
    mode: str = MODE_ST
    init: int = 0  # FF power-up value

    def __post_init__(self):
        self.inputs = tuple(self.inputs)
        if self.kind == KIND_LUT:
            if self.mask is None:
                raise NetlistError(f"LUT cell {self.name} has no mask")
            if len(self.inputs) != self.mask.width:
                raise NetlistError(
                    f"LUT cell {self.name}: {len(self.inputs)} inputs "
                    f"vs mask width {self.mask.width}"
                )
        elif self.kind == KIND_FF:
            if len(self.inputs) != 2:
                raise NetlistError(f"FF cell {self.name} needs inputs (D, clk)")
        elif self.kind in GATE_TRUTH:
            arity = GATE_TRUTH[self.kind][0]
            if len(self.inputs) != arity:
                raise NetlistError(
                    f"{self.kind} cell {self.name} needs {arity} inputs, "
                    f"got {len(self.inputs)}"
                )
            if self.mode != MODE_ST:
                raise NetlistError(
                    f"cell {self.name}: mode {self.mode} is only legal for LUTs"
                )
        else:
            raise NetlistError(f"unknown cell kind {self.kind!r} ({self.name})")

    @property
    def is_lut(self):
        return self.kind == KIND_LUT

    @property
    def is_ff(self):
        return self.kind == KIND_FF

    @property
    def is_reconfigurable(self):
        return self.kind == KIND_LUT and self.mode == MODE_RE

    def comb_inputs(self):
        """Input nets that matter for combinational traversal."""
        if self.kind == KIND_FF:
            return ()
        return self.inputs

    def copy(self):
        return replace(self)


@dataclass
class Netlist:
    name: str
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    cells: dict = field(default_factory=dict)
    clock: str | None = None

    def add_cell(self, cell: Cell):
        if cell.name in self.cells:
            raise NetlistError(f"duplicate cell name {cell.name}")
        self.cells[cell.name] = cell

    def remove_cell(self, name: str):
        del self.cells[name]

    @property
    def nets(self):
        nets = set(self.inputs) | set(self.outputs)
        if self.clock is not None:
            nets.add(self.clock)
        for cell in self.cells.values():
            nets.add(cell.output)
            nets.update(cell.inputs)
        return nets

    def fresh_net(self, prefix: str) -> str:
        nets = self.nets
        if prefix not in nets and prefix not in self.cells:
            return prefix
        k = 0
        while f"{prefix}_{k}" in nets or f"{prefix}_{k}" in self.cells:
            k += 1
        return f"{prefix}_{k}"

    def driver_map(self):
        """net -> driving cell name; primary inputs and the clock map to None."""
        drivers = {}
        for net in self.inputs:
            drivers[net] = None
        if self.clock is not None:
            drivers.setdefault(self.clock, None)
        for cell in sorted(self.cells.values(), key=lambda c: c.name):
            if cell.output in drivers:
                raise NetlistError(
                    f"net {cell.output} is multiply driven (by {cell.name}"
                    f"{' and a primary input' if drivers[cell.output] is None else ' and ' + drivers[cell.output]})"
                )
            drivers[cell.output] = cell.name
        return drivers

    def luts(self):
        return [c for c in self.cells.values() if c.is_lut]

    def reconfigurable_luts(self):
        return [c for c in self.cells.values() if c.is_reconfigurable]

    def chain_order(self):
        """Reconfigurable LUTs sorted by cell name; the daisy-chain order."""
        return sorted(self.reconfigurable_luts(), key=lambda c: c.name)

    @property
    def is_sequential(self):
        return any(c.is_ff for c in self.cells.values())

    def copy(self) -> "Netlist":
        return Netlist(
            name=self.name,
            inputs=list(self.inputs),
            outputs=list(self.outputs),
            cells={k: v.copy() for k, v in self.cells.items()},
            clock=self.clock,
        )

    # -- validation ----------------------------------------------------

    def validate(self):
        """Check driver uniqueness, connectivity, clocking, and acyclicity."""
        if len(set(self.inputs)) != len(self.inputs):
            raise NetlistError("duplicate primary input")
        if len(set(self.outputs)) != len(self.outputs):
            raise NetlistError("duplicate primary output")
        drivers = self.driver_map()

        clocks = {c.inputs[1] for c in self.cells.values() if c.is_ff}
        if len(clocks) > 1:
            raise NetlistError(f"multiple clocks: {sorted(clocks)}")
        if clocks:
            (clk,) = clocks
            if self.clock is None:
                self.clock = clk
            elif self.clock != clk:
                raise NetlistError(f"clock mismatch: {self.clock} vs {clk}")
            if drivers.get(clk) is not None:
                raise NetlistError(f"clock net {clk} driven by cell {drivers[clk]}")

        for cell in self.cells.values():
            used = cell.inputs if not cell.is_ff else cell.inputs[:1]
            for net in used:
                if net not in drivers:
                    raise NetlistError(
                        f"net {net} used by cell {cell.name} has no driver"
                    )
        for net in self.outputs:
            if net not in drivers:
                raise NetlistError(f"primary output {net} has no driver")

        self._check_acyclic(drivers)
        return self

    def _check_acyclic(self, drivers):
        """Kahn's algorithm over the combinational subgraph (FFs cut)."""
        comb = [c for c in self.cells.values() if not c.is_ff]
        indeg = {}
        consumers = {}
        for cell in comb:
            n = 0
            for net in cell.comb_inputs():
                drv = drivers.get(net)
                if drv is not None and not self.cells[drv].is_ff:
                    n += 1
                    consumers.setdefault(drv, []).append(cell.name)
            indeg[cell.name] = n
        ready = [name for name, n in indeg.items() if n == 0]
        seen = 0
        while ready:
            name = ready.pop()
            seen += 1
            for nxt in consumers.get(name, ()):
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    ready.append(nxt)
        if seen != len(comb):
            stuck = sorted(n for n, d in indeg.items() if d > 0)
            raise NetlistError(f"combinational cycle through {stuck[:8]}")

    def topo_cells(self):
        """Combinational cells in topological order, then FFs (sorted)."""
        drivers = self.driver_map()
        comb = [c for c in self.cells.values() if not c.is_ff]
        indeg = {}
        consumers = {}
        for cell in comb:
            n = 0
            for net in cell.comb_inputs():
                drv = drivers.get(net)
                if drv is not None and not self.cells[drv].is_ff:
                    n += 1
                    consumers.setdefault(drv, []).append(cell.name)
            indeg[cell.name] = n
        import heapq

        ready = [name for name, n in sorted(indeg.items()) if n == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            name = heapq.heappop(ready)
            order.append(self.cells[name])
            for nxt in consumers.get(name, ()):
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    heapq.heappush(ready, nxt)
        if len(order) != len(comb):
            raise NetlistError("combinational cycle")
        order.extend(sorted((c for c in self.cells.values() if c.is_ff),
                            key=lambda c: c.name))
        return order


@dataclass
class NetlistStats:
    lut_re_by_width: dict
    lut_st_by_width: dict
    ff_count: int
    gate_count: int
    input_count: int
    output_count: int

    @property
    def lut_re(self):
        return sum(self.lut_re_by_width.values())

    @property
    def lut_st(self):
        return sum(self.lut_st_by_width.values())

    @property
    def lut_total(self):
        return self.lut_re + self.lut_st


def stats(netlist: Netlist) -> NetlistStats:
    """Count LUTs per width per mode, FFs, gates, and ports."""
    re_w = {}
    st_w = {}
    ff = 0
    gates = 0
    for cell in netlist.cells.values():
        if cell.is_lut:
            target = re_w if cell.mode == MODE_RE else st_w
            target[cell.mask.width] = target.get(cell.mask.width, 0) + 1
        elif cell.is_ff:
            ff += 1
        else:
            gates += 1
    return NetlistStats(re_w, st_w, ff, gates,
                        len(netlist.inputs), len(netlist.outputs))


# ---------------------------------------------------------------------------
# BLIF subset reader
# ---------------------------------------------------------------------------

_STATIC_MARK = re.compile(r"#\s*@static\s+(\S+)\s*$")


def _expand_cube(pattern, lineno):
    """Minterm indices covered by one cube (in_0 = first char = LSB)."""
    indices = [0]
    for pos, ch in enumerate(pattern):
        if ch == "1":
            indices = [i | (1 << pos) for i in indices]
        elif ch == "-":
            indices = indices + [i | (1 << pos) for i in indices]
        elif ch != "0":
            raise BlifError(f"bad cube character {ch!r}", lineno)
    return indices


def _cover_to_mask(n_inputs, rows):
    """Fold (pattern, value, lineno) cover rows into a truth-table int."""
    out_values = {value for _, value, _ in rows}
    if len(out_values) > 1:
        raise BlifError("cover mixes output values 0 and 1", rows[0][2])
    bits = 0
    for pattern, _, lineno in rows:
        if len(pattern) != n_inputs:
            raise BlifError(
                f"cube width {len(pattern)} does not match {n_inputs} inputs",
                lineno,
            )
        for idx in _expand_cube(pattern, lineno):
            bits |= 1 << idx
    if rows and rows[0][1] == "0":
        bits = ((1 << (1 << n_inputs)) - 1) & ~bits
    return bits


class _BlifReader:
    def __init__(self, text):
        self.netlist = Netlist(name="top")
        self.pending_static = None
        self.pending_line = None
        self.seen_model = False
        self.lines = self._logical_lines(text)

    @staticmethod
    def _logical_lines(text):
        """Strip comments, join backslash continuations, keep line numbers."""
        out = []
        buf = ""
        buf_line = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            mark = _STATIC_MARK.search(raw)
            if mark:
                out.append((lineno, "#@static", mark.group(1)))
                continue
            if "#" in raw:
                raw = raw[: raw.index("#")]
            raw = raw.rstrip()
            if raw.endswith("\\"):
                buf += raw[:-1] + " "
                if buf_line is None:
                    buf_line = lineno
                continue
            line = (buf + raw).strip()
            start = buf_line if buf_line is not None else lineno
            buf = ""
            buf_line = None
            if line:
                out.append((start, "line", line))
        if buf.strip():
            out.append((buf_line, "line", buf.strip()))
        return out

    def run(self):
        i = 0
        n = len(self.lines)
        ended = False
        while i < n:
            lineno, kind, payload = self.lines[i]
            if kind == "#@static":
                self.pending_static = payload
                self.pending_line = lineno
                i += 1
                continue
            tokens = payload.split()
            head = tokens[0]
            if head == ".model":
                if self.seen_model:
                    raise BlifError("multiple .model directives", lineno)
                self.seen_model = True
                self.netlist.name = tokens[1] if len(tokens) > 1 else "top"
                i += 1
            elif head == ".inputs":
                self.netlist.inputs.extend(tokens[1:])
                i += 1
            elif head == ".outputs":
                self.netlist.outputs.extend(tokens[1:])
                i += 1
            elif head == ".names":
                i = self._read_names(i, lineno, tokens[1:])
            elif head == ".latch":
                self._read_latch(lineno, tokens[1:])
                i += 1
            elif head == ".end":
                ended = True
                i += 1
                break
            elif head.startswith("."):
                raise BlifError(f"unsupported directive {head}", lineno)
            else:
                raise BlifError(f"unexpected text {payload!r}", lineno)
        if not ended and not self.seen_model:
            raise BlifError("missing .model directive", 1)
        try:
            self.netlist.validate()
        except NetlistError as exc:
            raise BlifError(str(exc)) from exc
        return self.netlist

    def _take_static(self):
        mark = self.pending_static
        self.pending_static = None
        return mark

    def _read_names(self, i, lineno, signals):
        if not signals:
            raise BlifError(".names without an output", lineno)
        inputs, output = signals[:-1], signals[-1]
        if len(inputs) > MAX_LUT_WIDTH:
            raise BlifError(
                f".names block has {len(inputs)} inputs "
                f"(at most {MAX_LUT_WIDTH} supported)",
                lineno,
            )
        rows = []
        i += 1
        while i < len(self.lines):
            row_line, kind, payload = self.lines[i]
            if kind != "line" or payload.startswith("."):
                break
            tokens = payload.split()
            if inputs:
                if len(tokens) != 2:
                    raise BlifError(f"bad cover row {payload!r}", row_line)
                pattern, value = tokens
            else:
                if len(tokens) != 1:
                    raise BlifError(f"bad cover row {payload!r}", row_line)
                pattern, value = "", tokens[0]
            if value not in ("0", "1"):
                raise BlifError(f"bad cover output {value!r}", row_line)
            rows.append((pattern, value, row_line))
            i += 1
        bits = _cover_to_mask(len(inputs), rows)
        mark = self._take_static()
        self._make_names_cell(lineno, inputs, output, bits, mark)
        return i

    def _make_names_cell(self, lineno, inputs, output, bits, mark):
        if not inputs:
            kind = "TIE1" if bits & 1 else "TIE0"
            if mark not in (None, kind):
                raise BlifError(
                    f"@static {mark} does not match constant block {kind}", lineno
                )
            cell = Cell(output, kind, (), output)
        elif mark is None:
            cell = Cell(output, KIND_LUT, tuple(inputs), output,
                        mask=LutMask(len(inputs), bits), mode=MODE_RE)
        elif mark == KIND_LUT:
            cell = Cell(output, KIND_LUT, tuple(inputs), output,
                        mask=LutMask(len(inputs), bits), mode=MODE_ST)
        else:
            if mark not in GATE_TRUTH:
                raise BlifError(f"unknown @static kind {mark}", lineno)
            arity, truth = GATE_TRUTH[mark]
            if arity != len(inputs):
                raise BlifError(
                    f"@static {mark} expects {arity} inputs, got {len(inputs)}",
                    lineno,
                )
            if truth != bits:
                raise BlifError(
                    f"cover 0x{bits:x} does not match {mark} truth table "
                    f"0x{truth:x}",
                    lineno,
                )
            cell = Cell(output, mark, tuple(inputs), output)
        try:
            self.netlist.add_cell(cell)
        except NetlistError as exc:
            raise BlifError(str(exc), lineno) from exc

    def _read_latch(self, lineno, tokens):
        if self._take_static() is not None:
            raise BlifError("@static mark before .latch", lineno)
        if len(tokens) < 2:
            raise BlifError(".latch needs input and output", lineno)
        d, q = tokens[0], tokens[1]
        rest = tokens[2:]
        init = 0
        control = None
        if len(rest) == 1:
            init = self._parse_init(rest[0], lineno)
        elif len(rest) >= 2:
            ltype, control = rest[0], rest[1]
            if ltype not in ("re", "fe", "ah", "al", "as"):
                raise BlifError(f"unknown latch type {ltype}", lineno)
            if control == "NIL":
                control = None
            if len(rest) == 3:
                init = self._parse_init(rest[2], lineno)
            elif len(rest) > 3:
                raise BlifError("too many .latch fields", lineno)
        clk = control if control is not None else "clock"
        if self.netlist.clock is None:
            self.netlist.clock = clk
        elif self.netlist.clock != clk:
            raise BlifError(
                f"multiple clocks: {self.netlist.clock} and {clk}", lineno
            )
        try:
            self.netlist.add_cell(Cell(q, KIND_FF, (d, clk), q, init=init))
        except NetlistError as exc:
            raise BlifError(str(exc), lineno) from exc

    @staticmethod
    def _parse_init(token, lineno):
        if token not in ("0", "1", "2", "3"):
            raise BlifError(f"bad latch init value {token}", lineno)
        # don't-care / unknown power-up states default to 0
        return 1 if token == "1" else 0


def parse_blif(text: str) -> Netlist:
    """Parse a BLIF subset (.model/.inputs/.outputs/.names/.latch/.end).

    Every plain ``.names`` block becomes a reconfigurable LUT whose mask
    is computed by cube expansion; zero-input blocks become TIE cells;
    ``.latch`` becomes an FF.  A ``# @static KIND`` comment immediately
    before a ``.names`` block rebuilds a static cell of that kind, which
    is what makes emit_blif round-trippable.
    """
    return _BlifReader(text).run()


# ---------------------------------------------------------------------------
# BLIF subset writer
# ---------------------------------------------------------------------------


def _mask_cubes(mask: LutMask):
    rows = []
    for idx in range(mask.table_size):
        if (mask.bits >> idx) & 1:
            pattern = "".join("1" if (idx >> j) & 1 else "0"
                              for j in range(mask.width))
            rows.append(f"{pattern} 1")
    return rows


_GATE_COVERS = {
    "INV": ["0 1"],
    "BUF": ["1 1"],
    "AND2": ["11 1"],
    "OR2": ["1- 1", "-1 1"],
    "NAND2": ["0- 1", "-0 1"],
    "NOR2": ["00 1"],
    "MUX2": ["01- 1", "1-1 1"],
    "TIE0": [],
    "TIE1": ["1"],
}


def emit_blif(netlist: Netlist) -> str:
    """Write the netlist back as BLIF; static cells carry @static marks."""
    netlist.validate()
    lines = [f".model {netlist.name}"]
    if netlist.inputs:
        lines.append(".inputs " + " ".join(netlist.inputs))
    if netlist.outputs:
        lines.append(".outputs " + " ".join(netlist.outputs))
    cells = sorted(netlist.cells.values(), key=lambda c: c.name)
    for cell in cells:
        if cell.is_ff:
            lines.append(
                f".latch {cell.inputs[0]} {cell.output} re {cell.inputs[1]} "
                f"{cell.init}"
            )
    for cell in cells:
        if cell.is_ff:
            continue
        if cell.is_lut:
            if cell.mode == MODE_ST:
                lines.append("# @static LUT")
            lines.append(".names " + " ".join((*cell.inputs, cell.output)))
            lines.extend(_mask_cubes(cell.mask))
        else:
            lines.append(f"# @static {cell.kind}")
            lines.append(".names " + " ".join((*cell.inputs, cell.output)))
            lines.extend(_GATE_COVERS[cell.kind])
    lines.append(".end")
    return "\n".join(lines) + "\n"


def isomorphic(a: Netlist, b: Netlist) -> bool:
    """Name-preserving structural equality (cells, ports, modes, masks)."""
    if (a.inputs, a.outputs) != (b.inputs, b.outputs):
        return False
    if set(a.cells) != set(b.cells):
        return False
    for name, ca in a.cells.items():
        cb = b.cells[name]
        if (ca.kind, ca.inputs, ca.output, ca.mask, ca.mode, ca.init) != (
            cb.kind, cb.inputs, cb.output, cb.mask, cb.mode, cb.init
        ):
            return False
    return True
