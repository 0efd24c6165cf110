"""Structural Verilog emission for hybrid netlists.

Reconfigurable LUTs become LUTn macro instances with data pins I0..In-1
and configuration pins serial_in / serial_out / enable, daisy-chained in
the same lexicographic order the bitstream uses.  Static cells become
library gate instances.  Output is deterministic: identical netlists
yield byte-identical text.
"""

from __future__ import annotations

import re

from .netlist import Netlist

CONFIG_PINS = ("serial_in", "serial_out", "enable")

_VERILOG_KEYWORDS = frozenset("""
module endmodule input output inout wire reg assign always initial begin end
if else case endcase for while integer parameter localparam function
endfunction task endtask posedge negedge or and not nand nor xor xnor buf
supply0 supply1 tri signed unsigned genvar generate endgenerate
""".split())

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class VerilogEmitError(Exception):
    pass


def legalize(name: str) -> str:
    """Map a netlist name onto a legal plain Verilog identifier."""
    if _IDENT.match(name) and name not in _VERILOG_KEYWORDS:
        return name
    candidate = re.sub(r"[^A-Za-z0-9_]", "_", name)
    if not candidate or not re.match(r"[A-Za-z_]", candidate):
        candidate = "n_" + candidate
    if candidate in _VERILOG_KEYWORDS:
        candidate = candidate + "_"
    return candidate


class _Namer:
    def __init__(self):
        self.by_original = {}
        self.owner = {}

    def get(self, original: str) -> str:
        cached = self.by_original.get(original)
        if cached is not None:
            return cached
        legal = legalize(original)
        if legal in self.owner and self.owner[legal] != original:
            raise VerilogEmitError(
                f"identifier collision after legalization: {original!r} and "
                f"{self.owner[legal]!r} both map to {legal!r}"
            )
        self.owner[legal] = original
        self.by_original[original] = legal
        return legal

    def reserve(self, literal: str):
        if literal in self.owner and self.owner[literal] != literal:
            raise VerilogEmitError(
                f"identifier collision after legalization: {literal!r} and "
                f"{self.owner[literal]!r} both map to {literal!r}"
            )
        self.owner[literal] = literal
        self.by_original[literal] = literal
        return literal


def emit_verilog(netlist: Netlist) -> str:
    netlist.validate()
    chain = netlist.chain_order()
    namer = _Namer()

    passthrough = set(netlist.inputs) & set(netlist.outputs)
    if passthrough:
        raise VerilogEmitError(
            f"output(s) {sorted(passthrough)} are wired straight to primary "
            "inputs; a Verilog port cannot be both, insert a buffer cell"
        )

    ports = []
    for net in netlist.inputs:
        ports.append(("input", namer.get(net)))
    if netlist.clock is not None and netlist.clock not in netlist.inputs:
        ports.append(("input", namer.get(netlist.clock)))
    for net in netlist.outputs:
        ports.append(("output", namer.get(net)))
    if chain:
        for pin in CONFIG_PINS:
            namer.reserve(pin)
        ports.append(("input", "serial_in"))
        ports.append(("input", "enable"))
        ports.append(("output", "serial_out"))

    # every cell gets an instance name in the same namespace as the nets
    instance_of = {}
    for name in sorted(netlist.cells):
        instance_of[name] = namer.get(f"u_{name}")

    port_nets = {net for _, net in ports}
    wires = []
    for net in sorted(netlist.nets):
        legal = namer.get(net)
        if legal not in port_nets:
            wires.append(legal)

    chain_wires = []
    for i in range(max(0, len(chain) - 1)):
        chain_wires.append(namer.reserve(f"cfg_chain_{i}"))

    lines = []
    lines.append(f"// structural hybrid netlist: {netlist.name}")
    lines.append(f"module {legalize(netlist.name)} (")
    decls = [f"  {direction} {net}" for direction, net in ports]
    lines.append(",\n".join(decls))
    lines.append(");")
    lines.append("")
    for wire in sorted(set(wires) | set(chain_wires)):
        lines.append(f"  wire {wire};")
    if wires or chain_wires:
        lines.append("")

    serial_nets = {}
    for idx, cell in enumerate(chain):
        sin = "serial_in" if idx == 0 else chain_wires[idx - 1]
        sout = "serial_out" if idx == len(chain) - 1 else chain_wires[idx]
        serial_nets[cell.name] = (sin, sout)

    for name in sorted(netlist.cells):
        cell = netlist.cells[name]
        inst = instance_of[name]
        if cell.is_lut:
            if not cell.is_reconfigurable:
                raise VerilogEmitError(
                    f"static LUT cell {name} has no macro form; decompose it "
                    "to gates before emitting Verilog"
                )
            width = cell.mask.width
            pins = [f".I{k}({namer.get(net)})"
                    for k, net in enumerate(cell.inputs)]
            pins.append(f".O({namer.get(cell.output)})")
            sin, sout = serial_nets[name]
            pins.append(f".serial_in({sin})")
            pins.append(f".serial_out({sout})")
            pins.append(".enable(enable)")
            lines.append(f"  LUT{width} {inst} ({', '.join(pins)});")
        elif cell.is_ff:
            d = namer.get(cell.inputs[0])
            clk = namer.get(cell.inputs[1])
            q = namer.get(cell.output)
            lines.append(
                f"  DFF {inst} (.D({d}), .CLK({clk}), .Q({q}));"
                + (f"  // init={cell.init}" if cell.init else "")
            )
        elif cell.kind in ("TIE0", "TIE1"):
            lines.append(f"  {cell.kind} {inst} (.Y({namer.get(cell.output)}));")
        elif cell.kind in ("INV", "BUF"):
            a = namer.get(cell.inputs[0])
            lines.append(
                f"  {cell.kind} {inst} (.A({a}), .Y({namer.get(cell.output)}));"
            )
        elif cell.kind == "MUX2":
            s, a, b = (namer.get(n) for n in cell.inputs)
            lines.append(
                f"  MUX2 {inst} (.S({s}), .A({a}), .B({b}), "
                f".Y({namer.get(cell.output)}));"
            )
        else:
            a, b = (namer.get(n) for n in cell.inputs)
            lines.append(
                f"  {cell.kind} {inst} (.A({a}), .B({b}), "
                f".Y({namer.get(cell.output)}));"
            )

    lines.append("")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"
