#!/usr/bin/env python3
"""Generate the benchmark BLIF corpus under designs/.

Each builder writes a small but structurally realistic circuit: LUT
functions are computed from Python lambdas, so the emitted cover rows
are correct by construction.  Besides the generic arithmetic/control
skeleton (xor/and/mux chains shared across designs), every design packs
a few wide design-specific LUTs over its deepest nets, the way FPGA
packing fuses logic at the ends of timing paths.  Run from the
repository root:

    python3 scripts/make_designs.py
"""

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from easic import parse_blif, stats  # noqa: E402


class BlifBuilder:
    def __init__(self, name):
        self.name = name
        self.inputs = []
        self.outputs = []
        self.body = []

    def pi(self, *names):
        self.inputs.extend(names)
        return names if len(names) > 1 else names[0]

    def po(self, *names):
        self.outputs.extend(names)

    def lut(self, out, ins, fn):
        """One .names block; fn maps a 0/1 tuple (in order) to 0/1."""
        self.body.append(".names " + " ".join((*ins, out)))
        n = len(ins)
        rows = []
        for idx in range(1 << n):
            vec = tuple((idx >> j) & 1 for j in range(n))
            if fn(*vec):
                rows.append("".join(str(v) for v in vec) + " 1")
        self.body.extend(rows)
        return out

    def digest(self, prefix, windows, fn):
        """Design-signature layer: the same wide function over several
        windows of deep nets; emitted as primary outputs."""
        outs = []
        for j, window in enumerate(windows):
            out = f"{prefix}{j}"
            self.lut(out, tuple(window), fn)
            outs.append(out)
        self.po(*outs)
        return outs

    def ff(self, d, q, init=0):
        self.body.append(f".latch {d} {q} re clk {init}")
        return q

    def text(self):
        lines = [f".model {self.name}"]
        lines.append(".inputs " + " ".join(self.inputs))
        lines.append(".outputs " + " ".join(self.outputs))
        lines.extend(self.body)
        lines.append(".end")
        return "\n".join(lines) + "\n"


def xor2(a, b):
    return a ^ b


def xor3(a, b, c):
    return a ^ b ^ c


def maj3(a, b, c):
    return (a & b) | (a & c) | (b & c)


def and2(a, b):
    return a & b


def or2(a, b):
    return a | b


def mux(s, a, b):
    return b if s else a


def build_adder8():
    """8-bit ripple-carry adder plus saturation-style output digests."""
    b = BlifBuilder("adder8")
    a = [b.pi(f"a{i}") for i in range(8)]
    y = [b.pi(f"b{i}") for i in range(8)]
    b.po(*[f"s{i}" for i in range(8)], "cout")
    b.lut("s0", (a[0], y[0]), xor2)
    b.lut("c1", (a[0], y[0]), and2)
    carry = "c1"
    for i in range(1, 8):
        b.lut(f"s{i}", (a[i], y[i], carry), xor3)
        nxt = f"c{i + 1}" if i < 7 else "cout"
        b.lut(nxt, (a[i], y[i], carry), maj3)
        carry = nxt
    b.digest("dga", [("s5", "s6", "s7", "cout", "c6"),
                     ("s4", "s5", "s6", "cout", "c7"),
                     ("s3", "s5", "s7", "cout", "c5")],
             lambda p, q, r, s, t: (p & q) ^ (r | s) ^ t)
    return b


def build_incr8():
    """8-bit incrementer with carry-run digests."""
    b = BlifBuilder("incr8")
    x = [b.pi(f"x{i}") for i in range(8)]
    b.po(*[f"y{i}" for i in range(8)], "wrap")
    b.lut("y0", (x[0],), lambda a: 1 - a)
    carry = x[0]
    for i in range(1, 8):
        b.lut(f"y{i}", (x[i], carry), xor2)
        nxt = f"p{i}" if i < 7 else "wrap"
        b.lut(nxt, (x[i], carry), and2)
        carry = nxt
    b.digest("dgi", [("y7", "wrap", "y6", "p6", "p5"),
                     ("y6", "wrap", "y7", "p5", "p4"),
                     ("y5", "wrap", "y7", "p6", "p4")],
             lambda p, q, r, s, t: (p & r) | (q & t) | (p ^ s))
    return b


def build_parity12():
    """XOR3 reduction tree with an XOR4 final stage and parity digests."""
    b = BlifBuilder("parity12")
    x = [b.pi(f"x{i}") for i in range(12)]
    b.po("p", "q")
    for j in range(4):
        b.lut(f"t{j}", tuple(x[3 * j:3 * j + 3]), xor3)
    b.lut("p", ("t0", "t1", "t2", "t3"), lambda a, c, d, e: a ^ c ^ d ^ e)
    b.lut("q", ("t0", "t1"), xor2)
    b.digest("dgp", [("p", "q", "t0", "t1", "t3"),
                     ("p", "q", "t1", "t2", "t0"),
                     ("p", "q", "t2", "t3", "t1")],
             lambda p, q, r, s, t: (p & q & r) ^ s ^ (1 - t))
    return b


def build_cmp4():
    """4-bit comparator built from packed 2-bit group LUT4s."""
    b = BlifBuilder("cmp4")
    a = [b.pi(f"a{i}") for i in range(4)]
    y = [b.pi(f"b{i}") for i in range(4)]
    b.po("eq", "gt")

    def group_eq(p, q, r, s):
        return 1 if (p == q and r == s) else 0

    def group_gt(p, q, r, s):
        # (r,p) > (s,q) with r/s the high bits
        return 1 if (r, p) > (s, q) else 0

    b.lut("eqg0", (a[0], y[0], a[1], y[1]), group_eq)
    b.lut("eqg1", (a[2], y[2], a[3], y[3]), group_eq)
    b.lut("gtg0", (a[0], y[0], a[1], y[1]), group_gt)
    b.lut("gtg1", (a[2], y[2], a[3], y[3]), group_gt)
    b.lut("gt", ("gtg1", "eqg1", "gtg0"), lambda g, e, r: g | (e & r))
    b.lut("eq", ("eqg0", "eqg1"), and2)
    b.digest("dgc", [("gt", "eq", "gtg1", "eqg0", "gtg0"),
                     ("gt", "eq", "gtg0", "eqg1", "gtg1"),
                     ("gt", "eq", "eqg1", "gtg0", "eqg0")],
             lambda p, q, r, s, t: (p & (1 - q)) | (r & s & t))
    return b


def build_mux16():
    """16:1 multiplexer out of 4:1 LUT6 stages plus select digests."""
    b = BlifBuilder("mux16")
    d = [b.pi(f"d{i}") for i in range(16)]
    s = [b.pi(f"s{i}") for i in range(4)]
    b.po("y")

    def mux4(s0, s1, d0, d1, d2, d3):
        idx = s0 + 2 * s1
        return (d0, d1, d2, d3)[idx]

    for j in range(4):
        b.lut(f"m{j}", (s[0], s[1], *d[4 * j:4 * j + 4]), mux4)
    b.lut("u0", (s[2], "m0", "m1"), mux)
    b.lut("u1", (s[2], "m2", "m3"), mux)
    b.lut("y", (s[3], "u0", "u1"), mux)
    b.digest("dgm", [("y", "u0", "u1", "m0", "m3"),
                     ("y", "u1", "u0", "m1", "m2"),
                     ("y", "u0", "u1", "m2", "m1")],
             lambda p, q, r, s_, t: (q if p else r) ^ (s_ & t))
    return b


def build_alu6():
    """4-bit logic unit with zero/parity flags and result digests."""
    b = BlifBuilder("alu6")
    a = [b.pi(f"a{i}") for i in range(4)]
    y = [b.pi(f"b{i}") for i in range(4)]
    op0 = b.pi("op0")
    op1 = b.pi("op1")
    b.po(*[f"f{i}" for i in range(4)], "z", "par")

    def alu_bit(p, q, o0, o1):
        if o1 == 0 and o0 == 0:
            return p & q
        if o1 == 0 and o0 == 1:
            return p | q
        if o1 == 1 and o0 == 0:
            return p ^ q
        return 1 - p

    for i in range(4):
        b.lut(f"f{i}", (a[i], y[i], op0, op1), alu_bit)
    b.lut("z01", ("f0", "f1"), or2)
    b.lut("z23", ("f2", "f3"), or2)
    b.lut("z", ("z01", "z23"), lambda p, q: 1 - (p | q))
    b.lut("par", ("f0", "f1", "f2", "f3"), lambda p, q, r, t: p ^ q ^ r ^ t)
    b.digest("dgl", [("z", "par", "f3", "f2", "z23"),
                     ("z", "par", "f2", "f1", "z01"),
                     ("z", "par", "f1", "f0", "z23")],
             lambda p, q, r, s, t: (p | q | r) & (s ^ t))
    return b


def build_gray8():
    """Binary-to-Gray converter with transition digests."""
    b = BlifBuilder("gray8")
    x = [b.pi(f"x{i}") for i in range(8)]
    b.po(*[f"g{i}" for i in range(8)])
    for i in range(7):
        b.lut(f"g{i}", (x[i], x[i + 1]), xor2)
    b.lut("g7", (x[7],), lambda a: a)
    b.digest("dgg", [("g0", "g1", "g2", "g3", "g4"),
                     ("g2", "g3", "g4", "g5", "g6"),
                     ("g3", "g4", "g5", "g6", "g7")],
             lambda p, q, r, s, t: (p ^ q ^ r) & (s | t))
    return b


def build_majvote9():
    """Median voter: three majority-of-5 windows feeding a majority-of-3."""
    b = BlifBuilder("majvote9")
    x = [b.pi(f"x{i}") for i in range(9)]
    b.po("v", "odd")

    def maj5(p, q, r, s, t):
        return 1 if p + q + r + s + t >= 3 else 0

    b.lut("m0", tuple(x[0:5]), maj5)
    b.lut("m1", tuple(x[2:7]), maj5)
    b.lut("m2", tuple(x[4:9]), maj5)
    b.lut("v", ("m0", "m1", "m2"), maj3)
    b.lut("odd", ("m0", "m1", "m2"), xor3)
    return b


def build_counter8():
    """8-bit clearable counter with terminal count and phase digests."""
    b = BlifBuilder("counter8")
    en = b.pi("en")
    clr = b.pi("clr")
    b.po("tc")
    q = [f"q{i}" for i in range(8)]
    b.lut("d0", (clr, en, q[0]), lambda c, e, p: 0 if c else p ^ e)
    b.ff("d0", q[0])
    carry = "cc1"
    b.lut(carry, (en, q[0]), and2)
    for i in range(1, 8):
        b.lut(f"d{i}", (clr, q[i], carry), lambda c, p, r: 0 if c else p ^ r)
        b.ff(f"d{i}", q[i])
        if i < 7:
            nxt = f"cc{i + 1}"
            b.lut(nxt, (q[i], carry), and2)
            carry = nxt
    b.lut("t0", (q[0], q[1], q[2]), lambda p, r, s: p & r & s)
    b.lut("t1", (q[3], q[4], q[5]), lambda p, r, s: p & r & s)
    b.lut("t2", (q[6], q[7], en), lambda p, r, s: p & r & s)
    b.lut("tc", ("t0", "t1", "t2"), lambda p, r, s: p & r & s)
    b.digest("dgt", [("cc7", "d7", "cc6", "d6", "cc5"),
                     ("cc6", "d6", "cc7", "d5", "cc4"),
                     ("cc5", "d7", "cc6", "d4", "cc3")],
             lambda p, q_, r, s, t: (p & q_) | ((1 - r) & s & t))
    return b


def build_lfsr16():
    """16-bit Fibonacci LFSR with shift-enable muxes and tap digests."""
    b = BlifBuilder("lfsr16")
    en = b.pi("en")
    b.po("so")
    q = [f"q{i}" for i in range(16)]
    b.lut("t0", (q[15], q[13]), xor2)
    b.lut("t1", (q[12], q[10]), xor2)
    b.lut("fb", ("t0", "t1"), lambda p, r: 1 - (p ^ r))
    b.lut("d0", (en, q[0], "fb"), mux)
    b.ff("d0", q[0], init=1)
    for i in range(1, 16):
        b.lut(f"d{i}", (en, q[i], q[i - 1]), mux)
        b.ff(f"d{i}", q[i])
    b.lut("so", (q[15],), lambda a: a)
    b.digest("dgf", [("d0", "fb", "t0", "t1", "d15"),
                     ("d0", "fb", "t1", "t0", "d14"),
                     ("d0", "fb", "t0", "d13", "t1")],
             lambda p, q_, r, s, t: ((p & q_) | (r & (1 - s))) ^ t)
    return b


def build_crc8s():
    """Serial CRC-8 (poly 0x07) with enable, zero flag, and state digests."""
    b = BlifBuilder("crc8s")
    en = b.pi("en")
    din = b.pi("din")
    b.po("z", "crc7")
    q = [f"q{i}" for i in range(8)]
    b.lut("fb", (din, q[7]), xor2)
    b.lut("d0", (en, q[0], "fb"), mux)
    b.ff("d0", q[0])
    for i in (1, 2):
        b.lut(f"d{i}", (en, q[i], q[i - 1], "fb"),
              lambda e, cur, prev, f: (prev ^ f) if e else cur)
        b.ff(f"d{i}", q[i])
    for i in range(3, 8):
        b.lut(f"d{i}", (en, q[i], q[i - 1]), mux)
        b.ff(f"d{i}", q[i])
    acc = q[0]
    for i in range(1, 8):
        nxt = f"zz{i}"
        b.lut(nxt, (acc, q[i]), or2)
        acc = nxt
    b.lut("z", (acc,), lambda a: 1 - a)
    b.lut("crc7", (q[7],), lambda a: a)
    b.digest("dgz", [("zz7", "zz6", "d1", "d2", "fb"),
                     ("zz6", "zz5", "d2", "d1", "fb"),
                     ("zz7", "zz5", "d1", "fb", "d2")],
             lambda p, q_, r, s, t: ((p ^ q_) & (r | s)) | (t & (1 - p)))
    return b


def build_sbm29():
    """Bit-serial polynomial multiplier shaped to exactly 29 LUTs."""
    b = BlifBuilder("sbm29")
    load = b.pi("load")
    bit_in = b.pi("bit_in")
    a_in = [b.pi(f"a_in{i}") for i in range(8)]
    b.po("out_bit", "done")
    areg = [f"A{i}" for i in range(8)]
    acc = [f"acc{i}" for i in range(8)]
    cnt = [f"cnt{i}" for i in range(3)]

    for i in range(8):
        b.lut(f"ad{i}", (load, a_in[i], areg[i]), mux)
        b.ff(f"ad{i}", areg[i])

    for i in range(7):
        b.lut(f"nx{i}", (load, acc[i + 1], bit_in, areg[i]),
              lambda l, nxt, bi, ai: 0 if l else (nxt ^ (bi & ai)))
        b.ff(f"nx{i}", acc[i])
    b.lut("nx7", (load, bit_in, areg[7]),
          lambda l, bi, ai: 0 if l else (bi & ai))
    b.ff("nx7", acc[7])

    b.lut("cd0", (load, cnt[0]), lambda l, c: 0 if l else 1 - c)
    b.ff("cd0", cnt[0])
    b.lut("cd1", (load, cnt[1], cnt[0]),
          lambda l, c, p: 0 if l else c ^ p)
    b.ff("cd1", cnt[1])
    b.lut("cd2", (load, cnt[2], cnt[1], cnt[0]),
          lambda l, c, p, r: 0 if l else c ^ (p & r))
    b.ff("cd2", cnt[2])

    b.lut("done", tuple(cnt), lambda p, r, s: p & r & s)
    b.lut("busy", ("done",), lambda a: 1 - a)
    b.lut("out_bit", (acc[0], "done"), and2)
    for j in range(4):
        window = tuple(acc[(2 * j + k) % 8] for k in range(4))
        b.lut(f"chk{j}", window, lambda p, q, r, t: (p ^ q) & (r | t))
    b.po("chk0", "chk1", "chk2", "chk3")
    b.digest("dgs", [("nx3", "nx4", "nx5", "nx6", "nx7"),
                     ("nx2", "nx3", "nx4", "nx5", "nx6"),
                     ("nx1", "nx2", "nx3", "nx4", "nx5")],
             lambda p, q, r, s, t: (p ^ q) | (r & s & t))
    return b


BUILDERS = [
    build_sbm29,
    build_adder8,
    build_incr8,
    build_parity12,
    build_cmp4,
    build_mux16,
    build_alu6,
    build_gray8,
    build_majvote9,
    build_counter8,
    build_lfsr16,
    build_crc8s,
]


def main():
    out_dir = REPO / "designs"
    out_dir.mkdir(exist_ok=True)
    for builder in BUILDERS:
        b = builder()
        text = b.text()
        netlist = parse_blif(text)
        st = stats(netlist)
        if b.name == "sbm29" and st.lut_total != 29:
            raise SystemExit(f"sbm29 has {st.lut_total} LUTs, expected 29")
        (out_dir / f"{b.name}.blif").write_text(text, encoding="utf-8")
        seq = "seq " if netlist.is_sequential else "comb"
        print(
            f"{b.name:<10} {seq} LUTs={st.lut_total:<3} FFs={st.ff_count:<3} "
            f"PIs={st.input_count:<3} POs={st.output_count}"
        )


if __name__ == "__main__":
    main()
