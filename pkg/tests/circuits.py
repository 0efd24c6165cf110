"""Shared netlist builders and random-circuit generators for the tests."""

import random

from easic.netlist import Cell, LutMask, MODE_RE, Netlist

XOR2 = LutMask(2, 0x6)
AND2 = LutMask(2, 0x8)
OR2 = LutMask(2, 0xE)
BUF1 = LutMask(1, 0x2)
INV1 = LutMask(1, 0x1)


def lut(name, inputs, mask, mode=MODE_RE):
    return Cell(name, "LUT", tuple(inputs), name, mask=mask, mode=mode)


def ff(name, d, clk="clk", init=0):
    return Cell(name, "FF", (d, clk), name, init=init)


def netlist(name, inputs, outputs, cells, clock=None):
    nl = Netlist(name=name, inputs=list(inputs), outputs=list(outputs),
                 clock=clock)
    for cell in cells:
        nl.add_cell(cell)
    nl.validate()
    return nl


def random_mask(rng, width):
    return LutMask(width, rng.getrandbits(1 << width))


def random_comb_netlist(rng, n_pis=6, n_cells=20, name="rand"):
    """Layered random LUT network; every PI feeds something, last nets
    become outputs."""
    pis = [f"i{k}" for k in range(n_pis)]
    nets = list(pis)
    cells = []
    for k in range(n_cells):
        width = rng.randint(1, min(4, len(nets)))
        ins = rng.sample(nets, width)
        mask = random_mask(rng, width)
        cell = lut(f"n{k}", ins, mask)
        cells.append(cell)
        nets.append(cell.name)
    n_outs = min(4, n_cells)
    outs = [cells[-(j + 1)].name for j in range(n_outs)]
    return netlist(name, pis, outs, cells)


def random_seq_netlist(rng, n_pis=3, n_ffs=4, n_cells=14, name="randseq"):
    pis = [f"i{k}" for k in range(n_pis)]
    qs = [f"q{k}" for k in range(n_ffs)]
    nets = list(pis) + qs
    cells = []
    for k in range(n_cells):
        width = rng.randint(1, min(4, len(nets)))
        ins = rng.sample(nets, width)
        cell = lut(f"n{k}", ins, random_mask(rng, width))
        cells.append(cell)
        nets.append(cell.name)
    lut_names = [c.name for c in cells]
    for k in range(n_ffs):
        cells.append(ff(qs[k], rng.choice(lut_names)))
    outs = [cells[n_cells - 1 - j].name for j in range(min(3, n_cells))]
    return netlist(name, pis, outs, cells, clock="clk")


def random_timing_dag(rng, max_cells=500, name="timedag"):
    """Random mixed LUT/FF netlist for incremental-timing experiments."""
    n_pis = rng.randint(2, 8)
    n_ffs = rng.randint(0, 6)
    n_cells = rng.randint(10, max_cells)
    if n_ffs:
        return random_seq_netlist(rng, n_pis, n_ffs, n_cells, name=name)
    return random_comb_netlist(rng, n_pis, n_cells, name=name)
