"""Functional simulation and equivalence checking.

Evaluation is bit-parallel: every net holds a Python int whose bit v is
the net's value under stimulus vector v, so one levelized pass scores
thousands of vectors at once.  Two-valued only; evaluating a blank
(unprogrammed) device is a hard error rather than an X.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .bitstream import ChainState
from .netlist import KIND_LUT, Netlist


class SimError(Exception):
    pass


@dataclass
class SimState:
    """Sequential state: packed FF values plus a cycle counter."""

    ff: dict
    cycle: int = 0


@dataclass
class EquivalencePolicy:
    mode: str = "auto"   # auto | exhaustive | random | sequential
    seed: int = 0
    n_vectors: int = 10000
    n_cycles: int = 1000
    exhaustive_limit: int = 16


@dataclass
class EquivalenceReport:
    mode: str
    equivalent: bool
    seed: int | None = None
    vectors: int | None = None
    cycles: int | None = None
    counterexample: dict | None = None
    note: str = ""

    def to_json_dict(self):
        return {
            "mode": self.mode,
            "verdict": "equivalent" if self.equivalent else "counterexample",
            "seed": self.seed,
            "vectors": self.vectors,
            "cycles": self.cycles,
            "counterexample": self.counterexample,
            "note": self.note,
        }


def _input_pattern(i, count):
    """Packed truth table of PI i over vector indices 0..count-1."""
    block = 1 << i
    pattern = ((1 << block) - 1) << block
    span = block << 1
    while span < count:
        pattern |= pattern << span
        span <<= 1
    return pattern & ((1 << count) - 1)


class Evaluator:
    """Levelized evaluator over a netlist or a programmed device."""

    def __init__(self, design):
        if isinstance(design, ChainState):
            self.netlist = design.netlist
            if not design.programmed:
                first = design.chain[0][0] if design.chain else "<none>"
                raise SimError(f"unprogrammed LUT {first}")
            self._configs = design.configs()
        elif isinstance(design, Netlist):
            self.netlist = design
            self._configs = None
        else:
            raise SimError(f"cannot evaluate a {type(design).__name__}")
        self.netlist.validate()
        self._order = [c for c in self.netlist.topo_cells() if not c.is_ff]
        self._ffs = sorted(
            (c for c in self.netlist.cells.values() if c.is_ff),
            key=lambda c: c.name,
        )

    def set_configs(self, configs):
        """Swap in fresh configuration registers (device reprogrammed)."""
        if self._configs is None:
            raise SimError("evaluator was not built from a programmed device")
        self._configs = configs

    def _mask_bits(self, cell):
        if self._configs is not None and cell.mode == "reconfigurable":
            return self._configs[cell.name]
        return cell.mask.bits

    def _eval_lut(self, bits, width, ins, full):
        table = 1 << width
        if bits == 0:
            return 0
        if bits == (1 << table) - 1:
            return full
        # accumulate the smaller of the on-set / off-set cube lists
        on = bin(bits).count("1")
        invert = on > table // 2
        work = (((1 << table) - 1) & ~bits) if invert else bits
        acc = 0
        for idx in range(table):
            if not (work >> idx) & 1:
                continue
            term = full
            for j in range(width):
                term &= ins[j] if (idx >> j) & 1 else ins[j] ^ full
                if not term:
                    break
            acc |= term
        return acc ^ full if invert else acc

    def eval_packed(self, pi_values: dict, count: int, ff_values=None) -> dict:
        """One combinational pass; returns all net values (packed ints)."""
        full = (1 << count) - 1
        values = dict(pi_values)
        if self.netlist.clock is not None:
            values.setdefault(self.netlist.clock, 0)
        for ff in self._ffs:
            values[ff.output] = (ff_values or {}).get(ff.name, 0) & full
        for cell in self._order:
            kind = cell.kind
            if kind == KIND_LUT:
                ins = [values[n] for n in cell.inputs]
                out = self._eval_lut(self._mask_bits(cell), cell.mask.width,
                                     ins, full)
            elif kind == "INV":
                out = values[cell.inputs[0]] ^ full
            elif kind == "BUF":
                out = values[cell.inputs[0]]
            elif kind == "AND2":
                out = values[cell.inputs[0]] & values[cell.inputs[1]]
            elif kind == "OR2":
                out = values[cell.inputs[0]] | values[cell.inputs[1]]
            elif kind == "NAND2":
                out = (values[cell.inputs[0]] & values[cell.inputs[1]]) ^ full
            elif kind == "NOR2":
                out = (values[cell.inputs[0]] | values[cell.inputs[1]]) ^ full
            elif kind == "MUX2":
                s = values[cell.inputs[0]]
                a = values[cell.inputs[1]]
                b = values[cell.inputs[2]]
                out = (s & b) | ((s ^ full) & a)
            elif kind == "TIE0":
                out = 0
            elif kind == "TIE1":
                out = full
            else:
                raise SimError(f"cannot evaluate cell kind {kind}")
            values[cell.output] = out
        return values

    def eval_comb(self, vector) -> tuple:
        """Evaluate one input vector (sequence ordered like netlist.inputs)."""
        pis = self.netlist.inputs
        if len(vector) != len(pis):
            raise SimError(
                f"vector length {len(vector)} != {len(pis)} primary inputs"
            )
        values = self.eval_packed(
            {net: (v & 1) for net, v in zip(pis, vector)}, 1,
            ff_values=None,
        )
        return tuple(values[net] for net in self.netlist.outputs)

    def initial_state(self, count=1) -> SimState:
        full = (1 << count) - 1
        return SimState(
            ff={c.name: (full if c.init else 0) for c in self._ffs}, cycle=0
        )

    def step(self, state: SimState, vector, count=1):
        """Clock the design once: outputs from the current state, then
        FFs latch their D inputs."""
        pis = self.netlist.inputs
        if len(vector) != len(pis):
            raise SimError(
                f"vector length {len(vector)} != {len(pis)} primary inputs"
            )
        full = (1 << count) - 1
        values = self.eval_packed(
            {net: (v & full) for net, v in zip(pis, vector)}, count,
            ff_values=state.ff,
        )
        outputs = tuple(values[net] for net in self.netlist.outputs)
        next_ff = {c.name: values[c.inputs[0]] & full for c in self._ffs}
        return SimState(ff=next_ff, cycle=state.cycle + 1), outputs


def eval_comb(design, vector):
    return Evaluator(design).eval_comb(vector)


def step(design, state, vector):
    return Evaluator(design).step(state, vector)


def _ports_match(a: Netlist, b: Netlist):
    return a.inputs == b.inputs and a.outputs == b.outputs


def check_equivalence(a, b, policy: EquivalencePolicy | None = None) -> EquivalenceReport:
    """Compare two designs (netlists or programmed devices).

    Policy ``auto`` picks exhaustive simulation for combinational
    designs with at most ``exhaustive_limit`` inputs, lock-step cycling
    for sequential ones, and seeded random vectors otherwise.  Any
    reported counterexample is replayable.
    """
    policy = policy or EquivalencePolicy()
    ea = Evaluator(a)
    eb = Evaluator(b)
    if not _ports_match(ea.netlist, eb.netlist):
        raise SimError(
            f"port mismatch: {ea.netlist.inputs}/{ea.netlist.outputs} vs "
            f"{eb.netlist.inputs}/{eb.netlist.outputs}"
        )
    sequential = ea.netlist.is_sequential or eb.netlist.is_sequential
    mode = policy.mode
    if mode == "auto":
        if sequential:
            mode = "sequential"
        elif len(ea.netlist.inputs) <= policy.exhaustive_limit:
            mode = "exhaustive"
        else:
            mode = "random"
    if mode == "exhaustive":
        return _check_comb(ea, eb, policy, exhaustive=True)
    if mode == "random":
        return _check_comb(ea, eb, policy, exhaustive=False)
    if mode == "sequential":
        return _check_sequential(ea, eb, policy)
    raise SimError(f"unknown equivalence mode {policy.mode}")


def _check_comb(ea, eb, policy, exhaustive):
    pis = ea.netlist.inputs
    if exhaustive:
        count = 1 << len(pis)
        stim = {net: _input_pattern(i, count) for i, net in enumerate(pis)}
        n_note = f"exhaustive over {count} vectors"
    else:
        count = policy.n_vectors
        rng = random.Random(policy.seed)
        stim = {net: rng.getrandbits(count) for net in pis}
        n_note = f"{count} random vectors, seed {policy.seed}"
    va = ea.eval_packed(stim, count)
    vb = eb.eval_packed(stim, count)
    for out in ea.netlist.outputs:
        diff = va[out] ^ vb[out]
        if diff:
            v = (diff & -diff).bit_length() - 1
            vector = {net: (stim[net] >> v) & 1 for net in pis}
            return EquivalenceReport(
                mode="exhaustive" if exhaustive else "random",
                equivalent=False,
                seed=None if exhaustive else policy.seed,
                vectors=count,
                counterexample={"output": out, "vector": vector},
                note=n_note,
            )
    return EquivalenceReport(
        mode="exhaustive" if exhaustive else "random",
        equivalent=True,
        seed=None if exhaustive else policy.seed,
        vectors=count,
        note=n_note,
    )


# sequential lock-step packs this many independent random streams per pass
_SEQ_LANES = 64


def _check_sequential(ea, eb, policy):
    pis = ea.netlist.inputs
    rng = random.Random(policy.seed)
    lanes = min(_SEQ_LANES, max(1, policy.n_cycles))
    sa = ea.initial_state(lanes)
    sb = eb.initial_state(lanes)
    history = []
    for cycle in range(policy.n_cycles):
        vector = [rng.getrandbits(lanes) for _ in pis]
        history.append(vector)
        sa, outs_a = ea.step(sa, vector, lanes)
        sb, outs_b = eb.step(sb, vector, lanes)
        for out, va, vb in zip(ea.netlist.outputs, outs_a, outs_b):
            diff = va ^ vb
            if diff:
                lane = (diff & -diff).bit_length() - 1
                trace = [
                    {net: (vec[i] >> lane) & 1 for i, net in enumerate(pis)}
                    for vec in history
                ]
                return EquivalenceReport(
                    mode="sequential",
                    equivalent=False,
                    seed=policy.seed,
                    cycles=cycle + 1,
                    counterexample={
                        "output": out,
                        "cycle": cycle,
                        "inputs": trace,
                    },
                    note=f"lock-step mismatch at cycle {cycle}",
                )
    return EquivalenceReport(
        mode="sequential",
        equivalent=True,
        seed=policy.seed,
        cycles=policy.n_cycles,
        note=f"{policy.n_cycles} lock-step cycles x {lanes} lanes, "
             f"seed {policy.seed}",
    )


def replay_counterexample(a, b, report: EquivalenceReport) -> bool:
    """Re-run a reported counterexample; True when it still distinguishes."""
    if report.counterexample is None:
        return False
    ea = Evaluator(a)
    eb = Evaluator(b)
    cex = report.counterexample
    if "vector" in cex:
        vec = [cex["vector"][net] for net in ea.netlist.inputs]
        return ea.eval_comb(vec) != eb.eval_comb(vec)
    sa = ea.initial_state()
    sb = eb.initial_state()
    for step_inputs in cex["inputs"]:
        vec = [step_inputs[net] for net in ea.netlist.inputs]
        sa, outs_a = ea.step(sa, vec)
        sb, outs_b = eb.step(sb, vec)
    return outs_a != outs_b
