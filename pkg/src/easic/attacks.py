"""Adversary-side analyses of hybrid designs.

Two analyses work from masking-pattern statistics: the structural
attack tracks <pattern, frequency> tuples (per design and pooled over a
corpus) to bound the key search space, and the composition attack
correlates a victim's exposed static portion against a database of
known designs to guess the circuit's intent.  A small brute-force
key-recovery oracle rounds out the picture for desk-scale designs.

All histograms are lifted to the width-6 pattern space (masks of
narrower LUTs are replicated over the ignored inputs) so designs with
mixed LUT sizes are comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bitstream as bs
from .netlist import LutMask, Netlist
from .obfuscate import ObfuscationResult
from .sim import Evaluator, _input_pattern

PATTERN_WIDTH = 6

SCOPE_WHOLE = "whole-design"
SCOPE_STATIC = "static-portion"
SCOPE_RECONF = "reconfigurable-portion"


class AttackError(Exception):
    pass


@dataclass(frozen=True)
class HistogramEntry:
    ident: int
    pattern: LutMask
    frequency: int


@dataclass
class PatternHistogram:
    design: str
    scope: str
    obf_percent: float | None
    entries: tuple  # HistogramEntry, descending frequency
    lifted_to_width: int = PATTERN_WIDTH

    @property
    def total(self):
        return sum(e.frequency for e in self.entries)

    @property
    def unique_count(self):
        return len(self.entries)

    def frequency_of(self, pattern: LutMask) -> int:
        for entry in self.entries:
            if entry.pattern == pattern:
                return entry.frequency
        return 0

    def as_dict(self):
        return {e.pattern: e.frequency for e in self.entries}

    def to_json_dict(self):
        return {
            "design": self.design,
            "scope": self.scope,
            "obf_percent": self.obf_percent,
            "lifted_to_width": self.lifted_to_width,
            "entries": [
                [e.ident, f"0x{e.pattern.bits:016x}", e.frequency]
                for e in self.entries
            ],
        }


def histogram_from_json(payload) -> PatternHistogram:
    entries = tuple(
        HistogramEntry(ident, LutMask(payload.get("lifted_to_width",
                                                  PATTERN_WIDTH),
                                      int(pattern_hex, 16)), freq)
        for ident, pattern_hex, freq in payload["entries"]
    )
    return PatternHistogram(
        design=payload["design"],
        scope=payload["scope"],
        obf_percent=payload.get("obf_percent"),
        entries=entries,
        lifted_to_width=payload.get("lifted_to_width", PATTERN_WIDTH),
    )


def _build_histogram(masks, design, scope, obf_percent=None) -> PatternHistogram:
    counts = {}
    for mask in masks:
        lifted = mask.lifted(PATTERN_WIDTH)
        counts[lifted] = counts.get(lifted, 0) + 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].bits))
    entries = tuple(
        HistogramEntry(i + 1, pattern, freq)
        for i, (pattern, freq) in enumerate(ordered)
    )
    return PatternHistogram(design, scope, obf_percent, entries)


def pattern_histogram(source, scope=SCOPE_WHOLE) -> PatternHistogram:
    """<pattern, frequency> statistics for one design.

    ``source`` is a plain netlist (whole-design view) or an obfuscation
    result, whose recorded origin masks feed the static-portion view;
    the adversary is granted perfect LUT reconstruction of static logic.
    """
    if isinstance(source, ObfuscationResult):
        name = source.netlist.name
        level = float(source.config.obf_percent)
        if scope == SCOPE_WHOLE:
            masks = [o.mask for o in source.origins.values()]
            masks += [source.netlist.cells[n].mask for n in source.l_re]
        elif scope == SCOPE_STATIC:
            masks = [o.mask for o in source.origins.values()]
        elif scope == SCOPE_RECONF:
            masks = [source.netlist.cells[n].mask for n in source.l_re]
        else:
            raise AttackError(f"unknown scope {scope}")
        return _build_histogram(masks, name, scope, level)
    if isinstance(source, Netlist):
        if scope != SCOPE_WHOLE:
            raise AttackError(
                f"scope {scope} needs a conversion trace; a bare netlist "
                "only supports the whole-design scope"
            )
        masks = [c.mask for c in source.luts()]
        return _build_histogram(masks, source.name, scope)
    raise AttackError(f"cannot build a histogram from {type(source).__name__}")


@dataclass
class UniquePatternSet:
    patterns: set
    contributing: list
    settling: list  # (design, new_patterns, cumulative_m) per addition

    @property
    def m(self):
        return len(self.patterns)


def corpus_union(histograms) -> UniquePatternSet:
    """Running union of unique patterns; the settling curve records how
    many new patterns each added design contributes."""
    histograms = list(histograms)
    if not histograms:
        raise AttackError("corpus_union needs at least one design")
    patterns = set()
    settling = []
    contributing = []
    for hist in histograms:
        fresh = {e.pattern for e in hist.entries} - patterns
        patterns |= fresh
        contributing.append(hist.design)
        settling.append((hist.design, len(fresh), len(patterns)))
    return UniquePatternSet(patterns, contributing, settling)


@dataclass
class TrendlineFit:
    degree: int
    coefficients: tuple   # numpy polyfit order: highest power first
    residuals: tuple
    max_abs_residual: float

    def predict(self, ident):
        return float(np.polyval(np.array(self.coefficients), ident))


def fit_trendline(histogram: PatternHistogram, degree: int) -> TrendlineFit:
    """Least-squares polynomial over (identifier, frequency) pairs."""
    if histogram.unique_count < degree + 1:
        raise AttackError(
            f"cannot fit degree {degree} to {histogram.unique_count} entries"
        )
    x = np.array([e.ident for e in histogram.entries], dtype=float)
    y = np.array([e.frequency for e in histogram.entries], dtype=float)
    coeffs = np.polyfit(x, y, degree)
    residuals = y - np.polyval(coeffs, x)
    return TrendlineFit(
        degree=degree,
        coefficients=tuple(float(c) for c in coeffs),
        residuals=tuple(float(r) for r in residuals),
        max_abs_residual=float(np.max(np.abs(residuals))) if len(residuals) else 0.0,
    )


def correlate(a: PatternHistogram, b: PatternHistogram):
    """Pearson correlation over frequency vectors aligned on the union
    of patterns (absent patterns count as 0).  Returns None when either
    aligned vector has zero variance."""
    if not a.entries or not b.entries:
        raise AttackError("cannot correlate an empty histogram")
    fa = a.as_dict()
    fb = b.as_dict()
    union = sorted(set(fa) | set(fb), key=lambda p: p.bits)
    xs = [float(fa.get(p, 0)) for p in union]
    ys = [float(fb.get(p, 0)) for p in union]
    n = len(union)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return None
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


CLASS_NONE = "no-correlation"
CLASS_SELF = "self-correlation"
CLASS_CROSS = "cross-correlation"

DEFAULT_THRESHOLD = 0.75


@dataclass
class CorrelationReport:
    victim: str
    obf_percent: float | None
    threshold: float
    matches: list            # (design, r) descending r
    classification: str
    warning: str = ""
    top_histogram: PatternHistogram | None = field(repr=False, default=None)

    def to_json_dict(self):
        return {
            "victim": self.victim,
            "obf_percent": self.obf_percent,
            "threshold": self.threshold,
            "method": "pearson, zero-filled union alignment",
            "matches": [[d, r] for d, r in self.matches],
            "classification": self.classification,
            "warning": self.warning,
        }


def composition_attack(victim: PatternHistogram, corpus,
                       threshold=DEFAULT_THRESHOLD) -> CorrelationReport:
    """Correlate a victim's static-portion histogram against a corpus of
    whole-design histograms and classify the leak.

    no-correlation: nothing reaches the threshold (or the static portion
    is empty); self-correlation: the top match is the victim's own
    design; cross-correlation: some other design matches best.
    """
    corpus = list(corpus)
    if len(corpus) < 2:
        raise AttackError("composition attack needs a corpus of >= 2 designs")
    if not victim.entries:
        return CorrelationReport(
            victim=victim.design,
            obf_percent=victim.obf_percent,
            threshold=threshold,
            matches=[],
            classification=CLASS_NONE,
            warning="victim static portion is empty; nothing to correlate",
        )
    scored = []
    by_name = {}
    for hist in corpus:
        r = correlate(victim, hist)
        if r is None:
            continue
        scored.append((hist.design, r))
        by_name[hist.design] = hist
    scored.sort(key=lambda t: (-t[1], t[0]))
    if not scored or scored[0][1] < threshold:
        classification = CLASS_NONE
    elif scored[0][0] == victim.design:
        classification = CLASS_SELF
    else:
        classification = CLASS_CROSS
    top_hist = by_name.get(scored[0][0]) if scored else None
    return CorrelationReport(
        victim=victim.design,
        obf_percent=victim.obf_percent,
        threshold=threshold,
        matches=scored,
        classification=classification,
        top_histogram=top_hist,
    )


@dataclass
class SearchSpaceReport:
    """Per-LUT candidate-set sizes as the attacks bite, plus the raw key
    length.  l1: naive 2^64; l2: corpus-wide unique patterns; l3: unique
    patterns of the matched design; l4: l3 minus patterns fully consumed
    by the static portion."""

    key_bits: int
    l1: int
    l2: int | None = None
    l3: int | None = None
    l4: int | None = None

    def __post_init__(self):
        chain = [v for v in (self.l4, self.l3, self.l2, self.l1) if v is not None]
        for small, big in zip(chain, chain[1:]):
            if small > big:
                raise AttackError(
                    f"search-space chain violated: {chain} must be "
                    "non-decreasing"
                )

    def to_json_dict(self):
        return {
            "key_bits": self.key_bits,
            "l1_per_lut": self.l1,
            "l2_per_lut": self.l2,
            "l3_per_lut": self.l3,
            "l4_per_lut": self.l4,
        }


def search_space_report(result: ObfuscationResult,
                        corpus: UniquePatternSet | None = None,
                        match: CorrelationReport | None = None) -> SearchSpaceReport:
    key_bits = bs.serialize(result.netlist).total_len
    l1 = 1 << 64
    l2 = corpus.m if corpus is not None else None
    l3 = None
    l4 = None
    if match is not None and match.top_histogram is not None:
        matched = match.top_histogram
        l3 = matched.unique_count
        static_hist = pattern_histogram(result, SCOPE_STATIC)
        consumed = static_hist.as_dict()
        l4 = sum(
            1 for e in matched.entries
            if e.frequency - consumed.get(e.pattern, 0) > 0
        )
        if l2 is not None:
            l3 = min(l3, l2)
            l4 = min(l4, l3)
    return SearchSpaceReport(key_bits=key_bits, l1=l1, l2=l2, l3=l3, l4=l4)


@dataclass
class BruteForceResult:
    recovered: bs.Bitstream | None
    trials: int
    key_bits: int
    matches_original: bool

    def to_json_dict(self):
        return {
            "key_bits": self.key_bits,
            "trials": self.trials,
            "recovered": "".join(str(b) for b in self.recovered.bits)
            if self.recovered else None,
            "matches_original": self.matches_original,
        }


def brute_force_key(obfuscated: Netlist, oracle: Netlist,
                    max_key_bits=20) -> BruteForceResult:
    """Enumerate every key, program the device, and keep the first key
    whose behavior matches the oracle on every input vector.

    The recovered key may differ from the shipped bitstream while being
    functionally equivalent.  Refuses designs whose key is longer than
    ``max_key_bits``.
    """
    reference = bs.serialize(obfuscated)
    n = reference.total_len
    if n > max_key_bits:
        raise AttackError(
            f"key has {n} bits; brute force is capped at {max_key_bits}"
        )
    if oracle.is_sequential or obfuscated.is_sequential:
        raise AttackError("brute-force oracle supports combinational toys only")

    pis = oracle.inputs
    count = 1 << len(pis)
    stim = {net: _input_pattern(i, count) for i, net in enumerate(pis)}
    oracle_eval = Evaluator(oracle)
    oracle_vals = oracle_eval.eval_packed(stim, count)
    expected = tuple(oracle_vals[net] for net in oracle.outputs)

    state = bs.blank_state(obfuscated)
    trials = 0
    dev = None
    for key in range(1 << n):
        trials += 1
        bits = tuple((key >> i) & 1 for i in range(n))
        candidate = bs.Bitstream(reference.design, reference.chain, bits)
        bs.program(state, candidate)
        if dev is None:
            dev = Evaluator(state)
        else:
            dev.set_configs(state.configs())
        vals = dev.eval_packed(stim, count)
        got = tuple(vals[net] for net in obfuscated.outputs)
        if got == expected:
            return BruteForceResult(
                recovered=candidate,
                trials=trials,
                key_bits=n,
                matches_original=(bits == reference.bits),
            )
    raise AttackError(
        "exhausted the key space without a match; the obfuscated design "
        "and oracle are inconsistent"
    )
