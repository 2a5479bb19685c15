"""Detectors on terminal beams, coincidence rules, and conditional states.

A detector binds to a spatial beam and sees every photon in both
polarizations of that beam.  The state is first partitioned into branches by
the exact mode occupation on the measured beams; detector response then
turns each branch into firing patterns.  A threshold detector with
efficiency eta fires on k photons with probability 1 - (1-eta)^k (1-d),
where d is the per-window dark-count probability.  Loss commutes to the end
on terminal beams, so conditional states of the unmeasured beams are
weighted ensembles of pure kets and no density matrices are needed.

Heralding accepts unnormalized input states; all reported probabilities then
sum to the squared norm of the input, which lets perturbative sector weights
flow through unchanged.
"""

from __future__ import annotations

import itertools
import math
import operator
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .fock import BeamLike, Ket, Occupation, as_beam

_KINDS = ("threshold", "number_resolving")


@dataclass(frozen=True)
class DetectorModel:
    """Detector response parameters; defaults are ideal (eta=1, no dark counts)."""

    kind: str = "threshold"
    efficiency: float = 1.0
    dark_rate: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "efficiency", float(self.efficiency))
        object.__setattr__(self, "dark_rate", float(self.dark_rate))
        if self.kind not in _KINDS:
            raise ValueError(f"unknown detector kind '{self.kind}'")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if not 0.0 <= self.dark_rate < 1.0:
            raise ValueError("dark_rate must lie in [0, 1)")


def fire_probability(k: int, model: DetectorModel) -> float:
    """Probability that a detector fires on k incident photons.

    Each photon is seen independently with probability eta; the detector
    fires if it sees at least one photon or a dark count occurs.  For an
    ideal number-resolving detector this reduces to "fires iff k >= 1".
    """
    k = operator.index(k)
    if k < 0:
        raise ValueError("photon count must be non-negative")
    return 1.0 - (1.0 - model.efficiency) ** k * (1.0 - model.dark_rate)


@dataclass(frozen=True)
class DetectorBank:
    """Bindings of detector ids to terminal beams plus response models."""

    bindings: Mapping[str, str]
    model: DetectorModel = DetectorModel()
    overrides: Mapping[str, DetectorModel] = field(default_factory=dict)

    def __post_init__(self) -> None:
        bindings = {str(d): as_beam(b) for d, b in dict(self.bindings).items()}
        if not bindings:
            raise ValueError("detector bank is empty")
        beams = list(bindings.values())
        if len(set(beams)) != len(beams):
            raise ValueError("each terminal beam may carry at most one detector")
        object.__setattr__(self, "bindings", bindings)
        overrides = {str(d): m for d, m in dict(self.overrides).items()}
        unknown = set(overrides) - set(bindings)
        if unknown:
            raise ValueError(f"model override for unknown detector(s): {sorted(unknown)}")
        object.__setattr__(self, "overrides", overrides)

    @property
    def detector_ids(self) -> tuple[str, ...]:
        return tuple(self.bindings)

    @property
    def beams(self) -> frozenset[str]:
        return frozenset(self.bindings.values())

    def model_for(self, detector_id: str) -> DetectorModel:
        return self.overrides.get(detector_id, self.model)


@dataclass(frozen=True)
class HeraldRule:
    """Accept iff every group has exactly one fired detector and nothing fires outside."""

    groups: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        groups = tuple(frozenset(str(d) for d in g) for g in self.groups)
        if not groups:
            raise ValueError("herald rule needs at least one group")
        seen: set[str] = set()
        for g in groups:
            if not g:
                raise ValueError("herald groups must be non-empty")
            if seen & g:
                raise ValueError("herald groups must be disjoint")
            seen |= g
        object.__setattr__(self, "groups", groups)

    @property
    def detectors(self) -> frozenset[str]:
        return frozenset().union(*self.groups)


def rule_eval(pattern: Iterable[str], rule: HeraldRule) -> bool:
    fired = frozenset(str(d) for d in pattern)
    if fired - rule.detectors:
        return False
    return all(len(fired & g) == 1 for g in rule.groups)


class CountBranch(NamedTuple):
    """One joint count outcome on the measured beams."""

    counts: Occupation
    probability: float
    residual: Ket


def _branches(ket: Ket, measured_beams: Iterable[BeamLike]) -> list[tuple[Occupation, float, Ket]]:
    """Partition a (possibly unnormalized) ket by its measured-mode occupation.

    Returns (measured occupation, squared weight, normalized residual) per
    branch, ordered canonically.  Weights sum to the squared input norm.
    """
    sel = frozenset(as_beam(b) for b in measured_beams)
    unknown = sel - ket.registry
    if unknown:
        raise ValueError(f"measured beam(s) not in registry: {sorted(unknown)}")
    rest_registry = ket.registry - sel
    groups: dict[Occupation, dict[Occupation, complex]] = {}
    for occ, amp in ket.items():
        m_occ, r_occ = occ.split(sel)
        sub = groups.setdefault(m_occ, {})
        sub[r_occ] = sub.get(r_occ, 0j) + amp
    out: list[tuple[Occupation, float, Ket]] = []
    for m_occ in sorted(groups):
        sub = groups[m_occ]
        weight = sum(abs(a) ** 2 for a in sub.values())
        if weight <= 0.0:
            continue
        root = math.sqrt(weight)
        residual = Ket(rest_registry, {o: a / root for o, a in sub.items()})
        out.append((m_occ, weight, residual))
    return out


def count_distribution(ket: Ket, measured_beams: Iterable[BeamLike]) -> list[CountBranch]:
    """Born-rule partition of a normalized state by measured photon counts."""
    if abs(ket.norm() - 1.0) > 1e-9:
        raise ValueError("count_distribution requires a normalized ket")
    return [CountBranch(m, w, r) for m, w, r in _branches(ket, measured_beams)]


@dataclass(frozen=True)
class PatternOutcome:
    """Probability of a fired set plus the conditional ensemble it heralds."""

    probability: float
    ensemble: tuple[tuple[float, Ket], ...]


def pattern_probabilities(ket: Ket, bank: DetectorBank) -> dict[frozenset[str], PatternOutcome]:
    """Map each achievable fired set to its probability and conditional ensemble.

    With ideal detectors patterns are exact support sets and each ensemble
    has a single pure component; lossy or dark-counting detectors marginalize
    over count configurations, one weighted component per contributing one.
    """
    ids = bank.detector_ids
    for det, beam in bank.bindings.items():
        if beam not in ket.registry:
            raise ValueError(f"detector {det} bound to non-terminal beam '{beam}'")
    prob: dict[frozenset[str], float] = {}
    comps: dict[frozenset[str], list[tuple[float, Ket]]] = {}
    for m_occ, weight, residual in _branches(ket, bank.beams):
        totals = m_occ.beam_totals()
        fire = [
            fire_probability(totals.get(bank.bindings[d], 0), bank.model_for(d)) for d in ids
        ]
        for flags in itertools.product((False, True), repeat=len(ids)):
            p = weight
            for on, pf in zip(flags, fire):
                p *= pf if on else (1.0 - pf)
                if p == 0.0:
                    break
            if p <= 0.0:
                continue
            key = frozenset(d for d, on in zip(ids, flags) if on)
            prob[key] = prob.get(key, 0.0) + p
            comps.setdefault(key, []).append((p, residual))
    out: dict[frozenset[str], PatternOutcome] = {}
    for key in sorted(prob, key=lambda s: tuple(sorted(s))):
        total = prob[key]
        ensemble = tuple((w / total, k) for w, k in comps[key])
        out[key] = PatternOutcome(total, ensemble)
    return out


@dataclass(frozen=True)
class HeraldReport:
    """Partition of pattern probabilities into rule-accepted and rejected."""

    accepted: Mapping[frozenset[str], PatternOutcome]
    rejected: Mapping[frozenset[str], PatternOutcome]
    herald_probability: float
    rejected_probability: float
    input_norm_sq: float


def herald(ket: Ket, bank: DetectorBank, rule: HeraldRule) -> HeraldReport:
    """Evaluate the coincidence rule over all detection patterns."""
    patterns = pattern_probabilities(ket, bank)
    accepted: dict[frozenset[str], PatternOutcome] = {}
    rejected: dict[frozenset[str], PatternOutcome] = {}
    for key, outcome in patterns.items():
        (accepted if rule_eval(key, rule) else rejected)[key] = outcome
    p_acc = sum(o.probability for o in accepted.values())
    p_rej = sum(o.probability for o in rejected.values())
    norm_sq = ket.norm() ** 2
    if abs((p_acc + p_rej) - norm_sq) > 1e-9 * max(1.0, norm_sq):
        raise AssertionError("pattern probabilities do not conserve the input norm")
    return HeraldReport(accepted, rejected, p_acc, p_rej, norm_sq)
