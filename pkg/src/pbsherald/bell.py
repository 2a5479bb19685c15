"""Bell states, the detector-pattern classification table, and exclusion scoring.

The pattern table is a fixed constant: D1/D3 or D2/D4 firing together
heralds Phi+, D1/D4 or D2/D3 heralds Phi-.  It is deliberately independent
of circuit geometry; when a geometry produces an accepted pattern whose
conditional state disagrees with the table, reporting flags the mismatch
instead of silently reclassifying, because the simulator's job is to check
the claim, not repair it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .detection import DetectorBank, HeraldRule, herald
from .elements import Circuit, apply_circuit
from .fock import H, V, BeamLike, Ket, as_beam, inner


class BellLabel(Enum):
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"

    @property
    def symbol(self) -> str:
        return {
            BellLabel.PHI_PLUS: "Phi+",
            BellLabel.PHI_MINUS: "Phi-",
            BellLabel.PSI_PLUS: "Psi+",
            BellLabel.PSI_MINUS: "Psi-",
        }[self]


def bell_state(label: BellLabel, a: BeamLike, b: BeamLike) -> Ket:
    """The normalized two-photon polarization Bell state on beams a, b."""
    a, b = as_beam(a), as_beam(b)
    if a == b:
        raise ValueError("coincident beams")
    s = 1.0 / math.sqrt(2.0)
    hh = (((a, H), 1), ((b, H), 1))
    vv = (((a, V), 1), ((b, V), 1))
    hv = (((a, H), 1), ((b, V), 1))
    vh = (((a, V), 1), ((b, H), 1))
    terms = {
        BellLabel.PHI_PLUS: {hh: s, vv: s},
        BellLabel.PHI_MINUS: {hh: s, vv: -s},
        BellLabel.PSI_PLUS: {hv: s, vh: s},
        BellLabel.PSI_MINUS: {hv: s, vh: -s},
    }[BellLabel(label)]
    return Ket({a, b}, terms)


#: fixed mapping from accepted coincidence pattern to heralded Bell state
PATTERN_TO_BELL: dict[frozenset[str], BellLabel] = {
    frozenset({"D1", "D3"}): BellLabel.PHI_PLUS,
    frozenset({"D2", "D4"}): BellLabel.PHI_PLUS,
    frozenset({"D1", "D4"}): BellLabel.PHI_MINUS,
    frozenset({"D2", "D3"}): BellLabel.PHI_MINUS,
}


def classify(pattern: Iterable[str]) -> BellLabel:
    """Bell label heralded by an accepted detector pattern."""
    key = frozenset(str(d) for d in pattern)
    try:
        return PATTERN_TO_BELL[key]
    except KeyError:
        raise ValueError(f"pattern {sorted(key)} is not an accepted coincidence") from None


def ensemble_fidelity(ensemble: Iterable[tuple[float, Ket]], target: Ket) -> float:
    """Average pure-state fidelity of a weighted ensemble against a target."""
    pairs = list(ensemble)
    if not pairs:
        raise ValueError("empty ensemble")
    if abs(target.norm() - 1.0) > 1e-9:
        raise ValueError("target must be normalized")
    total_weight = 0.0
    fid = 0.0
    for w, ket in pairs:
        if w < 0:
            raise ValueError("negative ensemble weight")
        if abs(ket.norm() - 1.0) > 1e-9:
            raise ValueError("ensemble states must be normalized")
        total_weight += w
        fid += w * abs(inner(target, ket)) ** 2
    if abs(total_weight - 1.0) > 1e-9:
        raise ValueError("ensemble weights must sum to 1")
    return fid


@dataclass(frozen=True)
class ExclusionReport:
    """Acceptance probability of a pure contamination sector; 0 means excluded."""

    false_herald_probability: float
    patterns: tuple[tuple[frozenset[str], float], ...]


def exclusion_report(
    sector: Ket, circuit: Circuit, bank: DetectorBank, rule: HeraldRule
) -> ExclusionReport:
    """Probability that the coincidence rule accepts a contamination sector."""
    if abs(sector.norm() - 1.0) > 1e-9:
        raise ValueError("sector state must be normalized")
    report = herald(apply_circuit(sector, circuit), bank, rule)
    patterns = tuple(
        (key, outcome.probability)
        for key, outcome in sorted(report.accepted.items(), key=lambda p: tuple(sorted(p[0])))
    )
    return ExclusionReport(report.herald_probability, patterns)
