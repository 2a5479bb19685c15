"""Experiment orchestration: build, propagate, herald, classify, score, report.

A run propagates the unnormalized source state through the configured
circuit, evaluates the coincidence rule, scores every accepted pattern
against the four Bell states on the analysis beams, and then repeats the
analysis sector by sector so contamination (double-pair) acceptance is
quantified separately.  Reports are deterministic for a fixed config, up to
the timestamp field, which canonical comparison drops.
"""

from __future__ import annotations

import copy
import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Iterable, Sequence

from .bell import PATTERN_TO_BELL, BellLabel, bell_state, ensemble_fidelity
from .config import ConfigError, ExperimentConfig, from_dict
from .detection import herald
from .elements import apply_circuit
from .fock import Ket, scale
from .source import full_source, sector_weight, selectors_for, source_term

REPORT_SCHEMA = "pbsherald-report/1"

_EXCLUSION_TOL = 1e-12
_TABLE_TOL = 1e-9


@dataclass(frozen=True)
class PatternReport:
    """One accepted coincidence pattern of the full-source run."""

    pattern: tuple[str, ...]
    probability: float
    bell_label: BellLabel | None
    fidelities: dict[BellLabel, float]
    pure: bool


@dataclass(frozen=True)
class SectorPatternReport:
    pattern: tuple[str, ...]
    probability: float
    bell_label: BellLabel | None
    fidelity_to_label: float | None
    table_mismatch: bool


@dataclass(frozen=True)
class SectorReport:
    """Herald behaviour of one pure emission sector."""

    name: str
    amplitude_weight: float
    herald_probability: float
    weighted_probability: float
    excluded: bool
    patterns: tuple[SectorPatternReport, ...]


@dataclass(frozen=True)
class RunReport:
    name: str
    config_hash: str
    lam: float
    order: int
    elements: tuple[str, ...]
    input_norm_sq: float
    herald_probability: float
    rejected_probability: float
    patterns: tuple[PatternReport, ...]
    sectors: tuple[SectorReport, ...]
    generated_at: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "generated_at": self.generated_at,
            "config": {
                "name": self.name,
                "hash": self.config_hash,
                "lambda": self.lam,
                "order": self.order,
                "elements": list(self.elements),
            },
            "totals": {
                "input_norm_sq": self.input_norm_sq,
                "herald_probability": self.herald_probability,
                "rejected_probability": self.rejected_probability,
            },
            "patterns": [
                {
                    "pattern": list(p.pattern),
                    "probability": p.probability,
                    "bell_label": p.bell_label.value if p.bell_label else None,
                    "fidelity": {label.value: f for label, f in p.fidelities.items()},
                    "pure": p.pure,
                }
                for p in self.patterns
            ],
            "sectors": [
                {
                    "name": s.name,
                    "amplitude_weight": s.amplitude_weight,
                    "herald_probability": s.herald_probability,
                    "weighted_probability": s.weighted_probability,
                    "excluded": s.excluded,
                    "patterns": [
                        {
                            "pattern": list(p.pattern),
                            "probability": p.probability,
                            "bell_label": p.bell_label.value if p.bell_label else None,
                            "fidelity_to_label": p.fidelity_to_label,
                            "table_mismatch": p.table_mismatch,
                        }
                        for p in s.patterns
                    ],
                }
                for s in self.sectors
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def canonical_json(self) -> str:
        """Deterministic serialization: identical configs give identical text."""
        data = self.to_dict()
        data.pop("generated_at", None)
        return json.dumps(data, sort_keys=True, separators=(",", ":"))


def _bell_targets(analysis_beams: Sequence[str]) -> dict[BellLabel, Ket]:
    if len(analysis_beams) != 2:
        return {}
    a, b = analysis_beams
    return {label: bell_state(label, a, b) for label in BellLabel}


def _pattern_key(key: frozenset) -> tuple[str, ...]:
    return tuple(sorted(key))


def run(config: ExperimentConfig) -> RunReport:
    """Execute one experiment configuration and assemble its report."""
    spec = config.source
    targets = _bell_targets(config.analysis_beams)

    src = full_source(spec)
    out = apply_circuit(src, config.circuit)
    report = herald(out, config.bank, config.rule)

    patterns = []
    for key in sorted(report.accepted, key=_pattern_key):
        outcome = report.accepted[key]
        fids = {label: ensemble_fidelity(outcome.ensemble, t) for label, t in targets.items()}
        weights = [w for w, _ in outcome.ensemble]
        patterns.append(
            PatternReport(
                pattern=_pattern_key(key),
                probability=outcome.probability,
                bell_label=PATTERN_TO_BELL.get(key),
                fidelities=fids,
                pure=len(weights) == 1 or max(weights) >= 1.0 - _TABLE_TOL,
            )
        )

    sectors = []
    for selector in selectors_for(spec.order):
        weight = sector_weight(spec, selector)
        sector_ket = source_term(spec, selector)
        sector_rep = herald(
            apply_circuit(sector_ket, config.circuit), config.bank, config.rule
        )
        if weight:
            # the weighted probability is recomputed through the full pipeline
            # on the scaled sector, not taken as weight**2 * conditional
            weighted = herald(
                apply_circuit(scale(sector_ket, weight), config.circuit),
                config.bank,
                config.rule,
            ).herald_probability
        else:
            weighted = 0.0
        sector_patterns = []
        for key in sorted(sector_rep.accepted, key=_pattern_key):
            outcome = sector_rep.accepted[key]
            label = PATTERN_TO_BELL.get(key)
            fid = None
            if label is not None and targets:
                fid = ensemble_fidelity(outcome.ensemble, targets[label])
            sector_patterns.append(
                SectorPatternReport(
                    pattern=_pattern_key(key),
                    probability=outcome.probability,
                    bell_label=label,
                    fidelity_to_label=fid,
                    table_mismatch=fid is not None and abs(fid - 1.0) > _TABLE_TOL,
                )
            )
        sectors.append(
            SectorReport(
                name=selector,
                amplitude_weight=weight,
                herald_probability=sector_rep.herald_probability,
                weighted_probability=weighted,
                excluded=sector_rep.herald_probability <= _EXCLUSION_TOL,
                patterns=tuple(sector_patterns),
            )
        )

    return RunReport(
        name=config.name,
        config_hash=config.config_hash,
        lam=spec.lam,
        order=spec.order,
        elements=tuple(e.label for e in config.circuit.elements),
        input_norm_sq=report.input_norm_sq,
        herald_probability=report.herald_probability,
        rejected_probability=report.rejected_probability,
        patterns=tuple(patterns),
        sectors=tuple(sectors),
        generated_at=datetime.now(timezone.utc).isoformat(),
    )


def _set_path(data: dict, path: str, value: float) -> None:
    keys = path.split(".")
    node: Any = data
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown sweep parameter path '{path}'")
        node = node[key]
    leaf = keys[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"unknown sweep parameter path '{path}'")
    if isinstance(node[leaf], bool) or not isinstance(node[leaf], (int, float)):
        raise ConfigError(f"sweep parameter '{path}' is not numeric")
    node[leaf] = value


def sweep(
    config: ExperimentConfig, param_path: str, values: Iterable[float]
) -> list[RunReport]:
    """One independent, deterministic run per parameter value."""
    reports = []
    for value in values:
        raw = copy.deepcopy(dict(config.raw))
        _set_path(raw, param_path, float(value))
        reports.append(run(from_dict(raw, name=config.name)))
    return reports


SWEEP_CSV_HEADER = (
    "param,pattern,probability,"
    "fidelity_phi_plus,fidelity_phi_minus,fidelity_psi_plus,fidelity_psi_minus"
)


def sweep_csv(values: Sequence[float], reports: Sequence[RunReport]) -> str:
    """Flat CSV of accepted-pattern probabilities and Bell fidelities."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_CSV_HEADER.split(","))
    order = (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS, BellLabel.PSI_PLUS, BellLabel.PSI_MINUS)
    for value, report in zip(values, reports):
        for p in report.patterns:
            row = [repr(float(value)), "+".join(p.pattern), repr(p.probability)]
            row += [repr(p.fidelities[label]) if label in p.fidelities else "" for label in order]
            writer.writerow(row)
    return buffer.getvalue()
