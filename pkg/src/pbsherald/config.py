"""Experiment configuration: JSON-on-disk format, validation, and builtins.

A config has five blocks: `source` (pump strength, perturbative order, beam
labels), `circuit` (ordered element list), `detectors` (id to terminal beam
bindings plus response model), `herald` (coincidence groups), and `analysis`
(the unmeasured beams whose conditional state is scored).  Validation is
eager and diagnostics name the offending key or circuit step.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .detection import DetectorBank, DetectorModel, HeraldRule
from .elements import (
    Circuit,
    CircuitError,
    ModeMap,
    hadamard,
    pbs,
    phase_shift,
    polarization_rotation,
    relabel,
)
from .source import SourceSpec

CONFIG_SCHEMA = "pbsherald-config/1"

BUILTIN_CONFIGS = ("fig3", "fig4-recombine")


class ConfigError(ValueError):
    """A configuration failed to parse or validate."""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    source: SourceSpec
    circuit: Circuit
    bank: DetectorBank
    rule: HeraldRule
    analysis_beams: tuple[str, ...]
    raw: Mapping[str, Any]

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _reject_duplicate_keys(pairs):
    out: dict[str, Any] = {}
    for key, value in pairs:
        if key in out:
            raise ConfigError(f"duplicate key '{key}'")
        out[key] = value
    return out


def _require(block: Mapping, key: str, where: str) -> Any:
    if key not in block:
        raise ConfigError(f"missing key '{key}' in {where}")
    return block[key]


def _check_keys(block: Mapping, allowed: set[str], where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _as_complex(entry: Any, where: str) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, list) and len(entry) == 2 and all(
        isinstance(x, (int, float)) for x in entry
    ):
        return complex(entry[0], entry[1])
    raise ConfigError(f"{where}: matrix entries must be numbers or [re, im] pairs")


def _build_element(i: int, spec: Any) -> ModeMap:
    where = f"circuit step {i}"
    if not isinstance(spec, Mapping):
        raise ConfigError(f"{where}: element must be an object")
    kind = _require(spec, "type", where)
    try:
        if kind == "pbs":
            _check_keys(spec, {"type", "in", "out", "phase_r"}, where)
            ins = _require(spec, "in", where)
            outs = _require(spec, "out", where)
            if not isinstance(ins, list) or len(ins) not in (1, 2):
                raise ConfigError(f"{where}: 'in' must list one or two beams")
            if not isinstance(outs, list) or len(outs) != 2:
                raise ConfigError(f"{where}: 'out' must list two beams")
            in_b = ins[1] if len(ins) == 2 else None
            return pbs(ins[0], in_b, outs[0], outs[1], phase_r=float(spec.get("phase_r", 0.0)))
        if kind == "hadamard":
            _check_keys(spec, {"type", "beam"}, where)
            return hadamard(_require(spec, "beam", where))
        if kind == "rotation":
            _check_keys(spec, {"type", "beam", "matrix"}, where)
            rows = _require(spec, "matrix", where)
            if not isinstance(rows, list) or len(rows) != 2 or any(len(r) != 2 for r in rows):
                raise ConfigError(f"{where}: 'matrix' must be 2x2")
            u = [[_as_complex(rows[r][c], where) for c in (0, 1)] for r in (0, 1)]
            return polarization_rotation(_require(spec, "beam", where), u)
        if kind == "relabel":
            _check_keys(spec, {"type", "in", "out"}, where)
            return relabel(_require(spec, "in", where), _require(spec, "out", where))
        if kind == "phase":
            _check_keys(spec, {"type", "beam", "phi"}, where)
            return phase_shift(_require(spec, "beam", where), float(_require(spec, "phi", where)))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown element type '{kind}'")


def _build_model(block: Any, where: str) -> DetectorModel:
    if not isinstance(block, Mapping):
        raise ConfigError(f"{where}: detector model must be an object")
    _check_keys(block, {"kind", "efficiency", "dark_rate"}, where)
    try:
        return DetectorModel(
            kind=block.get("kind", "threshold"),
            efficiency=block.get("efficiency", 1.0),
            dark_rate=block.get("dark_rate", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def from_dict(data: Mapping[str, Any], name: str | None = None) -> ExperimentConfig:
    """Validate a parsed config dictionary into an ExperimentConfig."""
    if not isinstance(data, Mapping):
        raise ConfigError("config must be a JSON object")
    if "source" not in data:
        raise ConfigError("missing source block")
    _check_keys(
        data, {"schema", "name", "source", "circuit", "detectors", "herald", "analysis"}, "config"
    )
    if "schema" in data and data["schema"] != CONFIG_SCHEMA:
        raise ConfigError(f"unsupported schema '{data['schema']}' (expected {CONFIG_SCHEMA})")

    src = data["source"]
    if not isinstance(src, Mapping):
        raise ConfigError("source block must be an object")
    _check_keys(src, {"lambda", "order", "left", "right"}, "source block")
    try:
        spec = SourceSpec(
            lam=_require(src, "lambda", "source block"),
            order=src.get("order", 2),
            left=tuple(src.get("left", ("1", "4"))),
            right=tuple(src.get("right", ("2", "3"))),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"source block: {exc}") from exc

    circuit_spec = _require(data, "circuit", "config")
    if not isinstance(circuit_spec, list):
        raise ConfigError("circuit block must be a list of elements")
    circuit = Circuit(tuple(_build_element(i, el) for i, el in enumerate(circuit_spec)))
    try:
        registries = circuit.validate(spec.beams)
    except CircuitError as exc:
        raise ConfigError(str(exc)) from exc
    final_registry = registries[-1]

    det_block = _require(data, "detectors", "config")
    if not isinstance(det_block, Mapping):
        raise ConfigError("detectors block must be an object")
    _check_keys(det_block, {"bindings", "model", "models"}, "detectors block")
    bindings = _require(det_block, "bindings", "detectors block")
    if not isinstance(bindings, Mapping) or not bindings:
        raise ConfigError("detectors block: 'bindings' must map detector ids to beams")
    shared = _build_model(det_block.get("model", {}), "detectors block")
    overrides = {
        str(d): _build_model(m, f"detector {d} model")
        for d, m in det_block.get("models", {}).items()
    }
    try:
        bank = DetectorBank(bindings=dict(bindings), model=shared, overrides=overrides)
    except ValueError as exc:
        raise ConfigError(f"detectors block: {exc}") from exc
    ever_alive = set().union(*registries)
    for det, beam in bank.bindings.items():
        if beam in final_registry:
            continue
        if beam in ever_alive:
            raise ConfigError(f"detector {det}: beam '{beam}' not terminal")
        raise ConfigError(f"detector {det}: unknown beam '{beam}'")

    herald_block = _require(data, "herald", "config")
    if not isinstance(herald_block, Mapping):
        raise ConfigError("herald block must be an object")
    _check_keys(herald_block, {"groups"}, "herald block")
    groups = _require(herald_block, "groups", "herald block")
    if not isinstance(groups, list):
        raise ConfigError("herald block: 'groups' must be a list of detector-id lists")
    try:
        rule = HeraldRule(tuple(frozenset(str(d) for d in g) for g in groups))
    except ValueError as exc:
        raise ConfigError(f"herald block: {exc}") from exc
    unknown_ids = rule.detectors - set(bank.detector_ids)
    if unknown_ids:
        raise ConfigError(f"herald block: unknown detector id(s) {sorted(unknown_ids)}")

    unmeasured = tuple(sorted(final_registry - bank.beams))
    analysis = data.get("analysis", {})
    if not isinstance(analysis, Mapping):
        raise ConfigError("analysis block must be an object")
    _check_keys(analysis, {"beams"}, "analysis block")
    declared = analysis.get("beams")
    if declared is not None:
        declared_set = tuple(sorted(str(b) for b in declared))
        if declared_set != unmeasured:
            raise ConfigError(
                f"analysis block: beams {list(declared_set)} do not match the "
                f"unmeasured terminal beams {list(unmeasured)}"
            )

    return ExperimentConfig(
        name=str(data.get("name", name or "experiment")),
        source=spec,
        circuit=circuit,
        bank=bank,
        rule=rule,
        analysis_beams=unmeasured,
        raw=dict(data),
    )


def parse_config(text: str, name: str | None = None) -> ExperimentConfig:
    """Parse and validate config text (JSON with duplicate-key detection)."""
    if not text.strip():
        raise ConfigError("missing source block")
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except ConfigError:
        raise
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return from_dict(data, name=name)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), name=path.stem)


def builtin_config_text(name: str) -> str:
    if name not in BUILTIN_CONFIGS:
        raise ConfigError(f"unknown builtin config '{name}'; available: {', '.join(BUILTIN_CONFIGS)}")
    return resources.files("pbsherald").joinpath("configs", f"{name}.cfg").read_text("utf-8")


def load_builtin(name: str) -> ExperimentConfig:
    return parse_config(builtin_config_text(name), name=name)


def resolve_config(path_or_name: str) -> ExperimentConfig:
    """Load a config from a file path, or by builtin name."""
    p = Path(path_or_name)
    if p.exists():
        return load_config(p)
    if path_or_name in BUILTIN_CONFIGS:
        return load_builtin(path_or_name)
    raise ConfigError(
        f"config '{path_or_name}' not found; builtins: {', '.join(BUILTIN_CONFIGS)}"
    )
