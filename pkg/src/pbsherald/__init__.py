"""Exact Fock-space simulation of Bell-state heralding with polarizing beam splitters.

The package models a four-beam type-II downconversion source, propagates its
state exactly through passive linear-optical circuits, evaluates coincidence
heralding with configurable detectors, classifies accepted patterns into
Bell states, and cross-checks every sparse computation against an
independent dense brute-force oracle.
"""

from .bell import (
    PATTERN_TO_BELL,
    BellLabel,
    ExclusionReport,
    bell_state,
    classify,
    ensemble_fidelity,
    exclusion_report,
)
from .config import (
    BUILTIN_CONFIGS,
    ConfigError,
    ExperimentConfig,
    from_dict,
    load_builtin,
    load_config,
    parse_config,
    resolve_config,
)
from .detection import (
    CountBranch,
    DetectorBank,
    DetectorModel,
    HeraldReport,
    HeraldRule,
    PatternOutcome,
    count_distribution,
    fire_probability,
    herald,
    pattern_probabilities,
    rule_eval,
)
from .elements import (
    Circuit,
    CircuitError,
    HADAMARD_MATRIX,
    ModeMap,
    apply,
    apply_circuit,
    compose,
    hadamard,
    pbs,
    phase_shift,
    polarization_rotation,
    relabel,
)
from .fock import (
    H,
    V,
    Ket,
    Mode,
    Occupation,
    Polarization,
    add_kets,
    add_term,
    as_beam,
    create,
    fidelity_pure,
    inner,
    mode,
    normalize,
    scale,
    tensor,
    truncate,
    vacuum,
)
from .oracle import DenseBasis, dense_check, dense_run, enumerate_basis, lift_modemap
from .runner import RunReport, run, sweep, sweep_csv
from .source import (
    SELECTORS,
    SourceSpec,
    full_source,
    sector_weight,
    selectors_for,
    side_state,
    single_pair,
    source_term,
    two_pair,
    two_pair_via_operators,
)
from .verify import CheckResult, run_checks

__version__ = "0.1.0"

__all__ = [
    "BellLabel",
    "BUILTIN_CONFIGS",
    "CheckResult",
    "Circuit",
    "CircuitError",
    "ConfigError",
    "CountBranch",
    "DenseBasis",
    "DetectorBank",
    "DetectorModel",
    "ExclusionReport",
    "ExperimentConfig",
    "H",
    "HADAMARD_MATRIX",
    "HeraldReport",
    "HeraldRule",
    "Ket",
    "Mode",
    "ModeMap",
    "Occupation",
    "PATTERN_TO_BELL",
    "PatternOutcome",
    "Polarization",
    "RunReport",
    "SELECTORS",
    "SourceSpec",
    "V",
    "add_kets",
    "add_term",
    "apply",
    "apply_circuit",
    "as_beam",
    "bell_state",
    "classify",
    "compose",
    "count_distribution",
    "create",
    "dense_check",
    "dense_run",
    "ensemble_fidelity",
    "enumerate_basis",
    "exclusion_report",
    "fidelity_pure",
    "fire_probability",
    "from_dict",
    "full_source",
    "hadamard",
    "herald",
    "inner",
    "lift_modemap",
    "load_builtin",
    "load_config",
    "mode",
    "normalize",
    "parse_config",
    "pattern_probabilities",
    "pbs",
    "phase_shift",
    "polarization_rotation",
    "relabel",
    "resolve_config",
    "rule_eval",
    "run",
    "run_checks",
    "scale",
    "sector_weight",
    "selectors_for",
    "side_state",
    "single_pair",
    "source_term",
    "sweep",
    "sweep_csv",
    "tensor",
    "truncate",
    "two_pair",
    "two_pair_via_operators",
    "vacuum",
]
