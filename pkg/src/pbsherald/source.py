"""Four-beam type-II downconversion state to second perturbative order.

Each side of the crystal emits into a pair of beams.  The emission is the
exponential of the antisymmetric pair-creation operator
S+ = aH+(a) bV+(b) - aV+(a) bH+(b) acting on vacuum, expanded order by
order: vacuum, one pair with weight sqrt(2)*lambda, two pairs with weight
sqrt(3)*lambda^2.  The two sides are independent, so the full source is the
tensor product of the two expansions.  Source states are deliberately left
unnormalized: sector probabilities then read off directly as squared
weights, and normalization happens only in analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fock import (
    H,
    V,
    BeamLike,
    Ket,
    add_kets,
    as_beam,
    create,
    normalize,
    scale,
    tensor,
    truncate,
    vacuum,
)

SELECTORS = (
    "vacuum",
    "pair_left_only",
    "pair_right_only",
    "pair_pair",
    "double_left",
    "double_right",
)

_SELECTOR_MIN_ORDER = {
    "vacuum": 0,
    "pair_left_only": 1,
    "pair_right_only": 1,
    "pair_pair": 2,
    "double_left": 2,
    "double_right": 2,
}


@dataclass(frozen=True)
class SourceSpec:
    """Pump interaction strength, perturbative cutoff, and beam labels."""

    lam: float = 0.1
    order: int = 2
    left: tuple[str, str] = ("1", "4")
    right: tuple[str, str] = ("2", "3")

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "left", (as_beam(self.left[0]), as_beam(self.left[1])))
        object.__setattr__(self, "right", (as_beam(self.right[0]), as_beam(self.right[1])))
        if not 0.0 <= self.lam < 1.0:
            raise ValueError("lambda must lie in [0, 1)")
        if self.order not in (0, 1, 2):
            raise ValueError("order must be 0, 1, or 2")
        if len(set(self.beams)) != 4:
            raise ValueError("source beams must be four distinct labels")

    @property
    def beams(self) -> tuple[str, str, str, str]:
        return (*self.left, *self.right)


def single_pair(a: BeamLike, b: BeamLike) -> Ket:
    """The antisymmetric polarization pair (|HV> - |VH>)/sqrt(2) on beams a, b."""
    a, b = as_beam(a), as_beam(b)
    if a == b:
        raise ValueError("coincident beams")
    s = 1.0 / math.sqrt(2.0)
    return Ket(
        {a, b},
        {
            (((a, H), 1), ((b, V), 1)): s,
            (((a, V), 1), ((b, H), 1)): -s,
        },
    )


def two_pair(a: BeamLike, b: BeamLike) -> Ket:
    """The normalized two-pair emission on beams a, b.

    (|2H,0V> |0H,2V> - |1H,1V> |1H,1V> + |0H,2V> |2H,0V>) / sqrt(3)
    """
    a, b = as_beam(a), as_beam(b)
    if a == b:
        raise ValueError("coincident beams")
    s = 1.0 / math.sqrt(3.0)
    return Ket(
        {a, b},
        {
            (((a, H), 2), ((b, V), 2)): s,
            (((a, H), 1), ((a, V), 1), ((b, H), 1), ((b, V), 1)): -s,
            (((a, V), 2), ((b, H), 2)): s,
        },
    )


def pair_create(ket: Ket, a: BeamLike, b: BeamLike) -> Ket:
    """Apply the antisymmetric pair-creation operator aH+(a) bV+(b) - aV+(a) bH+(b)."""
    hv = create(create(ket, (a, H)), (b, V))
    vh = create(create(ket, (a, V)), (b, H))
    return add_kets(hv, scale(vh, -1.0))


def two_pair_via_operators(a: BeamLike, b: BeamLike) -> Ket:
    """Independent construction of the two-pair state, for consistency checks.

    Applies the pair-creation operator twice to vacuum and normalizes; the
    bosonic sqrt factors must reproduce the coefficient pattern of
    two_pair() exactly.
    """
    return normalize(pair_create(pair_create(vacuum({as_beam(a), as_beam(b)}), a, b), a, b))


def side_state(spec: SourceSpec, side: str) -> Ket:
    """Unnormalized emission of one crystal side, truncated at spec.order."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    a, b = spec.left if side == "left" else spec.right
    state = vacuum({a, b})
    if spec.order >= 1:
        state = add_kets(state, scale(single_pair(a, b), math.sqrt(2.0) * spec.lam))
    if spec.order >= 2:
        state = add_kets(state, scale(two_pair(a, b), math.sqrt(3.0) * spec.lam**2))
    return state


def full_source(spec: SourceSpec) -> Ket:
    """Unnormalized four-beam source state: product of the two sides."""
    both = tensor(side_state(spec, "left"), side_state(spec, "right"))
    return truncate(both, 2 * spec.order)


def source_term(spec: SourceSpec, selector: str) -> Ket:
    """The normalized component of the source in one emission sector."""
    if selector not in _SELECTOR_MIN_ORDER:
        raise ValueError(f"unknown selector '{selector}'")
    if _SELECTOR_MIN_ORDER[selector] > spec.order:
        raise ValueError(f"selector '{selector}' requires order >= {_SELECTOR_MIN_ORDER[selector]}")
    la, lb = spec.left
    ra, rb = spec.right
    if selector == "vacuum":
        return vacuum(spec.beams)
    if selector == "pair_left_only":
        return tensor(single_pair(la, lb), vacuum({ra, rb}))
    if selector == "pair_right_only":
        return tensor(vacuum({la, lb}), single_pair(ra, rb))
    if selector == "pair_pair":
        return tensor(single_pair(la, lb), single_pair(ra, rb))
    if selector == "double_left":
        return tensor(two_pair(la, lb), vacuum({ra, rb}))
    return tensor(vacuum({la, lb}), two_pair(ra, rb))


def sector_weight(spec: SourceSpec, selector: str) -> float:
    """Amplitude of a sector inside full_source(spec)."""
    if selector not in _SELECTOR_MIN_ORDER:
        raise ValueError(f"unknown selector '{selector}'")
    if _SELECTOR_MIN_ORDER[selector] > spec.order:
        raise ValueError(f"selector '{selector}' requires order >= {_SELECTOR_MIN_ORDER[selector]}")
    lam = spec.lam
    return {
        "vacuum": 1.0,
        "pair_left_only": math.sqrt(2.0) * lam,
        "pair_right_only": math.sqrt(2.0) * lam,
        "pair_pair": 2.0 * lam**2,
        "double_left": math.sqrt(3.0) * lam**2,
        "double_right": math.sqrt(3.0) * lam**2,
    }[selector]


def selectors_for(order: int) -> tuple[str, ...]:
    """Selectors available at a given perturbative order."""
    return tuple(s for s in SELECTORS if _SELECTOR_MIN_ORDER[s] <= order)
