"""Passive linear-optical elements applied by exact creation-operator substitution.

An element is a linear map on creation operators: each input mode goes to a
fixed combination of output modes, and modes the element does not touch pass
through unchanged.  Applying an element expands every occupation
multinomially with exact factorial bookkeeping, so the output is the exact
image of the state rather than an approximation.

Routing convention for the polarizing beam splitter: horizontal polarization
is transmitted, vertical polarization is reflected.  The reflection phase is
configurable per element and defaults to +1; inside the circuits shipped
here a PBS is a pure mode permutation, so the choice only moves
detector-pattern-dependent global phases around.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .fock import (
    H,
    V,
    BeamLike,
    Ket,
    Mode,
    Occupation,
    PRUNE_TOL,
    as_beam,
)

#: tolerance for the isometry check on element coefficient matrices
UNITARY_TOL = 1e-12

HADAMARD_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


class CircuitError(ValueError):
    """Raised when a circuit fails validation; carries the offending step index."""

    def __init__(self, step: int, message: str):
        super().__init__(f"circuit step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class ModeMap:
    """A linear substitution on creation operators.

    `rules` sends each input mode to a tuple of (output mode, coefficient)
    pairs.  The coefficient matrix restricted to the touched modes must be an
    isometry (orthonormal columns), which guarantees norm preservation.
    """

    label: str
    rules: Mapping[Mode, tuple[tuple[Mode, complex], ...]]

    def __post_init__(self) -> None:
        if not self.rules:
            raise ValueError("empty mode map")
        cleaned: dict[Mode, tuple[tuple[Mode, complex], ...]] = {}
        for m, targets in self.rules.items():
            if not isinstance(m, Mode):
                raise TypeError("mode map keys must be Mode instances")
            seen: dict[Mode, complex] = {}
            for out_m, c in targets:
                if not isinstance(out_m, Mode):
                    raise TypeError("mode map targets must be Mode instances")
                c = complex(c)
                if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                    raise ValueError("non-finite coefficient")
                if out_m in seen:
                    raise ValueError(f"duplicate target mode {out_m}")
                if abs(c) >= PRUNE_TOL:
                    seen[out_m] = c
            if not seen:
                raise ValueError(f"input mode {m} maps to nothing")
            cleaned[m] = tuple(seen.items())
        object.__setattr__(self, "rules", cleaned)
        self._check_isometry()

    def _check_isometry(self) -> None:
        ins = sorted(self.rules)
        outs = sorted(self.codomain)
        out_index = {m: i for i, m in enumerate(outs)}
        a = np.zeros((len(outs), len(ins)), dtype=complex)
        for j, m in enumerate(ins):
            for out_m, c in self.rules[m]:
                a[out_index[out_m], j] = c
        gram = a.conj().T @ a
        if np.max(np.abs(gram - np.eye(len(ins)))) > UNITARY_TOL:
            raise ValueError(f"element '{self.label}' is not an isometry on its domain")

    @property
    def domain(self) -> frozenset[Mode]:
        return frozenset(self.rules)

    @property
    def codomain(self) -> frozenset[Mode]:
        return frozenset(out_m for targets in self.rules.values() for out_m, _ in targets)

    @property
    def consumed_beams(self) -> frozenset[str]:
        return frozenset(m.beam for m in self.rules)

    @property
    def produced_beams(self) -> frozenset[str]:
        return frozenset(m.beam for m in self.codomain)

    def next_registry(self, registry: frozenset[str]) -> frozenset[str]:
        """Registry after this element, validating beam availability."""
        consumed = self.consumed_beams
        produced = self.produced_beams
        missing = consumed - registry
        if missing:
            raise ValueError(
                f"element '{self.label}': input beam(s) {sorted(missing)} not in registry"
            )
        collision = (produced - consumed) & (registry - consumed)
        if collision:
            raise ValueError(
                f"element '{self.label}': output beam(s) {sorted(collision)} already in registry"
            )
        return (registry - consumed) | produced

    def __repr__(self) -> str:
        return f"ModeMap({self.label})"


def pbs(
    in_a: BeamLike,
    in_b: BeamLike | None,
    out_t: BeamLike,
    out_r: BeamLike,
    phase_r: float = 0.0,
) -> ModeMap:
    """Polarizing beam splitter: H transmits, V reflects.

    `in_b` may be None for a PBS with one open (vacuum) input port, as used
    by the polarization analyzers in front of the detectors.  `phase_r` is
    applied to the reflected (V) routings.
    """
    a = as_beam(in_a)
    b = as_beam(in_b) if in_b is not None else None
    t, r = as_beam(out_t), as_beam(out_r)
    if b is not None and a == b:
        raise ValueError("coincident input beams")
    if t == r:
        raise ValueError("coincident output beams")
    refl = cmath.exp(1j * phase_r)
    rules: dict[Mode, tuple[tuple[Mode, complex], ...]] = {
        Mode(a, H): ((Mode(t, H), 1.0 + 0j),),
        Mode(a, V): ((Mode(r, V), refl),),
    }
    if b is not None:
        rules[Mode(b, H)] = ((Mode(r, H), 1.0 + 0j),)
        rules[Mode(b, V)] = ((Mode(t, V), refl),)
    label = f"pbs({a},{b if b is not None else '.'}->{t},{r})"
    return ModeMap(label, rules)


def polarization_rotation(beam: BeamLike, matrix, label: str | None = None) -> ModeMap:
    """Unitary rotation of the (H, V) polarization pair on one beam."""
    b = as_beam(beam)
    u = np.asarray(matrix, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("rotation matrix must be 2x2")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > UNITARY_TOL:
        raise ValueError("rotation matrix is not unitary")
    rules = {
        Mode(b, H): ((Mode(b, H), u[0, 0]), (Mode(b, V), u[1, 0])),
        Mode(b, V): ((Mode(b, H), u[0, 1]), (Mode(b, V), u[1, 1])),
    }
    return ModeMap(label or f"rotation({b})", rules)


def hadamard(beam: BeamLike) -> ModeMap:
    """The self-inverse rotation H -> (H+V)/sqrt(2), V -> (H-V)/sqrt(2)."""
    return polarization_rotation(beam, HADAMARD_MATRIX, label=f"hadamard({as_beam(beam)})")


def relabel(beam_in: BeamLike, beam_out: BeamLike) -> ModeMap:
    """Lossless renaming of a beam (a mirror); both polarizations move."""
    src, dst = as_beam(beam_in), as_beam(beam_out)
    if src == dst:
        raise ValueError("coincident beams")
    rules = {
        Mode(src, H): ((Mode(dst, H), 1.0 + 0j),),
        Mode(src, V): ((Mode(dst, V), 1.0 + 0j),),
    }
    return ModeMap(f"relabel({src}->{dst})", rules)


def phase_shift(beam: BeamLike, phi: float) -> ModeMap:
    """Phase e^(i*phi) on every photon in a beam; unobservable in count patterns."""
    b = as_beam(beam)
    f = cmath.exp(1j * float(phi))
    rules = {
        Mode(b, H): ((Mode(b, H), f),),
        Mode(b, V): ((Mode(b, V), f),),
    }
    return ModeMap(f"phase({b},{float(phi):g})", rules)


@dataclass(frozen=True)
class Circuit:
    """An ordered sequence of elements with whole-circuit validation."""

    elements: tuple[ModeMap, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))

    def validate(self, registry: Iterable[BeamLike]) -> list[frozenset[str]]:
        """Return the beam registry before and after each step.

        Raises CircuitError with the failing step index if any element's
        inputs are missing or its outputs collide with live beams.
        """
        regs = [frozenset(as_beam(b) for b in registry)]
        for i, element in enumerate(self.elements):
            try:
                regs.append(element.next_registry(regs[-1]))
            except ValueError as exc:
                raise CircuitError(i, str(exc)) from exc
        return regs

    def final_registry(self, registry: Iterable[BeamLike]) -> frozenset[str]:
        return self.validate(registry)[-1]

    def __len__(self) -> int:
        return len(self.elements)


def _compositions(n: int, k: int):
    """All tuples of k non-negative integers summing to n."""
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def _power_terms(
    targets: tuple[tuple[Mode, complex], ...], n: int
) -> list[tuple[complex, dict[Mode, int]]]:
    """Expand (sum_k c_k b_k)^n into monomials with multinomial coefficients."""
    out: list[tuple[complex, dict[Mode, int]]] = []
    k = len(targets)
    for comp in _compositions(n, k):
        counts: dict[Mode, int] = {}
        c = complex(math.factorial(n))
        for (m, amp), j in zip(targets, comp):
            if j:
                c = c * (amp**j) / math.factorial(j)
                counts[m] = j
        out.append((c, counts))
    return out


def _merge_counts(a: dict[Mode, int], b: dict[Mode, int]) -> dict[Mode, int]:
    merged = dict(a)
    for m, n in b.items():
        merged[m] = merged.get(m, 0) + n
    return merged


def apply(ket: Ket, element: ModeMap) -> Ket:
    """Exact image of `ket` under one element.

    Each occupation is a product of creation operators acting on vacuum;
    every operator is substituted by its image and the product is expanded
    with bosonic normalization sqrt(prod n_out!) / sqrt(prod n_in!).
    """
    registry_out = element.next_registry(ket.registry)
    rules = element.rules
    out: dict[Occupation, complex] = {}
    for occ, amp in ket.items():
        branches: list[tuple[complex, dict[Mode, int]]] = [(amp, {})]
        denom = 1
        for m, n in occ.items():
            denom *= math.factorial(n)
            targets = rules.get(m)
            if targets is None:
                for i, (c, counts) in enumerate(branches):
                    counts = dict(counts)
                    counts[m] = counts.get(m, 0) + n
                    branches[i] = (c, counts)
                continue
            expansion = _power_terms(targets, n)
            branches = [
                (c1 * c2, _merge_counts(counts1, counts2))
                for c1, counts1 in branches
                for c2, counts2 in expansion
            ]
        for c, counts in branches:
            numer = 1
            for j in counts.values():
                numer *= math.factorial(j)
            occ_out = Occupation(counts)
            out[occ_out] = out.get(occ_out, 0j) + c * math.sqrt(numer / denom)
    return Ket(registry_out, out)


def apply_circuit(ket: Ket, circuit: Circuit) -> Ket:
    """Validate the whole circuit eagerly, then apply its elements in order."""
    circuit.validate(ket.registry)
    state = ket
    for element in circuit.elements:
        state = apply(state, element)
    return state


def compose(first: ModeMap, second: ModeMap) -> ModeMap:
    """The substitution that applies `first` and then `second`."""
    rules: dict[Mode, tuple[tuple[Mode, complex], ...]] = {}
    first_codomain = first.codomain
    for m, targets in first.rules.items():
        acc: dict[Mode, complex] = {}
        for mid, c in targets:
            for out_m, c2 in second.rules.get(mid, ((mid, 1.0 + 0j),)):
                acc[out_m] = acc.get(out_m, 0j) + c * c2
        rules[m] = tuple((k, v) for k, v in acc.items() if abs(v) >= PRUNE_TOL)
    for m, targets in second.rules.items():
        if m not in first_codomain and m not in rules:
            rules[m] = targets
    return ModeMap(f"{first.label}|{second.label}", rules)
