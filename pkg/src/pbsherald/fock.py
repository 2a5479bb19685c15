"""Sparse multi-mode polarization Fock states with exact complex algebra.

A state ("ket") is a finite superposition of photon-number occupations over
(beam, polarization) modes.  Amplitudes are ordinary double-precision complex
numbers: everything this package manipulates is built from small algebraic
numbers (1/sqrt(2), 1/sqrt(3), 1/2, ...), which double precision represents
to rounding error, so no symbolic backend is needed.

Kets are immutable values and every public operation is a pure function that
returns a new ket, so all of this is safe to share between threads.
"""

from __future__ import annotations

import math
import operator
from enum import Enum
from typing import Iterable, Iterator, Mapping, NamedTuple, Union

#: terms with |amplitude| below this are dropped after every operation
PRUNE_TOL = 1e-15
#: default tolerance for norm and term-by-term comparisons
NORM_TOL = 1e-12


class Polarization(str, Enum):
    """Photon polarization label; H sorts before V in the canonical mode order."""

    H = "H"
    V = "V"

    def __repr__(self) -> str:
        return self.value


H = Polarization.H
V = Polarization.V

BeamLike = Union[str, int]


def as_beam(label: BeamLike) -> str:
    """Coerce a beam label to its canonical string form."""
    if isinstance(label, Polarization):
        raise TypeError("polarization used where a beam label was expected")
    text = str(label)
    if not text:
        raise ValueError("empty beam label")
    return text


class Mode(NamedTuple):
    """One bosonic mode: a spatial beam carrying a single polarization."""

    beam: str
    pol: Polarization


ModeLike = Union[Mode, tuple]


def mode(beam: BeamLike, pol: Polarization | str) -> Mode:
    return Mode(as_beam(beam), Polarization(pol))


def _as_mode(value: ModeLike) -> Mode:
    if isinstance(value, Mode):
        return value
    beam, pol = value
    return mode(beam, pol)


class Occupation:
    """Photon counts per mode, zero counts omitted, canonically ordered.

    Instances are hashable and order-independent: two occupations built from
    the same nonzero counts compare equal no matter how they were assembled.
    """

    __slots__ = ("_items",)

    def __init__(
        self,
        counts: Mapping[ModeLike, int] | Iterable[tuple[ModeLike, int]] = (),
    ) -> None:
        pairs = counts.items() if isinstance(counts, Mapping) else counts
        acc: dict[Mode, int] = {}
        for raw, n in pairs:
            m = _as_mode(raw)
            n = operator.index(n)
            if n < 0:
                raise ValueError(f"negative photon count for mode {m}")
            if m in acc:
                raise ValueError(f"duplicate mode {m} in occupation")
            if n:
                acc[m] = n
        self._items = tuple(sorted(acc.items()))

    @classmethod
    def _from_sorted(cls, items: tuple[tuple[Mode, int], ...]) -> "Occupation":
        out = object.__new__(cls)
        out._items = items
        return out

    def items(self) -> tuple[tuple[Mode, int], ...]:
        return self._items

    def count(self, m: ModeLike) -> int:
        m = _as_mode(m)
        for k, n in self._items:
            if k == m:
                return n
        return 0

    @property
    def total(self) -> int:
        return sum(n for _, n in self._items)

    @property
    def beams(self) -> frozenset[str]:
        return frozenset(m.beam for m, _ in self._items)

    def is_vacuum(self) -> bool:
        return not self._items

    def beam_totals(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for m, n in self._items:
            out[m.beam] = out.get(m.beam, 0) + n
        return out

    def split(self, beams: Iterable[BeamLike]) -> tuple["Occupation", "Occupation"]:
        """Split into (part on `beams`, remainder)."""
        sel = {as_beam(b) for b in beams}
        inside = tuple(p for p in self._items if p[0].beam in sel)
        outside = tuple(p for p in self._items if p[0].beam not in sel)
        return Occupation._from_sorted(inside), Occupation._from_sorted(outside)

    def merged(self, other: "Occupation") -> "Occupation":
        """Union of two occupations over disjoint mode sets."""
        items = tuple(sorted(self._items + other._items))
        for a, b in zip(items, items[1:]):
            if a[0] == b[0]:
                raise ValueError(f"mode {a[0]} present in both occupations")
        return Occupation._from_sorted(items)

    def with_added(self, m: ModeLike, k: int = 1) -> "Occupation":
        m = _as_mode(m)
        counts = dict(self._items)
        counts[m] = counts.get(m, 0) + k
        return Occupation(counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Occupation):
            return NotImplemented
        return self._items == other._items

    def __lt__(self, other: "Occupation") -> bool:
        return self._items < other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        if not self._items:
            return "|vac>"
        body = " ".join(f"{n}{m.pol.value}@{m.beam}" for m, n in self._items)
        return f"|{body}>"


class Ket:
    """Immutable sparse superposition of occupations over a fixed beam set.

    The registry records which beams the state is defined over, including
    beams that happen to carry no photons in any term; operations that merge
    or compare states use it to detect misuse early.
    """

    __slots__ = ("_registry", "_terms")

    def __init__(
        self,
        registry: Iterable[BeamLike],
        terms: Mapping[Occupation, complex] | Iterable[tuple] = (),
    ) -> None:
        reg = frozenset(as_beam(b) for b in registry)
        data: dict[Occupation, complex] = {}
        pairs = terms.items() if isinstance(terms, Mapping) else terms
        for occ, amp in pairs:
            if not isinstance(occ, Occupation):
                occ = Occupation(occ)
            a = complex(amp)
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                raise ValueError("non-finite amplitude")
            missing = occ.beams - reg
            if missing:
                raise ValueError(
                    f"occupation references unregistered beam(s): {sorted(missing)}"
                )
            data[occ] = data.get(occ, 0j) + a
        self._registry = reg
        self._terms = {o: a for o, a in data.items() if abs(a) >= PRUNE_TOL}

    @property
    def registry(self) -> frozenset[str]:
        return self._registry

    def items(self) -> Iterable[tuple[Occupation, complex]]:
        return self._terms.items()

    def sorted_items(self) -> list[tuple[Occupation, complex]]:
        return sorted(self._terms.items(), key=lambda p: p[0])

    def amplitude(self, occ: Occupation | Mapping | Iterable) -> complex:
        if not isinstance(occ, Occupation):
            occ = Occupation(occ)
        return self._terms.get(occ, 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._terms.values()))

    @property
    def max_photons(self) -> int:
        return max((occ.total for occ in self._terms), default=0)

    def allclose(self, other: "Ket", tol: float = NORM_TOL) -> bool:
        """Term-by-term amplitude comparison over the union of occupations."""
        if self._registry != other._registry:
            return False
        for occ in self._terms.keys() | other._terms.keys():
            if abs(self._terms.get(occ, 0j) - other._terms.get(occ, 0j)) > tol:
                return False
        return True

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ket):
            return NotImplemented
        return self._registry == other._registry and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._registry, tuple(sorted(self._terms.items(), key=lambda p: p[0]))))

    def __repr__(self) -> str:
        shown = self.sorted_items()[:8]
        body = " + ".join(f"({a:.5g})*{occ!r}" for occ, a in shown)
        more = "" if len(self._terms) <= 8 else f" + ... ({len(self._terms)} terms)"
        return f"Ket[{body or '0'}{more}]"


def vacuum(beams: Iterable[BeamLike]) -> Ket:
    """The zero-photon state over the given beams.

    Raises if the beam collection is empty or contains duplicate labels.
    """
    labels = [as_beam(b) for b in beams]
    if not labels:
        raise ValueError("no beams")
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate beam label")
    return Ket(labels, {Occupation(): 1.0 + 0j})


def add_term(ket: Ket, occ: Occupation | Mapping | Iterable, amp: complex) -> Ket:
    """Return `ket` with `amp` added to the amplitude at `occ`.

    Terms whose resulting magnitude falls below the pruning threshold are
    removed, so adding a term and then its negation restores the state.
    """
    return Ket(ket.registry, list(ket.items()) + [(occ, amp)])


def scale(ket: Ket, factor: complex) -> Ket:
    return Ket(ket.registry, {occ: a * factor for occ, a in ket.items()})


def add_kets(a: Ket, b: Ket) -> Ket:
    """Superpose two kets over the same beam registry."""
    if a.registry != b.registry:
        raise ValueError("beam registry mismatch")
    return Ket(a.registry, list(a.items()) + list(b.items()))


def inner(a: Ket, b: Ket) -> complex:
    """Hermitian inner product <a|b>."""
    if a.registry != b.registry:
        raise ValueError("beam registry mismatch")
    small, big, conj_small = (a, b, True) if len(a) <= len(b) else (b, a, False)
    total = 0j
    for occ, amp in small.items():
        other = big.amplitude(occ)
        total += (amp.conjugate() * other) if conj_small else (other.conjugate() * amp)
    return total


def normalize(ket: Ket) -> Ket:
    n = ket.norm()
    if n <= 1e-12:
        raise ValueError("null state")
    return scale(ket, 1.0 / n)


def tensor(a: Ket, b: Ket) -> Ket:
    """Product state over the union of two disjoint beam registries."""
    overlap = a.registry & b.registry
    if overlap:
        raise ValueError(f"overlapping beam registries: {sorted(overlap)}")
    terms: dict[Occupation, complex] = {}
    for occ_a, amp_a in a.items():
        for occ_b, amp_b in b.items():
            terms[occ_a.merged(occ_b)] = amp_a * amp_b
    return Ket(a.registry | b.registry, terms)


def fidelity_pure(a: Ket, b: Ket) -> float:
    """|<a|b>|^2 for normalized pure states; insensitive to global phase."""
    for k in (a, b):
        if abs(k.norm() - 1.0) > 1e-9:
            raise ValueError("fidelity_pure requires normalized states")
    return abs(inner(a, b)) ** 2


def truncate(ket: Ket, n_max: int) -> Ket:
    """Drop every term with total photon number above `n_max` (no renormalization)."""
    n_max = operator.index(n_max)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    return Ket(ket.registry, {occ: a for occ, a in ket.items() if occ.total <= n_max})


def create(ket: Ket, m: ModeLike) -> Ket:
    """Apply the creation operator of mode `m`: |n> -> sqrt(n+1) |n+1>."""
    m = _as_mode(m)
    if m.beam not in ket.registry:
        raise ValueError(f"beam '{m.beam}' not in registry")
    terms: dict[Occupation, complex] = {}
    for occ, amp in ket.items():
        n = occ.count(m)
        terms[occ.with_added(m)] = amp * math.sqrt(n + 1)
    return Ket(ket.registry, terms)
