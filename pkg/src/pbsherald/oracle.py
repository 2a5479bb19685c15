"""Brute-force dense reference implementation over the truncated Fock basis.

Everything here re-derives the transformation arithmetic from scratch:
explicit basis enumeration, photon-by-photon distribution of creation
operators with a factorial table, dense matrix products, and exhaustive
outcome enumeration.  No expansion code is shared with the sparse modules,
so agreement between the two paths is evidence of correctness rather than a
tautology.  Performance is a non-goal.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .detection import DetectorBank, HeraldRule, HeraldReport, PatternOutcome, rule_eval
from .elements import Circuit, ModeMap
from .fock import H, V, BeamLike, Ket, Mode, Occupation, as_beam

DEFAULT_N_MAX = 4

_FACTORIALS: list[int] = [1]


def _fact(n: int) -> int:
    while len(_FACTORIALS) <= n:
        _FACTORIALS.append(_FACTORIALS[-1] * len(_FACTORIALS))
    return _FACTORIALS[n]


@dataclass(frozen=True, eq=False)
class DenseBasis:
    """Deterministic enumeration of occupations with total photon number <= n_max."""

    modes: tuple[Mode, ...]
    n_max: int
    states: tuple[tuple[int, ...], ...]
    index: Mapping[tuple[int, ...], int]
    mode_positions: Mapping[Mode, int]

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def beams(self) -> frozenset[str]:
        return frozenset(m.beam for m in self.modes)

    def occupation_of(self, i: int) -> Occupation:
        counts = self.states[i]
        return Occupation({m: c for m, c in zip(self.modes, counts) if c})

    def index_of(self, occ: Occupation) -> int:
        counts = [0] * len(self.modes)
        for m, n in occ.items():
            pos = self.mode_positions.get(m)
            if pos is None:
                raise ValueError(f"mode {m} outside basis")
            counts[pos] = n
        try:
            return self.index[tuple(counts)]
        except KeyError:
            raise ValueError("occupation outside basis (photon cutoff exceeded)") from None

    def vector_of(self, ket: Ket) -> np.ndarray:
        vec = np.zeros(self.size, dtype=complex)
        for occ, amp in ket.items():
            vec[self.index_of(occ)] += amp
        return vec

    def ket_of(self, vec: np.ndarray, tol: float = 1e-14) -> Ket:
        terms = {
            self.occupation_of(i): complex(a)
            for i, a in enumerate(vec)
            if abs(a) >= tol
        }
        return Ket(self.beams, terms)


def enumerate_basis(beams: Iterable[BeamLike], n_max: int) -> DenseBasis:
    """Complete lexicographic enumeration of the truncated basis."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    beam_set = {as_beam(b) for b in beams}
    modes = tuple(sorted(Mode(b, p) for b in beam_set for p in (H, V)))
    states: list[tuple[int, ...]] = []

    def grow(prefix: tuple[int, ...], budget: int) -> None:
        if len(prefix) == len(modes):
            states.append(prefix)
            return
        for c in range(budget + 1):
            grow(prefix + (c,), budget - c)

    grow((), n_max)
    index = {s: i for i, s in enumerate(states)}
    positions = {m: i for i, m in enumerate(modes)}
    return DenseBasis(modes, n_max, tuple(states), index, positions)


def _image_amplitudes(
    counts: tuple[int, ...],
    modes_in: tuple[Mode, ...],
    rules: Mapping[Mode, tuple[tuple[Mode, complex], ...]],
    basis_out: DenseBasis,
) -> list[tuple[tuple[int, ...], complex]]:
    """Dense coordinates of one mapped basis occupation.

    Distributes photons one at a time over each input mode's targets; the
    repeated summation reproduces multinomial coefficients, and the final
    sqrt(prod n_out!) / sqrt(prod n_in!) supplies the bosonic normalization.
    """
    width = len(basis_out.modes)
    poly: dict[tuple[int, ...], complex] = {tuple([0] * width): 1.0 + 0j}
    denom = 1
    for m, n in zip(modes_in, counts):
        if n == 0:
            continue
        denom *= _fact(n)
        targets = rules.get(m, ((m, 1.0 + 0j),))
        slots = [(basis_out.mode_positions[out_m], complex(c)) for out_m, c in targets]
        for _ in range(n):
            grown: dict[tuple[int, ...], complex] = {}
            for vec, c0 in poly.items():
                for pos, c in slots:
                    bumped = list(vec)
                    bumped[pos] += 1
                    key = tuple(bumped)
                    grown[key] = grown.get(key, 0j) + c0 * c
            poly = grown
    out = []
    for vec, c in poly.items():
        numer = 1
        for cnt in vec:
            numer *= _fact(cnt)
        out.append((vec, c * math.sqrt(numer / denom)))
    return out


def lift_modemap(element: ModeMap, basis: DenseBasis, basis_out: DenseBasis | None = None) -> np.ndarray:
    """Dense matrix of an element between two enumerated bases."""
    target = basis_out if basis_out is not None else basis
    for m in element.codomain:
        if m not in target.mode_positions:
            raise ValueError(f"output mode {m} outside the target basis")
    matrix = np.zeros((target.size, basis.size), dtype=complex)
    for j, counts in enumerate(basis.states):
        for vec, amp in _image_amplitudes(counts, basis.modes, element.rules, target):
            matrix[target.index[vec], j] += amp
    return matrix


def dense_run(ket: Ket, circuit: Circuit, n_max: int = DEFAULT_N_MAX) -> tuple[np.ndarray, DenseBasis]:
    """Propagate a ket through a circuit with dense matrix products."""
    if ket.max_photons > n_max:
        raise ValueError("input state exceeds the photon cutoff")
    registries = circuit.validate(ket.registry)
    basis = enumerate_basis(registries[0], n_max)
    vec = basis.vector_of(ket)
    for element, registry in zip(circuit.elements, registries[1:]):
        basis_next = enumerate_basis(registry, n_max)
        vec = lift_modemap(element, basis, basis_next) @ vec
        basis = basis_next
    return vec, basis


def dense_check(
    ket: Ket,
    circuit: Circuit,
    bank: DetectorBank,
    rule: HeraldRule,
    n_max: int = DEFAULT_N_MAX,
) -> HeraldReport:
    """Same semantics as detection.herald, computed by exhaustive enumeration."""
    norm_sq_in = sum(abs(a) ** 2 for _, a in ket.items())
    vec, basis = dense_run(ket, circuit, n_max)
    norm_sq_out = float(np.vdot(vec, vec).real)
    if abs(norm_sq_out - norm_sq_in) > 1e-10 * max(1.0, norm_sq_in):
        raise AssertionError("dense evolution failed to preserve the norm")

    det_ids = bank.detector_ids
    measured_beams = bank.beams
    for det, beam in bank.bindings.items():
        if beam not in basis.beams:
            raise ValueError(f"detector {det} bound to non-terminal beam '{beam}'")
    measured_pos = [i for i, m in enumerate(basis.modes) if m.beam in measured_beams]
    rest_pos = [i for i, m in enumerate(basis.modes) if m.beam not in measured_beams]
    rest_basis = enumerate_basis(basis.beams - measured_beams, n_max)

    groups: dict[tuple[int, ...], np.ndarray] = {}
    for i, amp in enumerate(vec):
        if abs(amp) < 1e-14:
            continue
        state = basis.states[i]
        m_key = tuple(state[p] for p in measured_pos)
        r_key = tuple(state[p] for p in rest_pos)
        sub = groups.setdefault(m_key, np.zeros(rest_basis.size, dtype=complex))
        sub[rest_basis.index[r_key]] += amp

    prob: dict[frozenset[str], float] = {}
    comps: dict[frozenset[str], list[tuple[float, Ket]]] = {}
    measured_modes = [basis.modes[p] for p in measured_pos]
    for m_key in sorted(groups):
        sub = groups[m_key]
        weight = float(np.vdot(sub, sub).real)
        if weight <= 0.0:
            continue
        residual = rest_basis.ket_of(sub / math.sqrt(weight))
        totals: dict[str, int] = {}
        for m, c in zip(measured_modes, m_key):
            totals[m.beam] = totals.get(m.beam, 0) + c
        fire = []
        for det in det_ids:
            model = bank.model_for(det)
            k = totals.get(bank.bindings[det], 0)
            fire.append(1.0 - (1.0 - model.efficiency) ** k * (1.0 - model.dark_rate))
        for flags in itertools.product((False, True), repeat=len(det_ids)):
            p = weight
            for on, pf in zip(flags, fire):
                p *= pf if on else (1.0 - pf)
                if p == 0.0:
                    break
            if p <= 0.0:
                continue
            key = frozenset(d for d, on in zip(det_ids, flags) if on)
            prob[key] = prob.get(key, 0.0) + p
            comps.setdefault(key, []).append((p, residual))

    accepted: dict[frozenset[str], PatternOutcome] = {}
    rejected: dict[frozenset[str], PatternOutcome] = {}
    for key in sorted(prob, key=lambda s: tuple(sorted(s))):
        total = prob[key]
        outcome = PatternOutcome(total, tuple((w / total, k) for w, k in comps[key]))
        (accepted if rule_eval(key, rule) else rejected)[key] = outcome
    p_acc = sum(o.probability for o in accepted.values())
    p_rej = sum(o.probability for o in rejected.values())
    return HeraldReport(accepted, rejected, p_acc, p_rej, norm_sq_in)
