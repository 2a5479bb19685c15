import cmath
import math

import pytest

from pbsherald.bell import (
    PATTERN_TO_BELL,
    BellLabel,
    bell_state,
    classify,
    ensemble_fidelity,
    exclusion_report,
)
from pbsherald.config import load_builtin
from pbsherald.detection import DetectorBank, HeraldRule
from pbsherald.elements import Circuit, pbs
from pbsherald.fock import H, V, Ket, Occupation, inner, scale
from pbsherald.source import SourceSpec, source_term

S2 = 1.0 / math.sqrt(2.0)


class TestBellStates:
    def test_phi_plus_amplitudes(self):
        ket = bell_state(BellLabel.PHI_PLUS, "1", "2")
        assert ket.amplitude(Occupation({("1", H): 1, ("2", H): 1})) == pytest.approx(S2, abs=1e-12)
        assert ket.amplitude(Occupation({("1", V): 1, ("2", V): 1})) == pytest.approx(S2, abs=1e-12)

    def test_psi_plus_amplitudes(self):
        ket = bell_state(BellLabel.PSI_PLUS, "1", "2")
        assert ket.amplitude(Occupation({("1", H): 1, ("2", V): 1})) == pytest.approx(S2, abs=1e-12)
        assert ket.amplitude(Occupation({("1", V): 1, ("2", H): 1})) == pytest.approx(S2, abs=1e-12)

    def test_gram_matrix_is_identity(self):
        states = [bell_state(label, "1", "2") for label in BellLabel]
        for i, a in enumerate(states):
            for j, b in enumerate(states):
                expected = 1.0 if i == j else 0.0
                assert inner(a, b) == pytest.approx(expected, abs=1e-12)

    def test_coincident_beams(self):
        with pytest.raises(ValueError, match="coincident"):
            bell_state(BellLabel.PHI_PLUS, "1", "1")


class TestClassify:
    def test_table(self):
        assert classify({"D1", "D3"}) is BellLabel.PHI_PLUS
        assert classify({"D2", "D4"}) is BellLabel.PHI_PLUS
        assert classify({"D1", "D4"}) is BellLabel.PHI_MINUS
        assert classify({"D2", "D3"}) is BellLabel.PHI_MINUS

    def test_rejected_pattern(self):
        with pytest.raises(ValueError, match="not an accepted"):
            classify({"D1", "D2"})

    def test_total_on_table_and_phi_valued(self):
        assert len(PATTERN_TO_BELL) == 4
        assert set(PATTERN_TO_BELL.values()) == {BellLabel.PHI_PLUS, BellLabel.PHI_MINUS}


class TestEnsembleFidelity:
    def test_single_component_match(self):
        target = bell_state(BellLabel.PHI_PLUS, "3", "4")
        assert ensemble_fidelity([(1.0, target)], target) == pytest.approx(1.0)

    def test_equal_mixture(self):
        target = bell_state(BellLabel.PHI_PLUS, "3", "4")
        other = bell_state(BellLabel.PHI_MINUS, "3", "4")
        assert ensemble_fidelity([(0.5, target), (0.5, other)], target) == pytest.approx(0.5)

    def test_empty_ensemble(self):
        with pytest.raises(ValueError, match="empty"):
            ensemble_fidelity([], bell_state(BellLabel.PHI_PLUS, "3", "4"))

    def test_weight_sum_enforced(self):
        target = bell_state(BellLabel.PHI_PLUS, "3", "4")
        with pytest.raises(ValueError, match="sum to 1"):
            ensemble_fidelity([(0.7, target)], target)

    def test_bounded(self):
        target = bell_state(BellLabel.PHI_PLUS, "3", "4")
        other = bell_state(BellLabel.PSI_MINUS, "3", "4")
        value = ensemble_fidelity([(0.25, target), (0.75, other)], target)
        assert -1e-12 <= value <= 1.0 + 1e-12


class TestExclusionReport:
    def _setup(self):
        circuit = Circuit((pbs("1", "2", "e", "f"),))
        bank = DetectorBank({"D1": "e", "D2": "f"})
        rule = HeraldRule((frozenset({"D1"}), frozenset({"D2"})))
        return circuit, bank, rule

    def test_bunched_state_excluded(self):
        circuit, bank, rule = self._setup()
        sector = Ket({"1", "2"}, {Occupation({("1", H): 1, ("1", V): 1}): 1.0})
        # H goes to e, V goes to f: this state actually splits, so it is accepted
        report = exclusion_report(sector, circuit, bank, rule)
        assert report.false_herald_probability == pytest.approx(1.0)

    def test_same_polarization_double_excluded(self):
        circuit, bank, rule = self._setup()
        sector = Ket({"1", "2"}, {Occupation({("1", H): 2}): 1.0})
        report = exclusion_report(sector, circuit, bank, rule)
        assert report.false_herald_probability == pytest.approx(0.0, abs=1e-12)

    def test_global_phase_invariance(self):
        circuit, bank, rule = self._setup()
        sector = Ket({"1", "2"}, {Occupation({("1", H): 1, ("2", V): 1}): 1.0})
        base = exclusion_report(sector, circuit, bank, rule)
        rotated = exclusion_report(scale(sector, cmath.exp(0.77j)), circuit, bank, rule)
        assert rotated.false_herald_probability == pytest.approx(
            base.false_herald_probability, abs=1e-12
        )

    def test_unnormalized_rejected(self):
        circuit, bank, rule = self._setup()
        with pytest.raises(ValueError, match="normalized"):
            exclusion_report(
                Ket({"1", "2"}, {Occupation({("1", H): 1}): 2.0}), circuit, bank, rule
            )

    def test_shipped_geometry_values(self):
        # frozen from the dense oracle: the analyzer-only geometry accepts the
        # split double-pair component with probability 1/3 of the sector
        split = load_builtin("fig3")
        sector = source_term(split.source, "double_left")
        report = exclusion_report(sector, split.circuit, split.bank, split.rule)
        assert report.false_herald_probability == pytest.approx(1.0 / 3.0, abs=1e-12)
        recombine = load_builtin("fig4-recombine")
        report = exclusion_report(sector, recombine.circuit, recombine.bank, recombine.rule)
        assert report.false_herald_probability == pytest.approx(0.0, abs=1e-12)
