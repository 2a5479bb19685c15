import math

import numpy as np
import pytest

from pbsherald.bell import BellLabel, bell_state
from pbsherald.config import load_builtin
from pbsherald.detection import (
    DetectorBank,
    DetectorModel,
    HeraldRule,
    count_distribution,
    fire_probability,
    herald,
    pattern_probabilities,
    rule_eval,
)
from pbsherald.elements import apply_circuit
from pbsherald.fock import H, V, Ket, Occupation, normalize, scale, tensor, vacuum
from pbsherald.source import SourceSpec, source_term


def psi_minus(a, b):
    return bell_state(BellLabel.PSI_MINUS, a, b)


class TestDetectorModel:
    def test_defaults_are_ideal(self):
        model = DetectorModel()
        assert model.efficiency == 1.0 and model.dark_rate == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            DetectorModel(efficiency=1.5)
        with pytest.raises(ValueError):
            DetectorModel(dark_rate=1.0)
        with pytest.raises(ValueError):
            DetectorModel(kind="analog")


class TestFireProbability:
    def test_no_photon_no_dark(self):
        assert fire_probability(0, DetectorModel()) == 0.0

    def test_two_photons_half_efficiency(self):
        assert fire_probability(2, DetectorModel(efficiency=0.5)) == pytest.approx(0.75)

    def test_dark_count_only(self):
        assert fire_probability(0, DetectorModel(dark_rate=0.01)) == pytest.approx(0.01)

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            fire_probability(-1, DetectorModel())


class TestCountDistribution:
    def test_antisymmetric_pair_two_outcomes(self):
        branches = count_distribution(psi_minus("1", "2"), {"1", "2"})
        assert len(branches) == 2
        for branch in branches:
            assert branch.probability == pytest.approx(0.5)
            assert branch.counts.beam_totals() == {"1": 1, "2": 1}

    def test_pair_product_splits_into_four_product_residuals(self):
        state = tensor(psi_minus("1", "4"), psi_minus("2", "3"))
        branches = count_distribution(state, {"1", "2"})
        assert len(branches) == 4
        expected = {
            Occupation({("1", H): 1, ("2", H): 1}): (Occupation({("4", V): 1, ("3", V): 1}), 1.0),
            Occupation({("1", H): 1, ("2", V): 1}): (Occupation({("4", V): 1, ("3", H): 1}), -1.0),
            Occupation({("1", V): 1, ("2", H): 1}): (Occupation({("4", H): 1, ("3", V): 1}), -1.0),
            Occupation({("1", V): 1, ("2", V): 1}): (Occupation({("4", H): 1, ("3", H): 1}), 1.0),
        }
        for branch in branches:
            residual_occ, sign = expected[branch.counts]
            assert branch.probability == pytest.approx(0.25)
            assert branch.residual.amplitude(residual_occ) == pytest.approx(sign, abs=1e-12)
            assert len(branch.residual) == 1

    def test_vacuum_single_outcome(self):
        branches = count_distribution(vacuum({"1", "2"}), {"1"})
        assert len(branches) == 1
        assert branches[0].probability == pytest.approx(1.0)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError, match="normalized"):
            count_distribution(scale(vacuum({"1"}), 2.0), {"1"})

    def test_probabilities_sum_to_one(self):
        state = normalize(
            Ket(
                {"1", "2"},
                {
                    Occupation({("1", H): 2}): 0.5,
                    Occupation({("1", V): 1, ("2", H): 1}): 0.5j,
                    Occupation(): 0.7,
                },
            )
        )
        branches = count_distribution(state, {"1"})
        assert sum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-9)


class TestPatternProbabilities:
    def test_ideal_detectors_exact_support(self):
        state = Ket({"e", "f"}, {Occupation({("e", H): 1, ("f", V): 1}): 1.0})
        bank = DetectorBank({"D1": "e", "D2": "f"})
        patterns = pattern_probabilities(state, bank)
        assert set(patterns) == {frozenset({"D1", "D2"})}
        outcome = patterns[frozenset({"D1", "D2"})]
        assert outcome.probability == pytest.approx(1.0)
        assert len(outcome.ensemble) == 1

    def test_half_efficiency_bernoulli_split(self):
        state = Ket({"e", "f"}, {Occupation({("e", H): 1, ("f", V): 1}): 1.0})
        bank = DetectorBank({"D1": "e", "D2": "f"}, model=DetectorModel(efficiency=0.5))
        patterns = pattern_probabilities(state, bank)
        for key in (frozenset(), frozenset({"D1"}), frozenset({"D2"}), frozenset({"D1", "D2"})):
            assert patterns[key].probability == pytest.approx(0.25)

    def test_threshold_cannot_count(self):
        state = Ket({"e"}, {Occupation({("e", H): 2}): 1.0})
        bank = DetectorBank({"D1": "e"})
        patterns = pattern_probabilities(state, bank)
        assert patterns[frozenset({"D1"})].probability == pytest.approx(1.0)

    def test_detector_on_unknown_beam_rejected(self):
        bank = DetectorBank({"D1": "zz"})
        with pytest.raises(ValueError, match="non-terminal"):
            pattern_probabilities(vacuum({"1"}), bank)

    def test_duplicate_beam_rejected(self):
        with pytest.raises(ValueError, match="at most one detector"):
            DetectorBank({"D1": "e", "D2": "e"})


class TestRuleEval:
    RULE = HeraldRule((frozenset({"D1", "D2"}), frozenset({"D3", "D4"})))

    def test_one_from_each_group(self):
        assert rule_eval({"D1", "D3"}, self.RULE)

    def test_two_from_one_group(self):
        assert not rule_eval({"D1", "D2"}, self.RULE)

    def test_empty_pattern(self):
        assert not rule_eval(set(), self.RULE)

    def test_outside_detector_blocks(self):
        rule = HeraldRule((frozenset({"D1", "D2"}),))
        assert not rule_eval({"D1", "D3"}, rule)

    def test_groups_must_be_disjoint(self):
        with pytest.raises(ValueError, match="disjoint"):
            HeraldRule((frozenset({"D1"}), frozenset({"D1", "D2"})))


class TestHerald:
    def _mini(self):
        state = Ket(
            {"e", "f", "g"},
            {
                Occupation({("e", H): 1, ("f", V): 1}): 0.6,
                Occupation({("e", H): 1, ("g", H): 1}): 0.8,
            },
        )
        bank = DetectorBank({"D1": "e", "D2": "f"})
        rule = HeraldRule((frozenset({"D1"}), frozenset({"D2"})))
        return state, bank, rule

    def test_partition(self):
        state, bank, rule = self._mini()
        report = herald(state, bank, rule)
        assert report.herald_probability == pytest.approx(0.36)
        assert report.rejected_probability == pytest.approx(0.64)

    def test_conditional_state(self):
        state, bank, rule = self._mini()
        report = herald(state, bank, rule)
        outcome = report.accepted[frozenset({"D1", "D2"})]
        assert outcome.ensemble[0][1].amplitude(Occupation()) == pytest.approx(1.0)

    def test_vacuum_heralds_nothing(self):
        bank = DetectorBank({"D1": "1", "D2": "2"})
        rule = HeraldRule((frozenset({"D1"}), frozenset({"D2"})))
        report = herald(vacuum({"1", "2"}), bank, rule)
        assert report.herald_probability == 0.0

    def test_probability_conservation_random_models(self):
        rng = np.random.default_rng(21)
        state = normalize(
            Ket(
                {"e", "f", "g"},
                {
                    Occupation({("e", H): 1, ("f", V): 1}): 0.3,
                    Occupation({("e", H): 2}): 0.4,
                    Occupation({("g", V): 1}): 0.2,
                    Occupation(): 0.5,
                },
            )
        )
        rule = HeraldRule((frozenset({"D1"}), frozenset({"D2"})))
        for _ in range(25):
            model = DetectorModel(
                efficiency=float(rng.uniform(0, 1)), dark_rate=float(rng.uniform(0, 0.5))
            )
            bank = DetectorBank({"D1": "e", "D2": "f", "D3": "g"}, model=model)
            report = herald(state, bank, rule)
            total = report.herald_probability + report.rejected_probability
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_unnormalized_input_sums_to_norm_squared(self):
        state = scale(vacuum({"e"}), 0.25)
        bank = DetectorBank({"D1": "e"}, model=DetectorModel(dark_rate=0.3))
        rule = HeraldRule((frozenset({"D1"}),))
        report = herald(state, bank, rule)
        assert report.input_norm_sq == pytest.approx(0.0625)
        assert report.herald_probability + report.rejected_probability == pytest.approx(0.0625)


class TestDetectorPhysicsInvariants:
    def test_pair_pair_ideal_herald_is_pure_in_both_geometries(self):
        for name in ("fig3", "fig4-recombine"):
            config = load_builtin(name)
            sector = source_term(config.source, "pair_pair")
            report = herald(apply_circuit(sector, config.circuit), config.bank, config.rule)
            assert report.accepted, name
            for outcome in report.accepted.values():
                weights = [w for w, _ in outcome.ensemble]
                assert len(weights) == 1 or max(weights) >= 1.0 - 1e-9

    def test_threshold_and_number_resolving_agree_on_single_photon_states(self):
        config = load_builtin("fig3")
        sector = source_term(config.source, "pair_pair")
        out = apply_circuit(sector, config.circuit)
        reports = {}
        for kind in ("threshold", "number_resolving"):
            bank = DetectorBank(dict(config.bank.bindings), model=DetectorModel(kind=kind))
            reports[kind] = herald(out, bank, config.rule)
        assert set(reports["threshold"].accepted) == set(reports["number_resolving"].accepted)
        for key in reports["threshold"].accepted:
            assert reports["threshold"].accepted[key].probability == pytest.approx(
                reports["number_resolving"].accepted[key].probability, abs=1e-12
            )

    def test_herald_probability_monotone_in_efficiency(self):
        config = load_builtin("fig3")
        out = apply_circuit(source_term(config.source, "pair_pair"), config.circuit)
        previous = -1.0
        for eta in [0.1 * k for k in range(1, 11)]:
            bank = DetectorBank(dict(config.bank.bindings), model=DetectorModel(efficiency=eta))
            p = herald(out, bank, config.rule).herald_probability
            assert p >= previous - 1e-12
            previous = p
