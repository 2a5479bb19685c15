import math

import pytest

from pbsherald.bell import BellLabel, bell_state
from pbsherald.fock import H, V, Occupation, fidelity_pure, inner, normalize, vacuum
from pbsherald.source import (
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

S2 = 1.0 / math.sqrt(2.0)
S3 = 1.0 / math.sqrt(3.0)


class TestSourceSpec:
    def test_defaults(self):
        spec = SourceSpec()
        assert spec.beams == ("1", "4", "2", "3")
        assert spec.order == 2

    def test_lambda_range(self):
        with pytest.raises(ValueError, match="lambda"):
            SourceSpec(lam=1.0)
        with pytest.raises(ValueError, match="lambda"):
            SourceSpec(lam=-0.1)

    def test_order_range(self):
        with pytest.raises(ValueError, match="order"):
            SourceSpec(order=3)

    def test_distinct_beams(self):
        with pytest.raises(ValueError, match="distinct"):
            SourceSpec(left=("1", "2"), right=("2", "3"))


class TestSinglePair:
    def test_amplitudes(self):
        ket = single_pair("1", "4")
        assert ket.amplitude(Occupation({("1", H): 1, ("4", V): 1})) == pytest.approx(S2, abs=1e-12)
        assert ket.amplitude(Occupation({("1", V): 1, ("4", H): 1})) == pytest.approx(-S2, abs=1e-12)
        assert abs(S2 - 0.70711) < 5e-6

    def test_matches_bell_state(self):
        assert fidelity_pure(single_pair("1", "4"), bell_state(BellLabel.PSI_MINUS, "1", "4")) == pytest.approx(1.0)

    def test_normalized(self):
        assert single_pair("1", "4").norm() == pytest.approx(1.0)

    def test_coincident_beams(self):
        with pytest.raises(ValueError, match="coincident"):
            single_pair("1", "1")


class TestTwoPair:
    def test_coefficients(self):
        ket = two_pair("1", "4")
        assert ket.amplitude(Occupation({("1", H): 2, ("4", V): 2})) == pytest.approx(S3, abs=1e-12)
        assert ket.amplitude(
            Occupation({("1", H): 1, ("1", V): 1, ("4", H): 1, ("4", V): 1})
        ) == pytest.approx(-S3, abs=1e-12)
        assert ket.amplitude(Occupation({("1", V): 2, ("4", H): 2})) == pytest.approx(S3, abs=1e-12)

    def test_operator_construction_agrees(self):
        # the independent consistency oracle: squared pair creation on vacuum
        assert two_pair("1", "4").allclose(two_pair_via_operators("1", "4"), tol=1e-12)

    def test_normalized(self):
        assert two_pair("1", "4").norm() == pytest.approx(1.0)


class TestSideState:
    def test_order_zero_is_vacuum(self):
        ket = side_state(SourceSpec(lam=0.3, order=0), "left")
        assert ket.allclose(vacuum({"1", "4"}))

    def test_order_one_weights(self):
        spec = SourceSpec(lam=0.1, order=1)
        ket = side_state(spec, "left")
        assert ket.amplitude(Occupation()) == pytest.approx(1.0)
        assert inner(single_pair("1", "4"), ket) == pytest.approx(math.sqrt(2.0) * 0.1, abs=1e-12)

    def test_order_two_weights(self):
        spec = SourceSpec(lam=0.1, order=2)
        ket = side_state(spec, "left")
        assert inner(two_pair("1", "4"), ket) == pytest.approx(math.sqrt(3.0) * 0.01, abs=1e-12)

    def test_components_orthogonal(self):
        # distinct photon numbers, so the three components never overlap
        spec = SourceSpec(lam=0.2, order=2)
        ket = side_state(spec, "left")
        expected_sq = 1.0 + 2 * 0.2**2 + 3 * 0.2**4
        assert ket.norm() ** 2 == pytest.approx(expected_sq, abs=1e-12)


class TestFullSource:
    def test_lambda_zero_is_vacuum(self):
        ket = full_source(SourceSpec(lam=0.0))
        assert fidelity_pure(normalize(ket), vacuum({"1", "2", "3", "4"})) == pytest.approx(1.0)

    def test_second_order_sector_weights(self):
        spec = SourceSpec(lam=0.1, order=2)
        src = full_source(spec)
        for selector, weight in (
            ("pair_pair", 2 * 0.1**2),
            ("double_left", math.sqrt(3.0) * 0.1**2),
            ("double_right", math.sqrt(3.0) * 0.1**2),
        ):
            assert inner(source_term(spec, selector), src) == pytest.approx(weight, abs=1e-12)
            assert sector_weight(spec, selector) == pytest.approx(weight)

    def test_max_photons_bounded(self):
        src = full_source(SourceSpec(lam=0.2, order=2))
        assert src.max_photons <= 4

    def test_truncation_at_order_is_identity(self):
        from pbsherald.fock import truncate

        src = full_source(SourceSpec(lam=0.2, order=2))
        assert truncate(src, 4) == src

    def test_type_ii_pairing_structure(self):
        spec = SourceSpec(lam=0.2, order=2)
        src = full_source(spec)
        for occ, _ in src.items():
            for a, b in (spec.left, spec.right):
                pair_total = occ.count((a, H)) + occ.count((a, V)) + occ.count((b, H)) + occ.count((b, V))
                assert pair_total % 2 == 0
                assert occ.count((a, H)) == occ.count((b, V))
                assert occ.count((a, V)) == occ.count((b, H))


class TestSourceTerm:
    def test_double_left_structure(self):
        spec = SourceSpec(lam=0.1)
        ket = source_term(spec, "double_left")
        assert ket.amplitude(Occupation({("1", H): 2, ("4", V): 2})) == pytest.approx(S3, abs=1e-12)
        assert ket.norm() == pytest.approx(1.0)

    def test_pair_pair_is_pair_product(self):
        from pbsherald.fock import tensor

        spec = SourceSpec(lam=0.1)
        expected = tensor(single_pair("1", "4"), single_pair("2", "3"))
        assert source_term(spec, "pair_pair").allclose(expected)

    def test_vacuum_selector(self):
        assert source_term(SourceSpec(), "vacuum").allclose(vacuum({"1", "2", "3", "4"}))

    def test_selector_beyond_cutoff(self):
        with pytest.raises(ValueError, match="order"):
            source_term(SourceSpec(lam=0.1, order=1), "double_left")

    def test_unknown_selector(self):
        with pytest.raises(ValueError, match="selector"):
            source_term(SourceSpec(), "everything")

    def test_selectors_for_order(self):
        assert selectors_for(0) == ("vacuum",)
        assert selectors_for(1) == ("vacuum", "pair_left_only", "pair_right_only")
        assert len(selectors_for(2)) == 6
