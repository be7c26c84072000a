import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqkd_keyrate.errors import UnphysicalState
from cvqkd_keyrate.gaussian import epr_state, partial_trace, symplectic_eigenvalues
from cvqkd_keyrate.purifier import PurificationParams, purify, solve_purification, synthesize_network
from cvqkd_keyrate.state import MeasuredPreparationStats, TwoModeState, build_equivalent_state

from strategies import random_physical_stats

ROOT99 = math.sqrt(99.0)
TMSV10 = TwoModeState.from_entries(10.0, 10.0, ROOT99, -ROOT99)
FIG2 = MeasuredPreparationStats(9, 9, 10, 10, 9, -9)


class TestSolve:
    def test_tmsv_ancillas_are_vacua(self):
        p = solve_purification(TMSV10)
        assert p.V1 == pytest.approx(1.0, abs=1e-9)
        assert p.V2 == pytest.approx(1.0, abs=1e-9)

    def test_tmsv_squeezing(self):
        p = solve_purification(TMSV10)
        # 1/4 ln((10 + sqrt99)/(10 - sqrt99)) = 1/2 arccosh(10)
        assert p.s1 == pytest.approx(1.4966114230631904, rel=1e-12)
        assert p.s1 == pytest.approx(0.5 * math.acosh(10.0), rel=1e-12)
        assert p.s2 == pytest.approx(-p.s1, abs=1e-9)

    def test_uncorrelated_thermal(self):
        p = solve_purification(TwoModeState.from_entries(4.0, 4.0, 0.0, 0.0))
        assert (p.V1, p.V2, p.s1, p.s2) == (4.0, 4.0, 0.0, 0.0)
        assert (p.T1, p.T2) == (1.0, 0.5)

    def test_sub_vacuum_ancilla(self):
        # C_MB only in x: V - C_AB_x ~ 0.05 cannot be compensated in p
        state = build_equivalent_state(MeasuredPreparationStats(9, 9, 10, 10, 9, 0))
        with pytest.raises(UnphysicalState, match="V1"):
            solve_purification(state)

    def test_no_realization(self):
        state = TwoModeState.from_entries(2.0, 2.0, 3.0, 0.0)
        with pytest.raises(UnphysicalState, match="no purification network"):
            solve_purification(state)

    def test_params_reject_small_variance(self):
        with pytest.raises(UnphysicalState):
            PurificationParams(V1=0.9, V2=1.0, s1=0.0, s2=0.0)


class TestSynthesize:
    def test_vacuum(self):
        g = synthesize_network(PurificationParams(1.0, 1.0, 0.0, 0.0))
        np.testing.assert_allclose(g.matrix, np.eye(8), atol=1e-15)

    def test_thermal_pair(self):
        V = 3.0
        g = synthesize_network(PurificationParams(V, V, 0.0, 0.0))
        np.testing.assert_allclose(partial_trace(g, [0, 1]).matrix, V * np.eye(4), atol=1e-14)
        np.testing.assert_allclose(symplectic_eigenvalues(g), 1.0, atol=1e-12)

    def test_tmsv(self):
        g = synthesize_network(solve_purification(TMSV10))
        np.testing.assert_allclose(partial_trace(g, [0, 1]).matrix, epr_state(10.0).matrix, atol=1e-9)
        np.testing.assert_allclose(symplectic_eigenvalues(g), 1.0, atol=1e-7)


class TestPurify:
    def test_fig2_perfect(self):
        out = purify(build_equivalent_state(FIG2))
        np.testing.assert_allclose(partial_trace(out.gamma_ABCD, [0, 1]).matrix, epr_state(10.0).matrix, atol=1e-9)
        assert out.purity_residual() < 1e-7

    def test_fig2_asymmetric(self):
        stats = MeasuredPreparationStats(9, 9, 10.0, 10.1, 9, -9)
        state = build_equivalent_state(stats)
        out = purify(state)
        Cx, Cp = 9 * math.sqrt(11 / 9), -9 * math.sqrt(11.1 / 9)
        assert out.params.V1 == pytest.approx(math.sqrt((10 - Cx) * (10.1 - Cp)), rel=1e-12)
        assert out.params.V2 == pytest.approx(math.sqrt((10 + Cx) * (10.1 + Cp)), rel=1e-12)
        assert out.params.V1 == pytest.approx(1.0036306346143, rel=1e-10)
        assert out.params.V2 == pytest.approx(1.4473291812097806, rel=1e-10)
        np.testing.assert_allclose(symplectic_eigenvalues(out.gamma_ABCD), 1.0, atol=1e-7)
        np.testing.assert_allclose(partial_trace(out.gamma_ABCD, [0, 1]).matrix, state.gamma.matrix, atol=1e-9)

    def test_unphysical(self):
        with pytest.raises(UnphysicalState):
            purify(TwoModeState.from_entries(10.0, 10.0, 9.99, 0.0))


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_reconstruction_and_purity(seed):
    (stats,) = random_physical_stats(np.random.default_rng(seed), 1)
    state = build_equivalent_state(stats)
    out = purify(state)
    ab = partial_trace(out.gamma_ABCD, [0, 1]).matrix
    assert np.max(np.abs(ab - state.gamma.matrix)) <= 1e-9
    assert np.max(np.abs(symplectic_eigenvalues(out.gamma_ABCD) - 1)) <= 1e-7


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_convention_anchor(seed):
    (stats,) = random_physical_stats(np.random.default_rng(seed), 1)
    s = build_equivalent_state(stats)
    p = solve_purification(s)
    rel = dict(rel=1e-10)
    assert math.exp(-2 * p.s1) * p.V1 == pytest.approx(s.V_B_x - s.C_AB_x, **rel)
    assert math.exp(2 * p.s1) * p.V1 == pytest.approx(s.V_B_p - s.C_AB_p, **rel)
    assert math.exp(-2 * p.s2) * p.V2 == pytest.approx(s.V_B_x + s.C_AB_x, **rel)
    assert math.exp(2 * p.s2) * p.V2 == pytest.approx(s.V_B_p + s.C_AB_p, **rel)


@pytest.mark.parametrize("V", [1.1, 2.0, 10.0, 50.0, 1000.0])
def test_tmsv_degeneracy(V):
    p = solve_purification(build_equivalent_state(MeasuredPreparationStats.symmetric(V - 1, V, V - 1)))
    assert p.V1 == pytest.approx(1.0, abs=1e-9)
    assert p.V2 == pytest.approx(1.0, abs=1e-9)
    assert p.s2 == pytest.approx(-p.s1, abs=1e-9)


def test_alternate_branches_fail():
    """The other solutions of the 4-equation system are not usable networks."""
    rng = np.random.default_rng(7)
    for stats in random_physical_stats(rng, 50):
        s = build_equivalent_state(stats)
        p = solve_purification(s)
        # negative root of V^2 = (V - C)_x (V - C)_p: V < 1
        assert -p.V1 < 1 and -p.V2 < 1
        # swapping the two EPR arms flips the sign of C_AB
        swapped = synthesize_network(PurificationParams(p.V2, p.V1, p.s2, p.s1))
        ab = partial_trace(swapped, [0, 1]).matrix
        if abs(s.C_AB_x) > 1e-6:
            assert ab[0, 2] == pytest.approx(-s.C_AB_x, rel=1e-9)
