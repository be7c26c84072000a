import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqkd_keyrate.channel import (
    ChannelParams,
    PostChannelStats,
    apply_channel,
    db_to_transmittance,
    estimate_stats,
    read_samples,
    reconstruct_pre_channel,
    simulate_samples,
    transform_stats,
    write_samples,
)
from cvqkd_keyrate.errors import InconsistentEstimate, InsufficientData, InvalidParameter, MalformedInput
from cvqkd_keyrate.gaussian import CovarianceMatrix, epr_state
from cvqkd_keyrate.purifier import purify
from cvqkd_keyrate.state import MeasuredPreparationStats, build_equivalent_state

from strategies import random_physical_state, random_physical_stats, random_stats_tuple

FIG2 = MeasuredPreparationStats(9, 9, 10, 10, 9, -9)
seeds = st.integers(0, 2**32 - 1)


class TestParams:
    @pytest.mark.parametrize("eta,eps", [(0.0, 0.0), (1.1, 0.0), (0.5, -0.1)])
    def test_invalid(self, eta, eps):
        with pytest.raises(InvalidParameter):
            ChannelParams(eta, eps)

    def test_db(self):
        assert db_to_transmittance(0.0) == 1.0
        assert db_to_transmittance(10.0) == pytest.approx(0.1, rel=1e-15)
        assert db_to_transmittance(3.0) == pytest.approx(0.5011872336272722, rel=1e-15)
        with pytest.raises(InvalidParameter):
            db_to_transmittance(-1.0)


class TestApplyChannel:
    def test_identity(self):
        g, _ = random_physical_state(3, np.random.default_rng(0))
        g = CovarianceMatrix(g)
        assert np.array_equal(apply_channel(g, 1, ChannelParams(1.0, 0.0)).matrix, g.matrix)

    def test_thermal_loss(self):
        out = apply_channel(CovarianceMatrix.thermal(10.0), 0, ChannelParams(0.5, 0.0))
        np.testing.assert_allclose(out.matrix, 5.5 * np.eye(2), rtol=1e-15)

    def test_epr(self):
        out = apply_channel(epr_state(10.0), 1, ChannelParams(0.5, 0.07))
        # 0.5 * 10.07 + 0.5
        np.testing.assert_allclose(out.block(1, 1), 5.535 * np.eye(2), rtol=1e-14)
        c = math.sqrt(0.5) * math.sqrt(99)
        np.testing.assert_allclose(out.block(0, 1), np.diag([c, -c]), rtol=1e-14)
        np.testing.assert_array_equal(out.block(0, 0), 10 * np.eye(2))

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, e1=st.floats(0.01, 1.0), e2=st.floats(0.01, 1.0))
    def test_loss_composition(self, seed, e1, e2):
        g, _ = random_physical_state(2, np.random.default_rng(seed))
        two = apply_channel(apply_channel(g, 0, ChannelParams(e1)), 0, ChannelParams(e2))
        one = apply_channel(g, 0, ChannelParams(e1 * e2))
        np.testing.assert_allclose(two.matrix, one.matrix, atol=1e-12 * np.max(np.abs(g)))

    def test_bad_mode(self):
        with pytest.raises(InvalidParameter):
            apply_channel(epr_state(2.0), 2, ChannelParams(0.5))


class TestStatsTransform:
    def test_identity(self):
        post = transform_stats(FIG2, ChannelParams(1.0, 0.0))
        assert post == PostChannelStats(10, 10, 9, -9, 9, 9)

    def test_fig2(self):
        post = transform_stats(FIG2, ChannelParams(0.5, 0.07))
        assert post.V_Bp_x == pytest.approx(5.535, rel=1e-15)
        assert post.C_MBp_x == pytest.approx(6.363961030678928, rel=1e-15)
        assert post.C_MBp_p == pytest.approx(-6.363961030678928, rel=1e-15)
        assert post.V_M_x == 9

    def test_noise_only(self):
        post = transform_stats(FIG2, ChannelParams(1.0, 0.07))
        assert post.V_Bp_p == pytest.approx(10.07, rel=1e-15)
        assert post.C_MBp_x == 9

    def test_reconstruct(self):
        pre = reconstruct_pre_channel(PostChannelStats(5.535, 5.535, 6.4, -6.4, 9, 9), ChannelParams(0.5, 0.07))
        assert pre.V_B_x == pytest.approx(10.0, rel=1e-14)

    def test_reconstruct_inconsistent(self):
        with pytest.raises(InconsistentEstimate):
            reconstruct_pre_channel(PostChannelStats(1.0, 1.0, 0.0, 0.0, 9, 9), ChannelParams(0.5, 0.07))

    @settings(max_examples=100, deadline=None)
    @given(seed=seeds, eta=st.floats(1e-3, 1.0), eps=st.floats(0.0, 0.5))
    def test_round_trip(self, seed, eta, eps):
        stats = MeasuredPreparationStats(*random_stats_tuple(np.random.default_rng(seed)))
        ch = ChannelParams(eta, eps)
        back = reconstruct_pre_channel(transform_stats(stats, ch), ch)
        for name in ("V_M_x", "V_M_p", "V_B_x", "V_B_p", "C_MB_x", "C_MB_p"):
            assert getattr(back, name) == pytest.approx(getattr(stats, name), rel=1e-12, abs=1e-12)
        post = transform_stats(stats, ch)
        again = transform_stats(reconstruct_pre_channel(post, ch), ch)
        for name in ("V_Bp_x", "V_Bp_p", "C_MBp_x", "C_MBp_p"):
            assert getattr(again, name) == pytest.approx(getattr(post, name), rel=1e-12, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, eta=st.floats(1e-3, 1.0), eps=st.floats(0.0, 0.5))
    def test_commutes_with_state_building(self, seed, eta, eps):
        (stats,) = random_physical_stats(np.random.default_rng(seed), 1)
        ch = ChannelParams(eta, eps)
        state = build_equivalent_state(stats)
        g = apply_channel(purify(state).gamma_ABCD, 1, ch).matrix
        post = transform_stats(stats, ch)
        root = math.sqrt(eta)
        np.testing.assert_allclose([g[2, 2], g[3, 3]], [post.V_Bp_x, post.V_Bp_p], rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose([g[0, 2], g[1, 3]], [root * state.C_AB_x, root * state.C_AB_p],
                                   rtol=1e-10, atol=1e-10)


def _homodyne_rows(rows):
    return [dict(zip(("m_x", "m_p", "basis", "b"), r)) for r in rows]


class TestEstimate:
    def test_hand_computed(self):
        # two x records and two p records of +-1: unbiased variance of {1, -1} is 2
        rows = _homodyne_rows([
            ("1", "1", "x", "1"),
            ("-1", "-1", "x", "-1"),
            ("1", "1", "p", "1"),
            ("-1", "-1", "p", "-1"),
        ])
        post = estimate_stats(rows, "homodyne")
        # m_p = (1, -1, 1, -1) has unbiased variance 4/3
        assert post.V_M_x == pytest.approx(4 / 3)
        assert post.V_Bp_x == pytest.approx(2.0)
        assert post.C_MBp_x == pytest.approx(2.0)
        assert post.V_Bp_p == pytest.approx(2.0)
        assert post.C_MBp_p == pytest.approx(2.0)

    def test_two_heterodyne_records(self):
        rows = [
            dict(m_x=1, m_p=1, b_x=1, b_p=1),
            dict(m_x=-1, m_p=-1, b_x=-1, b_p=-1),
        ]
        post = estimate_stats(rows, "heterodyne")
        assert post.V_M_x == pytest.approx(2.0)
        assert post.C_MBp_x == pytest.approx(2.0)
        # heterodyne outcome variance includes one vacuum unit
        assert post.V_Bp_x == pytest.approx(1.0)

    def test_constant_samples(self):
        rows = [dict(m_x=1, m_p=1, b_x=2, b_p=2)] * 5
        with pytest.raises(InsufficientData):
            estimate_stats(rows, "heterodyne")

    def test_single_record(self):
        with pytest.raises(InsufficientData):
            estimate_stats([dict(m_x=1, m_p=1, b_x=2, b_p=2)], "heterodyne")

    def test_missing_basis_records(self):
        rows = _homodyne_rows([("1", "1", "x", "1"), ("-1", "0", "x", "-1"), ("0", "1", "p", "1")])
        with pytest.raises(InsufficientData, match="quadrature p"):
            estimate_stats(rows, "homodyne")

    def test_non_finite(self):
        rows = [dict(m_x=1, m_p=1, b_x=2, b_p=2), dict(m_x="nan", m_p=1, b_x=2, b_p=2)]
        with pytest.raises(MalformedInput, match="line 3"):
            estimate_stats(rows, "heterodyne")

    def test_bad_basis(self):
        with pytest.raises(MalformedInput):
            estimate_stats(_homodyne_rows([("1", "1", "q", "1")] * 3), "homodyne")

    @pytest.mark.parametrize("protocol", ["homodyne", "heterodyne"])
    def test_monte_carlo(self, protocol):
        n = 1_000_000
        post = transform_stats(FIG2, ChannelParams(0.5, 0.07))
        est = estimate_stats(simulate_samples(post, protocol, n, seed=11), protocol)
        n_q = n if protocol == "heterodyne" else n / 2
        for q in "xp":
            V_M, V_Bp, C = post.quadrature(q)
            var_b = V_Bp + 1 if protocol == "heterodyne" else V_Bp
            # standard errors of Gaussian sample moments
            se_vm = V_M * math.sqrt(2 / n)
            se_vb = var_b * math.sqrt(2 / n_q)
            se_c = math.sqrt((V_M * var_b + C * C) / n_q)
            assert abs(getattr(est, f"V_M_{q}") - V_M) < 5 * se_vm
            assert abs(getattr(est, f"V_Bp_{q}") - V_Bp) < 5 * se_vb
            assert abs(getattr(est, f"C_MBp_{q}") - C) < 5 * se_c

    def test_record_order_independence(self):
        post = transform_stats(FIG2, ChannelParams(0.3, 0.05))
        rec = simulate_samples(post, "homodyne", 20_000, seed=3)
        perm = np.random.default_rng(4).permutation(20_000)
        shuffled = {k: v[perm] for k, v in rec.items()}
        a = estimate_stats(rec, "homodyne")
        b = estimate_stats(shuffled, "homodyne")
        for name in ("V_M_x", "V_M_p", "V_Bp_x", "V_Bp_p", "C_MBp_x", "C_MBp_p"):
            assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-12)


class TestSampleFiles:
    @pytest.mark.parametrize("protocol", ["homodyne", "heterodyne"])
    def test_write_read_round_trip(self, protocol):
        post = transform_stats(FIG2, ChannelParams(0.5, 0.0))
        rec = simulate_samples(post, protocol, 200, seed=5)
        buf = io.StringIO()
        write_samples(rec, protocol, buf)
        rows = read_samples(io.StringIO(buf.getvalue()), protocol)
        assert len(rows["m_x"]) == 200
        assert estimate_stats(rows, protocol) == estimate_stats(rec, protocol)

    def test_missing_column(self):
        with pytest.raises(MalformedInput, match="b_p"):
            read_samples(io.StringIO("m_x,m_p,b_x\n1,2,3\n"), "heterodyne")

    def test_short_row(self):
        with pytest.raises(MalformedInput, match="line 3"):
            read_samples(io.StringIO("m_x,m_p,b_x,b_p\n1,2,3,4\n1,2,3\n"), "heterodyne")

    def test_nan_line_number(self):
        body = "".join(f"{i},{i % 3},{i % 5},{i % 7}\n" for i in range(20))
        lines = body.splitlines(keepends=True)
        # data line 16 is file line 17
        lines[15] = "1,NaN,2,3\n"
        cols = read_samples(io.StringIO("m_x,m_p,b_x,b_p\n" + "".join(lines)), "heterodyne")
        with pytest.raises(MalformedInput, match="line 17"):
            estimate_stats(cols, "heterodyne")

    def test_unparseable_token(self):
        cols = read_samples(io.StringIO("m_x,m_p,basis,b\n1,2,x,3\n1,2,p,abc\n"), "homodyne")
        with pytest.raises(MalformedInput, match="line 3"):
            estimate_stats(cols, "homodyne")
