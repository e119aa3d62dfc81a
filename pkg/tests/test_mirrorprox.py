import math

import numpy as np
import pytest

from mirropt.bench import fit_rate
from mirropt.geometry import FeasibleSet, ProductSetup, euclidean_setup
from mirropt.mirrorprox import (mirror_prox_solve, saddle_gap, ump_rate_bound,
                                universal_mirror_prox_solve, vi_residual)
from mirropt.oracles import SaddleOperator
from mirropt.problems import gen_matrix_game


def bilinear_box_op(half=1.0):
    """f(x, u) = x*u on [-half, half]^2, Phi = (u, -x)."""
    box = FeasibleSet.box(np.array([-half]), np.array([half]))
    domain = ProductSetup(euclidean_setup(box), euclidean_setup(box))
    G = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return SaddleOperator(phi=lambda z: G @ z, domain=domain, lipschitz=1.0,
                          holder_nu=1.0, holder_l=1.0, linear_part=G,
                          affine_part=np.zeros(2),
                          meta={"A": np.array([[1.0]]), "value": 0.0})


def gap_fn(op):
    def gap(w):
        x_hat, u_hat = op.domain.split(w)
        return saddle_gap(op, x_hat, u_hat)
    return gap


class TestSaddleGap:
    def test_exact_saddle(self):
        op = bilinear_box_op()
        assert saddle_gap(op, np.array([0.0]), np.array([0.0])) == 0.0

    def test_corner(self):
        op = bilinear_box_op()
        assert saddle_gap(op, np.array([1.0]), np.array([1.0])) == 2.0

    def test_uniform_equilibrium(self):
        op = gen_matrix_game(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert saddle_gap(op, np.array([0.5, 0.5]), np.array([0.5, 0.5])) == \
            pytest.approx(0.0, abs=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(21)
        op = gen_matrix_game(rng.uniform(-1, 1, size=(3, 4)))
        for _ in range(100):
            x = rng.dirichlet(np.ones(4))
            u = rng.dirichlet(np.ones(3))
            assert saddle_gap(op, x, u) >= -1e-9


class TestMirrorProx:
    def test_bilinear_box_rate(self):
        op = bilinear_box_op()
        rep = mirror_prox_solve(op, op.domain, L=1.0, N=200, gap_fn=gap_fn(op))
        for row in rep.trace:
            assert row.f_value <= 1.0 / row.k + 1e-9
            assert row.bound_value == pytest.approx(1.0 / row.k)

    def test_starts_at_prox_center(self):
        op = bilinear_box_op()
        rep = mirror_prox_solve(op, op.domain, L=1.0, N=1, keep_iterates=False)
        assert np.allclose(rep.extras["z_last"].shape, (2,))
        assert np.allclose(op.domain.prox_center(), np.zeros(2))

    def test_matrix_game_entropy_rate(self):
        op = gen_matrix_game(np.array([[0.0, 1.0], [1.0, 0.0]]))
        rep = mirror_prox_solve(op, op.domain, L=op.lipschitz, N=300,
                                gap_fn=gap_fn(op))
        for row in rep.trace:
            assert row.f_value <= row.bound_value + 1e-9

    def test_residual_certificate(self):
        rng = np.random.default_rng(22)
        op = gen_matrix_game(rng.uniform(0, 1, size=(3, 3)))
        rep = mirror_prox_solve(op, op.domain, L=op.lipschitz, N=200)
        res = vi_residual(op, rep.w_hat)
        assert res >= -1e-9
        assert res <= op.lipschitz * rep.extras["max_v"] / rep.iterations + 1e-9

    def test_gap_decay_slope(self):
        rng = np.random.default_rng(23)
        op = gen_matrix_game(rng.uniform(0, 1, size=(4, 5)))
        rep = mirror_prox_solve(op, op.domain, L=op.lipschitz, N=500,
                                gap_fn=gap_fn(op))
        gaps = rep.trace.column("f_value")
        ks = rep.trace.column("k")
        for a, b in zip(gaps, gaps[1:]):
            assert b <= 1.1 * a + 1e-15
        if np.all(gaps > 0):
            assert fit_rate(ks, gaps) <= -0.8

    def test_monotone_operator(self):
        rng = np.random.default_rng(24)
        op = bilinear_box_op()
        for _ in range(1000):
            z1 = rng.uniform(-1, 1, size=2)
            z2 = rng.uniform(-1, 1, size=2)
            assert (op(z1) - op(z2)) @ (z1 - z2) >= -1e-9


class TestUniversalMirrorProx:
    def test_first_trial_halves(self):
        op = bilinear_box_op()
        rep = universal_mirror_prox_solve(op, op.domain, eps=0.5, M_init=8.0,
                                          N=3)
        # a Lipschitz check passing on the first trial accepts M_init / 2
        assert rep.inner_trials[0] == 1
        assert rep.m_ks[0] == pytest.approx(4.0)

    def test_accepted_m_bounded(self):
        op = bilinear_box_op()
        rep = universal_mirror_prox_solve(op, op.domain, eps=1e-4, M_init=1.0,
                                          N=5000)
        assert max(rep.m_ks) <= 2.0 * 1.0 + 1e-12

    def test_rate_and_stop(self):
        op = bilinear_box_op()
        eps = 0.01
        rep = universal_mirror_prox_solve(op, op.domain, eps=eps, M_init=1.0,
                                          N=5000, gap_fn=gap_fn(op))
        gap = gap_fn(op)(rep.w_hat)
        for row in rep.trace:
            assert row.f_value <= row.bound_value + 1e-9
            rate = ump_rate_bound(1.0, 1.0, eps, row.k, rep.extras["max_v"])
            assert row.f_value <= rate + 1e-9
        assert rep.extras["stopped_adaptive"]
        assert gap <= eps + 1e-9

    def test_rate_arithmetic(self):
        assert ump_rate_bound(1.0, 1.0, 0.01, 100, 1.0) == pytest.approx(0.025)

    def test_oracle_call_telescoping(self):
        op = bilinear_box_op()
        rep = universal_mirror_prox_solve(op, op.domain, eps=0.001, M_init=4.0,
                                          N=5000)
        assert rep.oracle_calls == 2 * sum(rep.inner_trials)
        # with t_k trials the accepted constant is M_k = 2^{t_k - 2} M_{k-1},
        # which telescopes to sum t_k = 2k + log2(M_last / M_init)
        assert sum(rep.inner_trials) == pytest.approx(
            2 * rep.iterations + math.log2(rep.m_ks[-1] / 4.0))

    def test_entropy_game(self):
        op = gen_matrix_game(np.array([[0.0, 1.0], [1.0, 0.0]]))
        eps = 0.01
        rep = universal_mirror_prox_solve(op, op.domain, eps=eps, M_init=1.0,
                                          N=10000, gap_fn=gap_fn(op))
        assert gap_fn(op)(rep.w_hat) <= eps + 1e-9

    def test_skew_required_for_residual(self):
        op = bilinear_box_op()
        bad = SaddleOperator(phi=op.phi, domain=op.domain,
                             linear_part=np.eye(2), affine_part=np.zeros(2))
        with pytest.raises(ValueError):
            vi_residual(bad, np.zeros(2))
