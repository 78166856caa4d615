# tests/test_fibering.py
"""
Unit tests for fibering maps, Nehari roots, classification and the explicit
constants
Run with: pytest src/tests/test_fibering.py
"""

import math
import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from nehari.core.errors import HypothesisError
from nehari.energy.forms import EnergyContext
from nehari.energy.model import ApModel
from nehari.geometry.gasket import cached_gasket
from nehari.problem.fibering import (
    FiberingCase,
    ManifoldClass,
    ParameterRegion,
    RootBranch,
    classify,
    compute_constants,
    diagnose,
    fibering_from_scalars,
    lambda_region,
    m_function,
    m_prime,
    phi,
    phi_double_prime,
    phi_prime,
    tmax_value_lower_bound,
)
from nehari.problem.functional import ProblemSpec, euler_functional
from nehari.solver.projection import project_minus, project_plus
from nehari.verify.sampling import SamplingConfig, nehari_sampling

P, Q, AB = 2.0, 1.5, 3.0


def unit_spec(level=1, lam=0.0, gamma=0.0, h=None):
    n = cached_gasket(level).n_vertices
    return ProblemSpec(
        p=P, q=Q, alpha=1.5, beta=1.5, lam=lam, gamma=gamma,
        a=np.ones(n), b=np.ones(n), h=np.ones(n) if h is None else h, level=level,
    )


def ctx_at(level):
    return EnergyContext.create(cached_gasket(level), ApModel(p=P))


class TestScalarFibering:
    """Root structure from (N, X, H) alone"""

    def test_two_roots(self):
        diag = fibering_from_scalars(1.0, 0.2, 1.0, P, Q, AB)
        assert diag.case_tag is FiberingCase.TWO_ROOTS
        assert diag.t_max == pytest.approx(1.0 / 3.0)
        plus, minus = diag.root(RootBranch.PLUS), diag.root(RootBranch.MINUS)
        assert plus.t == pytest.approx(0.0438, abs=1e-4)
        assert minus.t == pytest.approx(0.7725, abs=1e-4)
        assert plus.m_prime > 0 > minus.m_prime

    def test_m_is_sqrt_t_times_one_minus_t(self):
        diag = fibering_from_scalars(1.0, 0.2, 1.0, P, Q, AB)
        for t in (0.01, 0.1, 1.0 / 3.0, 0.5, 2.0):
            assert m_function(diag, t) == pytest.approx(math.sqrt(t) * (1.0 - t))
        assert m_prime(diag, 1.0 / 3.0) == pytest.approx(0.0, abs=1e-14)

    def test_tangent(self):
        peak = (1.0 / 3.0) ** 0.5 - (1.0 / 3.0) ** 1.5
        diag = fibering_from_scalars(1.0, peak, 1.0, P, Q, AB)
        assert diag.case_tag is FiberingCase.TANGENT
        assert len(diag.roots) == 1
        assert diag.roots[0].branch is RootBranch.ZERO
        assert diag.roots[0].t == pytest.approx(1.0 / 3.0)

    def test_above_peak(self):
        diag = fibering_from_scalars(1.0, 0.5, 1.0, P, Q, AB)
        assert diag.case_tag is FiberingCase.ABOVE_PEAK
        assert diag.roots == []

    def test_negative_concave_term_has_only_minus_root(self):
        diag = fibering_from_scalars(1.0, -1.0, 1.0, P, Q, AB)
        assert diag.case_tag is FiberingCase.MINUS_ONLY
        assert [r.branch for r in diag.roots] == [RootBranch.MINUS]
        assert diag.roots[0].t > diag.t_max

    def test_no_coupling_has_only_plus_root(self):
        diag = fibering_from_scalars(1.0, 0.2, 0.0, P, Q, AB)
        assert diag.case_tag is FiberingCase.PLUS_ONLY
        assert diag.t_max is None
        # sqrt(t) = 0.2
        assert diag.roots[0].t == pytest.approx(0.04)

    def test_increasing(self):
        diag = fibering_from_scalars(1.0, -0.3, -0.1, P, Q, AB)
        assert diag.case_tag is FiberingCase.INCREASING
        assert diag.roots == []

    def test_zero_pair_rejected(self):
        with pytest.raises(ValueError):
            fibering_from_scalars(0.0, 0.2, 1.0, P, Q, AB)

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_nonpositive_t_rejected(self, t):
        diag = fibering_from_scalars(1.0, 0.2, 1.0, P, Q, AB)
        for fn in (phi, phi_prime, phi_double_prime, m_function, m_prime):
            with pytest.raises(ValueError):
                fn(diag, t)

    @settings(max_examples=200, deadline=None)
    @given(
        norm_p=st.floats(1e-3, 1e3),
        H=st.floats(1e-3, 1e3),
        frac=st.floats(0.01, 0.99),
    )
    def test_roots_are_critical_points(self, norm_p, H, frac):
        tm = ((P - Q) * norm_p / ((AB - Q) * H)) ** (1.0 / (AB - P))
        peak = tm ** (P - Q) * norm_p - tm ** (AB - Q) * H
        diag = fibering_from_scalars(norm_p, frac * peak, H, P, Q, AB)
        assert diag.case_tag is FiberingCase.TWO_ROOTS
        for root in diag.roots:
            t = root.t
            scale = t ** (P - 1) * norm_p
            assert abs(phi_prime(diag, t)) <= 1e-8 * scale
            assert phi_double_prime(diag, t) == pytest.approx(
                t ** (Q - 1) * m_prime(diag, t), rel=1e-6, abs=1e-8 * scale / t)
        plus, minus = diag.root(RootBranch.PLUS), diag.root(RootBranch.MINUS)
        assert phi(diag, plus.t) < 0
        assert plus.t < tm < minus.t

    @settings(max_examples=100, deadline=None)
    @given(norm_p=st.floats(1e-2, 1e2), H=st.floats(1e-2, 1e2), s=st.floats(0.1, 10.0))
    def test_t_max_scales_inversely_with_the_pair(self, norm_p, H, s):
        base = fibering_from_scalars(norm_p, 0.0, H, P, Q, AB)
        scaled = fibering_from_scalars(s ** P * norm_p, 0.0, s ** AB * H, P, Q, AB)
        assert scaled.t_max == pytest.approx(base.t_max / s, rel=1e-10)


class TestConstants:

    def test_unit_constants(self):
        spec = unit_spec()
        constants = compute_constants(spec, ctx_at(1), k_override=1.0)
        assert constants.k_overridden
        assert constants.kappa == pytest.approx((2.0 / 3.0) * (1.0 / 3.0) ** 0.5)
        assert constants.kappa == pytest.approx(0.3849, abs=1e-4)
        assert constants.kappa0 == pytest.approx(0.2887, abs=1e-4)
        assert constants.minus_norm_lower_bound == pytest.approx(1.0 / 3.0)

    def test_d0_changes_sign_at_kappa0(self):
        ctx = ctx_at(1)
        kappa0 = compute_constants(unit_spec(), ctx, k_override=1.0).kappa0
        below = unit_spec(lam=0.25 * kappa0, gamma=0.25 * kappa0)
        at = unit_spec(lam=0.5 * kappa0, gamma=0.5 * kappa0)
        above = unit_spec(lam=kappa0, gamma=kappa0)
        assert compute_constants(below, ctx, k_override=1.0).d0 > 0
        assert compute_constants(at, ctx, k_override=1.0).d0 == pytest.approx(0.0, abs=1e-14)
        assert compute_constants(above, ctx, k_override=1.0).d0 < 0

    def test_embedding_constant_used_by_default(self):
        constants = compute_constants(unit_spec(), ctx_at(1))
        assert not constants.k_overridden
        assert constants.K == pytest.approx(math.sqrt(0.18))

    def test_regions(self):
        ctx = ctx_at(1)
        c = compute_constants(unit_spec(), ctx, k_override=1.0)
        cases = [
            (0.25 * c.kappa0, 0.25 * c.kappa0, ParameterRegion.INSIDE_LAMBDA0),
            (0.5 * c.kappa0, 0.5 * c.kappa, ParameterRegion.INSIDE_LAMBDA_ONLY),
            (c.kappa, 0.1, ParameterRegion.OUTSIDE),
        ]
        for lam, gamma, region in cases:
            spec = unit_spec(lam=lam, gamma=gamma)
            assert lambda_region(spec, compute_constants(spec, ctx, k_override=1.0)) is region

    def test_signed_region(self):
        ctx = ctx_at(1)
        c = compute_constants(unit_spec(), ctx, k_override=1.0)
        spec = unit_spec(lam=c.kappa, gamma=-c.kappa)
        constants = compute_constants(spec, ctx, k_override=1.0)
        assert lambda_region(spec, constants) is ParameterRegion.OUTSIDE
        assert lambda_region(spec, constants, signed=True) is ParameterRegion.INSIDE_LAMBDA0

    def test_vanishing_coupling_weight(self):
        spec = unit_spec(h=np.zeros(cached_gasket(1).n_vertices))
        with pytest.raises(HypothesisError) as exc:
            compute_constants(spec, ctx_at(1))
        assert exc.value.failed == ["H3"]

    def test_bad_override(self):
        with pytest.raises(ValueError):
            compute_constants(unit_spec(), ctx_at(1), k_override=0.0)

    @pytest.mark.slow
    def test_cubic_constants_at_level_four(self):
        """p = 3 with r_p and K both estimated"""
        graph = cached_gasket(4)
        n = graph.n_vertices
        spec = ProblemSpec(p=3.0, q=1.5, alpha=2.0, beta=2.0, lam=0.0, gamma=0.0,
                           a=np.ones(n), b=np.ones(n), h=np.ones(n), level=4)
        ctx = EnergyContext.create(graph, ApModel(p=3.0))
        assert 0.28 < ctx.r_p < 0.30
        constants = compute_constants(spec, ctx)
        assert np.isfinite(constants.K) and constants.K > 0
        assert 0 < constants.kappa0 < constants.kappa
        assert constants.d0 > 0


class TestClassification:

    def setup_method(self):
        self.ctx = ctx_at(3)
        c = compute_constants(unit_spec(level=3), self.ctx)
        self.spec = unit_spec(level=3, lam=0.25 * c.kappa0, gamma=0.25 * c.kappa0)
        self.constants = compute_constants(self.spec, self.ctx)
        self.rng = np.random.default_rng(7)

    def pair(self):
        n = self.spec.graph.n_vertices
        u, v = np.abs(self.rng.uniform(-1, 1, (2, n)))
        u[:3] = 0
        v[:3] = 0
        return u, v

    def test_projected_pairs(self):
        for _ in range(10):
            u, v = self.pair()
            plus = project_plus(self.spec, self.ctx, u, v)
            minus = project_minus(self.spec, self.ctx, u, v)
            assert classify(self.spec, self.ctx, plus.u, plus.v) is ManifoldClass.M_PLUS
            assert classify(self.spec, self.ctx, minus.u, minus.v) is ManifoldClass.M_MINUS

    def test_off_manifold(self):
        u, v = self.pair()
        plus = project_plus(self.spec, self.ctx, u, v)
        assert classify(self.spec, self.ctx, 1.1 * plus.u, 1.1 * plus.v) is ManifoldClass.OFF_MANIFOLD

    def test_zero_pair_rejected(self):
        n = self.spec.graph.n_vertices
        with pytest.raises(ValueError):
            classify(self.spec, self.ctx, np.zeros(n), np.zeros(n))

    def test_sampling_finds_no_degenerate_points(self):
        report = nehari_sampling(self.spec, self.ctx, self.constants, SamplingConfig(nehari_samples=50, seed=3))
        assert report.pairs == 50
        assert report.zero_count == 0
        assert report.counts.get(ManifoldClass.M_PLUS.value, 0) > 0
        assert report.counts.get(ManifoldClass.M_MINUS.value, 0) > 0
        assert report.min_abs_phi2_ratio > 0
        assert report.coercivity_min_slack >= -1e-12

    def test_fiber_is_the_functional_along_the_ray(self):
        u, v = self.pair()
        diag = diagnose(self.spec, self.ctx, u, v)
        for t in (0.05, 0.3, 1.0, diag.t_max, 2.5):
            scale = t ** P * diag.norm_p + t ** Q * abs(diag.X) + t ** AB * diag.H
            assert euler_functional(self.spec, self.ctx, t * u, t * v) == pytest.approx(phi(diag, t), abs=1e-12 * scale)

    def test_cubic_fiber_is_the_functional_along_the_ray(self):
        ctx = EnergyContext.create(cached_gasket(2), ApModel(p=3.0), r_p=0.3)
        n = ctx.graph.n_vertices
        spec = ProblemSpec(p=3.0, q=1.5, alpha=2.0, beta=2.0, lam=0.02, gamma=0.03,
                           a=np.ones(n), b=np.ones(n), h=np.ones(n), level=2)
        rng = np.random.default_rng(12)
        u, v = rng.uniform(-1, 1, (2, n))
        u[:3] = 0
        v[:3] = 0
        diag = diagnose(spec, ctx, u, v)
        for t in (0.1, 1.0, 3.0):
            scale = t ** 3 * diag.norm_p + t ** 1.5 * abs(diag.X) + t ** 4 * diag.H
            assert euler_functional(spec, ctx, t * u, t * v) == pytest.approx(phi(diag, t), abs=1e-12 * scale)

    @pytest.mark.slow
    def test_no_degenerate_points_in_ten_thousand_pairs(self):
        report = nehari_sampling(self.spec, self.ctx, self.constants, SamplingConfig(nehari_samples=10_000, seed=5))
        assert report.pairs == 10_000
        assert report.zero_count == 0
        assert report.min_abs_phi2_ratio > 0
        assert report.coercivity_min_slack >= -1e-12

    def test_peak_lower_bound(self):
        for _ in range(20):
            u, v = self.pair()
            diag = diagnose(self.spec, self.ctx, u, v)
            assert diag.M_at_tmax >= tmax_value_lower_bound(diag, self.constants) * (1 - 1e-12)
