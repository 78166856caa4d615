# tests/test_energy.py
"""
Unit tests for the cell energy, renormalized energies, harmonic extension,
r_p estimation and the embedding constants
Run with: pytest src/tests/test_energy.py
"""

import math
import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError
from scipy import sparse

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from nehari.core.errors import ConvergenceError, LevelMismatchError
from nehari.energy.embedding import embedding_profile, estimate_embedding_K, holder_constant_check
from nehari.energy.forms import (
    EnergyContext,
    EnergyMetric,
    crude_energy,
    energy_gradient,
    energy_norm,
    pair_norm,
    renormalized_energy,
)
from nehari.energy.harmonic import (
    RpEstimate,
    aitken_limit,
    estimate_rp,
    minimize_crude,
    p_harmonic_extension,
    prolong,
)
from nehari.energy.minimize import minimize_convex
from nehari.energy.model import ApModel, ap_eval
from nehari.geometry.gasket import build_gasket, cached_gasket

EXPONENTS = [1.5, 2.0, 3.0, 4.0]
coords = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def context(level, p=2.0, r_p=None):
    if r_p is None and p != 2.0:
        r_p = 0.5
    return EnergyContext.create(cached_gasket(level), ApModel(p=p), r_p=r_p)


def zero_trace(rng, n):
    u = rng.uniform(-1.0, 1.0, n)
    u[:3] = 0.0
    return u


class TestApModel:
    """Axioms of the cell energy A_p"""

    def test_known_values(self):
        assert ap_eval(ApModel(p=2), 1, 0, 0) == 2.0
        assert ap_eval(ApModel(p=3), 2, 0, 0) == 16.0
        assert ap_eval(ApModel(p=2.5), 0.3, 0.3, 0.3) == 0.0

    def test_rejects_p_at_most_one(self):
        with pytest.raises(ValueError):
            ApModel(p=1.0)

    def test_generating_profile(self):
        assert ApModel(p=2).g_model == "edge_sum"
        with pytest.raises(ValidationError):
            ApModel(p=2, g_model="power_mean")

    @pytest.mark.parametrize("p", EXPONENTS)
    def test_axiom_suite(self, p):
        """Translation, homogeneity, symmetry, Markov and definiteness on 1000 triples"""
        rng = np.random.default_rng(7)
        model = ApModel(p=p)
        a = rng.uniform(-5, 5, (1000, 3))
        c = rng.uniform(-5, 5, 1000)
        t = rng.uniform(-3, 3, 1000)
        base = ap_eval(model, a[:, 0], a[:, 1], a[:, 2])

        shifted = ap_eval(model, a[:, 0] + c, a[:, 1] + c, a[:, 2] + c)
        np.testing.assert_allclose(shifted, base, rtol=1e-10, atol=1e-10)

        scaled = ap_eval(model, t * a[:, 0], t * a[:, 1], t * a[:, 2])
        np.testing.assert_allclose(scaled, np.abs(t) ** p * base, rtol=1e-10)

        for perm in ((1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0)):
            permuted = ap_eval(model, a[:, perm[0]], a[:, perm[1]], a[:, perm[2]])
            np.testing.assert_allclose(permuted, base, rtol=1e-14)

        lo = np.minimum(a[:, 0], a[:, 2])
        hi = np.maximum(a[:, 0], a[:, 2])
        clipped = ap_eval(model, a[:, 0], np.clip(a[:, 1], lo, hi), a[:, 2])
        assert np.all(clipped <= base * (1 + 1e-12) + 1e-12)

        assert np.all(base > 0)

    @given(x=coords)
    @settings(max_examples=200)
    def test_g_is_even(self, x):
        model = ApModel(p=3.0)
        assert model.g(x) == pytest.approx(model.g(-x), rel=1e-12)

    @given(a=coords, b=coords, d=coords)
    @settings(max_examples=300)
    def test_nonnegative_and_zero_on_constants(self, a, b, d):
        value = ap_eval(ApModel(p=2.0), a, b, d)
        assert value >= 0
        if a == b == d:
            assert value == 0


class TestEnergies:
    """Crude and renormalized energies"""

    def test_single_cell(self):
        ctx = context(0)
        assert crude_energy(ctx, np.array([1.0, 0.0, 0.0])) == 2.0

    def test_level_one_harmonic(self):
        ctx = context(1)
        u = np.array([1.0, 0.0, 0.0, 0.4, 0.4, 0.2])
        assert crude_energy(ctx, u) == pytest.approx(1.2, abs=1e-14)
        assert renormalized_energy(ctx, u) == pytest.approx(2.0, abs=1e-13)

    @pytest.mark.parametrize("level", range(1, 7))
    def test_repeated_extension_keeps_energy(self, level):
        u = prolong(np.array([1.0, 0.0, 0.0]), 0, level)
        assert renormalized_energy(context(level), u) == pytest.approx(2.0, rel=1e-12)

    def test_constant_and_zero(self):
        ctx = context(3)
        assert crude_energy(ctx, np.full(ctx.graph.n_vertices, 3.7)) == 0.0
        assert renormalized_energy(ctx, np.zeros(ctx.graph.n_vertices)) == 0.0

    def test_level_mismatch(self):
        with pytest.raises(LevelMismatchError):
            crude_energy(context(2), np.zeros(6))

    def test_scale_is_inverse_power(self):
        ctx = context(4)
        assert ctx.scale == 0.6 ** (-4)

    def test_context_rejects_bad_rp(self):
        with pytest.raises(ValueError):
            EnergyContext.create(cached_gasket(1), ApModel(p=2), r_p=1.5)

    def test_energy_monotone_in_level(self):
        """Renormalized energy of a fixed extension is nondecreasing in m"""
        rng = np.random.default_rng(3)
        coarse = cached_gasket(2)
        u = zero_trace(rng, coarse.n_vertices)
        values = []
        for m in range(2, 6):
            # piecewise-linear refinement: a non-harmonic extension
            current = u
            for k in range(2, m):
                lo, hi = cached_gasket(k), cached_gasket(k + 1)
                nxt = np.zeros(hi.n_vertices)
                nxt[hi.embed(lo)] = current
                a = current[lo.cells]
                first = 3 * np.arange(lo.n_cells)
                for i, j in ((0, 1), (1, 2), (0, 2)):
                    nxt[hi.cells[first + i, j]] = (a[:, i] + a[:, j]) / 2
                current = nxt
            values.append(renormalized_energy(context(m), current))
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


class TestGradient:
    """Energy gradient against finite differences"""

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_central_differences(self, p):
        ctx = context(3, p)
        rng = np.random.default_rng(11)
        eps = 1e-6
        for _ in range(50):
            u = rng.standard_normal(ctx.graph.n_vertices)
            w = rng.standard_normal(ctx.graph.n_vertices)
            fd = (renormalized_energy(ctx, u + eps * w) - renormalized_energy(ctx, u - eps * w)) / (2 * eps)
            exact = energy_gradient(ctx, u) @ w
            assert exact == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_zero_field(self):
        ctx = context(2, 3.0)
        assert not np.any(energy_gradient(ctx, np.zeros(ctx.graph.n_vertices)))

    def test_linear_at_p2(self):
        ctx = context(3)
        rng = np.random.default_rng(5)
        u, v = rng.standard_normal((2, ctx.graph.n_vertices))
        np.testing.assert_allclose(
            energy_gradient(ctx, u + v), energy_gradient(ctx, u) + energy_gradient(ctx, v), atol=1e-12
        )


class TestPairNorm:

    def test_trivial_cases(self):
        ctx = context(2)
        n = ctx.graph.n_vertices
        u = np.random.default_rng(1).standard_normal(n)
        assert pair_norm(ctx, np.zeros(n), np.zeros(n)) == 0.0
        assert pair_norm(ctx, u, np.zeros(n)) == pytest.approx(energy_norm(ctx, u))

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_standard_direction(self, p):
        """max(||u||, ||v||) <= ||(u,v)|| <= ||u|| + ||v||"""
        ctx = context(3, p)
        rng = np.random.default_rng(2)
        for _ in range(100):
            u, v = rng.standard_normal((2, ctx.graph.n_vertices))
            nu, nv, nuv = energy_norm(ctx, u), energy_norm(ctx, v), pair_norm(ctx, u, v)
            assert max(nu, nv) <= nuv * (1 + 1e-12)
            assert nuv <= (nu + nv) * (1 + 1e-12)


class TestHarmonicExtension:
    """p-harmonic extension and r_p"""

    def test_p2_midpoints(self):
        u = p_harmonic_extension(ApModel(p=2), [1.0, 0.0, 0.0], 0, 1)
        np.testing.assert_allclose(u[3:], [0.4, 0.4, 0.2], atol=1e-15)

    def test_constant_data(self):
        u = p_harmonic_extension(ApModel(p=3), [2.5, 2.5, 2.5], 0, 3)
        np.testing.assert_allclose(u, 2.5, atol=1e-10)

    def test_p4_symmetry(self):
        u = p_harmonic_extension(ApModel(p=4), [1.0, 0.0, 0.0], 0, 1)
        assert u[3] == pytest.approx(u[4], abs=1e-8)
        assert 0 < u[5] < u[3] < 1

    def test_p3_minimality(self):
        """No other extension of the same data has lower energy"""
        model = ApModel(p=3)
        u = p_harmonic_extension(model, [0.0, 0.5, 1.0], 0, 3)
        g = cached_gasket(3)
        ctx = context(3, 3.0)
        base = crude_energy(ctx, u)
        rng = np.random.default_rng(9)
        for _ in range(50):
            w = np.zeros(g.n_vertices)
            w[g.interior_ids] = rng.standard_normal(g.interior_ids.size) * 1e-2
            assert crude_energy(ctx, u + w) >= base - 1e-12

    def test_p2_matches_linear_solve(self):
        """At p = 2 the minimizer solves the interior Laplace system"""
        g = build_gasket(3)
        ctx = context(3)
        data = np.zeros(g.n_vertices)
        data[:3] = [0.0, 0.5, 1.0]
        metric = EnergyMetric(ctx)
        result = minimize_convex(
            value=lambda x: crude_energy(ctx, x),
            gradient=lambda x: energy_gradient(ctx, x) / ctx.scale,
            metric=metric.matrix,
            x0=data,
            free=g.interior_ids,
        )
        expected = p_harmonic_extension(ApModel(p=2), [0.0, 0.5, 1.0], 0, 3)
        np.testing.assert_allclose(result.x, expected, atol=1e-9)

    def test_lower_target_level_rejected(self):
        with pytest.raises(ValueError):
            p_harmonic_extension(ApModel(p=2), np.zeros(6), 1, 0)

    def test_rp_quadratic(self):
        est = estimate_rp(ApModel(p=2), max_level=4, tol=1e-8)
        assert est.r_p == pytest.approx(0.6, abs=1e-9)
        assert est.converged
        assert all(r == pytest.approx(0.6, abs=1e-10) for r in est.ratios)
        assert est.energies[0] == 1.5

    def test_rp_needs_two_levels(self):
        with pytest.raises(ValueError):
            estimate_rp(ApModel(p=2), max_level=1)

    @pytest.mark.slow
    def test_rp_cubic(self):
        """The ratios settle to a few 1e-6 by level 7; 1e-8 is not reached"""
        est = estimate_rp(ApModel(p=3), max_level=7, tol=1e-8)
        assert 0 < est.r_p < 1
        assert est.converged == (est.spread < 1e-8)
        assert est.spread < 2e-5
        tail = est.ratios[2:]
        assert all(b > a for a, b in zip(tail, tail[1:]))
        if est.extrapolated is not None:
            assert abs(est.extrapolated - est.r_p) <= 9 * est.spread * (1 + 1e-9)
            assert est.best == est.extrapolated

    def test_aitken_limit_of_geometric_tail(self):
        seq = [0.3 - 0.1 * 0.5 ** k for k in range(6)]
        assert aitken_limit(seq) == pytest.approx(0.3, abs=1e-15)

    def test_aitken_limit_needs_contraction(self):
        assert aitken_limit([0.1, 0.2]) is None
        assert aitken_limit([0.1, 0.2, 0.15]) is None
        assert aitken_limit([0.1, 0.2, 0.3]) is None
        assert aitken_limit([0.2, 0.2, 0.3]) is None

    def test_best_estimate(self):
        fields = dict(p=3.0, r_p=0.2893, spread=4e-6, ratios=[0.2893], energies=[1.0, 0.2893], levels_used=1)
        assert RpEstimate(converged=False, extrapolated=0.28936, **fields).best == 0.28936
        assert RpEstimate(converged=False, **fields).best == 0.2893
        assert RpEstimate(converged=True, extrapolated=0.28936, **fields).best == 0.2893


class TestInnerMinimizer:
    """Stopping rules of the convex minimizers"""

    def test_iteration_cap_returns_best_iterate(self):
        g = build_gasket(3)
        ctx = context(3)
        data = np.zeros(g.n_vertices)
        data[:3] = [0.0, 0.5, 1.0]
        free = g.interior_ids
        result = minimize_convex(
            value=lambda x: crude_energy(ctx, x),
            gradient=lambda x: energy_gradient(ctx, x) / ctx.scale,
            metric=lambda x: sparse.identity(free.size, format="csc"),
            x0=data,
            free=free,
            max_iter=3,
        )
        assert not result.converged
        assert result.iterations == 3
        assert result.value < crude_energy(ctx, data)
        np.testing.assert_array_equal(result.x[:3], data[:3])

    def test_crude_minimizer_reports_unfinished_solve(self):
        g = cached_gasket(3)
        x0 = prolong(np.array([0.0, 0.5, 1.0]), 0, 3)
        with pytest.raises(ConvergenceError) as exc:
            minimize_crude(g, ApModel(p=3), x0, g.interior_ids, max_iter=0)
        assert exc.value.residual > 0
        np.testing.assert_array_equal(exc.value.best, x0)

    @pytest.mark.parametrize("level", [3, 4])
    def test_cubic_embedding_profile(self, level):
        """Every per-vertex solve behind K at p = 3 finishes"""
        profile = embedding_profile(context(level, 3.0))
        interior = cached_gasket(level).interior_ids
        assert np.all(np.isfinite(profile))
        assert np.all(profile[interior] > 0)


class TestEmbedding:
    """Embedding constant K and the Hoelder check"""

    def test_level_one_oracle(self):
        assert estimate_embedding_K(context(1)) == pytest.approx(math.sqrt(0.18), rel=1e-12)

    def test_profile_vanishes_on_boundary(self):
        profile = embedding_profile(context(2))
        assert np.all(profile[:3] == 0)
        assert np.all(profile[3:] > 0)

    def test_nondecreasing_in_level(self):
        ks = [estimate_embedding_K(context(m)) for m in range(1, 5)]
        assert all(b >= a - 1e-12 for a, b in zip(ks, ks[1:]))

    def test_level_zero_rejected(self):
        with pytest.raises(ValueError):
            estimate_embedding_K(context(0))

    @pytest.mark.parametrize("p,level", [(2.0, 4), (3.0, 2), (3.0, 3)])
    def test_bound_on_random_fields(self, p, level):
        ctx = context(level, p)
        K = estimate_embedding_K(ctx)
        rng = np.random.default_rng(4)
        for _ in range(1000):
            u = zero_trace(rng, ctx.graph.n_vertices)
            assert np.max(np.abs(u)) <= K * energy_norm(ctx, u) * (1 + 1e-8)
            # scaling leaves the ratio unchanged
            assert np.max(np.abs(3 * u)) <= K * energy_norm(ctx, 3 * u) * (1 + 1e-8)

    def test_holder_needs_positive_energy(self):
        ctx = context(2)
        with pytest.raises(ValueError):
            holder_constant_check(ctx, np.zeros(ctx.graph.n_vertices), [0, 1])

    def test_holder_bounded_for_harmonic(self):
        ctx = context(5)
        u = prolong(np.array([1.0, 0.0, 0.0]), 0, 5)
        report = holder_constant_check(ctx, u, range(6))
        assert set(report.per_order) == set(range(6))
        assert max(report.per_order.values()) < 5.0
        assert report.constant == max(report.per_order.values())
