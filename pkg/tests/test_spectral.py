import json

import numpy as np
import pytest

from redmap.errors import (
    EmptySampleError,
    KernelMismatchError,
    NotCriticalError,
    WrongMappingKindError,
)
from redmap.linops import gen_eig_extremes, sym_eig
from redmap.mapping import AffineMapping, ClosedFormMapping, ConstantMapping
from redmap.problems import make_flat_quartic_sine, make_highdim_quadratic, make_quad2d
from redmap.propsuite import quadratic_objective
from redmap.reduced import Objective, ReducedProblem
from redmap.spectral import (
    REPORT_FIELDS,
    Region,
    check_affine_bound,
    check_nonlinear_bound,
    condition_report,
    injective_norm_power,
    injective_norm_upper,
    mb_constants,
    nontangency_epsilon,
    pl_constant_estimate,
    smoothness_euclidean,
    smoothness_riemannian,
    spectral_gap_max,
)

SQ401 = np.sqrt(401.0)


@pytest.fixture(scope="module")
def quad2d():
    return make_quad2d(10.0)


def small_region(dim=1, radius=0.5, samples=16, seed=1):
    return Region(center=np.zeros(dim), radius=radius, samples=samples, seed=seed)


class TestRegion:
    def test_points_include_center_and_stay_in_ball(self):
        reg = Region(center=np.array([1.0, -2.0]), radius=0.3, samples=50, seed=9)
        pts = reg.points()
        assert len(pts) == 51
        np.testing.assert_array_equal(pts[0], reg.center)
        for p in pts:
            assert np.linalg.norm(p - reg.center) <= reg.radius + 1e-12

    def test_seed_reproducibility(self):
        a = Region(center=np.zeros(40), radius=1.0, samples=20, seed=4)
        b = Region(center=np.zeros(40), radius=1.0, samples=20, seed=4)
        for x, y in zip(a.points(), b.points()):
            assert np.array_equal(x, y)

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            Region(center=np.zeros(2), radius=0.0, samples=1)
        with pytest.raises(ValueError):
            Region(center=np.zeros(2), radius=1.0, samples=0)


class TestSmoothness:
    def test_riemannian_linear_mapping(self, quad2d):
        p = quad2d.reduced("linear")
        # oracle: generalized Rayleigh quotient on the single direction
        h = np.array([[22.0, -20.0], [-20.0, 20.0]])
        b = np.array([[1.0], [1.0]])
        lo, hi = gen_eig_extremes(b.T @ h @ b, b.T @ b)
        got = smoothness_riemannian(p, small_region())
        assert got == pytest.approx(hi, abs=1e-12)
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_riemannian_trivial_when_hessian_equals_metric(self):
        spec = make_highdim_quadratic(n=10, lambda_=10.0, seed=2)
        p = spec.reduced("linear")
        got = smoothness_riemannian(p, small_region(dim=10, samples=4))
        assert got == pytest.approx(1.0, abs=1e-10)

    def test_riemannian_constant_mapping_reduces_to_block(self, quad2d):
        p = quad2d.reduced("fixed")
        got = smoothness_riemannian(p, small_region())
        assert got == pytest.approx(22.0, abs=1e-12)

    def test_euclidean_fig2_values(self, quad2d):
        reg = small_region()
        assert smoothness_euclidean(quad2d.reduced("linear"), reg) == pytest.approx(2.0, abs=1e-9)
        assert smoothness_euclidean(quad2d.reduced("fixed"), reg) == pytest.approx(22.0, abs=1e-9)
        assert smoothness_euclidean(quad2d.reduced("nonlinear"), reg) == pytest.approx(
            82.0, abs=1e-9
        )


class TestNontangency:
    def test_quad2d_exact_value(self, quad2d):
        p = quad2d.reduced("linear")
        eps, mult = nontangency_epsilon(p, np.array([0.0]))
        # oracle: eigendecomposition plus explicit projection of the
        # dominant eigenvector [20, 1 - sqrt(401)] onto span([1, 1])
        h = np.array([[22.0, -20.0], [-20.0, 20.0]])
        values, vectors = sym_eig(h)
        v = vectors[:, int(np.argmax(np.abs(values)))]
        t = np.array([1.0, 1.0]) / np.sqrt(2.0)
        expected = 1.0 - abs(float(t @ v))
        assert mult == 1
        assert eps == pytest.approx(expected, abs=1e-14)
        exact = 1.0 - (21.0 - SQ401) / np.sqrt(1604.0 - 4.0 * SQ401)
        assert eps == pytest.approx(exact, abs=1e-12)

    def test_dominant_inside_tangent_gives_zero(self):
        t = np.array([1.0, 1.0]) / np.sqrt(2.0)
        hess = np.eye(2) + 5.0 * np.outer(t, t)
        p = ReducedProblem(quadratic_objective(1, 1, hess), AffineMapping(np.array([[1.0]])))
        eps, _ = nontangency_epsilon(p, np.array([0.0]))
        assert eps == pytest.approx(0.0, abs=1e-12)

    def test_dominant_orthogonal_to_tangent_gives_one(self):
        t = np.array([1.0, -1.0]) / np.sqrt(2.0)
        hess = np.eye(2) + 5.0 * np.outer(t, t)
        p = ReducedProblem(quadratic_objective(1, 1, hess), AffineMapping(np.array([[1.0]])))
        eps, _ = nontangency_epsilon(p, np.array([0.0]))
        assert eps == pytest.approx(1.0, abs=1e-12)


class TestSpectralGap:
    def test_quad2d(self, quad2d):
        got = spectral_gap_max(quad2d.reduced("linear"), small_region())
        assert got == pytest.approx(2.0 * SQ401, abs=1e-12)

    def test_identity_hessian_degenerate(self):
        p = ReducedProblem(quadratic_objective(1, 1, np.eye(2)), AffineMapping(np.array([[1.0]])))
        assert spectral_gap_max(p, small_region()) == 0.0
        _, mult = nontangency_epsilon(p, np.array([0.0]))
        assert mult == 2

    def test_diag_531(self):
        p = ReducedProblem(
            quadratic_objective(1, 2, np.diag([5.0, 3.0, 1.0])),
            AffineMapping(np.zeros((2, 1))),
        )
        assert spectral_gap_max(p, small_region()) == pytest.approx(2.0)


class TestAffineBound:
    def test_quad2d_exact_equality(self, quad2d):
        # exact algebra: both sides telescope to exactly 1
        res = check_affine_bound(quad2d.reduced("linear"), small_region())
        assert res.lhs == pytest.approx(1.0, abs=1e-9)
        assert res.rhs == pytest.approx(1.0, abs=1e-9)
        assert res.holds and not res.vacuous

    def test_aligned_dominant_gives_nonstrict_bound(self):
        t = np.array([1.0, 1.0]) / np.sqrt(2.0)
        hess = np.eye(2) + 5.0 * np.outer(t, t)
        p = ReducedProblem(quadratic_objective(1, 1, hess), AffineMapping(np.array([[1.0]])))
        res = check_affine_bound(p, small_region())
        assert res.epsilon == pytest.approx(0.0, abs=1e-12)
        assert res.rhs == pytest.approx(res.beta_f, abs=1e-9)
        assert res.holds

    def test_rejects_nonlinear_mapping(self, quad2d):
        with pytest.raises(WrongMappingKindError):
            check_affine_bound(quad2d.reduced("nonlinear"), small_region())


class TestNonlinearBound:
    def test_affine_mapping_reduces_to_affine_bound(self, quad2d):
        p = quad2d.reduced("linear")
        reg = small_region()
        nl = check_nonlinear_bound(p, reg)
        aff = check_affine_bound(p, reg)
        assert nl.q == 0.0
        assert nl.rhs == pytest.approx(aff.rhs, abs=1e-12)
        assert nl.holds

    def test_small_sine_mapping_near_origin(self, quad2d):
        mapping = ClosedFormMapping(
            1,
            1,
            value=lambda t: np.sin(t),
            jacobian=lambda t: np.cos(t),
            second=lambda t: -np.sin(t),
        )
        p = ReducedProblem(quad2d.objective, mapping)
        res = check_nonlinear_bound(p, Region(center=np.zeros(1), radius=0.1, samples=16, seed=3))
        assert not res.hypothesis_failed
        assert res.holds

    def test_poorly_designed_mapping_fails_hypothesis(self, quad2d):
        p = quad2d.reduced("nonlinear")
        res = check_nonlinear_bound(p, Region(center=np.zeros(1), radius=1.0, samples=16, seed=3))
        assert res.hypothesis_failed


class TestMorseBott:
    def test_quad2d_exact_equality_case(self, quad2d):
        res = mb_constants(quad2d.reduced("linear"), np.array([0.0]), None)
        assert res.mu_f == pytest.approx(21.0 - SQ401, abs=1e-12)
        assert res.mu_F == pytest.approx(1.0, abs=1e-12)
        # the bound telescopes to exactly mu_F on this instance
        assert res.bound == pytest.approx(1.0, abs=1e-10)
        assert res.holds

    def test_isotropic_no_gap_branch(self):
        hess = np.eye(4)
        mapping = AffineMapping(np.array([[0.5, -1.0], [2.0, 0.3]]))
        p = ReducedProblem(quadratic_objective(2, 2, hess), mapping)
        res = mb_constants(p, np.zeros(2), None)
        assert res.mu_f == pytest.approx(1.0)
        assert res.delta_min == 0.0
        assert res.eps_min == pytest.approx(0.0, abs=1e-12)
        assert res.mu_F == pytest.approx(1.0, abs=1e-12)
        assert res.holds

    def test_flat_quartic_kernel_check_passes(self):
        spec = make_flat_quartic_sine(-0.5, 0.5)
        p = spec.reduced("sine")
        tangent = np.array([[1.0], [np.cos(0.0)]]) / np.sqrt(2.0)
        res = mb_constants(p, np.array([0.0]), tangent)
        # the sine graph runs along the solution manifold, so no reduced
        # direction is normal to it and the constant is vacuous
        assert res.mu_f == pytest.approx(4.0, abs=1e-12)
        assert np.isinf(res.mu_F)
        assert res.holds

    def test_kernel_mismatch_detected(self):
        spec = make_flat_quartic_sine(-0.5, 0.5)
        p = spec.reduced("sine")
        bad_tangent = np.array([[1.0], [-1.0]]) / np.sqrt(2.0)
        with pytest.raises(KernelMismatchError):
            mb_constants(p, np.array([0.0]), bad_tangent)

    def test_not_critical_detected(self, quad2d):
        with pytest.raises(NotCriticalError):
            mb_constants(quad2d.reduced("linear"), np.array([1.0]), None)


class TestPlConstant:
    def test_isotropic_quadratic(self):
        mu = 3.0
        obj = Objective(
            n1=1,
            n2=1,
            value=lambda x: 0.5 * mu * float(x @ x),
            gradient=lambda x: mu * x,
            hessian=lambda x: mu * np.eye(2),
        )
        reg = Region(center=np.array([1.0, 1.0]), radius=0.5, samples=64, seed=2)
        assert pl_constant_estimate(obj, reg) == pytest.approx(3.0, abs=1e-12)

    def test_quad2d_approaches_smallest_eigenvalue(self, quad2d):
        reg = Region(center=np.zeros(2), radius=0.1, samples=4000, seed=7)
        got = pl_constant_estimate(quad2d.objective, reg)
        lam_min = 21.0 - SQ401
        assert got >= lam_min - 1e-12
        assert got == pytest.approx(lam_min, rel=1e-3)

    def test_reduced_with_metric_weighting(self, quad2d):
        mapping = quad2d.mappings["linear"]
        reg = Region(center=np.array([1.0]), radius=0.5, samples=32, seed=5)
        got = pl_constant_estimate(quad2d.objective, reg, mapping=mapping)
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_empty_sample(self):
        obj = Objective(
            n1=1,
            n2=1,
            value=lambda x: 0.0,
            gradient=lambda x: np.zeros(2),
            hessian=lambda x: np.zeros((2, 2)),
        )
        with pytest.raises(EmptySampleError):
            pl_constant_estimate(obj, Region(center=np.zeros(2), radius=1.0, samples=8, seed=0))


class TestConditionReport:
    def test_quad2d_linear(self, quad2d):
        rep = condition_report(
            quad2d.reduced("linear"), small_region(), minimiser=np.array([0.0])
        )
        kappa_exact = (21.0 + SQ401) / (21.0 - SQ401)
        assert rep.kappa_f == pytest.approx(kappa_exact, abs=1e-8)
        assert rep.kappa_F == pytest.approx(1.0, abs=1e-9)
        assert rep.bound_affine_holds is True
        assert rep.bound_mb_holds is True
        assert rep.bound_nonlinear_holds is True
        assert rep.M_phi == pytest.approx(2.0)
        assert rep.m_phi == pytest.approx(2.0)
        assert rep.Q == 0.0

    def test_highdim_quadratic_unit_condition(self):
        spec = make_highdim_quadratic(n=8, lambda_=10.0, seed=1)
        rep = condition_report(
            spec.reduced("linear"),
            small_region(dim=8, samples=4),
            minimiser=np.zeros(8),
        )
        assert rep.kappa_F == pytest.approx(1.0, abs=1e-9)

    def test_constant_mapping_removes_stiff_block(self):
        obj = quadratic_objective(1, 1, np.diag([1.0, 100.0]))
        p = ReducedProblem(obj, ConstantMapping(1, np.array([0.0])))
        rep = condition_report(p, small_region(), minimiser=np.array([0.0]))
        assert rep.beta_F_eucl == pytest.approx(1.0, abs=1e-12)
        assert rep.beta_f == pytest.approx(100.0, abs=1e-12)
        assert rep.M_phi == pytest.approx(1.0)
        assert rep.m_phi == pytest.approx(1.0)

    def test_json_round_trip_and_field_names(self, quad2d):
        rep = condition_report(
            quad2d.reduced("linear"), small_region(), minimiser=np.array([0.0])
        )
        payload = json.loads(rep.to_json())
        assert list(payload.keys()) == REPORT_FIELDS
        assert payload["bound_affine_holds"] is True
        assert isinstance(payload["multiplicity_p"], int)

    def test_star_condition(self):
        # dominant direction orthogonal to the graph tangent with a huge
        # gap: removing it more than halves the curvature bound
        t = np.array([0.0, 0.0, 1.0])
        hess = np.diag([1.0, 1.0, 0.0]) + 50.0 * np.outer(t, t)
        p = ReducedProblem(quadratic_objective(2, 1, hess), AffineMapping(np.zeros((1, 2))))
        rep = condition_report(p, small_region(dim=2, samples=4))
        assert rep.star_condition_holds


class TestGramSandwich:
    def test_euclidean_eigs_bracketed_by_metric_extremes(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            n1 = int(rng.integers(1, 4))
            n2 = int(rng.integers(1, 4))
            n = n1 + n2
            basis = rng.standard_normal((n, n))
            hess = basis @ basis.T  # PSD ambient Hessian
            mapping = AffineMapping(rng.standard_normal((n2, n1)))
            p = ReducedProblem(quadratic_objective(n1, n2, hess), mapping)
            x = rng.standard_normal(n1)
            hf = p.hessian(x)
            metric = p.pullback_metric(x)
            gen_lo, gen_hi = gen_eig_extremes(hf, metric)
            eucl = sym_eig(hf).values
            m_lo, m_hi = p.metric_extremes(x)
            assert m_lo * gen_lo <= eucl[0] + 1e-9
            assert eucl[-1] <= m_hi * gen_hi + 1e-9


class TestInjectiveNorms:
    def test_exact_for_single_slice(self):
        rng = np.random.default_rng(3)
        raw = rng.standard_normal((4, 4))
        t = (0.5 * (raw + raw.T))[None, :, :]
        exact = float(np.max(np.abs(np.linalg.eigvalsh(t[0]))))
        assert injective_norm_upper(t) == pytest.approx(exact)
        assert injective_norm_power(t) == pytest.approx(exact, rel=1e-10)

    def test_upper_dominates_power_estimate(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            n2, n1 = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            raw = rng.standard_normal((n2, n1, n1))
            t = 0.5 * (raw + raw.transpose(0, 2, 1))
            upper = injective_norm_upper(t)
            power = injective_norm_power(t, seed=1)
            assert power <= upper + 1e-10


class TestRiemannianInterlacing:
    def test_reduced_smoothness_never_exceeds_ambient_on_affine(self):
        # restriction under the pullback metric cannot increase the
        # largest curvature magnitude when the graph is flat
        from redmap.propsuite import make_affine_instance

        for i in range(200):
            rng = np.random.default_rng([99, i])
            p = make_affine_instance(rng)
            reg = Region(center=np.zeros(3), radius=1.0, samples=2, seed=i)
            riem = smoothness_riemannian(p, reg)
            ambient = max(
                float(np.max(np.abs(sym_eig(p.objective.hessian_matrix(p.embed(x))).values)))
                for x in reg.points()
            )
            assert riem <= ambient + 1e-10


class TestEuclideanSmoothnessCorollary:
    def test_affine_instances(self):
        from redmap.propsuite import make_affine_instance

        for i in range(100):
            rng = np.random.default_rng([123, i])
            p = make_affine_instance(rng)
            reg = Region(center=np.zeros(3), radius=1.0, samples=2, seed=i)
            res = check_affine_bound(p, reg)
            if res.vacuous:
                continue
            eucl = smoothness_euclidean(p, reg)
            big_m = max(p.metric_extremes(x)[1] for x in reg.points())
            assert eucl <= big_m * res.rhs + 1e-8 * (1.0 + abs(big_m * res.rhs))

    def test_nonlinear_instances_passing_hypothesis(self):
        from redmap.propsuite import check_nonlinear_instance  # noqa: F401  (same generator)
        from redmap.propsuite import _instance_rng

        checked = 0
        for i in range(100):
            rng = np.random.default_rng([321, i])
            # reuse the nonlinear-family generator through its public check,
            # then recompute the Euclidean corollary on a fresh instance
            n1 = n2 = 2
            raw = rng.standard_normal((4, 4))
            spike = rng.standard_normal(4)
            spike /= np.linalg.norm(spike)
            hess = 0.5 * (raw + raw.T) + 6.0 * np.outer(spike, spike)
            a = rng.standard_normal((2, 2))
            w = rng.uniform(-1.0, 1.0, (2, 2))
            amp = 0.05
            mapping = ClosedFormMapping(
                2,
                2,
                value=lambda x, a=a, w=w: a @ x + amp * np.sin(w @ x),
                jacobian=lambda x, a=a, w=w: a + amp * np.cos(w @ x)[:, None] * w,
                second=lambda x, w=w: -amp
                * np.sin(w @ x)[:, None, None]
                * (w[:, :, None] * w[:, None, :]),
            )
            center = rng.uniform(-0.5, 0.5, 2)
            anchor = np.concatenate([center, mapping.value(center)])
            obj = Objective(
                n1=2,
                n2=2,
                value=lambda x, h=hess, c=anchor: 0.5 * float((x - c) @ h @ (x - c)),
                gradient=lambda x, h=hess, c=anchor: h @ (x - c),
                hessian=lambda x, h=hess: h,
            )
            p = ReducedProblem(obj, mapping)
            reg = Region(center=center, radius=0.2, samples=8, seed=i)
            res = check_nonlinear_bound(p, reg)
            if res.vacuous or res.hypothesis_failed:
                continue
            checked += 1
            aff = res.rhs - res.q * res.z / res.m_phi  # beta_f - gap improvement
            eucl = smoothness_euclidean(p, reg)
            big_m = max(p.metric_extremes(x)[1] for x in reg.points())
            bound = big_m * aff + res.q * res.z
            assert eucl <= bound + 1e-8 * (1.0 + abs(bound))
        assert checked >= 30
