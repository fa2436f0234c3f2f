import numpy as np
import pytest

from redmap import fd
from redmap.errors import InvalidParamError, NoSolutionSetError
from redmap.linops import sym_eig
from redmap.problems import (
    ProblemSpec,
    build_problem,
    distance_to_solution,
    make_flat_quartic_sine,
    make_highdim_quadratic,
    make_highdim_tanh,
    make_quad2d,
    plane_curvature,
)

SQ401 = np.sqrt(401.0)


class TestQuad2d:
    def test_hessian_and_eigenvalues(self):
        spec = make_quad2d(10.0)
        h = spec.objective.hessian_matrix(np.zeros(2))
        np.testing.assert_array_equal(h, [[22.0, -20.0], [-20.0, 20.0]])
        values = sym_eig(h).values
        np.testing.assert_allclose(values, [21.0 - SQ401, 21.0 + SQ401], rtol=1e-14)

    def test_fig1_instance(self):
        spec = make_quad2d(2.0)
        h = spec.objective.hessian_matrix(np.zeros(2))
        np.testing.assert_array_equal(h, [[6.0, -4.0], [-4.0, 4.0]])

    def test_origin_is_critical(self):
        for m in [0.5, 2.0, 10.0, 100.0]:
            spec = make_quad2d(m)
            np.testing.assert_array_equal(spec.objective.gradient(np.zeros(2)), np.zeros(2))

    def test_rejects_nonpositive_m(self):
        with pytest.raises(InvalidParamError):
            make_quad2d(0.0)
        with pytest.raises(InvalidParamError):
            make_quad2d(-3.0)


@pytest.fixture(scope="module")
def flat_spec():
    return make_flat_quartic_sine(-0.5, 0.5)


class TestFlatQuarticSine:

    def test_sine_reduction_is_flat_inside(self, flat_spec):
        p = flat_spec.reduced("sine")
        for t in [-0.49, -0.2, 0.0, 0.3, 0.49]:
            assert p.value(np.array([t])) == pytest.approx(0.0, abs=1e-14)
            assert p.gradient(np.array([t]))[0] == pytest.approx(0.0, abs=1e-14)
            assert p.hessian(np.array([t]))[0, 0] == pytest.approx(0.0, abs=1e-13)

    def test_fixed_reduction_curvature_at_origin(self, flat_spec):
        p = flat_spec.reduced("fixed")
        assert plane_curvature(p, 0.0) == pytest.approx(2.0, abs=1e-12)

    def test_unconstrained_max_eigenvalue_on_curve(self, flat_spec):
        h = flat_spec.objective.hessian_matrix(np.array([0.0, 0.0]))
        assert sym_eig(h).values[-1] == pytest.approx(4.0, abs=1e-12)

    def test_curvature_maxima_match_profiles(self, flat_spec):
        # oracle: dense scan of the plane-curvature profiles
        grid = np.linspace(-1.5, 1.5, 20001)
        maxima = {
            name: max(plane_curvature(flat_spec.reduced(name), t) for t in grid)
            for name in ["fixed", "linear", "sine"]
        }
        assert maxima["fixed"] == pytest.approx(2.0, abs=1e-9)
        assert maxima["linear"] == pytest.approx(2.2224, abs=5e-3)
        assert maxima["sine"] == pytest.approx(2.1515, abs=5e-3)
        assert maxima["sine"] < maxima["linear"]

    def test_implicit_and_sine_mappings_agree(self, flat_spec):
        ps = flat_spec.reduced("sine")
        pi = flat_spec.reduced("implicit")
        rng = np.random.default_rng(2)
        for _ in range(10):
            t = rng.uniform(-1.0, 1.0, 1)
            np.testing.assert_allclose(pi.value(t), ps.value(t), atol=1e-12)
            np.testing.assert_allclose(pi.hessian(t), ps.hessian(t), atol=1e-9)

    def test_rejects_empty_interval(self):
        with pytest.raises(InvalidParamError):
            make_flat_quartic_sine(0.5, 0.5)


class TestHighdimQuadratic:
    def test_benchmark_configuration_builds(self):
        spec = make_highdim_quadratic(n=40, lambda_=10.0, seed=0)
        assert spec.params == {"n": 40, "lambda": 10.0, "seed": 0}
        assert spec.objective.dim == 80

    def test_reduced_hessian_identity(self):
        spec = make_highdim_quadratic(n=10, lambda_=10.0, seed=5)
        p = spec.reduced("linear")
        k = p.mapping.matrix
        np.testing.assert_allclose(p.hessian(np.zeros(10)), np.eye(10) + k.T @ k, atol=1e-13)

    def test_origin_is_critical(self):
        spec = make_highdim_quadratic(n=6, lambda_=10.0, seed=1)
        np.testing.assert_array_equal(spec.objective.gradient(np.zeros(12)), np.zeros(12))

    def test_seeded_operator_is_reproducible(self):
        a = make_highdim_quadratic(n=8, lambda_=10.0, seed=42)
        b = make_highdim_quadratic(n=8, lambda_=10.0, seed=42)
        assert a.mappings["linear"].matrix.tobytes() == b.mappings["linear"].matrix.tobytes()
        c = make_highdim_quadratic(n=8, lambda_=10.0, seed=43)
        assert not np.array_equal(a.mappings["linear"].matrix, c.mappings["linear"].matrix)

    def test_rejects_bad_params(self):
        with pytest.raises(InvalidParamError):
            make_highdim_quadratic(n=0)
        with pytest.raises(InvalidParamError):
            make_highdim_quadratic(n=4, lambda_=0.0)


@pytest.fixture(scope="module")
def tanh_spec():
    return make_highdim_tanh(n=10, lambda_=10.0, alpha=1.0, seed=4)


class TestHighdimTanh:

    def test_yy_block(self, tanh_spec):
        rng = np.random.default_rng(0)
        z = rng.standard_normal(20)
        h = tanh_spec.objective.hessian_matrix(z)
        np.testing.assert_allclose(h[10:, 10:], 11.0 * np.eye(10), atol=1e-14)

    def test_second_derivative_matches_fd(self, tanh_spec):
        mapping = tanh_spec.mappings["nonlinear"]
        rng = np.random.default_rng(3)
        for _ in range(5):
            x = rng.standard_normal(10)
            second = mapping.second_derivative(x)
            fd_second = fd.tensor3(mapping.jacobian, x)
            assert np.linalg.norm(second - fd_second) <= 1e-3 * (1.0 + np.linalg.norm(second))

    def test_origin_linearization(self, tanh_spec):
        p = tanh_spec.reduced("nonlinear")
        k = p.mapping.jacobian(np.zeros(10))  # s(0) = 1 so this is alpha K
        expected = np.eye(10) + k.T @ k
        np.testing.assert_allclose(p.hessian(np.zeros(10)), expected, atol=1e-13)
        np.testing.assert_allclose(p.pullback_metric(np.zeros(10)), expected, atol=1e-13)

    def test_rejects_bad_params(self):
        with pytest.raises(InvalidParamError):
            make_highdim_tanh(n=4, alpha=0.0)
        with pytest.raises(InvalidParamError):
            make_highdim_tanh(n=4, lambda_=-1.0)


class TestDistance:
    def test_point_set(self):
        spec = make_quad2d(10.0)
        assert distance_to_solution(spec, np.array([3.0, 4.0])) == pytest.approx(5.0)

    def test_sine_curve_frozen_oracle_value(self):
        # oracle: one-million-point grid + bounded local refinement gives
        # 0.72116456708751 for the point (0, 1) (the nearest curve point
        # sits near t = 0.4787, not at the origin)
        spec = make_flat_quartic_sine(-0.5, 0.5)
        got = spec.distance_to_solution(np.array([0.0, 1.0]))
        assert got == pytest.approx(0.7211645670875114, abs=1e-9)

    def test_membership_gives_zero(self):
        spec = make_flat_quartic_sine(-0.5, 0.5)
        for t in [-0.5, -0.1, 0.25, 0.5]:
            x = np.array([t, np.sin(t)])
            assert spec.distance_to_solution(x) == pytest.approx(0.0, abs=1e-9)

    def test_missing_solution_set(self):
        spec = make_quad2d(10.0)
        stripped = ProblemSpec(
            name=spec.name,
            params=spec.params,
            objective=spec.objective,
            mappings=spec.mappings,
            solution_set=None,
        )
        with pytest.raises(NoSolutionSetError):
            stripped.distance_to_solution(np.zeros(2))


class TestSharpnessSanity:
    def test_qg_and_eb_hold_with_slack(self):
        spec = make_quad2d(10.0)
        mu_hat = 0.9 * (21.0 - SQ401)
        rng = np.random.default_rng(17)
        for _ in range(100):
            direction = rng.standard_normal(2)
            direction /= np.linalg.norm(direction)
            x = rng.uniform(0.0, 1.0) * direction
            dist = spec.distance_to_solution(x)
            f_val = spec.objective.value(x)
            g_norm = np.linalg.norm(spec.objective.gradient(x))
            assert f_val >= 0.5 * mu_hat * dist**2 - 1e-12
            assert mu_hat * dist <= g_norm + 1e-12


class TestBuildProblem:
    def test_named_lookup_with_overrides(self):
        spec = build_problem("quad2d", {"M": 4.0})
        assert spec.params["M"] == 4.0
        spec = build_problem("quad-hd", {"n": 6, "lambda": 2.0, "seed": 9})
        assert spec.params == {"n": 6, "lambda": 2.0, "seed": 9}

    def test_unknown_name(self):
        with pytest.raises(InvalidParamError):
            build_problem("nope")

    def test_construction_validation_rejects_wrong_gradient(self):
        from redmap.problems import _validate
        from redmap.reduced import Objective

        bad = Objective(
            n1=1,
            n2=1,
            value=lambda x: float(x @ x),
            gradient=lambda x: 3.0 * x,  # should be 2x
            hessian=lambda x: 2.0 * np.eye(2),
        )
        spec = ProblemSpec(name="bad", params={}, objective=bad, mappings={})
        with pytest.raises(AssertionError):
            _validate(spec)
