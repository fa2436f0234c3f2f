import numpy as np
import pytest

from redmap.propsuite import (
    FAMILY_CHECKS,
    correction_bound_constants,
    implicit_suite_mappings,
    make_inner_coupled,
    run_family,
    run_suite,
)


class TestSuite:
    def test_all_families_pass(self):
        for summary in run_suite(seed=11, count=25):
            assert summary.failed == 0, summary.first_failure
            assert summary.passed + summary.skipped == summary.total

    def test_deterministic_given_seed(self):
        a = run_suite(seed=7, count=10)
        b = run_suite(seed=7, count=10)
        for x, y in zip(a, b):
            assert (x.family, x.passed, x.skipped, x.failed) == (
                y.family,
                y.passed,
                y.skipped,
                y.failed,
            )

    def test_zero_count_is_vacuous(self):
        for summary in run_suite(seed=1, count=0):
            assert summary.total == 0 and summary.ok

    def test_corrupt_hessian_fails_mb_family(self):
        summary = run_family("mb_bound", seed=3, count=5, corrupt=True)
        assert summary.failed >= 1
        assert summary.first_failure is not None
        assert summary.first_failure.index == 0

    def test_family_registry(self):
        assert sorted(FAMILY_CHECKS) == [
            "affine_bound",
            "correction_bound",
            "interlacing",
            "mb_bound",
            "nonlinear_bound",
        ]


class TestCorrectionConstants:
    def test_second_derivative_bound_dominates_truth(self):
        rng = np.random.default_rng(5)
        for mapping in implicit_suite_mappings(seed=2):
            for _ in range(10):
                x = rng.uniform(-1.0, 1.0, mapping.n1)
                consts = correction_bound_constants(mapping, x)
                second = mapping.second_derivative(x)
                # entrywise contraction with arbitrary unit vectors stays
                # below the assembled bound
                for _ in range(5):
                    h = rng.standard_normal(mapping.n1)
                    k = rng.standard_normal(mapping.n1)
                    h /= np.linalg.norm(h)
                    k /= np.linalg.norm(k)
                    val = np.linalg.norm(np.einsum("mij,i,j->m", second, h, k))
                    assert val <= consts["d2_bound"] + 1e-10

    def test_sigma_matches_inner_hessian_floor(self):
        mapping = make_inner_coupled(seed=4)
        x = np.array([0.3, -0.2])
        consts = correction_bound_constants(mapping, x)
        u = mapping.solve(x)
        h = mapping.inner.hess_u(x, u)
        assert consts["sigma"] == pytest.approx(float(np.linalg.eigvalsh(h)[0]))
