import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from slabsvm.kernels import (
    FAMILIES,
    KernelError,
    KernelSpec,
    cross_gram,
    eval_kernel,
    gram_matrix,
    gram_vector,
    kernel_expansion,
)

ALL_SPECS = [KernelSpec("linear"), KernelSpec("rbf", 0.7), KernelSpec("intersection"),
             KernelSpec("hellinger"), KernelSpec("chi_squared")]


def reference_kernel(spec, x, y):
    """Scalar loops over the textbook kernel formulas."""
    if spec.family == "linear":
        return sum(a * b for a, b in zip(x, y))
    if spec.family == "rbf":
        return math.exp(-spec.gamma * sum((a - b) ** 2 for a, b in zip(x, y)))
    if spec.family == "intersection":
        return sum(min(a, b) for a, b in zip(x, y))
    if spec.family == "hellinger":
        return sum(math.sqrt(a * b) for a, b in zip(x, y))
    return sum(0.0 if a + b == 0 else 2 * a * b / (a + b) for a, b in zip(x, y))


class TestKernelSpec:
    @pytest.mark.parametrize("alias,family", [("chi2", "chi_squared"), ("chi-squared", "chi_squared"),
                                              ("gaussian", "rbf")])
    def test_aliases(self, alias, family):
        spec = KernelSpec(alias, 1.0) if family == "rbf" else KernelSpec(alias)
        assert spec.family == family

    @pytest.mark.parametrize("gamma", [None, 0.0, -1.0, math.inf, math.nan])
    def test_rbf_needs_positive_gamma(self, gamma):
        with pytest.raises(KernelError):
            KernelSpec("rbf", gamma)

    @pytest.mark.parametrize("family", ["linear", "intersection", "hellinger", "chi_squared"])
    def test_gamma_rejected_elsewhere(self, family):
        with pytest.raises(KernelError):
            KernelSpec(family, 1.0)

    def test_unknown_family(self):
        with pytest.raises(KernelError):
            KernelSpec("poly")

    def test_immutable(self):
        spec = KernelSpec("rbf", 1.0)
        with pytest.raises(AttributeError):
            spec.gamma = 2.0


class TestEvalKernel:
    @pytest.mark.parametrize("spec,x,y,expected", [
        (KernelSpec("linear"), (3, 4), (3, 4), 25.0),
        (KernelSpec("rbf", 0.5), (7, -2), (7, -2), 1.0),
        (KernelSpec("chi_squared"), (1, 0), (0, 1), 0.0),
        (KernelSpec("hellinger"), (4, 1), (1, 4), 4.0),
        (KernelSpec("intersection"), (1, 2), (2, 1), 2.0),
        (KernelSpec("rbf", 2.0), (0, 0), (1, 0), math.exp(-2.0)),
    ])
    def test_examples(self, spec, x, y, expected):
        assert eval_kernel(spec, x, y) == pytest.approx(expected, abs=1e-15)

    def test_chi_squared_zero_over_zero(self):
        assert eval_kernel(KernelSpec("chi2"), (0, 0, 3), (0, 5, 3)) == pytest.approx(3.0)

    @pytest.mark.parametrize("family", ["intersection", "hellinger", "chi_squared"])
    def test_additive_rejects_negative(self, family):
        with pytest.raises(KernelError):
            eval_kernel(KernelSpec(family), (1, -0.5), (1, 1))

    def test_dimension_mismatch(self):
        with pytest.raises(KernelError):
            eval_kernel(KernelSpec("linear"), (1, 2), (1, 2, 3))

    def test_non_finite_rejected(self):
        with pytest.raises(KernelError):
            eval_kernel(KernelSpec("linear"), (1, math.nan), (1, 1))

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_matches_scalar_reference(self, spec):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x, y = rng.uniform(0, 3, 5), rng.uniform(0, 3, 5)
            assert eval_kernel(spec, x, y) == pytest.approx(reference_kernel(spec, x, y), rel=1e-12)


finite_vecs = arrays(np.float64, 4, elements=st.floats(0, 50, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(x=finite_vecs, y=finite_vecs, which=st.sampled_from(range(len(ALL_SPECS))))
def test_symmetry_is_bitwise(x, y, which):
    spec = ALL_SPECS[which]
    assert eval_kernel(spec, x, y) == eval_kernel(spec, y, x)


@settings(max_examples=60, deadline=None)
@given(x=finite_vecs, y=finite_vecs, gamma=st.floats(1e-3, 10))
def test_rbf_range(x, y, gamma):
    k = eval_kernel(KernelSpec("rbf", gamma), x, y)
    assert 0.0 <= k <= 1.0
    if np.array_equal(x, y):
        assert k == 1.0
    elif gamma * np.sum((x - y) ** 2) > 1e-12:
        assert k < 1.0


@settings(max_examples=60, deadline=None)
@given(x=finite_vecs, y=finite_vecs)
def test_intersection_bounds(x, y):
    k = eval_kernel(KernelSpec("intersection"), x, y)
    assert 0.0 <= k <= min(x.sum(), y.sum()) + 1e-12


class TestGramMatrix:
    def test_linear_identity(self):
        np.testing.assert_array_equal(gram_matrix(KernelSpec("linear"), np.eye(2)), np.eye(2))

    def test_intersection_example(self):
        K = gram_matrix(KernelSpec("intersection"), [[1, 2], [2, 1]])
        np.testing.assert_array_equal(K, [[3, 2], [2, 3]])

    @pytest.mark.parametrize("gamma", [0.01, 1.0, 30.0])
    def test_rbf_duplicates_and_diagonal(self, gamma):
        X = np.array([[1.0, 2.0], [5.0, -1.0], [1.0, 2.0]])
        K = gram_matrix(KernelSpec("rbf", gamma), X)
        assert K[0, 2] == 1.0 and K[2, 0] == 1.0
        np.testing.assert_array_equal(np.diag(K), 1.0)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_exactly_symmetric(self, spec):
        X = np.random.default_rng(0).uniform(0, 2, (30, 6))
        K = gram_matrix(spec, X)
        assert np.array_equal(K, K.T)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_psd_spot_check(self, spec):
        rng = np.random.default_rng(11)
        for m in (2, 7, 20):
            X = rng.uniform(0, 4, (m, 5))
            K = gram_matrix(spec, X)
            assert np.linalg.eigvalsh(K).min() >= -1e-8 * np.trace(K)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_matches_elementwise(self, spec):
        X = np.random.default_rng(5).uniform(0, 2, (8, 3))
        K = gram_matrix(spec, X)
        for i in range(8):
            for j in range(8):
                assert K[i, j] == pytest.approx(reference_kernel(spec, X[i], X[j]), rel=1e-12, abs=1e-14)

    def test_additive_blocking_agrees(self):
        # large enough to be split into several blocks internally
        rng = np.random.default_rng(2)
        X = rng.uniform(0, 1, (700, 16))
        Y = rng.uniform(0, 1, (500, 16))
        C = cross_gram(KernelSpec("chi2"), X, Y)
        i, j = rng.integers(0, 700, 30), rng.integers(0, 500, 30)
        for a, b in zip(i, j):
            assert C[a, b] == pytest.approx(reference_kernel(KernelSpec("chi2"), X[a], Y[b]), rel=1e-12)

    def test_rejects_negative_additive(self):
        with pytest.raises(KernelError):
            gram_matrix(KernelSpec("hellinger"), [[1, 2], [-1, 0]])


class TestGramVector:
    def test_single_rbf(self):
        np.testing.assert_array_equal(gram_vector(KernelSpec("rbf", 3.0), [[2, 5]], [2, 5]), [1.0])

    def test_linear_basis(self):
        np.testing.assert_array_equal(gram_vector(KernelSpec("linear"), np.eye(2), [1.5, -4.0]), [1.5, -4.0])

    def test_chi_squared_example(self):
        assert gram_vector(KernelSpec("chi2"), [[2, 2]], [2, 0])[0] == pytest.approx(2.0)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_row_of_cross_gram(self, spec):
        rng = np.random.default_rng(9)
        X, x = rng.uniform(0, 1, (12, 4)), rng.uniform(0, 1, 4)
        np.testing.assert_allclose(gram_vector(spec, X, x), cross_gram(spec, [x], X)[0], rtol=1e-14)


def test_family_list_complete():
    assert set(FAMILIES) == {s.family for s in ALL_SPECS}


class TestKernelExpansion:
    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_matches_gram_product(self, spec):
        rng = np.random.default_rng(12)
        X, Y, w = rng.uniform(0, 3, (40, 5)), rng.uniform(0, 3, (25, 5)), rng.normal(size=25)
        np.testing.assert_allclose(kernel_expansion(spec, X, Y, w), cross_gram(spec, X, Y) @ w,
                                   rtol=1e-12, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), which=st.sampled_from(range(len(ALL_SPECS))))
    def test_rows_independent_of_batch(self, seed, which):
        spec = ALL_SPECS[which]
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 17))
        Y, X = rng.uniform(0, 5, (int(rng.integers(1, 200)), d)), rng.uniform(0, 5, (int(rng.integers(2, 300)), d))
        w = rng.normal(size=Y.shape[0])
        full = kernel_expansion(spec, X, Y, w)
        i = int(rng.integers(0, X.shape[0]))
        assert kernel_expansion(spec, X[i], Y, w)[0] == full[i]
        assert np.array_equal(kernel_expansion(spec, X[i:], Y, w), full[i:])

    def test_weight_length(self):
        with pytest.raises(KernelError):
            kernel_expansion(KernelSpec.linear(), np.ones((2, 2)), np.ones((3, 2)), np.ones(2))
