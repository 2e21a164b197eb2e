import numpy as np
import pytest

from modules import catalog, oracle
from modules.errors import DomainError
from modules.homogeneous import spray_vector
from modules.lie_core import InnerProduct
from modules.norms import (MinkowskiNorm, cartan_tensor_matrix, f_value, fundamental_tensor,
                           make_family)


def test_fd_hessian_of_quadratic_form():
    gram = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 3.0]])
    y = np.array([0.3, -0.7, 0.4])
    hess = oracle.fd_hessian(lambda z: z @ gram @ z, y)
    np.testing.assert_allclose(hess, 2 * gram, atol=1e-6)
    np.testing.assert_array_equal(hess, hess.T)


def test_fd_hessian_riemannian_norm_is_twice_gram():
    gram = np.diag([1.0, 2.0, 0.5])
    norm = MinkowskiNorm(make_family('riemannian'), (2, 1), InnerProduct(gram))
    y = np.array([0.2, 0.5, -0.9])
    hess = oracle.fd_hessian(lambda z: f_value(norm, z) ** 2, y)
    np.testing.assert_allclose(hess, 2 * gram, atol=1e-6)


def test_fundamental_tensor_fd_matches_quartic_mean(quartic_norm):
    y = np.array([0.6, -0.2, 0.77])
    y = y / np.linalg.norm(y)
    closed = fundamental_tensor(quartic_norm, y).g_matrix
    numeric = oracle.fundamental_tensor_fd(quartic_norm, y)
    assert np.max(np.abs(numeric - closed)) <= 1e-6 * np.max(np.abs(closed))


def test_fd_gradient_of_f_squared_is_twice_g_y(quartic_norm):
    y = np.array([0.5, 0.1, -0.8])
    grad = oracle.fd_gradient(lambda z: f_value(quartic_norm, z) ** 2, y)
    g = fundamental_tensor(quartic_norm, y).g_matrix
    np.testing.assert_allclose(grad, 2 * g @ y, atol=1e-7)


def test_cartan_tensor_fd_matches_closed_form(quartic_norm):
    y = np.array([0.4, 0.3, 0.8])
    closed = cartan_tensor_matrix(quartic_norm, y)
    numeric = oracle.cartan_tensor_fd(quartic_norm, y)
    assert np.max(np.abs(numeric - closed)) <= 1e-6 * max(1.0, np.max(np.abs(closed)))


def test_small_step_warns(caplog):
    with caplog.at_level('WARNING'):
        oracle.fd_hessian(lambda z: z @ z, np.ones(2), h=1e-9)
    assert any('below' in record.message for record in caplog.records)


def test_bi_invariant_sectional_su2():
    factor = catalog.su2_factor()
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    assert oracle.bi_invariant_sectional(factor.data, factor.ip, e1, e2) == pytest.approx(0.25)


def test_bi_invariant_sectional_abelian_is_flat():
    factor = catalog.abelian_factor(3)
    x, y = np.array([1.0, 2.0, 0.0]), np.array([0.0, 1.0, -1.0])
    assert oracle.bi_invariant_sectional(factor.data, factor.ip, x, y) == 0.0


def test_bi_invariant_sectional_rejects_parallel_vectors():
    factor = catalog.su2_factor()
    x = np.array([1.0, 1.0, 0.0])
    with pytest.raises(DomainError):
        oracle.bi_invariant_sectional(factor.data, factor.ip, x, 2 * x)


def test_bi_invariant_sectional_rejects_skewed_metric():
    factor = catalog.su2_skewed_factor()
    with pytest.raises(DomainError):
        oracle.bi_invariant_sectional(factor.data, factor.ip, np.eye(3)[0], np.eye(3)[1])


def test_spray_bruteforce_matches_spray_vector(su2_neg):
    y = np.array([2.0, 0.0, 1.0]) / np.sqrt(5.0)
    expected = spray_vector(su2_neg, y)
    assert np.linalg.norm(expected) > 1e-2
    for seed in (0, 1, 2):
        np.testing.assert_allclose(oracle.spray_bruteforce(su2_neg, y, seed), expected, atol=1e-9)


def test_spray_bruteforce_vanishes_on_euclidean_quotient(euclid):
    y = np.array([0.3, -0.4, 0.5, 0.2])
    np.testing.assert_allclose(oracle.spray_bruteforce(euclid, y, 3), np.zeros(4), atol=1e-12)
