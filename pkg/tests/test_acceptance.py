"""Cross-module checks: closed forms against oracles, homogeneity and the fixture verdicts."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from modules import catalog, oracle
from modules.curvature import flag_curvature_nr, flag_sweep, random_flags
from modules.homogeneous import equivalence_audit, nr_verdict, s_block_check, s_curvature, spray_vector
from modules.lie_core import InnerProduct
from modules.norms import (MinkowskiNorm, cartan_tensor_matrix, f_value, fundamental_tensor, fundamental_tensor_phi,
                           make_family)
from modules.sampling import sphere_directions

FAMILIES = [('riemannian', None), ('quartic-mean', [0.5]), ('quartic-mean', [1.0]), ('quartic-mean', [1.5]),
            ('phi-power', [0.5, 2.0])]
SPLITS = [(1, 1), (2, 1), (2, 2), (3, 2)]

QUARTIC = MinkowskiNorm(make_family('quartic-mean', [1.0]), (2, 1), InnerProduct(np.diag([1.0, 2.0, 0.5])))
ANISO = catalog.su2_anisotropic()

vectors = arrays(np.float64, 3, elements=st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False))
scales = st.floats(0.1, 10.0)


def _random_gram(n: int, split, seed: int) -> np.ndarray:
    """Block-diagonal positive definite gram for the given split."""
    rng = np.random.default_rng(seed)
    gram = np.zeros((n, n))
    start = 0
    for size in split:
        a = rng.standard_normal((size, size))
        gram[start:start + size, start:start + size] = a @ a.T + size * np.eye(size)
        start += size
    return gram


@pytest.mark.parametrize('kind,params', FAMILIES)
@pytest.mark.parametrize('split', SPLITS)
def test_fundamental_tensor_against_hessian(kind, params, split):
    n = sum(split)
    gram = _random_gram(n, split, seed=n)
    norm = MinkowskiNorm(make_family(kind, params), split, InnerProduct(gram))
    for y in sphere_directions(gram, 10, seed=3):
        closed = fundamental_tensor(norm, y).g_matrix
        numeric = oracle.fundamental_tensor_fd(norm, y)
        assert np.max(np.abs(numeric - closed)) <= 1e-6 * np.max(np.abs(closed))


def test_cartan_tensor_against_finite_differences():
    for y in sphere_directions(QUARTIC.ip.gram, 10, seed=4):
        closed = cartan_tensor_matrix(QUARTIC, y)
        numeric = oracle.cartan_tensor_fd(QUARTIC, y)
        assert np.max(np.abs(numeric - closed)) <= 1e-6 * max(1.0, np.max(np.abs(closed)))


def test_phi_form_contractions_on_flags(s3xs3, euclid):
    for space in (s3xs3, euclid):
        for flag in random_flags(space, 100, seed=13, min_y2=0.05):
            y, x = flag.y, flag.x
            g = fundamental_tensor(space.norm, y).g_matrix
            assert fundamental_tensor_phi(space.norm, y, y, y) == pytest.approx(f_value(space.norm, y) ** 2, abs=1e-10)
            assert fundamental_tensor_phi(space.norm, y, y, x) == pytest.approx(y @ g @ x, abs=1e-10)
            assert flag_curvature_nr(space, flag).r2_residual <= 1e-10


@pytest.mark.slow
def test_three_way_nr_agreement(euclid, abelian, s3xs3, su2_neg):
    expected = {euclid: True, abelian: True, s3xs3: True, su2_neg: False}
    for space, nr in expected.items():
        verdict = nr_verdict(space, {'samples': 256})
        assert verdict['agree'], space.name
        assert verdict['naturally_reductive'] is nr, space.name


def test_cross_path_on_nr_fixtures(euclid, s3xs3):
    for space in (euclid, s3xs3):
        report = flag_sweep(space, random_flags(space, 100, seed=7, min_y2=0.1))
        assert report['passed'], (space.name, report['checks'])
        assert report['near_singular'] == 0
    report = flag_sweep(euclid, random_flags(euclid, 100, seed=7, min_y2=0.1))
    assert report['max_abs_k'] <= 1e-8


def test_riemannian_reduction(s3xs3_riemannian):
    space = s3xs3_riemannian
    for flag in random_flags(space, 100, seed=21, min_y2=0.1):
        expected = oracle.bi_invariant_sectional(space.data, space.ip, flag.y, flag.x)
        assert flag_curvature_nr(space, flag).k_closed == pytest.approx(expected, abs=1e-8)


def test_equivalence_witnesses(nr_spaces, su2_neg, su2_aniso):
    for space in nr_spaces + [su2_neg]:
        audit = equivalence_audit(space, {'samples': 64})
        assert audit['agree'] and all(audit['verdict'].values()), space.name
    audit = equivalence_audit(su2_aniso, {'samples': 64})
    assert audit['agree']
    assert audit['verdict'] == {'weakly_isotropic_s': False, 'vanishing_s': False,
                                'isotropic_e': False, 'vanishing_e': False}


def test_s_vanishes_on_both_blocks_of_every_fixture(all_spaces):
    for space in all_spaces:
        for check in s_block_check(space, samples=50):
            assert check['passed'], (space.name, check)


@given(y=vectors, lam=scales)
@settings(max_examples=100, deadline=None)
def test_fundamental_tensor_is_scale_invariant(y, lam):
    assume(np.linalg.norm(y) > 0.1)
    np.testing.assert_allclose(fundamental_tensor(QUARTIC, lam * y).g_matrix,
                               fundamental_tensor(QUARTIC, y).g_matrix, rtol=1e-9, atol=1e-9)


@given(y=vectors)
@settings(max_examples=100, deadline=None)
def test_cartan_tensor_kills_y(y):
    assume(np.linalg.norm(y) > 0.1)
    np.testing.assert_allclose(np.einsum('ijk,k->ij', cartan_tensor_matrix(QUARTIC, y), y), 0.0, atol=1e-9)


@given(y=vectors)
@settings(max_examples=100, deadline=None)
def test_norm_is_even_and_homogeneous(y):
    assume(np.linalg.norm(y) > 0.1)
    value = f_value(QUARTIC, y)
    assert f_value(QUARTIC, -y) == pytest.approx(value, abs=1e-9)
    assert f_value(QUARTIC, 2.5 * y) == pytest.approx(2.5 * value, rel=1e-9)


@given(y=vectors, lam=scales)
@settings(max_examples=100, deadline=None)
def test_spray_is_quadratic(y, lam):
    assume(np.linalg.norm(y) > 0.1)
    eta = spray_vector(ANISO, y)
    np.testing.assert_allclose(spray_vector(ANISO, lam * y), lam ** 2 * eta, rtol=1e-9, atol=1e-9)


@given(y=vectors)
@settings(max_examples=100, deadline=None)
def test_s_curvature_is_odd(y):
    assume(np.linalg.norm(y) > 0.1)
    assert s_curvature(ANISO, -y) == pytest.approx(-s_curvature(ANISO, y), abs=1e-9)
