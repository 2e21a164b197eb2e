import numpy as np
import pytest

from modules import catalog
from modules.errors import DomainError
from modules.homogeneous import (HomogeneousSpace, e_curvature, equivalence_audit, indicatrix_samples,
                                 latifi_residual, nr_latifi_check, nr_spray_check, nr_structural_check,
                                 nr_verdict, s_block_check, s_curvature, s_parity_check, s_vanishing_structural,
                                 spray_vector)
from modules.lie_core import LieData
from modules.norms import f_value, make_family

WITNESS_Y = np.array([2.0, 0.0, 1.0]) / np.sqrt(5.0)


def _record(report, name):
    return next(item for item in report['checks'] if item['name'] == name)


def test_space_rejects_mismatched_gram():
    data = LieData.from_triples(0, 2, 1, [])
    with pytest.raises(DomainError):
        HomogeneousSpace.build('bad', data, np.eye(2), 'riemannian')


def test_indicatrix_samples_have_unit_norm(s3xs3):
    ys = indicatrix_samples(s3xs3, 16, seed=3)
    assert ys.shape == (16, 6)
    for y in ys:
        assert f_value(s3xs3.norm, y) == pytest.approx(1.0)
    m1_only = indicatrix_samples(s3xs3, 8, seed=3, part='m1')
    np.testing.assert_array_equal(m1_only[:, 3:], 0.0)


def test_spray_vanishes_on_nr_fixtures(euclid, abelian, s3xs3):
    rng = np.random.default_rng(2)
    for space in (euclid, abelian, s3xs3):
        for y in rng.standard_normal((5, space.dim)):
            np.testing.assert_allclose(spray_vector(space, y), 0.0, atol=1e-12)


def test_spray_is_degree_two(su2_neg):
    eta = spray_vector(su2_neg, WITNESS_Y)
    assert np.linalg.norm(eta) > 1e-2
    for lam in (0.5, 2.0, 7.0):
        np.testing.assert_allclose(spray_vector(su2_neg, lam * WITNESS_Y), lam ** 2 * eta, rtol=1e-9, atol=1e-14)


def test_spray_defining_identity(su2_aniso):
    from modules.lie_core import bracket_m
    from modules.norms import fundamental_tensor
    y = np.array([0.3, -0.8, 0.5])
    eta = spray_vector(su2_aniso, y)
    g = fundamental_tensor(su2_aniso.norm, y).g_matrix
    for u in np.eye(3):
        assert eta @ g @ u == pytest.approx(y @ g @ bracket_m(su2_aniso.data, u, y), abs=1e-12)


def test_structural_check_on_nr_fixtures(euclid, abelian, s3xs3):
    for space in (euclid, abelian, s3xs3):
        report = nr_structural_check(space)
        assert report['passed'], space.name
        assert all(item['residual'] == 0.0 for item in report['checks'])


def test_structural_check_fails_on_su2_split(su2_neg):
    report = nr_structural_check(su2_neg)
    assert not report['passed']
    record = _record(report, 'm1_m2_in_h')
    assert record['residual'] == 1.0
    assert _record(report, 'alpha_part')['passed']


def test_riemannian_family_only_uses_alpha_part():
    space = catalog.su2_negative(make_family('riemannian'))
    report = nr_structural_check(space)
    assert report['riemannian']
    assert report['passed']
    assert [item['name'] for item in report['checks']] == ['alpha_part']


def test_linear_family_with_unequal_weights_is_not_nr():
    space = catalog.su2_negative(make_family('linear', [2.0, 3.0]))
    verdict = nr_verdict(space, {'samples': 32})
    assert verdict['agree']
    assert not verdict['naturally_reductive']


def test_latifi_residual():
    euclid = catalog.euclidean_diag_so2()
    assert latifi_residual(euclid, np.array([0.5, 0.1, -0.3, 0.7])) == 0.0
    su2 = catalog.su2_negative()
    assert latifi_residual(su2, WITNESS_Y) > 1e-2


def test_latifi_for_riemannian_family_is_killing_residual():
    space = catalog.s3_product(make_family('riemannian'))
    assert nr_latifi_check(space, samples=32)['residual'] <= 1e-10


def test_sampled_nr_checks(s3xs3, su2_neg):
    assert nr_latifi_check(s3xs3, samples=32)['passed']
    assert nr_spray_check(s3xs3, samples=32)['passed']
    latifi = nr_latifi_check(su2_neg, samples=32)
    spray = nr_spray_check(su2_neg, samples=32)
    assert not latifi['passed'] and latifi['residual'] > 1e-2
    assert not spray['passed']
    assert len(spray['witness']) == 3


def test_nr_verdict_agrees(nr_spaces, su2_neg, small_settings):
    for space in nr_spaces:
        verdict = nr_verdict(space, small_settings)
        assert verdict['agree'] and verdict['naturally_reductive'], space.name
    verdict = nr_verdict(su2_neg, small_settings)
    assert verdict['agree']
    assert verdict['verdicts'] == {'structural': False, 'latifi': False, 'spray': False}


def test_s_curvature_properties(su2_aniso):
    y = np.array([0.6, -0.3, 0.5])
    value = s_curvature(su2_aniso, y)
    assert abs(value) > 1e-6
    assert s_curvature(su2_aniso, 3.0 * y) == pytest.approx(3.0 * value, rel=1e-9)
    assert s_curvature(su2_aniso, -y) == pytest.approx(-value, rel=1e-9)
    with pytest.raises(DomainError):
        s_curvature(su2_aniso, np.zeros(3))


def test_s_curvature_vanishes_for_bi_invariant_su2_split(su2_neg):
    rng = np.random.default_rng(4)
    for y in rng.standard_normal((10, 3)):
        assert abs(s_curvature(su2_neg, y)) <= 1e-9


def test_s_vanishing_structural(euclid, s3xs3, su2_neg, su2_aniso):
    assert s_vanishing_structural(euclid)['passed']
    assert s_vanishing_structural(s3xs3)['passed']
    assert s_vanishing_structural(su2_neg)['passed']
    report = s_vanishing_structural(su2_aniso)
    assert not report['passed']
    assert _record(report, 's_condition_m1')['witness'] == 'e3'


def test_s_vanishes_on_each_block(su2_aniso, su2_neg):
    for space in (su2_aniso, su2_neg):
        checks = s_block_check(space, samples=50)
        assert [c['name'] for c in checks] == ['s_on_m1', 's_on_m2']
        assert all(c['passed'] for c in checks), checks


def test_s_parity(su2_aniso):
    assert s_parity_check(su2_aniso, samples=50)['passed']


def test_e_curvature(euclid, su2_aniso):
    y = np.array([0.2, 0.4, -0.3, 0.5])
    assert np.max(np.abs(e_curvature(euclid, y))) <= 1e-6

    y = np.array([0.6, -0.3, 0.5])
    e = e_curvature(su2_aniso, y)
    np.testing.assert_array_equal(e, e.T)
    assert np.max(np.abs(e)) > 1e-4
    np.testing.assert_allclose(e_curvature(su2_aniso, 2.0 * y), e / 2.0, rtol=1e-4, atol=1e-7)
    with pytest.raises(DomainError):
        e_curvature(su2_aniso, np.zeros(3))


def test_equivalence_audit_verdicts(euclid, s3xs3, su2_neg, su2_aniso):
    settings = {'samples': 32}
    for space in (euclid, s3xs3, su2_neg):
        audit = equivalence_audit(space, settings)
        assert audit['agree'], space.name
        assert all(audit['verdict'].values()), space.name
    audit = equivalence_audit(su2_aniso, settings)
    assert audit['agree']
    assert not any(audit['verdict'].values())
    assert not audit['structural']
