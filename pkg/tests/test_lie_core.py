import numpy as np
import pytest

from modules import catalog
from modules.errors import DomainError
from modules.lie_core import (InnerProduct, LieData, ad_matrix, audit, bracket, bracket_m, jacobi_residual,
                              project, riemannian_nr_residual)


def _record(report, name):
    return next(item for item in report['checks'] if item['name'] == name)


def test_from_triples_canonicalizes_order():
    data = LieData.from_triples(0, 2, 1, [(2, 0, 1, 1.0)])
    assert data.structure == ((0, 2, 1, -1.0),)
    assert data.tensor[2, 0, 1] == 1.0
    assert data.tensor[0, 2, 1] == -1.0
    assert data.antisymmetry_defects == ()


def test_from_triples_records_inconsistent_mirror():
    data = LieData.from_triples(0, 2, 1, [(0, 1, 2, 1.0), (1, 0, 2, 0.5)])
    assert data.antisymmetry_defects
    report = audit(data, InnerProduct(np.eye(3)))
    assert not _record(report, 'antisymmetry')['passed']
    assert _record(report, 'antisymmetry')['witness'] == [0, 1, 2]


def test_from_triples_flags_conflicting_repeat(caplog):
    with caplog.at_level('WARNING'):
        data = LieData.from_triples(0, 2, 1, [(0, 1, 2, 1.0), (0, 1, 2, 1.0)])
    assert data.structure == ((0, 1, 2, 1.0),)
    assert any('more than once' in record.message for record in caplog.records)
    assert _record(audit(data, InnerProduct(np.eye(3))), 'antisymmetry')['passed']

    data = LieData.from_triples(0, 2, 1, [(0, 1, 2, 1.0), (0, 1, 2, 0.5)])
    assert data.structure == ((0, 1, 2, 1.0),)
    report = audit(data, InnerProduct(np.eye(3)))
    assert not _record(report, 'antisymmetry')['passed']
    assert _record(report, 'antisymmetry')['residual'] == pytest.approx(0.5)
    assert _record(report, 'antisymmetry')['witness'] == [0, 1, 2]


def test_from_triples_rejects_bad_index():
    with pytest.raises(DomainError):
        LieData.from_triples(0, 1, 1, [(0, 5, 1, 1.0)])


def test_default_labels():
    data = LieData.from_triples(1, 2, 1, [])
    assert data.labels == ('h1', 'a1', 'a2', 'b1')


def test_su2_bracket_and_jacobi():
    data = catalog.su2_factor().data
    e = np.eye(3)
    np.testing.assert_array_equal(bracket(data, e[0], e[1]), e[2])
    np.testing.assert_array_equal(bracket(data, e[2], e[0]), e[1])
    assert jacobi_residual(data) == (0.0, None)


def test_jacobi_failure_names_the_triple():
    data = LieData.from_triples(0, 2, 1, [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 0, 1.0)])
    residual, triple = jacobi_residual(data)
    assert residual == pytest.approx(1.0)
    assert sorted(triple) == [0, 1, 2]
    report = audit(data, InnerProduct(np.eye(3)))
    assert not report['passed']
    assert not _record(report, 'jacobi')['passed']


def test_project_splits_vector(euclid):
    v = np.array([0.5, 1.0, 2.0, 3.0, 4.0])
    h_part = project(euclid.data, v, 'h')
    m_part = project(euclid.data, v, 'm')
    np.testing.assert_array_equal(h_part + m_part, v)
    np.testing.assert_array_equal(project(euclid.data, v[1:], 'm2'), [0.0, 0.0, 3.0, 4.0])


def test_bracket_rejects_wrong_length(euclid):
    with pytest.raises(DomainError):
        bracket(euclid.data, np.ones(3), np.ones(4))


def test_euclidean_quotient_brackets(euclid):
    data = euclid.data
    m = np.eye(4)
    for i in range(4):
        for j in range(4):
            np.testing.assert_array_equal(bracket_m(data, m[i], m[j]), np.zeros(4))
    rotation = ad_matrix(data, np.array([1.0, 0, 0, 0, 0]))
    np.testing.assert_array_equal(rotation @ np.array([1.0, 0, 0, 0]), [0.0, 1.0, 0.0, 0.0])


def test_audit_passes_on_every_fixture(all_spaces):
    for space in all_spaces:
        report = audit(space.data, space.ip)
        assert report['passed'], space.name
        assert {c['name'] for c in report['checks']} >= {
            'antisymmetry', 'jacobi', 'h_subalgebra', 'reductive', 'split_invariance_m1',
            'split_invariance_m2', 'positive_definite', 'block_orthogonal', 'ad_h_invariance'}


def test_audit_rejects_indefinite_gram(euclid):
    report = audit(euclid.data, InnerProduct(np.diag([1.0, 1.0, -1.0, 1.0])))
    assert not _record(report, 'positive_definite')['passed']
    assert not report['passed']


def test_audit_rejects_non_invariant_gram(euclid):
    report = audit(euclid.data, InnerProduct(np.diag([1.0, 2.0, 1.0, 1.0])))
    record = _record(report, 'ad_h_invariance')
    assert not record['passed']
    assert record['witness'] == 'r'


def test_audit_rejects_non_reductive_bracket():
    data = LieData.from_triples(1, 1, 1, [(0, 1, 0, 1.0)])
    report = audit(data, InnerProduct(np.eye(2)))
    assert not _record(report, 'reductive')['passed']


def test_audit_rejects_gram_of_wrong_size(euclid):
    report = audit(euclid.data, InnerProduct(np.eye(3)))
    assert not report['passed']
    assert report['checks'][0]['name'] == 'gram_shape'


def test_riemannian_nr_residual():
    assert riemannian_nr_residual(catalog.su2_factor().data, InnerProduct(np.eye(3)))[0] == 0.0
    residual, label = riemannian_nr_residual(catalog.su2_factor().data, InnerProduct(np.diag([1.0, 2.0, 3.0])))
    assert residual > 0.5
    assert label in ('e1', 'e2', 'e3')
