import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from einfibers.errors import InputError, PreconditionError
from einfibers.pseudo_core import (
    QuadraticSpace,
    Subspace,
    canonical_sign,
    definite_frame,
    model_form,
    orthogonal_complement,
    q_eval,
    sample_rng,
    signature,
    sphere_sample,
    subspace_distance,
)
from einfibers.symspace import basepoint

PS = [3, 4, 5, 6]


def test_form_matrix_shape():
    q = model_form(3)
    assert q[0, 6] == 1 and q[3, 3] == -1
    assert np.count_nonzero(q) == 7
    assert np.array_equal(q, q.T)


@pytest.mark.parametrize("p", PS)
def test_form_signature(p):
    ev = np.linalg.eigvalsh(model_form(p))
    assert (ev > 0).sum() == p and (ev < 0).sum() == p + 1


def test_q_examples():
    s = QuadraticSpace(3)
    e = s.basis_vector
    assert q_eval(s, e(1), e(7)) == 1.0
    assert q_eval(s, e(4), e(4)) == -1.0
    assert q_eval(s, e(1), e(1)) == 0.0


def test_q_dimension_mismatch():
    with pytest.raises(InputError):
        q_eval(QuadraticSpace(3), np.ones(5), np.ones(7))


def test_space_rejects_small_p():
    with pytest.raises(InputError):
        QuadraticSpace(1)


@given(st.integers(0, 2**32), st.sampled_from(PS))
def test_q_symmetry_exact(seed, p):
    rng = np.random.default_rng(seed)
    s = QuadraticSpace(p)
    v, w = rng.standard_normal((2, s.dim))
    assert q_eval(s, v, w) == q_eval(s, w, v)


def test_signature_examples():
    s = QuadraticSpace(3)
    assert signature(s.full()) == (3, 4, 0)
    assert signature(Subspace(s, s.basis_vector(1))) == (0, 0, 1)
    assert signature(Subspace(s, s.basis_vector(1) + s.basis_vector(7))) == (1, 0, 0)


def test_subspace_rejects_dependent_basis():
    s = QuadraticSpace(3)
    with pytest.raises(InputError):
        Subspace(s, np.array([s.basis_vector(1), 2 * s.basis_vector(1)]))


def test_complement_examples():
    s = QuadraticSpace(3)
    c = orthogonal_complement(Subspace(s, s.basis_vector(1)))
    assert c.dim_sub == 6
    assert c.contains(s.basis_vector(1))
    assert not c.contains(s.basis_vector(7))
    assert orthogonal_complement(s.full()).dim_sub == 0


@pytest.mark.parametrize("p", PS)
def test_basepoint_complement(p):
    s = QuadraticSpace(p)
    p0 = basepoint(s)
    perp = orthogonal_complement(p0.sub)
    e = s.basis_vector
    expected = [e(i) - e(2 * p + 2 - i) for i in range(1, p + 1)] + [e(p + 1)]
    assert subspace_distance(perp.basis, np.array(expected)) < 1e-12


@pytest.mark.parametrize("p", PS)
def test_random_complements(p):
    s = QuadraticSpace(p)
    for i in range(200):
        rng = sample_rng(7, p, i)
        k = int(rng.integers(1, s.dim))
        u = Subspace(s, rng.standard_normal((k, s.dim)))
        if signature(u)[2]:
            continue
        perp = orthogonal_complement(u)
        assert u.dim_sub + perp.dim_sub == s.dim
        both = np.vstack([u.basis, perp.basis])
        assert np.linalg.matrix_rank(both) == s.dim
        a, b = signature(u), signature(perp)
        assert (a[0] + b[0], a[1] + b[1], a[2] + b[2]) == (p, p + 1, 0)


def test_sphere_sample_basepoint():
    s = QuadraticSpace(3)
    p0 = basepoint(s)
    pts = sphere_sample(p0.sub, +1, 50, seed=3)
    assert all(abs(q_eval(s, v, v) - 1) <= 1e-12 for v in pts)
    assert all(p0.sub.contains(v) for v in pts)
    with pytest.raises(PreconditionError):
        sphere_sample(p0.sub, -1, 5, seed=3)
    assert sphere_sample(p0.sub, +1, 0, seed=3) == []


def test_sphere_sample_deterministic_and_indexed():
    p0 = basepoint(QuadraticSpace(4))
    a = sphere_sample(p0.sub, +1, 20, seed=11)
    b = sphere_sample(p0.sub, +1, 20, seed=11)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    # sample i depends on (seed, i) only, not on how many were requested
    c = sphere_sample(p0.sub, +1, 5, seed=11)
    assert all(np.array_equal(x, y) for x, y in zip(a, c))


def test_definite_frame_gram():
    p0 = basepoint(QuadraticSpace(5))
    f = definite_frame(p0.sub, +1)
    assert np.allclose(f @ model_form(5) @ f.T, np.eye(5), atol=1e-13)


def test_canonical_sign():
    assert np.array_equal(canonical_sign(np.array([0.0, -2.0, 1.0])), np.array([0.0, 2.0, -1.0]))
    assert np.array_equal(canonical_sign(np.array([1e-20, -2.0])), np.array([-1e-20, 2.0]))
