import numpy as np
import pytest

from einfibers.errors import InputError, ProximalityError
from einfibers.flags import EinPoint
from einfibers.hitchin import (
    SL2_H,
    SL2_ROT,
    SL2_S,
    BoundarySample,
    SL2Element,
    compact_weight_basis,
    decode_word,
    flag_from_angle,
    fuchsian_genus2,
    fuchsian_hitchin,
    in_domain,
    invariant_form_weight_basis,
    limit_plane,
    principal_derivative,
    principal_embed,
    principal_rotation,
    principal_weights,
    sample_limit_set,
    sl2_relator_residual,
    word_matrix,
)
from einfibers.pseudo_core import QuadraticSpace, model_form, sample_rng, subspace_distance
from einfibers.suites import random_sl2
from einfibers.symspace import basepoint

from oracles import binomial_weight_action, classical_pairing, principal_weight_formula, words_up_to

PS = [3, 4, 5, 6]


def test_sl2_element_validation():
    with pytest.raises(InputError):
        SL2Element(np.diag([2.0, 2.0]))
    g = SL2Element(np.array([[2.0, 1.0], [1.0, 1.0]]))
    assert np.allclose((g @ g.inverse()).m, np.eye(2))


@pytest.mark.parametrize("p", PS)
def test_embed_identity_and_minus_identity(p):
    assert np.allclose(principal_embed(np.eye(2), p), np.eye(2 * p + 1))
    assert np.allclose(principal_embed(-np.eye(2), p), np.eye(2 * p + 1))


@pytest.mark.parametrize("p", PS)
def test_embed_preserves_form(p):
    q = model_form(p)
    for i in range(100):
        g = principal_embed(random_sl2(sample_rng(31, p, i)), p)
        assert np.max(np.abs(g.T @ q @ g - q)) <= 1e-10
        assert np.linalg.det(g) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("p", PS)
def test_embed_matches_binomial_oracle(p):
    s = np.diag(np.sqrt(np.abs(np.diag(np.fliplr(invariant_form_weight_basis(p))))))
    for i in range(10):
        m = random_sl2(sample_rng(32, p, i))
        w = binomial_weight_action(m, p)
        # same matrix up to the fixed diagonal change of basis
        g = principal_embed(m, p)
        assert np.allclose(np.abs(g), np.abs(s @ w @ np.linalg.inv(s)), atol=1e-10)


@pytest.mark.parametrize("p", PS)
def test_embed_diagonal(p):
    lam = 1.7
    g = principal_embed(np.diag([lam, 1 / lam]), p)
    expected = lam ** (2 * p - 2 * np.arange(2 * p + 1))
    assert np.allclose(g, np.diag(expected), rtol=1e-13)


@pytest.mark.parametrize("p", PS)
def test_invariant_form(p):
    b = invariant_form_weight_basis(p)
    c = classical_pairing(p)
    # proportional to the classical pairing
    ratio = b[p, p] / c[p, p]
    assert np.allclose(b, ratio * c, atol=1e-10)
    ev = np.linalg.eigvalsh(b)
    assert (ev > 0).sum() == p and (ev < 0).sum() == p + 1


@pytest.mark.parametrize("p", PS)
def test_homomorphism(p):
    worst = 0.0
    for i in range(200):
        rng = sample_rng(33, p, i)
        g, h = random_sl2(rng), random_sl2(rng)
        worst = max(worst, np.linalg.norm(principal_embed(g @ h, p) - principal_embed(g, p) @ principal_embed(h, p)))
    assert worst <= 1e-9


@pytest.mark.parametrize("p", PS)
def test_rotation_fixes_basepoint(p):
    p0 = basepoint(QuadraticSpace(p))
    r = principal_rotation(0.83, p)
    assert np.allclose(r.T @ r, np.eye(2 * p + 1), atol=1e-13)
    assert subspace_distance((r @ p0.pos.T).T, p0.pos) < 1e-13
    c, s = np.cos(0.83), np.sin(0.83)
    assert np.allclose(r, principal_embed(np.array([[c, -s], [s, c]]), p), atol=1e-12)


@pytest.mark.parametrize("p", PS)
def test_compact_weight_basis(p):
    f = compact_weight_basis(p)
    d = principal_derivative(SL2_ROT, p)
    for j, k in enumerate(range(p, -p - 1, -1)):
        assert np.allclose(d @ f[:, j], -2j * k * f[:, j], atol=1e-12)
    assert np.allclose(f[:, ::-1], f.conj(), atol=1e-12)
    assert np.allclose(f.conj().T @ f, np.eye(2 * p + 1), atol=1e-12)
    assert np.allclose(principal_weights(p), principal_weight_formula(p), atol=1e-12)


def test_octagon_generators():
    gens = fuchsian_genus2()
    assert sl2_relator_residual(gens) <= 1e-8
    assert all(abs(np.trace(g.m)) > 2 for g in gens)
    # trace of every side pairing of the regular pi/4 octagon (frozen)
    assert all(abs(np.trace(g.m)) == pytest.approx(2 + np.sqrt(2), abs=1e-12) for g in gens)


def test_octagon_discrete_at_desk_scale():
    levels = words_up_to([g.m for g in fuchsian_genus2()], 6)
    eye = np.eye(2)
    closest = min(
        float(np.min(np.minimum(np.linalg.norm(w - eye, axis=(1, 2)), np.linalg.norm(w + eye, axis=(1, 2)))))
        for w in levels
    )
    # words of length <= 6 contain no relator (length 8), so none is close to +-I
    assert closest > 1e-3


@pytest.mark.parametrize("p", PS)
def test_hitchin_rep(p):
    rep = fuchsian_hitchin(p)
    q = model_form(p)
    assert rep.relator_residual() <= 1e-6
    for g in rep.gens:
        assert np.max(np.abs(g.T @ q @ g - q)) <= 1e-8 * np.max(np.abs(g)) ** 2


def test_direct_relator_is_roundoff_limited():
    # multiplying embedded generators directly loses accuracy only at the roundoff scale
    for p in (3, 4):
        assert fuchsian_hitchin(p).direct_relator_residual() < 1e-12


@pytest.mark.parametrize("p", PS)
def test_limit_plane_of_diagonal(p):
    t = limit_plane(principal_embed(np.diag([2.0, 0.5]), p))
    assert subspace_distance(t.basis, np.eye(2 * p + 1)[:p]) < 1e-12
    assert t.isotropy_residual() <= 1e-9


def test_limit_plane_requires_gap():
    with pytest.raises(ProximalityError):
        limit_plane(principal_embed(np.diag([1.1, 1 / 1.1]), 3))
    with pytest.raises(ProximalityError):
        limit_plane(principal_rotation(0.4, 3))


@pytest.mark.parametrize("p", PS)
def test_limit_plane_equivariance(p):
    for i in range(50):
        rng = sample_rng(34, p, i)
        k = random_sl2(rng, 0.3)
        g = principal_embed(k @ np.diag([2.0, 0.5]) @ np.linalg.inv(k), p)
        h = principal_embed(random_sl2(rng, 0.3), p)
        lhs = limit_plane(h @ g @ np.linalg.inv(h)).basis
        rhs = (h @ limit_plane(g).basis.T).T
        assert subspace_distance(lhs, rhs) <= 1e-8


@pytest.mark.parametrize("p", PS)
def test_limit_plane_eigensolver_oracle(p):
    for i in range(20):
        rng = sample_rng(35, p, i)
        k = random_sl2(rng, 0.3)
        g = principal_embed(k @ np.diag([1.8, 1 / 1.8]) @ np.linalg.inv(k), p)
        w, v = np.linalg.eig(g)
        top = v[:, np.argsort(-np.abs(w))[:p]].real.T
        assert subspace_distance(limit_plane(g).basis, top) <= 1e-8
        ang = np.mod(np.arctan2(k[1, 0], k[0, 0]), np.pi)
        assert subspace_distance(limit_plane(g).basis, flag_from_angle(ang, p)) <= 1e-8


def test_decode_word_order():
    # lexicographic in the alphabet a1, a1^-1, b1, b1^-1, a2, a2^-1, b2, b2^-1
    assert [decode_word(1, i) for i in range(8)] == [(1,), (-1,), (2,), (-2,), (3,), (-3,), (4,), (-4,)]
    assert decode_word(2, 0) == (1, 1)
    assert decode_word(2, 1) == (1, 2)
    assert decode_word(2, 7) == (-1, -1)
    words = [decode_word(3, i) for i in range(8 * 49)]
    assert len(set(words)) == len(words)
    assert all(a != -b for w in words for a, b in zip(w, w[1:]))


def test_sample_limit_set_length_one():
    s = sample_limit_set(fuchsian_hitchin(3), 1)
    assert 0 < len(s) <= 8
    assert all(isinstance(x, BoundarySample) and x.gap > 0.5 for x in s)


def test_sample_limit_set_rejects_zero_length():
    with pytest.raises(InputError):
        sample_limit_set(fuchsian_hitchin(3), 0)


def test_sampled_flags_match_direct_limit_planes():
    p = 3
    rep = fuchsian_hitchin(p)
    s = sample_limit_set(rep, 2)
    sl2 = [g.m for g in rep.gen_sl2]
    for x in s:
        assert x.flag.isotropy_residual() <= 1e-9
        # oracle: the attracting eigenline of the word in SL2
        w, v = np.linalg.eig(word_matrix(x.word, sl2))
        vec = v[:, np.argmax(np.abs(w))].real
        ang = np.mod(np.arctan2(vec[1], vec[0]), np.pi)
        assert subspace_distance(flag_from_angle(ang, p), x.flag.basis) <= 1e-8


def test_relator_conjugates_are_skipped():
    s = sample_limit_set(fuchsian_hitchin(3), 8)
    # the 8 cyclic rotations of the relator and their inverses are elliptic or trivial
    assert s.n_skipped == 16
    assert s.n_words == sum(8 * 7 ** (k - 1) for k in range(1, 9))


def test_cyclic_conjugate_equivariance():
    p = 3
    rep = fuchsian_hitchin(p)
    s = sample_limit_set(rep, 6)
    index = {s.word(i): i for i in range(len(s))}
    checked = 0
    for i in range(0, len(s), 37):
        w = s.word(i)
        if len(w) > 4 or w[0] == -w[-1]:
            continue
        g = w[0]
        conj = w[1:] + (g,)  # g^-1 w g is a cyclic rotation
        if conj in index:
            a = s[index[conj]].flag.basis
            gi = rep.gens[abs(g) - 1] if g < 0 else np.linalg.inv(rep.gens[g - 1])
            b = (gi @ s[i].flag.basis.T).T
            assert subspace_distance(a, b) <= 1e-6
            checked += 1
    assert checked > 20


def test_sample_dedup_and_order():
    s = sample_limit_set(fuchsian_hitchin(3), 4)
    assert np.all(np.diff(s.ordinals) > 0)
    ang = np.sort(s.angles)
    assert np.min(np.diff(ang)) > 0
    assert s.n_duplicates >= 0


def test_in_domain_examples():
    p = 3
    s = sample_limit_set(fuchsian_hitchin(p), 3)
    space = QuadraticSpace(p)
    inside = EinPoint(space, s[5].flag.basis[0])
    assert not in_domain(inside, s)
    assert not in_domain(inside, [s[5]])
    assert in_domain(inside, [])
    far = EinPoint(space, basepoint(space).pos[0] + basepoint(space).neg[0])
    assert in_domain(far, s) == in_domain(far, list(s))


def test_residual_table_matches_dense():
    from einfibers.hitchin import containment_residuals

    s = sample_limit_set(fuchsian_hitchin(4), 2)
    rng = np.random.default_rng(0)
    xs = rng.standard_normal((6, 9))
    xs /= np.linalg.norm(xs, axis=1)[:, None]
    dense = containment_residuals(xs, np.array([x.flag.basis for x in s]))
    assert np.allclose(s.residual_table(xs).T, dense, atol=1e-13)


@pytest.mark.parametrize("p", PS)
def test_basepoint_pencil_is_tangent(p):
    from einfibers.hitchin import basepoint_pencil
    from einfibers.symspace import TangentMap

    pen = basepoint_pencil(p)
    # d eta of H and S, and of their rotations, stay in the pencil
    r = principal_rotation(0.3, p)
    x = r @ principal_derivative(SL2_H, p) @ r.T
    phi = TangentMap.from_endomorphism(pen.base, x)
    coeffs, *_ = np.linalg.lstsq(pen.stacked().reshape(2, -1).T, phi.matrix.ravel(), rcond=None)
    assert np.allclose(pen.member(coeffs).matrix, phi.matrix, atol=1e-12)
    assert not np.allclose(principal_derivative(SL2_S, p), 0)


@pytest.mark.parametrize("p", [3, 6])
def test_reduced_minimum_matches_full_table(p):
    s = sample_limit_set(fuchsian_hitchin(p), 4)
    rng = np.random.default_rng(p)
    xs = rng.standard_normal((20, 2 * p + 1))
    xs /= np.linalg.norm(xs, axis=1)[:, None]
    # include lines lying in sampled planes, where the squared form cancels
    xs = np.vstack([xs, s[3].flag.basis[0], s[len(s) // 2].flag.basis[-1]])
    full = s.residual_table(xs).min(axis=0)
    fast = s.residual_table(xs, reduce=True)
    assert np.allclose(fast, full, atol=1e-13)
    assert np.all(fast[-2:] <= 1e-12)
