import numpy as np
import pytest
from hypothesis import given, strategies as st

from einfibers.errors import InputError, InvariantViolation, PreconditionError
from einfibers.higgs_fibers import (
    TAUTOLOGICAL_J,
    ComplexStructureJ,
    HiggsPencilFamily,
    arrow_pattern,
    build_J,
    build_psi,
    chern_number_p3,
    clutching_winding,
    coupled_blocks,
    deformation_path_check,
    pencil_at,
    psi_chart,
    psi_complex,
    regularity_sweep,
    tautological_fiber_fn,
    trivial_fiber_fn,
    verify_even_identities,
    verify_odd_identities,
)
from einfibers.hitchin import basepoint_pencil
from einfibers.pencils import pencil_distance
from einfibers.pseudo_core import subspace_distance

from oracles import hermitian_margin

PS = [3, 4, 5, 6]

# sigma_p / sigma_1 of psi at t = 1 (unit weights); the minimum over the path
FROZEN_MARGINS = {3: np.sqrt(2) - 1, 4: 0.3249196962, 5: 2 - np.sqrt(3), 6: 0.2282434744}


def test_p_two_rejected():
    with pytest.raises(InputError, match="p = 2"):
        HiggsPencilFamily(2)
    with pytest.raises(InputError):
        HiggsPencilFamily(3, weights="other")


def test_arrow_patterns():
    assert arrow_pattern(3) == [False, True, False, False, True, False]
    assert arrow_pattern(4) == [False, True, False, True, True, False, True, False]


@pytest.mark.parametrize("p", PS)
def test_pattern_symmetric(p):
    pat = arrow_pattern(p)
    assert pat == pat[::-1]
    assert np.array_equal(HiggsPencilFamily(p).arrow_weights(1.0), np.ones(2 * p))


@pytest.mark.parametrize("p", PS)
def test_weight_parity_split(p):
    fam = HiggsPencilFamily(p)
    u, v = fam.u_weights, fam.v_weights
    assert len(u) == p and len(v) == p + 1
    assert sorted(u + v) == sorted(fam.grading)
    # every arrow k -> k-1 joins U and V
    assert all((k in u) != (k - 1 in u) for k in range(p, -p, -1))
    assert p - 1 in u and p in v


@pytest.mark.parametrize("p", PS)
def test_psi_reality_and_sign(p):
    fam = HiggsPencilFamily(p)
    rng = np.random.default_rng(p)
    for t in (0.0, 0.4, 1.0):
        z = np.exp(1j * rng.uniform(0, 2 * np.pi))
        a = psi_complex(fam, t, z)
        assert np.allclose(a, a.conj().T)
        x = fam.chart.from_real(rng.standard_normal(2 * p + 1))
        assert fam.chart.contains(a @ x)
        assert np.allclose(psi_chart(fam, t, -z), -psi_chart(fam, t, z))


def test_psi_requires_unit_z():
    with pytest.raises(InputError):
        psi_chart(HiggsPencilFamily(3), 0.0, 2.0)


@pytest.mark.parametrize("p", PS)
def test_t0_block_structure(p):
    fam = HiggsPencilFamily(p)
    blocks = coupled_blocks(fam, 0.0)
    assert [k for b in blocks for k in b] == list(fam.grading)
    assert np.linalg.matrix_rank(psi_complex(fam, 0.0, 1.0)) == 2 * p
    if p % 2:
        # pairs, with one 3-block around the centre
        assert sorted(len(b) for b in blocks) == [2] * (p - 1) + [3]
        assert (1, 0, -1) in blocks
    else:
        assert sorted(len(b) for b in blocks) == [1] + [2] * p
        assert (0,) in blocks
        assert np.all(psi_complex(fam, 0.0, 1.0)[p] == 0)


def test_p3_blocks():
    assert coupled_blocks(HiggsPencilFamily(3), 0.0) == [(3, 2), (1, 0, -1), (-2, -3)]


@pytest.mark.parametrize("p", PS)
def test_regularity_sweep_frozen(p):
    fam = HiggsPencilFamily(p)
    m, (t, _) = regularity_sweep(fam)
    assert m == pytest.approx(FROZEN_MARGINS[p], abs=1e-9)
    assert t == 1.0
    # oracle: the spectrum of the Hermitian psi, which does not depend on z
    for z in (1.0, 1j, np.exp(0.7j)):
        assert hermitian_margin(psi_complex(fam, 1.0, z)) == pytest.approx(m, abs=1e-12)


@pytest.mark.parametrize("p", PS)
def test_sweep_margin_matches_oracle_along_path(p):
    fam = HiggsPencilFamily(p)
    for t in np.linspace(0, 1, 9):
        assert hermitian_margin(psi_complex(fam, t, 1.0)) >= FROZEN_MARGINS[p] - 1e-9


@pytest.mark.parametrize("p", PS)
def test_sabotage_breaks_regularity(p):
    fam = HiggsPencilFamily(p, sabotage=True)
    m, _ = regularity_sweep(fam, 5, 16)
    assert m < 1e-12
    rep = deformation_path_check(fam, t_steps=5)
    assert not rep.passed
    assert rep.detail("first_irregular_t") == 0.0


@pytest.mark.parametrize("p", PS)
def test_J_invariants(p):
    fam = HiggsPencilFamily(p)
    j = build_J(fam)
    k = len(j.matrix)
    assert np.array_equal(j.matrix @ j.matrix, -np.eye(k))
    assert np.array_equal(j.matrix.T @ j.matrix, np.eye(k))
    assert k == (p + 1 if p % 2 else 2 * p)
    if p % 2:
        with pytest.raises(PreconditionError):
            j.j_u


def test_J_rejects_bad_matrix():
    with pytest.raises(InvariantViolation):
        ComplexStructureJ("odd", np.eye(2))
    with pytest.raises(InvariantViolation):
        ComplexStructureJ("even", np.array([[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]]))


@pytest.mark.parametrize("p", [3, 5])
def test_odd_identities(p):
    rep = verify_odd_identities(p, 300, seed=2)
    assert rep.passed and rep.max_residual <= 1e-10
    assert rep.detail("status").startswith("identity-verified")


@pytest.mark.parametrize("p", [4, 6])
def test_even_identities(p):
    rep = verify_even_identities(p, 300, seed=2)
    assert rep.passed and rep.max_residual <= 1e-10


@pytest.mark.parametrize("p", PS)
def test_identities_fail_at_t1(p):
    fn = verify_odd_identities if p % 2 else verify_even_identities
    rep = fn(p, 50, seed=1, t=1.0)
    assert not rep.passed and rep.max_residual > 0.5


def test_identity_suites_check_parity():
    with pytest.raises(InputError):
        verify_odd_identities(4, 5)
    with pytest.raises(InputError):
        verify_even_identities(5, 5)


@pytest.mark.parametrize("p", [4, 6])
def test_R_changes_off_the_complex_line(p):
    pen = pencil_at(HiggsPencilFamily(p), 0.0)
    rng = np.random.default_rng(0)
    m1, mi = pen.gens[0].matrix, pen.gens[1].matrix
    u, w = rng.standard_normal((2, p))
    ru = np.linalg.qr(np.array([m1 @ u, mi @ u]).T)[0].T
    rw = np.linalg.qr(np.array([m1 @ w, mi @ w]).T)[0].T
    assert subspace_distance(ru, rw) > 1e-3


def test_chern_p3():
    n, raw = chern_number_p3(1024, return_raw=True)
    assert n == 0 and abs(raw) < 1e-6


def test_clutching_controls():
    taut, raw = clutching_winding(tautological_fiber_fn, TAUTOLOGICAL_J, 1024)
    assert abs(taut) == 1 and abs(abs(raw) - 1) < 1e-6
    assert clutching_winding(trivial_fiber_fn, TAUTOLOGICAL_J, 1024)[0] == 0


def test_chern_requires_resolution():
    with pytest.raises(InputError):
        chern_number_p3(64)


@pytest.mark.parametrize("p", PS)
def test_deformation_path_passes(p):
    rep = deformation_path_check(HiggsPencilFamily(p), t_steps=9)
    assert rep.passed and rep.detail("min_margin") > 0.1


@pytest.mark.parametrize("p", PS)
def test_principal_weights_reach_basepoint_pencil(p):
    fam = HiggsPencilFamily(p, weights="principal")
    assert pencil_distance(pencil_at(fam, 1.0), basepoint_pencil(p)) < 1e-12
    # unit weights give a different (diagonally rescaled) pencil
    assert pencil_distance(pencil_at(HiggsPencilFamily(p), 1.0), basepoint_pencil(p)) > 1e-2


@given(st.integers(3, 6), st.floats(0, 1), st.floats(0, 2 * np.pi))
def test_build_psi_is_tangent(p, t, a):
    fam = HiggsPencilFamily(p)
    phi = build_psi(fam, t, np.exp(1j * a))
    assert phi.matrix.shape == (p + 1, p)
    pen = pencil_at(fam, t)
    assert np.allclose(pen.member([np.cos(a), np.sin(a)]).matrix, phi.matrix, atol=1e-12)
