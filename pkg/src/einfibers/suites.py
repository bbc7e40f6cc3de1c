"""Per-module verification checks used by ``verify`` and the acceptance tests.

Every random draw comes from ``sample_rng(seed, tag, p, i)`` so a check's
result depends only on its arguments.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .flags import EinPoint, decompose
from .higgs_fibers import (
    TAUTOLOGICAL_J,
    HiggsPencilFamily,
    chern_number_p3,
    clutching_winding,
    pencil_at,
    regularity_sweep,
    tautological_fiber_fn,
    trivial_fiber_fn,
)
from .hitchin import (
    DEFAULT_GAP_THRESHOLD,
    SL2_H,
    basepoint_pencil,
    flag_from_angle,
    fuchsian_genus2,
    fuchsian_hitchin,
    limit_plane,
    principal_embed,
    sample_limit_set,
    sl2_relator_residual,
)
from .pencils import base_sample, membership_residual, r_perp_coords
from .pseudo_core import QuadraticSpace, q_eval, sample_rng, subspace_distance, unit_gaussian
from .report import CheckReport
from .symspace import TangentMap, basepoint, cartan_projection, embed_A, metric, points_toward_ein

# stream tags keep the checks' random draws disjoint
TAG_CARTAN, TAG_FLAGS, TAG_HOM, TAG_EQUI, TAG_BASE, TAG_LINES = range(1, 7)


def random_sl2(rng, max_translation: float = 0.5) -> np.ndarray:
    """R_a diag(e^s, e^-s) R_b with |s| <= max_translation (Cartan coordinates)."""
    a, b = rng.uniform(0, 2 * np.pi, 2)
    s = rng.uniform(-max_translation, max_translation)

    def rot(x):
        return np.array([[np.cos(x), -np.sin(x)], [np.sin(x), np.cos(x)]])

    return rot(a) @ np.diag([np.exp(s), np.exp(-s)]) @ rot(b)


def random_point(p: int, rng, scale: float = 0.3):
    """A spacelike plane exp(A) . P0 for a random small tangent vector A."""
    p0 = basepoint(QuadraticSpace(p))
    phi = TangentMap(p0, scale * rng.standard_normal((p + 1, p)))
    return p0.act(expm(embed_A(phi)))


def cartan_oracle(phi: TangentMap) -> np.ndarray:
    """Top p eigenvalues of the ambient (non-symmetric) matrix of A_phi."""
    ev = np.sort(np.linalg.eigvals(embed_A(phi)).real)[::-1]
    return np.maximum(ev[: phi.base.p], 0.0)


def check_symspace(p: int, seed: int, n_trials: int = 200) -> CheckReport:
    space = QuadraticSpace(p)
    p0 = basepoint(space)
    tau = np.zeros((2 * p + 1, 2 * p + 1))
    tau[0, 0], tau[-1, -1] = 1.0, -1.0
    ray = cartan_projection(TangentMap.from_endomorphism(p0, tau))
    target = np.zeros(p)
    target[0] = 1.0
    ray_res = float(np.max(np.abs(ray - target)))
    worst = 0.0
    for i in range(n_trials):
        rng = sample_rng(seed, TAG_CARTAN, p, i)
        base = p0 if i % 2 == 0 else random_point(p, rng)
        phi = TangentMap(base, rng.standard_normal((p + 1, p)))
        worst = max(worst, float(np.max(np.abs(cartan_projection(phi) - cartan_oracle(phi)))))
    ok = ray_res <= 1e-12 and worst <= 1e-10
    return CheckReport(f"symspace[p={p}]", ok, max(ray_res, worst), n_trials,
                       [("model_ray_residual", ray_res), ("cartan_oracle_residual", worst)])


def check_flags(p: int, seed: int, n_trials: int = 500) -> CheckReport:
    """rank_one -> points_toward_ein -> decompose returns the pair up to sign."""
    space = QuadraticSpace(p)
    round_trip, qres = 0.0, 0.0
    for i in range(n_trials):
        rng = sample_rng(seed, TAG_FLAGS, p, i)
        base = random_point(p, rng) if i % 2 else basepoint(space)
        u = unit_gaussian(rng, p) @ base.pos
        z = unit_gaussian(rng, p + 1) @ base.neg
        ell = points_toward_ein(TangentMap.rank_one(base, u, z))
        u2, z2 = decompose(ell, base)
        err = min(np.linalg.norm(u2 - u) + np.linalg.norm(z2 - z), np.linalg.norm(u2 + u) + np.linalg.norm(z2 + z))
        round_trip = max(round_trip, float(err))
        qres = max(qres, abs(q_eval(space, u2, u2) - 1.0), abs(q_eval(space, z2, z2) + 1.0))
    ok = round_trip <= 1e-10 and qres <= 1e-10
    return CheckReport(f"flags[p={p}]", ok, max(round_trip, qres), n_trials,
                       [("round_trip", round_trip), ("q_normalisation", qres)])


def check_hitchin(p: int, seed: int, n_pairs: int = 200, n_conj: int = 50) -> CheckReport:
    hom = 0.0
    for i in range(n_pairs):
        rng = sample_rng(seed, TAG_HOM, p, i)
        g, h = random_sl2(rng), random_sl2(rng)
        hom = max(hom, float(np.linalg.norm(principal_embed(g @ h, p) - principal_embed(g, p) @ principal_embed(h, p))))
    rep = fuchsian_hitchin(p)
    relator = rep.relator_residual()
    gens = fuchsian_genus2()
    sl2_rel = sl2_relator_residual(gens)
    hyperbolic = all(abs(np.trace(g.m)) > 2 for g in gens)
    equi, oracle = 0.0, 0.0
    lam = 2.0
    for i in range(n_conj):
        rng = sample_rng(seed, TAG_EQUI, p, i)
        k = random_sl2(rng, 0.3)
        g_sl2 = k @ np.diag([lam, 1 / lam]) @ np.linalg.inv(k)
        g = principal_embed(g_sl2, p)
        h = principal_embed(random_sl2(rng, 0.3), p)
        t1 = limit_plane(h @ g @ np.linalg.inv(h)).basis
        t2 = (h @ limit_plane(g).basis.T).T
        equi = max(equi, subspace_distance(t1, t2))
        # independent routes: eigenvectors of eta(g), and the SL2 eigenline
        w, v = np.linalg.eig(g)
        top = v[:, np.argsort(-np.abs(w))[:p]].real.T
        vec = k[:, 0]
        ang = np.mod(np.arctan2(vec[1], vec[0]), np.pi)
        oracle = max(oracle, subspace_distance(limit_plane(g).basis, top),
                     subspace_distance(limit_plane(g).basis, flag_from_angle(ang, p)))
    ok = hom <= 1e-9 and relator <= 1e-6 and sl2_rel <= 1e-8 and hyperbolic and equi <= 1e-8 and oracle <= 1e-8
    return CheckReport(f"hitchin[p={p}]", ok, max(hom, relator, equi, oracle), n_pairs,
                       [("homomorphism", hom), ("relator_embedded", relator), ("relator_sl2", sl2_rel),
                        ("generators_hyperbolic", hyperbolic), ("equivariance", equi), ("eigen_oracle", oracle)])


def check_regularity(p: int, t_steps: int, dir_steps: int, tol: float) -> CheckReport:
    m, (t, th) = regularity_sweep(HiggsPencilFamily(p), t_steps, dir_steps)
    return CheckReport(f"regularity[p={p}]", m > tol, m, t_steps * dir_steps,
                       [("min_margin", m), ("argmin_t", t), ("argmin_theta", th), ("tolerance", tol)])


def check_base(p: int, seed: int, n_u: int, n_lines: int, tol: float = 1e-10) -> CheckReport:
    """dim R_u, base membership of samples, and the metric-orthogonality oracle."""
    details = []
    worst_member = 0.0
    dims_ok = True
    disagreements = 0
    for t in (0.0, 1.0):
        pen = pencil_at(HiggsPencilFamily(p), t)
        pts = base_sample(pen, n_u, 1, seed)
        for s in pts:
            uc = pen.base.coords_p(s.u)
            r = np.array([g.matrix @ uc for g in pen.gens])
            dims_ok &= np.linalg.matrix_rank(r, tol=1e-9 * np.linalg.norm(r)) == 2
            dims_ok &= r_perp_coords(pen, uc).shape[0] == p - 1
            worst_member = max(worst_member, membership_residual(pen, s.ell))
        for i in range(n_lines):
            rng = sample_rng(seed, TAG_LINES, p, i)
            if i % 2:
                ell = pts[i % len(pts)].ell
            else:
                u = unit_gaussian(rng, p) @ pen.base.pos
                z = unit_gaussian(rng, p + 1) @ pen.base.neg
                ell = EinPoint(pen.base.space, u + z)
            member = membership_residual(pen, ell) <= tol
            u, v = decompose(ell, pen.base)
            x = TangentMap.rank_one(pen.base, u, v)
            orth = max(abs(metric(x, g)) for g in pen.gens) <= tol
            disagreements += member != orth
    ok = bool(dims_ok) and worst_member <= tol and disagreements == 0
    details += [("dims_ok", bool(dims_ok)), ("membership_residual", worst_member), ("oracle_disagreements", disagreements)]
    return CheckReport(f"base[p={p}]", ok, worst_member, 2 * n_u, details)


def check_domain(p: int, seed: int, word_length: int, n_base: int, tol: float,
                 gap_threshold: float = DEFAULT_GAP_THRESHOLD) -> CheckReport:
    """Base samples of the basepoint pencil avoid every sampled thickening."""
    pen = basepoint_pencil(p)
    pts = base_sample(pen, n_base, 1, seed)
    samples = sample_limit_set(fuchsian_hitchin(p), word_length, gap_threshold)
    reps = np.array([s.ell.rep for s in pts])
    mins = samples.residual_table(reps, reduce=True)
    violations = int(np.sum(mins <= tol))
    # a line inside a sampled plane must be excluded
    witness = samples[len(samples) // 2].flag.basis[0]
    control = samples.residual_table(witness, reduce=True)[0] <= tol
    ok = violations == 0 and control
    return CheckReport(f"domain[p={p}]", ok, violations, len(pts), [
        ("violations", violations), ("min_residual", float(mins.min())), ("n_flags", len(samples)),
        ("n_words", samples.n_words), ("n_skipped", samples.n_skipped), ("word_length", word_length),
        ("witness_excluded", bool(control)),
    ])


def check_chern(equator_steps: int) -> CheckReport:
    n, raw = chern_number_p3(equator_steps, return_raw=True)
    taut, _ = clutching_winding(tautological_fiber_fn, TAUTOLOGICAL_J, equator_steps)
    triv, _ = clutching_winding(trivial_fiber_fn, TAUTOLOGICAL_J, equator_steps)
    ok = n == 0 and abs(raw) <= 0.01 and abs(taut) == 1 and triv == 0
    return CheckReport("chern[p=3]", ok, abs(raw), equator_steps,
                       [("winding", n), ("raw", raw), ("tautological", taut), ("trivial", triv)])
