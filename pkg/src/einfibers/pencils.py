"""Pencils of tangent vectors and their base: the isotropic lines [u + v]
with u in Q+(P) and v a unit timelike vector orthogonal to psi(u) for every
psi in the pencil.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, InvariantViolation, PreconditionError
from .flags import EinPoint, decompose
from .pseudo_core import REL_ZERO, Subspace, canonical_sign, null_space, q_eval, sample_rng, unit_gaussian
from .symspace import DEFAULT_REGULARITY_TOL, SpacelikePoint, TangentMap, metric, regularity_margin

_MEMBERSHIP_TOL = 1e-10


class Pencil:
    """A d-plane of tangent maps at a common base point, 2 <= d <= p."""

    def __init__(self, base: SpacelikePoint, gens):
        gens = list(gens)
        d = len(gens)
        if not 2 <= d <= base.p:
            raise InputError(f"pencil dimension must lie in [2, {base.p}], got {d}")
        for g in gens:
            if not g.base.same_frames(base):
                raise InputError("pencil generators must live at the pencil base point")
        gm = self._gram(gens)
        scale = float(np.prod(np.diag(gm)))
        if scale <= 0 or np.linalg.det(gm) <= 1e-12 * scale:
            raise InputError("pencil generators are linearly dependent")
        self.base = base
        self.gens = gens

    @staticmethod
    def _gram(gens) -> np.ndarray:
        return np.array([[metric(a, b) for b in gens] for a in gens])

    @property
    def d(self) -> int:
        return len(self.gens)

    @property
    def p(self) -> int:
        return self.base.p

    def gram(self) -> np.ndarray:
        return self._gram(self.gens)

    def member(self, coeffs) -> TangentMap:
        return TangentMap(self.base, np.tensordot(np.asarray(coeffs, float), [g.matrix for g in self.gens], axes=1))

    def stacked(self) -> np.ndarray:
        """(d, p+1, p) array of generator matrices."""
        return np.array([g.matrix for g in self.gens])


def pencil_distance(a: Pencil, b: Pencil) -> float:
    """Distance between pencils as subspaces of (p+1) x p matrices (Frobenius)."""
    from .pseudo_core import subspace_distance

    if not a.base.same_frames(b.base):
        raise InputError("pencils live at different base points")
    return subspace_distance(a.stacked().reshape(a.d, -1), b.stacked().reshape(b.d, -1))


def _directions(d: int, n_dirs: int) -> np.ndarray:
    if d == 2:
        th = np.pi * np.arange(n_dirs) / n_dirs
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    return np.array([unit_gaussian(sample_rng(0, i), d) for i in range(n_dirs)])


def pencil_regular(pen: Pencil, n_dirs: int = 64, tol: float = DEFAULT_REGULARITY_TOL) -> tuple[bool, float]:
    """Sample the pencil directions and report (all rank p?, min sigma_p / sigma_1).

    For d = 2 the directions are cos(th) psi_1 + sin(th) psi_2 at n_dirs
    equally spaced th in [0, pi); larger pencils use seeded unit directions.
    """
    if n_dirs < 8:
        raise InputError("n_dirs must be >= 8")
    mats = np.tensordot(_directions(pen.d, n_dirs), pen.stacked(), axes=1)
    s = np.linalg.svd(mats, compute_uv=False)
    margins = np.where(s[:, 0] > 0, s[:, -1] / np.where(s[:, 0] > 0, s[:, 0], 1.0), 0.0)
    m = float(margins.min())
    return m > tol, m


def _unit_positive(pen: Pencil, u) -> np.ndarray:
    """P-coordinates of u after checking u lies on Q+(P)."""
    u = np.asarray(u, dtype=float)
    base = pen.base
    uc = base.coords_p(u)
    if np.linalg.norm(u - uc @ base.pos) > 1e-8 * max(1.0, np.linalg.norm(u)):
        raise PreconditionError("u does not lie in P")
    if abs(float(uc @ uc) - 1.0) > 1e-8:
        raise PreconditionError("q(u, u) != 1")
    return uc


def _r_coords(pen: Pencil, uc: np.ndarray) -> np.ndarray:
    """Rows psi_i(u) in the P^perp coordinates."""
    return pen.stacked() @ uc


def bundle_R(pen: Pencil, u) -> Subspace:
    """R_u = span{psi(u) : psi in the pencil} inside P^perp.

    A rank drop raises InvariantViolation; it cannot happen for an
    Ein-regular pencil.
    """
    uc = _unit_positive(pen, u)
    rows = _r_coords(pen, uc)
    s = np.linalg.svd(rows, compute_uv=False)
    if s[-1] <= REL_ZERO * s[0]:
        raise InvariantViolation(f"dim R_u dropped below {pen.d}")
    return Subspace(pen.base.space, rows @ pen.base.neg)


def r_perp_coords(pen: Pencil, uc: np.ndarray) -> np.ndarray:
    """Orthonormal rows (P^perp coordinates) spanning R_u^perp inside P^perp.

    On P^perp the form is minus the Euclidean product in these coordinates,
    so Euclidean orthogonality there is exactly q-orthogonality.
    """
    rows = _r_coords(pen, uc)
    s = np.linalg.svd(rows, compute_uv=False)
    if s[-1] <= REL_ZERO * s[0]:
        raise InvariantViolation(f"dim R_u dropped below {pen.d}")
    return null_space(rows)


def bundle_R_perp(pen: Pencil, u) -> Subspace:
    """The q-orthogonal complement of R_u inside P^perp."""
    uc = _unit_positive(pen, u)
    return Subspace(pen.base.space, r_perp_coords(pen, uc) @ pen.base.neg)


@dataclass(frozen=True, eq=False)
class BaseSamplePoint:
    u: np.ndarray
    v: np.ndarray
    ell: EinPoint
    u_index: int = 0
    fiber_index: int = 0

    def __post_init__(self):
        sp = self.ell.space
        if abs(q_eval(sp, self.u, self.u) - 1.0) > _MEMBERSHIP_TOL:
            raise InvariantViolation("q(u, u) != 1")
        if abs(q_eval(sp, self.v, self.v) + 1.0) > _MEMBERSHIP_TOL:
            raise InvariantViolation("q(v, v) != -1")


def base_sample(pen: Pencil, n_u: int, n_fiber: int, seed: int, check_regular: bool = True) -> list[BaseSamplePoint]:
    """Seeded points of the base of the pencil.

    u_i is drawn from stream (seed, i) and fiber point j of u_i from stream
    (seed, i, j), so any sample can be regenerated on its own.
    """
    if n_u < 0 or n_fiber < 0:
        raise InputError("sample counts must be non-negative")
    if check_regular:
        ok, margin = pencil_regular(pen)
        if not ok:
            raise PreconditionError(f"pencil is not Ein-regular (margin {margin:.3g})")
    base = pen.base
    p = base.p
    out = []
    for i in range(n_u):
        uc = unit_gaussian(sample_rng(seed, i), p)
        perp = r_perp_coords(pen, uc)
        if perp.shape[0] != p + 1 - pen.d:
            raise InvariantViolation("unexpected dimension of R_u^perp")
        r = _r_coords(pen, uc)
        for j in range(n_fiber):
            vc = unit_gaussian(sample_rng(seed, i, j), perp.shape[0]) @ perp
            u, v = uc @ base.pos, vc @ base.neg
            if not np.array_equal(canonical_sign(u), u):
                u, v = -u, -v
            if np.max(np.abs(r @ vc)) > _MEMBERSHIP_TOL:
                raise InvariantViolation("fiber point is not orthogonal to R_u")
            out.append(BaseSamplePoint(u, v, EinPoint(base.space, u + v), i, j))
    return out


def membership_residual(pen: Pencil, ell: EinPoint) -> float:
    """max_i |q(v, psi_i(u))| for ell = [u + v] decomposed at the pencil base."""
    if ell.space != pen.base.space:
        raise InputError("ambient spaces differ")
    u, v = decompose(ell, pen.base)
    return max(abs(q_eval(ell.space, v, g.apply(u))) for g in pen.gens)


def base_membership(pen: Pencil, ell: EinPoint, tol: float = _MEMBERSHIP_TOL) -> bool:
    return membership_residual(pen, ell) <= tol
