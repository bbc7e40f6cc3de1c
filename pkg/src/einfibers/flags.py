"""Isotropic lines (Einstein universe) and isotropic p-planes."""

from __future__ import annotations

import numpy as np

from .errors import InputError, InvariantViolation
from .pseudo_core import QuadraticSpace, Subspace, canonical_sign, gram
from .symspace import SpacelikePoint

DEFAULT_CONTAINMENT_TOL = 1e-8
_NULL_TOL = 1e-10
_ISOTROPY_TOL = 1e-9


class EinPoint:
    """An isotropic line [rep]; rep has unit Euclidean norm and canonical sign."""

    __slots__ = ("space", "rep")

    def __init__(self, space: QuadraticSpace, vector):
        v = np.asarray(vector, dtype=float)
        if v.shape != (space.dim,):
            raise InputError(f"expected a vector of length {space.dim}")
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise InputError("zero vector does not span a line")
        rep = canonical_sign(v / nrm)
        if abs(rep @ space.form_matrix @ rep) > _NULL_TOL:
            raise InputError("vector is not isotropic")
        rep.setflags(write=False)
        self.space = space
        self.rep = rep

    def __repr__(self):
        return f"EinPoint({np.array2string(self.rep, precision=4)})"


class IsotropicFlag:
    """A totally isotropic p-plane T (q|T == 0)."""

    __slots__ = ("sub",)

    def __init__(self, sub: Subspace):
        if sub.dim_sub != sub.space.p:
            raise InputError(f"an isotropic flag is a {sub.space.p}-plane")
        o = sub.orthonormal()
        if np.max(np.abs(gram(sub.space, o))) > _ISOTROPY_TOL:
            raise InputError("plane is not totally isotropic")
        self.sub = Subspace(sub.space, o)

    @property
    def space(self) -> QuadraticSpace:
        return self.sub.space

    @property
    def basis(self) -> np.ndarray:
        """Euclidean-orthonormal rows spanning T."""
        return self.sub.basis

    def isotropy_residual(self) -> float:
        return float(np.max(np.abs(gram(self.space, self.basis))))


def containment_residual(ell: EinPoint, t: IsotropicFlag) -> float:
    x = ell.rep
    b = t.basis
    return float(np.linalg.norm(x - b.T @ (b @ x)))


def in_thickening(ell: EinPoint, t: IsotropicFlag, tol: float = DEFAULT_CONTAINMENT_TOL) -> bool:
    """True iff the line ell lies in T."""
    if ell.space != t.space:
        raise InputError("ambient spaces differ")
    return containment_residual(ell, t) <= tol


def _split(ell: EinPoint, base: SpacelikePoint):
    x = ell.rep
    u = base.coords_p(x) @ base.pos
    return u, x - u


def fibration_project(ell: EinPoint, base: SpacelikePoint) -> Subspace:
    """The line pi_P(ell) inside P (q-orthogonal projection)."""
    u, _ = _split(ell, base)
    if np.linalg.norm(u) < 1e-12:
        raise InvariantViolation("isotropic line projected to zero in a spacelike p-plane")
    return Subspace(base.space, u)


def decompose(ell: EinPoint, base: SpacelikePoint) -> tuple[np.ndarray, np.ndarray]:
    """Write ell = [u + z] with q(u,u) = 1 on P and q(z,z) = -1 on P^perp.

    The pair is unique up to (u, z) -> (-u, -z); the returned u has its first
    non-negligible coordinate positive.
    """
    u, z = _split(ell, base)
    qu = float(base.coords_p(u) @ base.coords_p(u))
    if qu < 1e-24:
        raise InvariantViolation("isotropic line projected to zero in a spacelike p-plane")
    zc = base.coords_perp(z)
    # normalise separately so roundoff in q(rep, rep) does not leak into either norm
    u = u / np.sqrt(qu)
    z = z / np.sqrt(float(zc @ zc))
    cu = canonical_sign(u)
    if not np.array_equal(cu, u):
        u, z = -u, -z
    return u, z
