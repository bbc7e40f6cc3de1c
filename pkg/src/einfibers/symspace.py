"""Points and tangent vectors of the symmetric space of SO0(p, p+1).

A point is a spacelike p-plane P.  A tangent vector at P is a linear map
P -> P^perp, stored as a (p+1) x p matrix with respect to the q-orthonormal
bases cached on the point (q = +1 on the P basis, q = -1 on the P^perp basis).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, PreconditionError
from .pseudo_core import (
    REL_ZERO,
    QuadraticSpace,
    Subspace,
    canonical_sign,
    definite_frame,
    gram,
    orthogonal_complement,
    signature,
)

DEFAULT_REGULARITY_TOL = 1e-6
_FRAME_TOL = 1e-10


class SpacelikePoint:
    """A spacelike p-plane together with adapted q-orthonormal bases."""

    def __init__(self, sub: Subspace):
        p = sub.space.p
        if sub.dim_sub != p:
            raise InputError(f"a point of the symmetric space is a {p}-plane, got dim {sub.dim_sub}")
        if signature(sub) != (p, 0, 0):
            raise PreconditionError("q restricted to the plane is not positive definite")
        self.space = sub.space
        self.sub = sub
        self.pos = definite_frame(sub, +1)
        self.neg = definite_frame(orthogonal_complement(sub), -1)
        self._freeze()

    @classmethod
    def from_frames(cls, space: QuadraticSpace, pos, neg) -> "SpacelikePoint":
        """Build a point from explicit bases of P and P^perp (validated)."""
        pos = np.asarray(pos, dtype=float)
        neg = np.asarray(neg, dtype=float)
        p = space.p
        if pos.shape != (p, space.dim) or neg.shape != (p + 1, space.dim):
            raise InputError("frame shapes must be (p, 2p+1) and (p+1, 2p+1)")
        f = np.vstack([pos, neg])
        d = np.diag([1.0] * p + [-1.0] * (p + 1))
        if np.max(np.abs(gram(space, f) - d)) > _FRAME_TOL:
            raise InputError("frames are not q-orthonormal with the required signs")
        self = cls.__new__(cls)
        self.space = space
        self.sub = Subspace(space, pos)
        self.pos = pos.copy()
        self.neg = neg.copy()
        self._freeze()
        return self

    def _freeze(self):
        self.pos.setflags(write=False)
        self.neg.setflags(write=False)

    @property
    def p(self) -> int:
        return self.space.p

    def frame(self) -> np.ndarray:
        """Columns: the P basis followed by the P^perp basis."""
        return np.vstack([self.pos, self.neg]).T

    def frame_inverse(self) -> np.ndarray:
        d = np.array([1.0] * self.p + [-1.0] * (self.p + 1))
        return (d[:, None] * self.frame().T) @ self.space.form_matrix

    def coords_p(self, v) -> np.ndarray:
        """Coordinates of the P-component of v in the P basis."""
        return self.pos @ self.space.form_matrix @ np.asarray(v, dtype=float)

    def coords_perp(self, w) -> np.ndarray:
        """Coordinates of the P^perp-component of w in the P^perp basis."""
        return -(self.neg @ self.space.form_matrix @ np.asarray(w, dtype=float))

    def same_frames(self, other: "SpacelikePoint", tol: float = 1e-12) -> bool:
        return (
            self is other
            or (
                self.space == other.space
                and np.max(np.abs(self.pos - other.pos)) <= tol
                and np.max(np.abs(self.neg - other.neg)) <= tol
            )
        )

    def act(self, g: np.ndarray) -> "SpacelikePoint":
        """g . P with freshly computed adapted bases."""
        return SpacelikePoint(Subspace(self.space, (g @ self.pos.T).T))

    def __repr__(self):
        return f"SpacelikePoint(p={self.p})"


def basepoint(space: QuadraticSpace) -> SpacelikePoint:
    """P0 = span(e_i + e_{2p+2-i}), with P0^perp = span(e_i - e_{2p+2-i}, e_{p+1})."""
    p, n = space.p, space.dim
    pos = np.zeros((p, n))
    neg = np.zeros((p + 1, n))
    r = 1 / np.sqrt(2.0)
    for i in range(p):
        pos[i, i] = pos[i, n - 1 - i] = r
        neg[i, i], neg[i, n - 1 - i] = r, -r
    neg[p, p] = 1.0
    return SpacelikePoint.from_frames(space, pos, neg)


@dataclass(frozen=True, eq=False)
class TangentMap:
    base: SpacelikePoint
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        p = self.base.p
        if m.shape != (p + 1, p):
            raise InputError(f"tangent map matrix must be ({p + 1}, {p}), got {m.shape}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_endomorphism(cls, base: SpacelikePoint, x: np.ndarray) -> "TangentMap":
        """The P -> P^perp block of an ambient endomorphism ``x``."""
        q = base.space.form_matrix
        return cls(base, -(base.neg @ q @ np.asarray(x, dtype=float) @ base.pos.T))

    @classmethod
    def rank_one(cls, base: SpacelikePoint, u, z) -> "TangentMap":
        """The map sending u to z and killing the q-orthogonal of u in P."""
        uc = base.coords_p(u)
        zc = base.coords_perp(z)
        return cls(base, np.outer(zc, uc) / float(uc @ uc))

    def apply(self, u) -> np.ndarray:
        return (self.matrix @ self.base.coords_p(u)) @ self.base.neg

    def pushforward(self, g: np.ndarray) -> "TangentMap":
        """The image tangent vector g . phi at g . P."""
        g = np.asarray(g, dtype=float)
        a = g @ embed_A(self) @ np.linalg.inv(g)
        return TangentMap.from_endomorphism(self.base.act(g), a)

    def __add__(self, other: "TangentMap") -> "TangentMap":
        _same_base(self, other)
        return TangentMap(self.base, self.matrix + other.matrix)

    def __mul__(self, c: float) -> "TangentMap":
        return TangentMap(self.base, float(c) * self.matrix)

    __rmul__ = __mul__


def _same_base(phi: TangentMap, psi: TangentMap):
    if not phi.base.same_frames(psi.base):
        raise InputError("tangent maps live at different base points")


def q_adjoint(phi: TangentMap) -> np.ndarray:
    """Matrix of phi^{*q}: P^perp -> P; equals -phi^T in the adapted bases."""
    return -phi.matrix.T


def metric(phi: TangentMap, psi: TangentMap) -> float:
    """g_P(phi, psi) = -tr(phi^{*q} psi)."""
    _same_base(phi, psi)
    return float(-np.trace(q_adjoint(phi) @ psi.matrix))


def block_A(phi: TangentMap) -> np.ndarray:
    """A_phi in the adapted frame P + P^perp (a symmetric matrix)."""
    p = phi.base.p
    a = np.zeros((2 * p + 1, 2 * p + 1))
    a[:p, p:] = -q_adjoint(phi)
    a[p:, :p] = phi.matrix
    return a


def embed_A(phi: TangentMap) -> np.ndarray:
    """A_phi = [[0, -phi^{*q}], [phi, 0]] expressed in ambient coordinates."""
    base = phi.base
    return base.frame() @ block_A(phi) @ base.frame_inverse()


def cartan_projection(phi: TangentMap) -> np.ndarray:
    """(mu_1 >= ... >= mu_p >= 0): the non-negative half of the spectrum of A_phi."""
    ev = np.linalg.eigvalsh(block_A(phi))[::-1]
    return np.maximum(ev[: phi.base.p], 0.0)


def numerical_rank(m: np.ndarray, rel_tol: float = REL_ZERO) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def points_toward_ein(phi: TangentMap, rel_tol: float = REL_ZERO):
    """The Einstein point phi points to, or None unless rank(phi) == 1."""
    from .flags import EinPoint

    if numerical_rank(phi.matrix, rel_tol) != 1:
        return None
    uvecs, _, vt = np.linalg.svd(phi.matrix)
    u = vt[0] @ phi.base.pos
    z = uvecs[:, 0] @ phi.base.neg
    # (u, z) and (-u, -z) name the same line; canonical u fixes the pair
    cu = canonical_sign(u)
    if not np.array_equal(cu, u):
        u, z = -u, -z
    return EinPoint(phi.base.space, u + z)


def regularity_margin(phi: TangentMap) -> float:
    """sigma_p / sigma_1 of the matrix of phi (0 for phi = 0)."""
    s = np.linalg.svd(phi.matrix, compute_uv=False)
    return 0.0 if s[0] == 0.0 else float(s[-1] / s[0])


def is_ein_regular(phi: TangentMap, tol: float = DEFAULT_REGULARITY_TOL) -> bool:
    if tol <= 0:
        raise InputError("tol must be positive")
    return regularity_margin(phi) > tol
