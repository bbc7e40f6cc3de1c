"""The pseudo-Euclidean space R^{p,p+1} in its anti-diagonal model basis.

Vectors are plain numpy arrays of length ``2p+1``; subspaces store an explicit
basis as the rows of a ``(k, 2p+1)`` array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, PreconditionError

# Eigenvalues / singular values below REL_ZERO * (largest magnitude) count as zero.
REL_ZERO = 1e-9


def model_form(p: int) -> np.ndarray:
    """Anti-diagonal Gram matrix: ones on the anti-diagonal, -1 at the centre."""
    n = 2 * p + 1
    q = np.fliplr(np.eye(n))
    q[p, p] = -1.0
    return q


class QuadraticSpace:
    """R^{2p+1} with the model form of signature (p, p+1)."""

    def __init__(self, p: int):
        if int(p) != p or p < 2:
            raise InputError(f"p must be an integer >= 2, got {p!r}")
        self.p = int(p)
        self.form_matrix = model_form(self.p)
        self.form_matrix.setflags(write=False)

    def __repr__(self):
        return f"QuadraticSpace(p={self.p})"

    @property
    def dim(self) -> int:
        return 2 * self.p + 1

    def __eq__(self, other):
        return isinstance(other, QuadraticSpace) and other.p == self.p

    def __hash__(self):
        return hash(("QuadraticSpace", self.p))

    def basis_vector(self, i: int) -> np.ndarray:
        """The model basis vector e_i, 1-indexed as in the usual notation."""
        e = np.zeros(self.dim)
        e[i - 1] = 1.0
        return e

    def full(self) -> "Subspace":
        return Subspace(self, np.eye(self.dim))


def _check_vector(space: QuadraticSpace, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (space.dim,):
        raise InputError(f"expected a vector of length {space.dim}, got shape {v.shape}")
    return v


def q_eval(space: QuadraticSpace, v, w) -> float:
    """Bilinear form q(v, w) = v^T [q] w."""
    v = _check_vector(space, v)
    w = _check_vector(space, w)
    q = space.form_matrix
    # float addition commutes, so this is bitwise symmetric in (v, w)
    return float(0.5 * (np.dot(v, q @ w) + np.dot(w, q @ v)))


def gram(space: QuadraticSpace, rows: np.ndarray) -> np.ndarray:
    return rows @ space.form_matrix @ rows.T


@dataclass(frozen=True, eq=False)
class Subspace:
    space: QuadraticSpace
    basis: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.size == 0:
            b = np.zeros((0, self.space.dim))
        if b.shape[1] != self.space.dim:
            raise InputError(f"basis vectors must have length {self.space.dim}")
        if b.shape[0]:
            s = np.linalg.svd(b, compute_uv=False)
            if s[-1] <= REL_ZERO * s[0]:
                raise InputError("basis vectors are linearly dependent")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim_sub(self) -> int:
        return self.basis.shape[0]

    def gram(self) -> np.ndarray:
        return gram(self.space, self.basis)

    def orthonormal(self) -> np.ndarray:
        """Euclidean orthonormal basis (rows) of the same span."""
        if self.dim_sub == 0:
            return self.basis
        u, _, _ = np.linalg.svd(self.basis.T, full_matrices=False)
        return u.T

    def projector(self) -> np.ndarray:
        o = self.orthonormal()
        return o.T @ o

    def contains(self, v, tol: float = 1e-8) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.linalg.norm(v - self.projector() @ v) <= tol)


def signature(sub: Subspace) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_null) of q restricted to ``sub``."""
    if sub.dim_sub == 0:
        return (0, 0, 0)
    ev = np.linalg.eigvalsh(sub.gram())
    scale = np.max(np.abs(ev))
    if scale == 0.0:
        return (0, 0, sub.dim_sub)
    cut = REL_ZERO * scale
    n_plus = int(np.sum(ev > cut))
    n_minus = int(np.sum(ev < -cut))
    return (n_plus, n_minus, sub.dim_sub - n_plus - n_minus)


def null_space(a: np.ndarray) -> np.ndarray:
    """Rows spanning the kernel of ``a`` (relative rank cut REL_ZERO)."""
    a = np.atleast_2d(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > REL_ZERO * s[0])) if s.size and s[0] > 0 else 0
    return vt[rank:]


def orthogonal_complement(sub: Subspace) -> Subspace:
    """{w : q(w, v) = 0 for all v in sub}."""
    if sub.dim_sub == 0:
        return sub.space.full()
    return Subspace(sub.space, null_space(sub.basis @ sub.space.form_matrix))


def definite_frame(sub: Subspace, sign: int) -> np.ndarray:
    """Rows forming a basis of ``sub`` with Gram matrix ``sign * I``.

    Raises PreconditionError unless q|sub is definite of the requested sign.
    """
    g = sign * sub.gram()
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise PreconditionError(
            f"q restricted to the subspace is not {'positive' if sign > 0 else 'negative'} definite"
        ) from None
    ev = np.linalg.eigvalsh(g)
    if ev[0] <= REL_ZERO * ev[-1]:
        raise PreconditionError("q restricted to the subspace is degenerate")
    return np.linalg.solve(chol, sub.basis)


def sample_rng(seed: int, *index: int) -> np.random.Generator:
    """Generator keyed on (seed, index...) only; independent of call order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, index)]))


def unit_gaussian(rng: np.random.Generator, k: int) -> np.ndarray:
    """Standard-normal draw normalised to the unit sphere S^{k-1}."""
    while True:
        g = rng.standard_normal(k)
        nrm = np.linalg.norm(g)
        if nrm > 1e-12:
            return g / nrm


def sphere_sample(sub: Subspace, sign: int, count: int, seed: int) -> list[np.ndarray]:
    """Vectors v in ``sub`` with q(v, v) = sign, uniform for the definite metric.

    Sample i depends only on (seed, i).
    """
    if sign not in (1, -1):
        raise InputError("sign must be +1 or -1")
    if count < 0:
        raise InputError("count must be non-negative")
    frame = definite_frame(sub, sign)
    return [unit_gaussian(sample_rng(seed, i), frame.shape[0]) @ frame for i in range(count)]


def canonical_sign(v: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Flip ``v`` so that its first non-negligible coordinate is positive."""
    v = np.asarray(v, dtype=float)
    big = np.abs(v) > tol * np.max(np.abs(v)) if v.size else np.zeros(0, bool)
    if not big.any():
        return v.copy()
    return v.copy() if v[np.argmax(big)] > 0 else -v


def subspace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Spectral-norm distance between orthogonal projectors onto row spans."""
    def proj(m):
        m = np.atleast_2d(m)
        if m.shape[0] == 0:
            return np.zeros((m.shape[1], m.shape[1]))
        u, s, _ = np.linalg.svd(m.T, full_matrices=False)
        r = int(np.sum(s > REL_ZERO * s[0])) if s[0] > 0 else 0
        u = u[:, :r]
        return u @ u.T
    return float(np.linalg.norm(proj(a) - proj(b), 2))
