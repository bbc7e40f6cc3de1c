"""Fuchsian-Hitchin representations into SO0(p, p+1).

The principal embedding is the action of SL(2,R) on the degree-2p binary
forms, conjugated by a diagonal change of basis so that the invariant form
becomes the model anti-diagonal form.  A genus-2 Fuchsian group comes from
the side pairings of the regular hyperbolic octagon with interior angles pi/4.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import schur

from .errors import InputError, InvariantViolation, ProximalityError
from .flags import DEFAULT_CONTAINMENT_TOL, EinPoint, IsotropicFlag
from .pseudo_core import QuadraticSpace, Subspace, model_form, null_space, subspace_distance
from .symspace import SpacelikePoint, TangentMap, basepoint

log = logging.getLogger(__name__)

DEFAULT_GAP_THRESHOLD = 0.5
DEDUP_FLAG_DISTANCE = 1e-6

SL2_H = np.array([[1.0, 0.0], [0.0, -1.0]])
SL2_S = np.array([[0.0, 1.0], [1.0, 0.0]])
SL2_ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
SL2_E = np.array([[0.0, 1.0], [0.0, 0.0]])
SL2_F = np.array([[0.0, 0.0], [1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class SL2Element:
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (2, 2):
            raise InputError("SL2 element must be 2x2")
        if abs(np.linalg.det(m) - 1.0) > 1e-12:
            raise InputError(f"determinant {np.linalg.det(m)!r} is not 1")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __matmul__(self, other: "SL2Element") -> "SL2Element":
        return SL2Element(self.m @ other.m)

    def inverse(self) -> "SL2Element":
        a, b, c, d = self.m.ravel()
        return SL2Element(np.array([[d, -b], [-c, a]]))


# --- principal embedding --------------------------------------------------


def _weight_action(m: np.ndarray, p: int) -> np.ndarray:
    """Action on Sym^{2p}(R^2) in the monomial basis x^{2p-j} y^j."""
    (a, b), (c, d) = m
    n = 2 * p
    out = np.zeros((n + 1, n + 1))
    for j in range(n + 1):
        col = npoly.polymul(npoly.polypow([a, c], n - j), npoly.polypow([b, d], j))
        out[: len(col), j] = col
    return out


def _weight_derivative(x: np.ndarray, p: int) -> np.ndarray:
    """Derivative of the monomial-basis action at the identity."""
    n = 2 * p
    out = np.zeros((n + 1, n + 1))
    for j in range(n + 1):
        out[j, j] += (n - j) * x[0, 0] + j * x[1, 1]
        if j < n:
            out[j + 1, j] += (n - j) * x[1, 0]
        if j > 0:
            out[j - 1, j] += j * x[0, 1]
    return out


@lru_cache(maxsize=None)
def invariant_form_weight_basis(p: int) -> np.ndarray:
    """Symmetric form on Sym^{2p} preserved by sl2, sign-normalised.

    Solved from the linear invariance system X^T B + B X = 0 over the sl2
    triple; scaled so the central weight has B < 0, which gives signature
    (p, p+1).
    """
    n = 2 * p + 1
    idx = [(i, j) for i in range(n) for j in range(i, n)]
    gens = [_weight_derivative(x, p) for x in (SL2_E, SL2_F, SL2_H)]
    cols = []
    for i, j in idx:
        s = np.zeros((n, n))
        s[i, j] = s[j, i] = 1.0
        cols.append(np.concatenate([(x.T @ s + s @ x).ravel() for x in gens]))
    kernel = null_space(np.array(cols).T)
    if kernel.shape[0] != 1:
        raise InvariantViolation(f"invariant form not unique (kernel dim {kernel.shape[0]})")
    b = np.zeros((n, n))
    for (i, j), val in zip(idx, kernel[0]):
        b[i, j] = b[j, i] = val
    b /= abs(b[p, p])
    if b[p, p] > 0:
        b = -b
    return b


@lru_cache(maxsize=None)
def _intertwiner(p: int) -> np.ndarray:
    """Diagonal S with S^{-T} B S^{-1} equal to the model form."""
    b = invariant_form_weight_basis(p)
    n = 2 * p
    s = np.zeros(n + 1)
    for j in range(p):
        bj = b[j, n - j]
        s[j] = np.sqrt(abs(bj))
        s[n - j] = np.sign(bj) * np.sqrt(abs(bj))
    s[p] = np.sqrt(-b[p, p])
    return s


def principal_embed(g, p: int) -> np.ndarray:
    """eta(g) in SO0(p, p+1), in the model basis."""
    m = g.m if isinstance(g, SL2Element) else np.asarray(g, dtype=float)
    s = _intertwiner(p)
    return (s[:, None] * _weight_action(m, p)) / s[None, :]


def principal_derivative(x: np.ndarray, p: int) -> np.ndarray:
    """d(eta) at the identity applied to x in sl2, in the model basis."""
    s = _intertwiner(p)
    return (s[:, None] * _weight_derivative(np.asarray(x, dtype=float), p)) / s[None, :]


@lru_cache(maxsize=None)
def _rotation_eig(p: int):
    """Eigen-data of d(eta)(rotation generator); it is antisymmetric."""
    d = principal_derivative(SL2_ROT, p)
    if np.max(np.abs(d + d.T)) > 1e-10:
        raise InvariantViolation("principal rotation generator is not orthogonal in the model basis")
    lam, v = np.linalg.eigh(1j * d)
    return lam, v


def principal_rotation(theta, p: int) -> np.ndarray:
    """eta(R_theta) for an angle or array of angles; R_theta rotates by theta."""
    lam, v = _rotation_eig(p)
    th = np.asarray(theta, dtype=float)
    ph = np.exp(-1j * th[..., None] * lam)
    out = np.einsum("ik,...k,jk->...ij", v, ph, v.conj())
    return out.real


def compact_weight_basis(p: int) -> np.ndarray:
    """Complex columns f_k (k = p..-p) diagonalising the principal rotation.

    d(eta)(R) f_k = -2ik f_k; phases are fixed so that the lowering operator
    N = d(eta)(H - iS)/2 has positive entries f_k -> f_{k-1}, f_0 is real,
    and f_{-k} = conj(f_k).
    """
    lam, v = _rotation_eig(p)
    # i D f = lam f with D f = -2ik f  =>  lam = 2k
    top = v[:, np.argmin(np.abs(lam - 2 * p))]
    low = 0.5 * (principal_derivative(SL2_H, p) - 1j * principal_derivative(SL2_S, p))
    cols = [top]
    for _ in range(2 * p):
        w = low @ cols[-1]
        cols.append(w / np.linalg.norm(w))
    f = np.array(cols).T
    c0 = f[:, p]
    phase = c0[np.argmax(np.abs(c0))] / abs(c0[np.argmax(np.abs(c0))])
    return f / phase


def principal_weights(p: int) -> np.ndarray:
    """Entries of the lowering operator in the compact weight basis."""
    f = compact_weight_basis(p)
    low = 0.5 * (principal_derivative(SL2_H, p) - 1j * principal_derivative(SL2_S, p))
    return np.array([abs(np.vdot(f[:, j + 1], low @ f[:, j])) for j in range(2 * p)])


def basepoint_pencil(p: int):
    """Tangent plane at P0 of the totally geodesic principal hyperbolic plane."""
    from .pencils import Pencil

    P0 = basepoint(QuadraticSpace(p))
    gens = [TangentMap.from_endomorphism(P0, principal_derivative(x, p)) for x in (SL2_H, SL2_S)]
    return Pencil(P0, gens)


# --- genus-2 Fuchsian group -------------------------------------------------


def _disk_rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, s], [-s, c]])


def _side_pairing(i: int, j: int) -> np.ndarray:
    """Isometry of the regular pi/4-octagon carrying side i onto side j."""
    r_in = np.arccosh(1.0 / np.tan(np.pi / 8))
    t = np.diag([np.exp(r_in), np.exp(-r_in)])
    return _disk_rotation(j * np.pi / 4) @ t @ _disk_rotation(np.pi - i * np.pi / 4)


def _to_sl2(m: np.ndarray) -> SL2Element:
    return SL2Element(m / np.sqrt(np.linalg.det(m)))


def fuchsian_genus2() -> list[SL2Element]:
    """Generators a1, b1, a2, b2 with [a1,b1][a2,b2] = +-I.

    Sides of the octagon, read counter-clockwise, carry the labels
    a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1.
    """
    return [
        _to_sl2(_side_pairing(2, 0)),
        _to_sl2(_side_pairing(1, 3)),
        _to_sl2(_side_pairing(6, 4)),
        _to_sl2(_side_pairing(5, 7)),
    ]


def commutator_relator(m):
    a1, b1, a2, b2 = m
    inv = np.linalg.inv
    return a1 @ b1 @ inv(a1) @ inv(b1) @ a2 @ b2 @ inv(a2) @ inv(b2)


def sl2_relator_residual(gens: list[SL2Element]) -> float:
    r = commutator_relator([g.m for g in gens])
    eye = np.eye(2)
    return float(min(np.linalg.norm(r - eye), np.linalg.norm(r + eye)))


@dataclass(frozen=True, eq=False)
class HitchinRep:
    p: int
    gens: tuple
    gen_sl2: tuple

    def __post_init__(self):
        q = model_form(self.p)
        for g, h in zip(self.gens, self.gen_sl2):
            scale = max(1.0, float(np.max(np.abs(g))))
            if np.max(np.abs(g.T @ q @ g - q)) > 1e-12 * scale**2:
                raise InvariantViolation("generator does not preserve the model form")
            if np.max(np.abs(g - principal_embed(h, self.p))) > 1e-12 * scale:
                raise InvariantViolation("generator is not the principal image of its SL2 source")
        if self.relator_residual() > 1e-6:
            raise InvariantViolation("surface relator not satisfied")

    def relator_residual(self) -> float:
        """||eta(r) - I|| for the surface relator r evaluated in SL2.

        Multiplying the embedded generators directly loses about
        ||eta(prefix)|| * ||eta(suffix)|| ulps, which exceeds 1 for p >= 5
        on the octagon group, so the word is reduced before embedding.
        """
        r = commutator_relator([h.m for h in self.gen_sl2])
        return float(np.linalg.norm(principal_embed(r, self.p) - np.eye(2 * self.p + 1)))

    def direct_relator_residual(self) -> float:
        """Relator residual of the embedded generators, relative to the roundoff scale."""
        q = model_form(self.p)
        inv = [q @ g.T @ q for g in self.gens]
        seq = [self.gens[0], self.gens[1], inv[0], inv[1], self.gens[2], self.gens[3], inv[2], inv[3]]
        acc = np.eye(2 * self.p + 1)
        scale = 0.0
        for i, g in enumerate(seq):
            acc = acc @ g
            rest = np.eye(2 * self.p + 1)
            for h in seq[i + 1 :]:
                rest = rest @ h
            scale = max(scale, np.linalg.norm(acc, 2) * np.linalg.norm(rest, 2))
        return float(np.linalg.norm(acc - np.eye(2 * self.p + 1)) / scale)

    @property
    def space(self) -> QuadraticSpace:
        return QuadraticSpace(self.p)


def fuchsian_hitchin(p: int) -> HitchinRep:
    sl2 = fuchsian_genus2()
    return HitchinRep(p, tuple(principal_embed(g, p) for g in sl2), tuple(sl2))


# --- limit maps --------------------------------------------------------------


def limit_plane(g: np.ndarray, gap_threshold: float = DEFAULT_GAP_THRESHOLD) -> IsotropicFlag:
    """Attracting isotropic p-plane of g: the span of its p dominant eigenvectors.

    The basis comes from a sorted real Schur form, which stays backward
    stable when ||g|| is large.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    p = (n - 1) // 2
    mods = np.sort(np.abs(np.linalg.eigvals(g)))[::-1]
    if mods[p] == 0 or mods[p - 1] / mods[p] <= 1.0 + gap_threshold:
        raise ProximalityError(
            f"eigenvalue ratio {mods[p - 1] / max(mods[p], 1e-300):.6g} does not exceed {1 + gap_threshold}"
        )
    cut = np.sqrt(mods[p - 1] * mods[p])
    _, z, sdim = schur(g, output="real", sort=lambda re, im: np.hypot(re, im) > cut)
    if sdim != p:
        raise ProximalityError(f"dominant invariant subspace has dimension {sdim}, expected {p}")
    basis = z[:, :p].T
    resid = np.linalg.norm(g @ basis.T - basis.T @ (basis @ g @ basis.T), 2)
    if resid > 1e-8 * np.linalg.norm(g, 2):
        raise InvariantViolation("computed plane is not g-invariant")
    return IsotropicFlag(Subspace(QuadraticSpace(p), basis))


def flag_from_angle(theta, p: int) -> np.ndarray:
    """Orthonormal rows of xi(theta) = eta(R_theta) . span(e_1..e_p).

    For a hyperbolic g in SL2 with attracting eigenline at angle theta, this
    is the attracting plane of eta(g); it depends on theta alone.
    """
    r = principal_rotation(theta, p)
    return np.swapaxes(r[..., :, :p], -1, -2)


@dataclass(frozen=True, eq=False)
class BoundarySample:
    word: tuple
    flag: IsotropicFlag
    gap: float
    angle: float = float("nan")


# letters: a1, a1^-1, b1, b1^-1, a2, a2^-1, b2, b2^-1; inverse(c) = c ^ 1
_N_LETTERS = 8


def letter_to_signed(c: int) -> int:
    return (c // 2 + 1) * (-1 if c % 2 else 1)


def _allowed(last: int) -> list[int]:
    return [c for c in range(_N_LETTERS) if c != (last ^ 1)]


def decode_word(length: int, index: int) -> tuple:
    """Word at position ``index`` of the lexicographic list of reduced words of ``length``."""
    digits = []
    for _ in range(length - 1):
        index, d = divmod(index, 7)
        digits.append(d)
    word = [index]
    for d in reversed(digits):
        word.append(_allowed(word[-1])[d])
    return tuple(letter_to_signed(c) for c in word)


def word_matrix(word, mats) -> np.ndarray:
    """Product of generator matrices along a signed word (SL2 or embedded)."""
    out = np.eye(mats[0].shape[0])
    for s in word:
        m = mats[abs(s) - 1]
        out = out @ (m if s > 0 else np.linalg.inv(m))
    return out


def _attracting_data(m: np.ndarray):
    """(gap, angle) of stacked 2x2 matrices.

    gap = lambda^2 - 1 where lambda is the dominant eigenvalue modulus, so the
    eigenvalue ratio of eta(m) between positions p and p+1 is 1 + gap; angle in
    [0, pi) locates the attracting eigenline.  Non-hyperbolic entries get gap 0.
    """
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    tr = a + d
    disc = tr * tr - 4.0
    hyp = disc > 0
    root = np.sqrt(np.where(hyp, disc, 0.0))
    lam = 0.5 * (np.abs(tr) + root) * np.sign(tr)
    v1 = np.stack([b, lam - a], axis=1)
    v2 = np.stack([lam - d, c], axis=1)
    use2 = np.linalg.norm(v2, axis=1) > np.linalg.norm(v1, axis=1)
    v = np.where(use2[:, None], v2, v1)
    angle = np.mod(np.arctan2(v[:, 1], v[:, 0]), np.pi)
    gap = np.where(hyp, lam * lam - 1.0, 0.0)
    return gap, angle


def _enumerate_attracting(gens_sl2, max_len: int, chunk: int = 1 << 17):
    """Per length: (gap, angle) arrays over reduced words in lexicographic order."""
    letters = []
    for g in gens_sl2:
        letters += [g.m, g.inverse().m]
    letters = np.array(letters)
    allowed = np.array([_allowed(c) for c in range(_N_LETTERS)])
    mats, last = letters.copy(), np.arange(_N_LETTERS)
    out = [_attracting_data(mats)]
    for length in range(2, max_len + 1):
        keep = length < max_len
        gaps, angles, new_mats, new_last = [], [], [], []
        for lo in range(0, len(mats), chunk):
            nxt = allowed[last[lo : lo + chunk]]
            child = np.einsum("kij,kljm->klim", mats[lo : lo + chunk], letters[nxt]).reshape(-1, 2, 2)
            g_, a_ = _attracting_data(child)
            gaps.append(g_)
            angles.append(a_)
            if keep:
                new_mats.append(child)
                new_last.append(nxt.ravel())
        out.append((np.concatenate(gaps), np.concatenate(angles)))
        if keep:
            mats, last = np.concatenate(new_mats), np.concatenate(new_last)
    return out


@lru_cache(maxsize=None)
def dedup_angle(p: int, flag_tol: float = DEDUP_FLAG_DISTANCE) -> float:
    """Largest angle separation whose planes are within ``flag_tol``.

    Flag distance between xi(a) and xi(b) depends on |a - b| only, since the
    rotation group acts by isometries of the model basis.
    """
    f0 = flag_from_angle(0.0, p)
    lo, hi = 0.0, 1e-3
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if subspace_distance(f0, flag_from_angle(mid, p)) <= flag_tol:
            lo = mid
        else:
            hi = mid
    return lo


def _dedup(angles: np.ndarray, ordinals: np.ndarray, delta: float) -> np.ndarray:
    """Ordinals kept after greedy merging of angle windows of width ``delta``.

    Windows are anchored left to right in angle order; each keeps its
    earliest word.  The result depends only on the data, not on how the
    words were produced.
    """
    if len(angles) == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.lexsort((ordinals, angles))
    a, o = angles[order], ordinals[order]
    nxt = np.searchsorted(a, a + delta, side="right").tolist()
    starts = []
    i, n = 0, len(a)
    while i < n:
        starts.append(i)
        i = nxt[i]
    starts = np.array(starts)
    reps = np.minimum.reduceat(o, starts)
    if len(starts) > 1 and a[0] + np.pi - a[starts[-1]] <= delta:
        # the window straddling angle 0 = pi
        reps = reps[1:] if reps[0] > reps[-1] else reps[:-1]
    return np.sort(reps)


class LimitSetSample(Sequence):
    """Deduplicated boundary samples, materialised lazily.

    Only angles, gaps and word ordinals are stored; ``self[i]`` builds the
    BoundarySample (and validates its flag) on demand.
    """

    def __init__(self, p, ordinals, angles, gaps, level_offsets, n_words, n_skipped, n_duplicates, max_word_length):
        self.p = p
        self.ordinals = ordinals
        self.angles = angles
        self.gaps = gaps
        self._offsets = level_offsets
        self.n_words = n_words
        self.n_skipped = n_skipped
        self.n_duplicates = n_duplicates
        self.max_word_length = max_word_length

    def __len__(self):
        return len(self.ordinals)

    def word(self, i: int) -> tuple:
        o = int(self.ordinals[i])
        length = int(np.searchsorted(self._offsets, o, side="right"))
        return decode_word(length, o - int(self._offsets[length - 1]))

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        basis = flag_from_angle(self.angles[i], self.p)
        flag = IsotropicFlag(Subspace(QuadraticSpace(self.p), basis))
        return BoundarySample(self.word(i), flag, float(self.gaps[i]), float(self.angles[i]))

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """Containment residual of unit vector x against every sampled plane."""
        return self.residual_table(np.atleast_2d(x))[:, 0]

    def residual_table(self, xs: np.ndarray, chunk: int = 4096, reduce: bool = False) -> np.ndarray:
        """Residuals of unit vectors xs (m, n) against every plane.

        The plane at angle theta is eta(R_theta) span(e_1..e_p) with
        eta(R_theta) orthogonal, so the residual is the norm of rows p.. of
        eta(R_-theta) x, a real trigonometric polynomial in theta evaluated
        here as one real matrix product per chunk.  With ``reduce`` only the
        per-line minimum is returned.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if reduce:
            return self._min_residuals(xs, chunk)
        return self._residuals_at(np.arange(len(self)), xs, chunk)

    def _coefficients(self, xs):
        lam, v = _rotation_eig(self.p)
        # coefficient of exp(i theta lam_j) in row r of line l
        return lam, np.einsum("rj,lj->jlr", v[self.p :], xs @ v.conj())

    def _residuals_at(self, idx, xs, chunk=4096):
        lam, c = self._coefficients(xs)
        m, k = xs.shape[0], self.p + 1
        c = c.reshape(len(lam), m * k)
        coef = np.vstack([c.real, -c.imag])
        out = np.empty((len(idx), m))
        for lo in range(0, len(idx), chunk):
            ph = self.angles[idx[lo : lo + chunk], None] * lam
            z = (np.hstack([np.cos(ph), np.sin(ph)]) @ coef).reshape(-1, m, k)
            out[lo : lo + chunk] = np.sqrt(np.einsum("cmk,cmk->cm", z, z))
        return out

    def _min_residuals(self, xs, chunk, exact_below: float = 1e-6):
        """Per-line minimum residual via the squared residual.

        The square is a trigonometric polynomial with only 4p + 1 real
        coefficients, so it is cheap to scan; its cancellation error near
        zero is removed by re-evaluating every (plane, line) pair with a
        small square through ``_residuals_at``.
        """
        lam, c = self._coefficients(xs)
        m = xs.shape[0]
        if np.max(np.abs(lam - np.rint(lam))) > 1e-9:
            raise InvariantViolation("rotation weights are not integers")
        # r^2 = sum_{j,i} G_ji exp(i theta (lam_j - lam_i)), grouped by frequency
        gram_ = np.einsum("jlr,ilr->lji", c, c.conj())
        diff = np.rint(lam[:, None] - lam[None, :]).astype(int)
        freqs = np.unique(np.abs(diff))
        cos_c = np.zeros((len(freqs), m))
        sin_c = np.zeros((len(freqs), m))
        for a, f in enumerate(freqs):
            s = gram_[:, diff == f].sum(axis=1)
            if f:
                s = s + gram_[:, diff == -f].sum(axis=1).conj()
            cos_c[a], sin_c[a] = s.real, -s.imag
        coef = np.vstack([cos_c, sin_c])
        best = np.full(m, np.inf)
        small = []
        for lo in range(0, len(self), chunk):
            ph = self.angles[lo : lo + chunk, None] * freqs
            r2 = np.hstack([np.cos(ph), np.sin(ph)]) @ coef
            best = np.minimum(best, r2.min(axis=0))
            hit = np.flatnonzero(r2.min(axis=1) < exact_below)
            if len(hit):
                small.append(lo + hit)
        out = np.sqrt(np.maximum(best, 0.0))
        if small:
            idx = np.concatenate(small)
            exact = self._residuals_at(idx, xs, chunk).min(axis=0)
            out = np.where(best < exact_below, exact, np.minimum(out, exact))
        return out


def sample_limit_set(
    rep: HitchinRep,
    max_word_length: int,
    gap_threshold: float = DEFAULT_GAP_THRESHOLD,
) -> LimitSetSample:
    """Attracting isotropic planes of all reduced words up to ``max_word_length``.

    Words are enumerated in (length, lexicographic) order over the alphabet
    a1, a1^-1, b1, b1^-1, a2, a2^-1, b2, b2^-1.  The plane of eta(w) is
    obtained from the attracting eigenline of w in SL2, which is exact for
    the principal representation and avoids the ill-conditioned eigenvectors
    of eta(w) for long words.  Words failing the gap test are skipped and
    counted; planes within 1e-6 of one another are merged, keeping the
    earliest word.
    """
    if max_word_length < 1:
        raise InputError("max_word_length must be >= 1")
    p = rep.p
    levels = _enumerate_attracting(rep.gen_sl2, max_word_length)
    gaps = np.concatenate([g for g, _ in levels])
    angles = np.concatenate([a for _, a in levels])
    del levels
    ok = gaps > gap_threshold
    n_skipped = int(np.sum(~ok))
    ordinals = np.flatnonzero(ok)
    kept = _dedup(angles[ordinals], ordinals, dedup_angle(p))
    sizes = [8 * 7 ** (k - 1) for k in range(1, max_word_length + 1)]
    offsets = np.cumsum([0] + sizes)
    if n_skipped:
        log.info("sample_limit_set: %d of %d words failed the gap test", n_skipped, len(gaps))
    return LimitSetSample(
        p,
        kept,
        angles[kept],
        gaps[kept],
        offsets,
        n_words=len(gaps),
        n_skipped=n_skipped,
        n_duplicates=len(ordinals) - len(kept),
        max_word_length=max_word_length,
    )


def containment_residuals(reps: np.ndarray, flag_bases: np.ndarray) -> np.ndarray:
    """(n_lines, n_flags) residuals of projecting each line onto each plane."""
    reps = np.atleast_2d(reps)
    coef = np.einsum("fkn,ln->lfk", flag_bases, reps)
    proj = np.einsum("lfk,fkn->lfn", coef, flag_bases)
    return np.linalg.norm(reps[:, None, :] - proj, axis=-1)


def domain_residual(ell: EinPoint, samples) -> float:
    """Smallest containment residual of ell over the samples (inf if none)."""
    if len(samples) == 0:
        return float("inf")
    if isinstance(samples, LimitSetSample):
        return float(samples.residual_table(ell.rep, reduce=True)[0])
    bases = np.array([s.flag.basis for s in samples])
    return float(containment_residuals(ell.rep, bases).min())


def in_domain(ell: EinPoint, samples, tol: float = DEFAULT_CONTAINMENT_TOL) -> bool:
    """True iff ell lies in none of the sampled thickenings.

    With finitely many boundary samples this is only a necessary condition
    for membership in the domain; a False verdict is exact.
    """
    return domain_residual(ell, samples) > tol
