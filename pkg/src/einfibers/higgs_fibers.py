"""The single-fiber Higgs model: deformed nilpotent fields, their pencils,
the complex structures J, and numerical certificates for the identities
behind the fiber topology.

Complex coordinates carry the weights k = p, p-1, ..., -p (array position
p - k).  The nilpotent N_t lowers the weight by one; its arrow k -> k-1
carries 1 or t.  The real locus is {x : x_{-k} = conj(x_k)}; the U part
(weights k = p-1 mod 2) is the spacelike plane P and the V part is P^perp.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError, InvariantViolation, PreconditionError, StepSizeError
from .pencils import Pencil, base_sample, pencil_regular, r_perp_coords
from .pseudo_core import QuadraticSpace, null_space, sample_rng, subspace_distance, unit_gaussian
from .report import CheckReport
from .symspace import DEFAULT_REGULARITY_TOL, TangentMap, basepoint

IDENTITY_TOL = 1e-10
_REALITY_TOL = 1e-12


def arrow_pattern(p: int) -> list[bool]:
    """For each arrow k -> k-1 (k = p..-p+1): True if it carries t, False if 1."""
    out = []
    for k in range(p, -p, -1):
        if p % 2:
            deformed = k > 0 if k % 2 == 0 else k < 0
        else:
            # even: odd k >= 1 and even k <= 0 carry t
            deformed = k >= 1 if k % 2 else k <= 0
        out.append(deformed)
    return out


@dataclass(frozen=True)
class HiggsPencilFamily:
    """The deformation t -> N_t of the principal nilpotent.

    ``weights="unit"`` sets every nonzero entry to 1 or t.  ``"principal"``
    uses the entries of the principal lowering operator (so t = 1 is exactly
    the tangent of the principal hyperbolic plane) and realises the model in
    the compact weight frame of the principal embedding.  ``sabotage`` zeros
    the outermost arrows for every t.
    """

    p: int
    weights: str = "unit"
    sabotage: bool = False

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 3:
            raise InputError("p >= 3 required; p = 2 treated in prior work")
        if self.weights not in ("unit", "principal"):
            raise InputError("weights must be 'unit' or 'principal'")

    @property
    def parity(self) -> str:
        return "odd" if self.p % 2 else "even"

    @property
    def grading(self) -> tuple:
        return tuple(range(self.p, -self.p - 1, -1))

    @property
    def u_weights(self) -> tuple:
        return tuple(k for k in self.grading if (k - self.p + 1) % 2 == 0)

    @property
    def v_weights(self) -> tuple:
        return tuple(k for k in self.grading if (k - self.p + 1) % 2)

    def arrow_weights(self, t: float) -> np.ndarray:
        if not 0.0 <= t <= 1.0:
            raise InputError("t must lie in [0, 1]")
        w = np.array([t if d else 1.0 for d in arrow_pattern(self.p)])
        if self.weights == "principal":
            from .hitchin import principal_weights

            w = w * principal_weights(self.p)
        if self.sabotage:
            w[0] = w[-1] = 0.0
        return w

    def nilpotent(self, t: float) -> np.ndarray:
        """N_t as a (2p+1) x (2p+1) complex matrix with subdiagonal entries."""
        return np.diag(self.arrow_weights(t).astype(complex), -1)

    nilpotent_pattern = nilpotent

    @cached_property
    def chart(self) -> "RealLocusChart":
        return RealLocusChart(self.p)

    @cached_property
    def model_frame(self) -> np.ndarray:
        """Unitary F carrying complex weight coordinates to the model R^{p,p+1}."""
        if self.weights == "principal":
            from .hitchin import compact_weight_basis

            return compact_weight_basis(self.p)
        base = basepoint(QuadraticSpace(self.p))
        return np.vstack([base.pos, base.neg]).T @ self.chart.w.conj().T


class RealLocusChart:
    """Real form {(z_p, ..., z_1, r, conj(z_1), ..., conj(z_p))} with adapted bases.

    Columns of ``w`` are h-orthonormal real-locus vectors: for each k > 0
    the pair (e_k + e_-k)/sqrt2, i(e_k - e_-k)/sqrt2, plus the centre e_0.
    The U columns come first (p of them), then the V columns; when the
    centre belongs to V it is the last column.
    """

    def __init__(self, p: int):
        self.p = p
        n = 2 * p + 1
        pos = {k: p - k for k in range(p, -p - 1, -1)}
        r = 1 / np.sqrt(2.0)

        def cols(parity):
            out = []
            for k in range(p, 0, -1):
                if (k - p + 1) % 2 == parity:
                    a = np.zeros(n, complex)
                    b = np.zeros(n, complex)
                    a[pos[k]] = a[pos[-k]] = r
                    b[pos[k]], b[pos[-k]] = 1j * r, -1j * r
                    out += [a, b]
            if (0 - p + 1) % 2 == parity:
                e = np.zeros(n, complex)
                e[p] = 1.0
                out.append(e)
            return out

        self.w = np.array(cols(0) + cols(1)).T
        self.n = n

    @property
    def w_u(self) -> np.ndarray:
        return self.w[:, : self.p]

    @property
    def w_v(self) -> np.ndarray:
        return self.w[:, self.p :]

    def conjugation(self, x: np.ndarray) -> np.ndarray:
        """The defining antilinear involution x_k -> conj(x_{-k})."""
        return np.conj(np.asarray(x)[::-1])

    def contains(self, x, tol: float = _REALITY_TOL) -> bool:
        x = np.asarray(x, dtype=complex)
        return bool(np.max(np.abs(x - self.conjugation(x))) <= tol * max(1.0, np.max(np.abs(x))))

    def project(self, x) -> np.ndarray:
        """Real-linear projection onto the real locus."""
        x = np.asarray(x, dtype=complex)
        return 0.5 * (x + self.conjugation(x))

    def real_coords(self, x) -> np.ndarray:
        c = self.w.conj().T @ np.asarray(x, dtype=complex)
        if np.max(np.abs(c.imag)) > _REALITY_TOL * max(1.0, np.max(np.abs(c))):
            raise InvariantViolation("vector is off the real locus")
        return c.real

    def from_real(self, c) -> np.ndarray:
        return self.w @ np.asarray(c, dtype=float)

    def real_matrix(self, a: np.ndarray) -> np.ndarray:
        """Real matrix of a real-locus preserving complex endomorphism."""
        m = self.w.conj().T @ a @ self.w
        if np.max(np.abs(m.imag)) > _REALITY_TOL * max(1.0, np.max(np.abs(m))):
            raise InvariantViolation("endomorphism does not preserve the real locus")
        return m.real


def psi_complex(fam: HiggsPencilFamily, t: float, z: complex) -> np.ndarray:
    n_t = fam.nilpotent(t)
    return z * n_t + np.conj(z) * n_t.conj().T


def _check_unit(z):
    z = complex(z)
    if abs(abs(z) - 1.0) > 1e-12:
        raise InputError("z must have modulus 1")
    return z


def psi_chart(fam: HiggsPencilFamily, t: float, z: complex) -> np.ndarray:
    """Real (p+1) x p matrix of psi_z from U^R to V^R in chart coordinates."""
    z = _check_unit(z)
    m = fam.chart.real_matrix(psi_complex(fam, t, z))
    p = fam.p
    scale = max(1.0, np.max(np.abs(m)))
    if max(np.max(np.abs(m[:p, :p])), np.max(np.abs(m[p:, p:]))) > _REALITY_TOL * scale:
        raise InvariantViolation("psi does not swap U and V")
    return m[p:, :p]


def build_psi(fam: HiggsPencilFamily, t: float, z: complex) -> TangentMap:
    """psi_z = z N_t + conj(z) N_t^H as a tangent map at the model basepoint."""
    z = _check_unit(z)
    f = fam.model_frame
    a = f @ psi_complex(fam, t, z) @ f.conj().T
    scale = max(1.0, np.max(np.abs(a)))
    if np.max(np.abs(a.imag)) > _REALITY_TOL * scale:
        raise InvariantViolation("psi does not preserve the real locus")
    base = basepoint(QuadraticSpace(fam.p))
    a = a.real
    # diagonal blocks in the adapted frame must vanish
    blk = base.frame_inverse() @ a @ base.frame()
    p = fam.p
    if max(np.max(np.abs(blk[:p, :p])), np.max(np.abs(blk[p:, p:]))) > _REALITY_TOL * scale:
        raise InvariantViolation("psi does not swap P and P^perp")
    return TangentMap.from_endomorphism(base, a)


def pencil_at(fam: HiggsPencilFamily, t: float) -> Pencil:
    a, b = build_psi(fam, t, 1.0), build_psi(fam, t, 1j)
    return Pencil(a.base, [a, b])


def coupled_blocks(fam: HiggsPencilFamily, t: float) -> list[tuple]:
    """Weight groups coupled by the nonzero arrows of N_t (the block structure of psi)."""
    w = fam.arrow_weights(t)
    blocks, cur = [], [fam.p]
    for k, wk in zip(range(fam.p, -fam.p, -1), w):
        if wk != 0:
            cur.append(k - 1)
        else:
            blocks.append(tuple(cur))
            cur = [k - 1]
    blocks.append(tuple(cur))
    return blocks


def regularity_sweep(fam: HiggsPencilFamily, t_steps: int = 33, dir_steps: int = 64):
    """Min of sigma_p / sigma_1 over the (t, theta) grid, with its location."""
    if t_steps < 2 or dir_steps < 8:
        raise InputError("t_steps >= 2 and dir_steps >= 8 required")
    ts = np.linspace(0.0, 1.0, t_steps)
    th = np.pi * np.arange(dir_steps) / dir_steps
    best, where = np.inf, (0.0, 0.0)
    for t in ts:
        a, b = psi_chart(fam, t, 1.0), psi_chart(fam, t, 1j)
        mats = np.cos(th)[:, None, None] * a + np.sin(th)[:, None, None] * b
        s = np.linalg.svd(mats, compute_uv=False)
        margins = np.where(s[:, 0] > 0, s[:, -1] / np.maximum(s[:, 0], 1e-300), 0.0)
        i = int(np.argmin(margins))
        if margins[i] < best:
            best, where = float(margins[i]), (float(t), float(th[i]))
    return best, where


# --- complex structures -------------------------------------------------------


def _exact(m: np.ndarray) -> np.ndarray:
    r = np.rint(m)
    if np.max(np.abs(m - r)) > 1e-12:
        raise InvariantViolation("J is not a signed permutation in the chart")
    return r + 0.0


@dataclass(frozen=True, eq=False)
class ComplexStructureJ:
    """J as a real matrix.

    odd: acts on V^R (P^perp), (p+1) x (p+1).
    even: acts on E/O = U^R + (V^R without the centre), block diagonal
    J_U + J_V, each p x p.
    """

    parity: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        k = m.shape[0]
        if not np.array_equal(m @ m, -np.eye(k)):
            raise InvariantViolation("J^2 != -I")
        if not np.array_equal(m.T @ m, np.eye(k)):
            raise InvariantViolation("J is not orthogonal")
        if self.parity == "even":
            h = k // 2
            if np.any(m[:h, h:]) or np.any(m[h:, :h]):
                raise InvariantViolation("J mixes the P and P^perp parts of the quotient")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def j_u(self) -> np.ndarray:
        if self.parity != "even":
            raise PreconditionError("J acts on U only in the even case")
        return self.matrix[: len(self.matrix) // 2, : len(self.matrix) // 2]

    @property
    def j_v(self) -> np.ndarray:
        if self.parity == "odd":
            return self.matrix
        h = len(self.matrix) // 2
        return self.matrix[h:, h:]


def j_diagonal(fam: HiggsPencilFamily) -> np.ndarray:
    """Diagonal of J on complex weight coordinates (0 where J is undefined)."""
    ks = np.array(fam.grading)
    if fam.parity == "odd":
        d = np.where(ks > 0, -1j, 1j)
        return np.where(np.isin(ks, fam.v_weights), d, 0)
    return np.where(ks > 0, 1j, np.where(ks < 0, -1j, 0))


def build_J(fam: HiggsPencilFamily) -> ComplexStructureJ:
    chart = fam.chart
    full = chart.real_matrix(np.diag(j_diagonal(fam)))
    p = fam.p
    if fam.parity == "odd":
        return ComplexStructureJ("odd", _exact(full[p:, p:]))
    # drop the centre coordinate, the last V column
    keep = list(range(2 * p))
    return ComplexStructureJ("even", _exact(full[np.ix_(keep, keep)]))


# --- identity suites -------------------------------------------------------------


def _orth(rows: np.ndarray) -> np.ndarray:
    u, s, vt = np.linalg.svd(np.atleast_2d(rows), full_matrices=False)
    return vt[s > 1e-9 * s[0]]


def _invariance(j: np.ndarray, basis: np.ndarray) -> float:
    """||(I - Pi) J Pi|| for the subspace with orthonormal rows ``basis``."""
    img = basis @ j.T
    return float(np.linalg.norm(img - (img @ basis.T) @ basis, 2))


def _sample_u_z(rng, p):
    uc = unit_gaussian(rng, p)
    z = np.exp(2j * np.pi * rng.uniform())
    return uc, z


def verify_odd_identities(p: int, n_samples: int = 1000, seed: int = 42, t: float = 0.0) -> CheckReport:
    """J-holomorphicity of psi and J-invariance of R_u and R_u^perp (odd p).

    At t = 0 every residual is an exact identity; ``t`` is exposed so the
    failure at t = 1 can be exhibited.
    """
    if p % 2 == 0 or p < 3:
        raise InputError("odd p >= 3 required")
    fam = HiggsPencilFamily(p)
    j = build_J(fam).j_v
    m1, mi = psi_chart(fam, t, 1.0), psi_chart(fam, t, 1j)
    res = {"holomorphic": 0.0, "J(R)=R": 0.0, "J(Rperp)=Rperp": 0.0, "q-unitary": 0.0}
    res["q-unitary"] = float(np.max(np.abs(j.T @ j - np.eye(p + 1))))
    for i in range(n_samples):
        uc, z = _sample_u_z(sample_rng(seed, i), p)
        mz = z.real * m1 + z.imag * mi
        miz = (1j * z).real * m1 + (1j * z).imag * mi
        res["holomorphic"] = max(res["holomorphic"], float(np.linalg.norm(j @ (mz @ uc) - miz @ uc)))
        r = _orth(np.array([m1 @ uc, mi @ uc]))
        rp = null_space(np.array([m1 @ uc, mi @ uc]))
        res["J(R)=R"] = max(res["J(R)=R"], _invariance(j, r))
        res["J(Rperp)=Rperp"] = max(res["J(Rperp)=Rperp"], _invariance(j, rp))
    worst = max(res.values())
    return CheckReport(
        f"odd_identities[p={p}]",
        worst <= IDENTITY_TOL,
        worst,
        n_samples,
        [(k, v) for k, v in res.items()] + [("t", float(t)), ("status", "identity-verified, topology cited" if p >= 5 else "identity-verified")],
    )


def verify_even_identities(p: int, n_samples: int = 1000, seed: int = 42, t: float = 0.0) -> CheckReport:
    """Commutation J psi = psi J and the subspace identities of the even case.

    Quotient coordinates E/O drop the centre, which is the last V column of
    the chart.
    """
    if p % 2 or p < 4:
        raise InputError("even p >= 4 required")
    fam = HiggsPencilFamily(p)
    jst = build_J(fam)
    ju, jv = jst.j_u, jst.j_v
    m1, mi = psi_chart(fam, t, 1.0), psi_chart(fam, t, 1j)
    keys = ["J psi = psi J", "O in Rperp", "R_u = R_w", "Rperp/O = psi([u]perp)", "x-perp splitting", "section norm"]
    res = dict.fromkeys(keys, 0.0)
    for i in range(n_samples):
        rng = sample_rng(seed, i)
        uc, z = _sample_u_z(rng, p)
        mz = z.real * m1 + z.imag * mi
        # (a) in E/O: drop the centre row
        res[keys[0]] = max(res[keys[0]], float(np.linalg.norm(jv @ (mz[:-1] @ uc) - mz[:-1] @ (ju @ uc))))
        # (b) the centre direction is q-orthogonal to R_u
        res[keys[1]] = max(res[keys[1]], float(max(abs(m1[-1] @ uc), abs(mi[-1] @ uc))))
        # (c) R_w for w in the complex span of u
        a = rng.uniform(0, 2 * np.pi)
        wc = np.cos(a) * uc + np.sin(a) * (ju @ uc)
        ru = _orth(np.array([m1 @ uc, mi @ uc]))
        rw = _orth(np.array([m1 @ wc, mi @ wc]))
        res[keys[2]] = max(res[keys[2]], subspace_distance(ru, rw))
        # (d) R^perp / O against psi([u]_C^perp), psi = psi_z
        rp = null_space(np.array([m1 @ uc, mi @ uc]))[:, :-1]
        rp_q = _orth(rp)
        uperp = null_space(np.array([uc, ju @ uc]))
        img = _orth((mz[:-1] @ uperp.T).T)
        res[keys[3]] = max(res[keys[3]], subspace_distance(rp_q, img))
        # (e) x^perp = R Jx + [x]_C^perp inside U^R, and |(x, Jx)| = sqrt2 |x|
        x = uc
        split = np.vstack([ju @ x, uperp])
        res[keys[4]] = max(res[keys[4]], subspace_distance(split, null_space(x[None, :])), abs(float(x @ (ju @ x))))
        sec = np.concatenate([x, ju @ x])
        res[keys[5]] = max(res[keys[5]], abs(np.linalg.norm(sec) - np.sqrt(2.0) * np.linalg.norm(x)))
    worst = max(res.values())
    return CheckReport(f"even_identities[p={p}]", worst <= IDENTITY_TOL, worst, n_samples, list(res.items()) + [("t", float(t))])


# --- clutching / Chern number ----------------------------------------------------


def _sphere(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta) * np.ones_like(phi)], axis=-1)


def _transport(fiber_fn, thetas, phi):
    start = fiber_fn(_sphere(thetas[0], phi[:1]))[0, 0]
    f = np.tile(start, (len(phi), 1))
    for th in thetas[1:]:
        b = fiber_fn(_sphere(th, phi))
        c = np.einsum("bkn,bn->bk", b, f)
        f = np.einsum("bk,bkn->bn", c, b)
        nrm = np.linalg.norm(f, axis=1)
        if np.min(nrm) < 0.5:
            raise StepSizeError("frame transport lost rank; use more latitude steps")
        f /= nrm[:, None]
    return f


def clutching_winding(fiber_fn, j: np.ndarray, equator_steps: int, lat_steps: int = 64):
    """Winding number of the transition function of a complex line bundle over S^2.

    ``fiber_fn`` maps an (m, 3) array of unit vectors to (m, 2, n) orthonormal
    bases of J-invariant real 2-planes.  Frames are carried from each pole
    to the equator by projection between neighbouring fibres; the
    transition function compares them along the equator.  Returns
    (integer winding, raw winding sum).
    """
    if equator_steps < 8 or lat_steps < 2:
        raise InputError("too few steps")
    phi = 2 * np.pi * np.arange(equator_steps) / equator_steps
    f_n = _transport(fiber_fn, np.linspace(0.0, np.pi / 2, lat_steps + 1), phi)
    f_s = _transport(fiber_fn, np.linspace(np.pi, np.pi / 2, lat_steps + 1), phi)
    g = np.einsum("bn,bn->b", f_s, f_n) + 1j * np.einsum("bn,bn->b", f_s, f_n @ j.T)
    if np.min(np.abs(g)) < 0.5:
        raise StepSizeError("equatorial frames are not in a common complex line")
    d = np.angle(np.roll(g, -1) / g)
    if np.max(np.abs(d)) > np.pi / 4:
        raise StepSizeError("equatorial phase step too large; use more equator steps")
    raw = float(np.sum(d) / (2 * np.pi))
    n = int(round(raw))
    if abs(raw - n) > 0.01:
        raise InvariantViolation(f"winding sum {raw} is not near an integer")
    return n, raw


def higgs_fiber_fn(fam: HiggsPencilFamily, t: float = 0.0):
    """R_u^perp (V^R coordinates) as a function of u on the unit sphere of U^R."""
    if fam.p != 3:
        raise PreconditionError("the sphere parametrisation needs dim U = 3")
    m1, mi = psi_chart(fam, t, 1.0), psi_chart(fam, t, 1j)

    def fn(u):
        rows = np.stack([u @ m1.T, u @ mi.T], axis=1)
        _, _, vt = np.linalg.svd(rows)
        return vt[:, 2:, :]

    return fn


def tautological_fiber_fn(u):
    """+1 eigenline of u . sigma in C^2, realified as (Re a, Im a, Re b, Im b)."""
    x, y, z = u[:, 0], u[:, 1], u[:, 2]
    up = z >= 0
    a = np.where(up, 1 + z, x - 1j * y)
    b = np.where(up, x + 1j * y, 1 - z)
    nrm = np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2)
    a, b = a / nrm, b / nrm

    def real(a, b):
        return np.stack([a.real, a.imag, b.real, b.imag], axis=1)

    return np.stack([real(a, b), real(1j * a, 1j * b)], axis=1)


TAUTOLOGICAL_J = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)


def trivial_fiber_fn(u):
    e = np.zeros((len(u), 2, 4))
    e[:, 0, 0] = e[:, 1, 1] = 1.0
    return e


def chern_number_p3(equator_steps: int = 4096, lat_steps: int = 64, return_raw: bool = False):
    """Winding of the clutching function of (R^perp, J) for the p = 3 family at t = 0."""
    if equator_steps < 256:
        raise InputError("equator_steps >= 256 required")
    fam = HiggsPencilFamily(3)
    n, raw = clutching_winding(higgs_fiber_fn(fam), build_J(fam).j_v, equator_steps, lat_steps)
    return (n, raw) if return_raw else n


# --- deformation path -------------------------------------------------------------


def deformation_path_check(fam: HiggsPencilFamily, t_steps: int = 33, n_dirs: int = 64,
                           tol: float = DEFAULT_REGULARITY_TOL, n_u: int = 20, n_fiber: int = 5,
                           seed: int = 42) -> CheckReport:
    """Regularity at every grid t and constant fiber dimension at t = 0, 1/2, 1."""
    if t_steps < 2:
        raise InputError("t_steps >= 2 required")
    ts = np.linspace(0.0, 1.0, t_steps)
    margins = []
    first_bad = None
    for t in ts:
        ok, m = pencil_regular(pencil_at(fam, t), n_dirs, tol)
        margins.append(m)
        if not ok and first_bad is None:
            first_bad = float(t)
    dims = []
    if first_bad is None:
        for t in (0.0, 0.5, 1.0):
            pen = pencil_at(fam, t)
            pts = base_sample(pen, n_u, n_fiber, seed, check_regular=False)
            fiber_dims = {r_perp_coords(pen, pen.base.coords_p(s.u)).shape[0] - 1 for s in pts[::n_fiber]}
            dims.append(sorted(fiber_dims))
    constant = first_bad is None and all(d == [fam.p - 2] for d in dims)
    details = [("min_margin", float(min(margins))), ("fiber_dims", [d[0] if len(d) == 1 else d for d in dims])]
    if first_bad is not None:
        details.append(("first_irregular_t", first_bad))
    return CheckReport(
        f"deformation_path[p={fam.p}{',sabotaged' if fam.sabotage else ''}]",
        constant,
        0.0 if constant else 1.0,
        t_steps,
        details,
    )
