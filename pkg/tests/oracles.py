"""Independent reference computations used by the tests.

Nothing here calls the routine it is meant to check.
"""

from math import comb

import numpy as np


def binomial_weight_action(m, p):
    """Sym^{2p} action on x^{2p-i} y^i by explicit binomial expansion."""
    (a, b), (c, d) = m
    n = 2 * p
    out = np.zeros((n + 1, n + 1))
    for j in range(n + 1):
        for r in range(n - j + 1):
            for s in range(j + 1):
                out[r + s, j] += comb(n - j, r) * a ** (n - j - r) * c**r * comb(j, s) * b ** (j - s) * d**s
    return out


def classical_pairing(p):
    """The sl2-invariant pairing on binary forms: m_j . m_{2p-j} = (-1)^j / C(2p, j)."""
    n = 2 * p
    b = np.zeros((n + 1, n + 1))
    for j in range(n + 1):
        b[j, n - j] = (-1) ** j / comb(n, j)
    return b


def cartan_by_svd(matrix):
    """Cartan projection as singular values of the tangent-map matrix."""
    return np.linalg.svd(np.asarray(matrix), compute_uv=False)


def cartan_by_ambient_eigs(a, p):
    """Top p real parts of the eigenvalues of the ambient matrix A_phi."""
    ev = np.sort(np.linalg.eigvals(a).real)[::-1]
    return np.maximum(ev[:p], 0.0)


def hermitian_margin(psi):
    """sigma_p / sigma_1 of the U->V block from the spectrum of the full Hermitian psi.

    psi swaps two summands of dimensions p and p+1, so its eigenvalues are
    +-sigma_i together with one zero.
    """
    n = psi.shape[0]
    p = (n - 1) // 2
    ev = np.sort(np.abs(np.linalg.eigvalsh(psi)))[::-1]
    return ev[2 * p - 1] / ev[0]


def principal_weight_formula(p):
    """Entries of the lowering operator of an irreducible sl2 module of dim 2p+1."""
    return np.sqrt([j * (2 * p + 1 - j) for j in range(1, 2 * p + 1)])


def words_up_to(mats, length):
    """All reduced words (as products) up to the given length, levelwise."""
    letters = []
    for g in mats:
        letters += [g, np.linalg.inv(g)]
    letters = np.array(letters)
    inverse = [1, 0, 3, 2, 5, 4, 7, 6]
    prods, last = letters.copy(), list(range(8))
    out = [prods]
    for _ in range(length - 1):
        nxt, nlast = [], []
        for m, l in zip(prods, last):
            for c in range(8):
                if c != inverse[l]:
                    nxt.append(m @ letters[c])
                    nlast.append(c)
        prods, last = np.array(nxt), nlast
        out.append(prods)
    return out
