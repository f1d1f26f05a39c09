"""Pure-NumPy reference implementations of the hot kernels.

Every function here takes stacked inputs (leading batch axis) and returns
plain ``ndarray`` results.  The numba backend mirrors these signatures
exactly; results agree to floating-point roundoff (summation orders differ,
so the last bits may not be bitwise identical across backends).
"""

from __future__ import annotations

import numpy as np

available = True

__all__ = [
    "available",
    "born_probs",
    "choose_outcomes",
    "row_quadratic",
    "proj_unitary",
    "proj_orthogonal",
    "proj_symplectic",
    "twirl1_accum",
]


def born_probs(v: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Measurement-basis outcome probabilities ``p[n, w] = (V_n rho V_n^†)[w, w]``.

    Parameters
    ----------
    v : (B, d, d) complex ndarray
        Batch of rotation matrices.
    rho : (d, d) complex ndarray
        Density matrix.

    Returns
    -------
    (B, d) float ndarray
    """
    return np.einsum("nwa,ab,nwb->nw", v, rho, v.conj(), optimize=True).real


def choose_outcomes(probs: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling of one outcome index per row.

    ``uniforms`` must be i.i.d. on [0, 1); the outcome for row ``n`` is the
    smallest ``w`` with ``cumsum(probs[n])[w] >= uniforms[n]``.
    """
    cum = np.cumsum(probs, axis=1)
    idx = np.argmax(cum >= uniforms[:, None], axis=1)
    # Roundoff can leave the total marginally below the drawn uniform; the
    # final bin absorbs that sliver.
    short = cum[:, -1] < uniforms
    if np.any(short):
        idx = np.where(short, probs.shape[1] - 1, idx)
    return idx.astype(np.int64)


def row_quadratic(rows: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-row quadratic form ``Re(<row_n| X |row_n>)``.

    Parameters
    ----------
    rows : (B, d) complex ndarray
    x : (d, d) complex ndarray (Hermitian in normal use)
    """
    return np.einsum("na,ab,nb->n", rows, x, rows.conj(), optimize=True).real


def proj_unitary(v: np.ndarray) -> np.ndarray:
    """Per-sample inner products with the unitary-parent delta basis.

    Columns correspond to the basis tensors
    ``[delta(a,b)delta(i,j), delta(a,i)delta(b,j), delta4(a,b,i,j)]``
    contracted against the sample's rank-one moment contribution.
    """
    a2 = np.abs(v) ** 2
    ynorm = (a2.sum(axis=2) ** 2).sum(axis=1)
    ydeph = (a2**2).sum(axis=(1, 2))
    return np.stack([ynorm, ynorm, ydeph], axis=1)


def proj_orthogonal(v: np.ndarray) -> np.ndarray:
    """Like :func:`proj_unitary` with the extra ``delta(a,j)delta(b,i)`` column."""
    a2 = np.abs(v) ** 2
    ynorm = (a2.sum(axis=2) ** 2).sum(axis=1)
    yswap = (np.abs((v**2).sum(axis=2)) ** 2).sum(axis=1)
    ydeph = (a2**2).sum(axis=(1, 2))
    return np.stack([ynorm, ynorm, yswap, ydeph], axis=1)


def proj_symplectic(v: np.ndarray, jperm: np.ndarray, jsign: np.ndarray) -> np.ndarray:
    """Projections onto the six-term symplectic-parent delta basis.

    ``jperm[a]`` is the symplectic partner of index ``a`` and ``jsign[a]``
    the sign of the form entry coupling ``a`` to its partner.
    """
    a2 = np.abs(v) ** 2
    ynorm = (a2.sum(axis=2) ** 2).sum(axis=1)
    form = (jsign[None, None, :] * v * v[:, :, jperm]).sum(axis=2)
    yform = (np.abs(form) ** 2).sum(axis=1)
    ydeph = (a2**2).sum(axis=(1, 2))
    ypair = (a2 * a2[:, :, jperm]).sum(axis=(1, 2))
    return np.stack([ynorm, ynorm, yform, ydeph, ypair, ypair], axis=1)


def twirl1_accum(v: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch sums for the first-order twirl ``V A V^†``.

    Returns
    -------
    total : (d, d) complex ndarray
        ``sum_n V_n A V_n^†``.
    total_sqmag : (d, d) float ndarray
        ``sum_n |(V_n A V_n^†)_{ij}|^2`` (for entrywise standard errors).
    """
    prods = np.einsum("nij,jk,nlk->nil", v, a, v.conj(), optimize=True)
    return prods.sum(axis=0), (np.abs(prods) ** 2).sum(axis=0)
