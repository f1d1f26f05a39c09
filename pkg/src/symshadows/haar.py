"""Haar sampling on the classical compact groups U(d), O(d), SO(d), SP(d).

All samplers follow the Ginibre + QR recipe: fill a matrix with i.i.d.
Gaussians, orthogonalize, and fix the gauge freedom of the factorization so
the result carries the group's Haar measure (Mezzadri, "How to generate
random matrices from the classical compact groups", Notices AMS 54 (2007)).
The symplectic sampler works in the quaternionic model: a quaternionic
Ginibre matrix is orthogonalized by a Gram-Schmidt pass that preserves the
quaternionic structure, which lands the result in SP(d) ⊂ U(d) exactly.

Every sampler accepts ``size=None`` for a single ``(d, d)`` matrix or an
integer ``size`` for a stacked ``(size, d, d)`` batch, and draws from a
:class:`numpy.random.Generator` (or anything :func:`symshadows.rng.as_generator`
accepts).
"""

from __future__ import annotations

import numpy as np

from .rng import as_generator

__all__ = [
    "ginibre",
    "haar_unitary",
    "haar_orthogonal",
    "haar_symplectic",
    "symplectic_form",
    "symplectic_pairing",
]


def _batch_shape(size: int | None, d: int) -> tuple[int, ...]:
    if size is None:
        return (d, d)
    if size < 1:
        raise ValueError(f"size must be a positive integer, got {size}")
    return (int(size), d, d)


def ginibre(kind: str, n: int, rng=None, size: int | None = None) -> np.ndarray:
    """Sample a Ginibre matrix with i.i.d. standard Gaussian entries.

    Parameters
    ----------
    kind : {'real', 'complex', 'quaternion'}
        Entry field.  ``real``: N(0,1) reals.  ``complex``: independent
        N(0, 1/2) real and imaginary parts (unit-variance complex entries).
        ``quaternion``: the 2n x 2n complex representation
        ``[[A, -conj(B)], [B, conj(A)]]`` with A, B complex Ginibre of size n.
    n : int
        Base dimension (the quaternion kind returns a ``2n x 2n`` matrix).
    rng : Generator, RngStream, int, or None
        Randomness source.
    size : int, optional
        Number of stacked samples.

    Returns
    -------
    ndarray
        ``(n, n)`` (or ``(2n, 2n)`` for quaternion kind), stacked when
        ``size`` is given.  Complex dtype except for ``kind='real'``.
    """
    gen = as_generator(rng)
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    nsamp = 1 if size is None else int(size)
    if kind == "real":
        z = gen.standard_normal((nsamp, n, n))
    elif kind == "complex":
        z = (
            gen.standard_normal((nsamp, n, n))
            + 1j * gen.standard_normal((nsamp, n, n))
        ) / np.sqrt(2.0)
    elif kind == "quaternion":
        a = (
            gen.standard_normal((nsamp, n, n))
            + 1j * gen.standard_normal((nsamp, n, n))
        ) / np.sqrt(2.0)
        b = (
            gen.standard_normal((nsamp, n, n))
            + 1j * gen.standard_normal((nsamp, n, n))
        ) / np.sqrt(2.0)
        z = np.empty((nsamp, 2 * n, 2 * n), dtype=np.complex128)
        z[:, :n, :n] = a
        z[:, :n, n:] = -b.conj()
        z[:, n:, :n] = b
        z[:, n:, n:] = a.conj()
    else:
        raise ValueError(f"unknown Ginibre kind {kind!r}")
    return z[0] if size is None else z


def haar_unitary(d: int, rng=None, size: int | None = None) -> np.ndarray:
    """Sample Haar-distributed unitaries from U(d).

    QR of a complex Ginibre matrix, with the R-diagonal phases divided out so
    the factorization is unique -- the standard correction that makes the
    distribution exactly Haar rather than merely left-invariant.

    Examples
    --------
    >>> u = haar_unitary(3, rng=0)
    >>> np.allclose(u.conj().T @ u, np.eye(3))
    True
    """
    gen = as_generator(rng)
    z = ginibre("complex", d, gen, size=size if size is not None else 1)
    q, r = np.linalg.qr(z)
    diag = np.einsum("...ii->...i", r).copy()
    # Guard against an exactly zero pivot (probability zero, but keep the
    # phase well-defined).
    diag[diag == 0] = 1.0
    q = q * (diag / np.abs(diag))[..., None, :]
    return q[0] if size is None else q


def haar_orthogonal(
    d: int, rng=None, special: bool = False, size: int | None = None
) -> np.ndarray:
    """Sample Haar-distributed real orthogonal matrices from O(d) or SO(d).

    Parameters
    ----------
    special : bool
        When True, condition on determinant +1 (Haar on SO(d)) by flipping
        the sign of the first column of draws with determinant -1.

    Returns
    -------
    ndarray
        Real ``float64`` matrices.
    """
    gen = as_generator(rng)
    z = ginibre("real", d, gen, size=size if size is not None else 1)
    q, r = np.linalg.qr(z)
    diag = np.einsum("...ii->...i", r).copy()
    diag[diag == 0] = 1.0
    q = q * np.sign(diag)[..., None, :]
    if special:
        flip = np.linalg.det(q) < 0
        q[flip, :, 0] *= -1.0
    return q[0] if size is None else q


def symplectic_form(d: int) -> np.ndarray:
    """The skew form J = [[0, -1], [1, 0]] in d/2-blocks defining SP(d).

    Conventions: ``U`` is symplectic iff ``U.T @ J @ U == J``; the partner of
    basis index ``i`` is ``i + d/2`` (mod d).
    """
    if d % 2:
        raise ValueError(f"symplectic form needs even dimension, got {d}")
    n = d // 2
    j = np.zeros((d, d))
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    return j


def symplectic_pairing(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Index map and signs of the symplectic form.

    Returns
    -------
    jperm : (d,) int64 ndarray
        Partner index ``a#`` of each basis index ``a``.
    jsign : (d,) float64 ndarray
        ``J[a, a#]`` (so ``-1`` for the first half, ``+1`` for the second).
    """
    if d % 2:
        raise ValueError(f"symplectic pairing needs even dimension, got {d}")
    n = d // 2
    jperm = np.concatenate([np.arange(n, d), np.arange(0, n)]).astype(np.int64)
    jsign = np.concatenate([-np.ones(n), np.ones(n)])
    return jperm, jsign


def _j_conj(v: np.ndarray, n: int) -> np.ndarray:
    """Apply ``J conj(.)`` to stacked vectors ``v`` of length 2n."""
    out = np.empty_like(v)
    out[:, :n] = -v[:, n:].conj()
    out[:, n:] = v[:, :n].conj()
    return out


def haar_symplectic(d: int, rng=None, size: int | None = None) -> np.ndarray:
    """Sample Haar-distributed symplectic unitaries from SP(d) ⊂ U(d).

    A quaternionic Ginibre matrix supplies ``d/2`` independent columns; a
    structure-preserving Gram-Schmidt pass orthogonalizes column ``j``
    against the accepted columns *and their quaternionic partners*
    ``J conj(col)``, then the partner block is filled in exactly.  The result
    satisfies ``U.T @ J @ U = J`` (with :func:`symplectic_form`'s J) to
    machine precision and is Haar by invariance of the Ginibre ensemble.

    Examples
    --------
    >>> u = haar_symplectic(4, rng=1)
    >>> j = symplectic_form(4)
    >>> np.allclose(u.T @ j @ u, j)
    True
    """
    gen = as_generator(rng)
    if d % 2:
        raise ValueError(f"symplectic dimension must be even, got {d}")
    n = d // 2
    nsamp = 1 if size is None else int(size)
    z = ginibre("quaternion", n, gen, size=nsamp)
    q = np.empty((nsamp, d, d), dtype=np.complex128)
    for j in range(n):
        u = z[:, :, j].copy()
        # Two Gram-Schmidt passes ("twice is enough") for numerical stability.
        for _ in range(2):
            if j > 0:
                prev = q[:, :, :j]
                coef = np.einsum("bdk,bd->bk", prev.conj(), u)
                u = u - np.einsum("bdk,bk->bd", prev, coef)
                prev_partner = q[:, :, n : n + j]
                coef = np.einsum("bdk,bd->bk", prev_partner.conj(), u)
                u = u - np.einsum("bdk,bk->bd", prev_partner, coef)
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
        q[:, :, j] = u
        q[:, :, n + j] = _j_conj(u, n)
    return q[0] if size is None else q
