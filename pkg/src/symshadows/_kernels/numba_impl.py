"""Numba-compiled implementations of the hot kernels.

Mirrors :mod:`symshadows._kernels.numpy_impl` function for function.  If
numba is not importable the module still imports cleanly with
``available = False`` and the backend selector falls back to NumPy.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    available = True
except ImportError:  # pragma: no cover - exercised only without numba
    available = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


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


@njit(cache=True)
def born_probs(v, rho):
    nb, d, _ = v.shape
    out = np.empty((nb, d), dtype=np.float64)
    for n in range(nb):
        for w in range(d):
            acc = 0.0
            for a in range(d):
                row = v[n, w, a]
                # diagonal term
                acc += (row.real * row.real + row.imag * row.imag) * rho[a, a].real
                for b in range(a + 1, d):
                    z = row * rho[a, b] * np.conj(v[n, w, b])
                    acc += 2.0 * z.real
            out[n, w] = acc
    return out


@njit(cache=True)
def choose_outcomes(probs, uniforms):
    nb, d = probs.shape
    out = np.empty(nb, dtype=np.int64)
    for n in range(nb):
        target = uniforms[n]
        acc = 0.0
        idx = d - 1
        for w in range(d):
            acc += probs[n, w]
            if acc >= target:
                idx = w
                break
        out[n] = idx
    return out


@njit(cache=True)
def row_quadratic(rows, x):
    nb, d = rows.shape
    out = np.empty(nb, dtype=np.float64)
    for n in range(nb):
        acc = 0.0
        for a in range(d):
            za = rows[n, a]
            acc += (za.real * za.real + za.imag * za.imag) * x[a, a].real
            for b in range(a + 1, d):
                z = za * x[a, b] * np.conj(rows[n, b])
                acc += 2.0 * z.real
        out[n] = acc
    return out


@njit(cache=True)
def proj_unitary(v):
    nb, d, _ = v.shape
    out = np.empty((nb, 3), dtype=np.float64)
    for n in range(nb):
        ynorm = 0.0
        ydeph = 0.0
        for w in range(d):
            rownorm = 0.0
            for a in range(d):
                m = v[n, w, a].real ** 2 + v[n, w, a].imag ** 2
                rownorm += m
                ydeph += m * m
            ynorm += rownorm * rownorm
        out[n, 0] = ynorm
        out[n, 1] = ynorm
        out[n, 2] = ydeph
    return out


@njit(cache=True)
def proj_orthogonal(v):
    nb, d, _ = v.shape
    out = np.empty((nb, 4), dtype=np.float64)
    for n in range(nb):
        ynorm = 0.0
        yswap = 0.0
        ydeph = 0.0
        for w in range(d):
            rownorm = 0.0
            sq = 0.0 + 0.0j
            for a in range(d):
                z = v[n, w, a]
                m = z.real * z.real + z.imag * z.imag
                rownorm += m
                ydeph += m * m
                sq += z * z
            ynorm += rownorm * rownorm
            yswap += sq.real * sq.real + sq.imag * sq.imag
        out[n, 0] = ynorm
        out[n, 1] = ynorm
        out[n, 2] = yswap
        out[n, 3] = ydeph
    return out


@njit(cache=True)
def proj_symplectic(v, jperm, jsign):
    nb, d, _ = v.shape
    out = np.empty((nb, 6), dtype=np.float64)
    for n in range(nb):
        ynorm = 0.0
        yform = 0.0
        ydeph = 0.0
        ypair = 0.0
        for w in range(d):
            rownorm = 0.0
            form = 0.0 + 0.0j
            for a in range(d):
                z = v[n, w, a]
                m = z.real * z.real + z.imag * z.imag
                zp = v[n, w, jperm[a]]
                mp = zp.real * zp.real + zp.imag * zp.imag
                rownorm += m
                ydeph += m * m
                ypair += m * mp
                form += jsign[a] * z * zp
            ynorm += rownorm * rownorm
            yform += form.real * form.real + form.imag * form.imag
        out[n, 0] = ynorm
        out[n, 1] = ynorm
        out[n, 2] = yform
        out[n, 3] = ydeph
        out[n, 4] = ypair
        out[n, 5] = ypair
    return out


@njit(cache=True)
def twirl1_accum(v, a):
    nb, d, _ = v.shape
    total = np.zeros((d, d), dtype=np.complex128)
    total_sqmag = np.zeros((d, d), dtype=np.float64)
    va = np.empty((d, d), dtype=np.complex128)
    for n in range(nb):
        for i in range(d):
            for k in range(d):
                acc = 0.0 + 0.0j
                for j in range(d):
                    acc += v[n, i, j] * a[j, k]
                va[i, k] = acc
        for i in range(d):
            for l in range(d):
                acc = 0.0 + 0.0j
                for k in range(d):
                    acc += va[i, k] * np.conj(v[n, l, k])
                total[i, l] += acc
                total_sqmag[i, l] += acc.real * acc.real + acc.imag * acc.imag
    return total, total_sqmag
