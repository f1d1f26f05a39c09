"""The classical compact groups, their symmetric quotients, and samplers.

Each of the seven classical families is a quotient G/K of a compact group
G ∈ {U(d), SO(d), SP(d)} by the fixed-point subgroup K of an involutive
automorphism σ.  The invariant measure on the quotient is realized by the
coset map applied to a Haar sample of the parent:

    V = σ(g)⁻¹ g,   g ~ Haar(G).

The families, their parents, involutions, and fixed subgroups:

=======  ==========  =======================  =====================
family   parent G    involution σ(g)          subgroup K
=======  ==========  =======================  =====================
AI       U(d)        conj(g)                  O(d)
AII      U(d)        J conj(g) J⁻¹            SP(d)
AIII     U(d)        I_pq g I_pq              S(U(p) x U(q))
BDI      SO(d)       I_pq g I_pq              SO(p) x SO(q)
DIII     SO(d)       J g J⁻¹                  U(d/2) (embedded)
CI       SP(d)       J g J⁻¹                  U(d/2) (embedded)
CII      SP(d)       K_pq g K_pq              SP(2p) x SP(2q)
=======  ==========  =======================  =====================

Here J is the skew form of :func:`symshadows.haar.symplectic_form`,
I_pq = diag(1_p, -1_q), and K_pq = I_pq ⊕ I_pq (CII block sizes p, q count
quaternionic coordinates, so p + q = d/2).  The parent groups themselves
("U", "O", "SO", "SP") are admitted as additional ensembles whose sampler is
plain Haar.

Each coset representative V inherits an exact algebraic structure from σ
(e.g. type AI gives symmetric unitaries V = gᵀg); these relations are frozen
here as per-family structural witnesses used throughout the test batteries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .haar import (
    haar_orthogonal,
    haar_symplectic,
    haar_unitary,
    symplectic_form,
    symplectic_pairing,
)
from .rng import as_generator

__all__ = [
    "GROUP_FAMILIES",
    "QUOTIENT_FAMILIES",
    "ALL_FAMILIES",
    "SpaceSpec",
    "WitnessResult",
    "make_space",
    "involution",
    "sample_point",
    "sample_subgroup",
    "sample_signed_symmetry",
    "signature_matrix",
]

GROUP_FAMILIES = ("U", "O", "SO", "SP")
QUOTIENT_FAMILIES = ("AI", "AII", "AIII", "BDI", "DIII", "CI", "CII")
ALL_FAMILIES = GROUP_FAMILIES + QUOTIENT_FAMILIES

_EVEN_DIM_FAMILIES = frozenset({"SP", "AII", "DIII", "CI", "CII"})
_SIGNATURE_FAMILIES = frozenset({"AIII", "BDI", "CII"})
_REAL_FAMILIES = frozenset({"O", "SO", "BDI", "DIII"})


@dataclass(frozen=True)
class SpaceSpec:
    """Immutable description of one measurement ensemble.

    Attributes
    ----------
    family : str
        One of :data:`ALL_FAMILIES`.
    dim : int
        Matrix (Hilbert-space) dimension d.
    p, q : int or None
        Block sizes for the signature families (AIII/BDI: p + q = d;
        CII: quaternionic blocks with p + q = d/2).  ``None`` otherwise.
    """

    family: str
    dim: int
    p: int | None = None
    q: int | None = None

    @property
    def is_group(self) -> bool:
        return self.family in GROUP_FAMILIES

    @property
    def parent(self) -> str:
        """Parent-group label: 'U', 'O', or 'SP'."""
        return {
            "U": "U",
            "O": "O",
            "SO": "O",
            "SP": "SP",
            "AI": "U",
            "AII": "U",
            "AIII": "U",
            "BDI": "O",
            "DIII": "O",
            "CI": "SP",
            "CII": "SP",
        }[self.family]

    @property
    def signature(self) -> int | None:
        """p - q for the signature families, else None."""
        if self.p is None:
            return None
        return self.p - self.q

    @property
    def is_degenerate(self) -> bool:
        """True when one block is empty, collapsing the ensemble to {1}."""
        return self.p is not None and (self.p == 0 or self.q == 0)

    @property
    def is_real(self) -> bool:
        """True when sampled matrices are real."""
        return self.family in _REAL_FAMILIES

    def label(self) -> str:
        """Short human-readable tag, e.g. ``AIII(d=4,p=2,q=2)``."""
        if self.p is None:
            return f"{self.family}(d={self.dim})"
        return f"{self.family}(d={self.dim},p={self.p},q={self.q})"


def make_space(
    family: str, dim: int, p: int | None = None, q: int | None = None
) -> SpaceSpec:
    """Validate parameters and build a :class:`SpaceSpec`.

    For the signature families, a missing block split defaults to the most
    balanced one (``p = ceil(total/2)``); supplying either of ``p``/``q``
    pins both.

    Raises
    ------
    ValueError
        On unknown family names, invalid dimensions, or inconsistent blocks.
    """
    if family not in ALL_FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {ALL_FAMILIES}")
    dim = int(dim)
    min_dim = 1 if family in GROUP_FAMILIES else 2
    if dim < min_dim:
        raise ValueError(f"{family} needs dimension >= {min_dim}, got {dim}")
    if family in _EVEN_DIM_FAMILIES and dim % 2:
        raise ValueError(f"{family} needs an even dimension, got {dim}")
    if family not in _SIGNATURE_FAMILIES:
        if p is not None or q is not None:
            raise ValueError(f"{family} does not take block sizes p/q")
        return SpaceSpec(family, dim)
    total = dim if family in ("AIII", "BDI") else dim // 2
    if p is None and q is None:
        p = (total + 1) // 2
        q = total - p
    elif p is None:
        q = int(q)
        p = total - q
    elif q is None:
        p = int(p)
        q = total - p
    else:
        p, q = int(p), int(q)
    if p < 0 or q < 0 or p + q != total:
        raise ValueError(
            f"{family} at dim {dim} needs p + q = {total} with p, q >= 0; "
            f"got p={p}, q={q}"
        )
    return SpaceSpec(family, dim, p, q)


def signature_matrix(spec: SpaceSpec) -> np.ndarray:
    """The diagonal sign matrix defining the involution (I_pq or K_pq)."""
    if spec.family in ("AIII", "BDI"):
        return np.diag(np.concatenate([np.ones(spec.p), -np.ones(spec.q)]))
    if spec.family == "CII":
        block = np.concatenate([np.ones(spec.p), -np.ones(spec.q)])
        return np.diag(np.concatenate([block, block]))
    raise ValueError(f"{spec.family} has no signature matrix")


def _sign_mask(spec: SpaceSpec) -> np.ndarray:
    return np.diag(signature_matrix(spec))


def involution(spec: SpaceSpec, g: np.ndarray) -> np.ndarray:
    """Apply the family's involutive automorphism σ to parent elements ``g``.

    Works on a single matrix or any stack ``(..., d, d)``.
    """
    fam = spec.family
    if fam in GROUP_FAMILIES:
        raise ValueError(f"group ensemble {fam} carries no involution")
    if fam == "AI":
        return g.conj()
    if fam == "AII":
        j = symplectic_form(spec.dim)
        return -(j @ g.conj() @ j)
    if fam in ("AIII", "BDI"):
        s = _sign_mask(spec)
        return g * (s[:, None] * s[None, :])
    if fam in ("DIII", "CI"):
        j = symplectic_form(spec.dim)
        return -(j @ g @ j)
    if fam == "CII":
        s = _sign_mask(spec)
        return g * (s[:, None] * s[None, :])
    raise ValueError(f"unknown family {fam!r}")


def _sample_parent(spec: SpaceSpec, gen: np.random.Generator, size: int | None):
    parent = spec.parent
    if parent == "U":
        return haar_unitary(spec.dim, gen, size=size)
    if parent == "O":
        special = spec.family != "O"
        return haar_orthogonal(spec.dim, gen, special=special, size=size)
    return haar_symplectic(spec.dim, gen, size=size)


def sample_point(spec: SpaceSpec, rng=None, size: int | None = None) -> np.ndarray:
    """Draw from the ensemble: Haar for groups, V = σ(g)⁻¹g for quotients.

    Degenerate signature choices (an empty block) make the quotient a single
    point; the exact identity matrix is returned for every draw.

    Returns
    -------
    ndarray
        ``(d, d)`` or ``(size, d, d)``; real for the real families.
    """
    gen = as_generator(rng)
    if spec.is_group:
        return _sample_parent(spec, gen, size)
    if spec.is_degenerate:
        dtype = np.float64 if spec.is_real else np.complex128
        eye = np.eye(spec.dim, dtype=dtype)
        if size is None:
            return eye
        return np.broadcast_to(eye, (size, spec.dim, spec.dim)).copy()
    g = _sample_parent(spec, gen, size)
    sigma = involution(spec, g)
    return np.swapaxes(sigma.conj(), -1, -2) @ g


def sample_subgroup(spec: SpaceSpec, rng=None, size: int | None = None) -> np.ndarray:
    """Draw Haar samples from the fixed-point subgroup K of the involution.

    For the group ensembles K is taken to be the group itself (the full
    symmetry group of the ensemble).
    """
    gen = as_generator(rng)
    fam, d = spec.family, spec.dim
    if spec.is_group:
        return _sample_parent(spec, gen, size)
    if fam == "AI":
        return haar_orthogonal(d, gen, size=size)
    if fam == "AII":
        return haar_symplectic(d, gen, size=size)
    if fam == "AIII":
        return _sample_block_unitary(spec.p, spec.q, gen, size)
    if fam == "BDI":
        return _sample_block_special_orthogonal(spec.p, spec.q, gen, size)
    if fam in ("DIII", "CI"):
        return _embed_complex(haar_unitary(d // 2, gen, size=size))
    if fam == "CII":
        return _sample_block_symplectic(spec.p, spec.q, d, gen, size)
    raise ValueError(f"unknown family {fam!r}")


def _sample_block_unitary(p, q, gen, size):
    """S(U(p) x U(q)): block-diagonal unitaries normalized to det 1."""
    d = p + q
    nsamp = 1 if size is None else size
    out = np.zeros((nsamp, d, d), dtype=np.complex128)
    if p:
        out[:, :p, :p] = haar_unitary(p, gen, size=nsamp)
    if q:
        out[:, p:, p:] = haar_unitary(q, gen, size=nsamp)
    det = np.linalg.det(out)
    out *= (det ** (-1.0 / d))[:, None, None]
    return out[0] if size is None else out


def _sample_block_special_orthogonal(p, q, gen, size):
    """SO(p) x SO(q) block-diagonal orthogonal matrices."""
    d = p + q
    nsamp = 1 if size is None else size
    out = np.zeros((nsamp, d, d))
    for lo, m in ((0, p), (p, q)):
        if m == 0:
            continue
        if m == 1:
            out[:, lo, lo] = 1.0
        else:
            out[:, lo : lo + m, lo : lo + m] = haar_orthogonal(
                m, gen, special=True, size=nsamp
            )
    return out[0] if size is None else out


def _embed_complex(u: np.ndarray) -> np.ndarray:
    """Embed U(n) into SO(2n) ∩ SP(2n): x + iy -> [[x, -y], [y, x]]."""
    n = u.shape[-1]
    shape = u.shape[:-2] + (2 * n, 2 * n)
    out = np.empty(shape)
    out[..., :n, :n] = u.real
    out[..., :n, n:] = -u.imag
    out[..., n:, :n] = u.imag
    out[..., n:, n:] = u.real
    return out


def _sample_block_symplectic(p, q, d, gen, size):
    """SP(2p) x SP(2q) scattered onto the J-pair coordinates of SP(d)."""
    n = d // 2
    nsamp = 1 if size is None else size
    out = np.zeros((nsamp, d, d), dtype=np.complex128)
    for lo, m in ((0, p), (p, q)):
        if m == 0:
            continue
        coords = np.concatenate([np.arange(lo, lo + m), np.arange(n + lo, n + lo + m)])
        out[:, coords[:, None], coords[None, :]] = haar_symplectic(2 * m, gen, size=nsamp)
    return out[0] if size is None else out


# ---------------------------------------------------------------------------
# Signed symmetries: elements of K that are also signed permutation matrices
# (they normalize the measurement basis, so conjugation by them must commute
# with the measurement channel).
# ---------------------------------------------------------------------------


def _signed_perm(d: int, gen: np.random.Generator) -> np.ndarray:
    perm = gen.permutation(d)
    signs = gen.choice([-1.0, 1.0], size=d)
    out = np.zeros((d, d))
    out[perm, np.arange(d)] = signs
    return out


def _fix_det(m: np.ndarray) -> np.ndarray:
    """Flip one signed entry so det(m) = +1 (m a signed permutation block)."""
    if m.shape[0] == 0:
        return m
    if np.linalg.det(m) < 0:
        col = 0
        row = int(np.argmax(np.abs(m[:, col])))
        m[row, col] *= -1.0
    return m


def _symplectic_signed_perm(n_pairs: int, gen: np.random.Generator) -> np.ndarray:
    """A signed permutation preserving the symplectic form on 2*n_pairs coords.

    Pairs are relabeled by a random permutation, then each pair is acted on
    by one of the four sign/swap operations compatible with the form:
    ±identity or ±(J-swap).
    """
    d = 2 * n_pairs
    tau = gen.permutation(n_pairs)
    ops = gen.integers(0, 4, size=n_pairs)
    out = np.zeros((d, d))
    for i in range(n_pairs):
        t = tau[i]
        op = ops[i]
        sign = 1.0 if op in (0, 2) else -1.0
        if op < 2:
            out[t, i] = sign
            out[n_pairs + t, n_pairs + i] = sign
        else:
            out[n_pairs + t, i] = sign
            out[t, n_pairs + i] = -sign
    return out


def sample_signed_symmetry(spec: SpaceSpec, rng=None) -> np.ndarray:
    """Draw a random signed permutation matrix lying in the subgroup K.

    These are exactly the basis symmetries under which the measurement
    channel of the ensemble is equivariant; each family admits a different
    set (e.g. block-respecting for AIII, pair-respecting for the symplectic
    families).

    Returns
    -------
    (d, d) float ndarray with entries in {0, ±1}.
    """
    gen = as_generator(rng)
    fam, d = spec.family, spec.dim
    if fam in ("U", "O", "AI"):
        return _signed_perm(d, gen)
    if fam == "SO":
        return _fix_det(_signed_perm(d, gen))
    if fam in ("SP", "AII"):
        return _symplectic_signed_perm(d // 2, gen)
    if fam == "AIII":
        out = np.zeros((d, d))
        p = spec.p
        if p:
            out[:p, :p] = _signed_perm(p, gen)
        if spec.q:
            out[p:, p:] = _signed_perm(spec.q, gen)
        return _fix_det(out)
    if fam == "BDI":
        out = np.zeros((d, d))
        p = spec.p
        if p:
            out[:p, :p] = _fix_det(_signed_perm(p, gen))
        if spec.q:
            out[p:, p:] = _fix_det(_signed_perm(spec.q, gen))
        return out
    if fam in ("DIII", "CI"):
        n = d // 2
        tau = gen.permutation(n)
        phases = gen.choice([1.0 + 0j, 1j, -1.0 + 0j, -1j], size=n)
        u = np.zeros((n, n), dtype=np.complex128)
        u[tau, np.arange(n)] = phases
        return _embed_complex(u)
    if fam == "CII":
        n = d // 2
        out = np.zeros((d, d))
        for lo, m in ((0, spec.p), (spec.p, spec.q)):
            if m == 0:
                continue
            coords = np.concatenate(
                [np.arange(lo, lo + m), np.arange(n + lo, n + lo + m)]
            )
            out[coords[:, None], coords[None, :]] = _symplectic_signed_perm(m, gen)
        return out
    raise ValueError(f"unknown family {fam!r}")


# ---------------------------------------------------------------------------
# Structural witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessResult:
    """Outcome of the per-family structural checks on sampled matrices."""

    passed: bool
    residual: float
    tol: float
    family: str


def _maxabs(x: np.ndarray) -> float:
    return float(np.max(np.abs(x))) if x.size else 0.0


def structural_witness(spec, v: np.ndarray, tol: float = 1e-12) -> WitnessResult:
    """Check the exact algebraic relations that ensemble members must satisfy.

    Accepts a single matrix or a stack; the reported residual is the maximum
    absolute violation over all checks and all stacked samples.

    Checks per family (on top of unitarity, which is always included):

    * U: none further.  O/SO: realness (and det +1 for SO).
      SP: ``VᵀJV = J``.
    * AI: ``V = Vᵀ``.  AII: ``JV`` antisymmetric.
    * AIII: ``I_pq V`` Hermitian.  BDI: real, ``I_pq V`` symmetric.
    * DIII: real, ``JV`` antisymmetric.
    * CI: ``VᵀJV = J`` and ``JV`` anti-Hermitian.
    * CII: ``VᵀJV = J`` and ``K_pq V`` Hermitian.
    """
    v = np.asarray(v)
    if v.ndim == 2:
        v = v[None]
    d = spec.dim
    eye = np.eye(d)
    tv = np.swapaxes(v, -1, -2)
    hv = tv.conj()
    residuals = [_maxabs(hv @ v - eye)]
    fam = spec.family
    if spec.is_real:
        residuals.append(_maxabs(v.imag))
    if fam == "SO":
        residuals.append(_maxabs(np.linalg.det(v.real) - 1.0))
    if fam in ("SP", "CI", "CII"):
        j = symplectic_form(d)
        residuals.append(_maxabs(tv @ j @ v - j))
    if fam == "AI":
        residuals.append(_maxabs(v - tv))
    if fam == "AII":
        j = symplectic_form(d)
        jv = j @ v
        residuals.append(_maxabs(jv + np.swapaxes(jv, -1, -2)))
    if fam in ("AIII", "BDI"):
        iv = signature_matrix(spec) @ v
        ivt = np.swapaxes(iv, -1, -2)
        residuals.append(_maxabs(iv - (ivt if fam == "BDI" else ivt.conj())))
    if fam == "DIII":
        j = symplectic_form(d)
        jv = j @ v
        residuals.append(_maxabs(jv + np.swapaxes(jv, -1, -2)))
    if fam == "CI":
        j = symplectic_form(d)
        jv = j @ v
        residuals.append(_maxabs(jv + np.swapaxes(jv, -1, -2).conj()))
    if fam == "CII":
        kv = signature_matrix(spec) @ v
        residuals.append(_maxabs(kv - np.swapaxes(kv, -1, -2).conj()))
    residual = max(residuals)
    return WitnessResult(residual <= tol, residual, tol, fam)
