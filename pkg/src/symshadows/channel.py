"""Exact measurement channels for every ensemble.

Averaging one randomized-measurement round over an ensemble defines the
measurement channel

    M(rho) = E_V [ sum_w <w|V rho V†|w> V† |w><w| V ].

For the parent groups this is classical: U(d) and SP(d) give the
depolarizing-like map (tr(rho) 1 + rho)/(d+1), while O(d)/SO(d) give the
transpose-symmetrizing map (tr(rho) 1 + rho + rho^T)/(d+2).  For each
quotient ensemble the channel is an exact two-parameter combination of the
parent channel, the diagonal dephasing map A, and -- for symplectic parents
only -- a correction that couples symplectically paired coordinates:

    M(rho) = (1 - a) M_parent(rho) + b A(rho)
             + (a - b) (J A(rho) J† - A(rho J) J),

with a (:attr:`ChannelWeights.mixing_weight`) and b
(:attr:`ChannelWeights.dephasing_weight`) exact rationals in d and the block
signature, and a = b whenever the parent is not symplectic.  This module
evaluates those rationals exactly, applies the channel, materializes its
superoperator matrix, diagonalizes it into invariant sectors, and builds the
Moore-Penrose pseudo-inverse used by the shadow estimator.

The DIII weight follows the matrix-dimension convention a = 3/(d^2 - 1),
confirmed empirically by the coefficient fits of
:func:`symshadows.momentlab.fit_channel_coefficients` at d = 4 and d = 8.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .haar import symplectic_form
from .spaces import SpaceSpec

__all__ = [
    "ChannelWeights",
    "SectorSpectrum",
    "ChannelInverse",
    "dephase",
    "parent_channel",
    "channel_weights",
    "apply_channel",
    "build_superoperator",
    "choi_matrix",
    "channel_spectrum",
    "invert_channel",
]

#: Eigenvalues at or below this magnitude count as null sectors when
#: pseudo-inverting a channel.
NULL_TOL = 1e-9


@dataclass(frozen=True)
class ChannelWeights:
    """The two exact rational parameters of a quotient-ensemble channel.

    Attributes
    ----------
    mixing_weight : Fraction
        Total weight moved off the parent-group channel; the parent term
        carries ``1 - mixing_weight``.
    dephasing_weight : Fraction
        Coefficient of the plain diagonal dephasing map.  Equal to
        ``mixing_weight`` except for symplectic parents.
    parent : str
        Parent-group label, one of ``{"U", "O", "SP"}``.
    """

    mixing_weight: Fraction
    dephasing_weight: Fraction
    parent: str

    @property
    def pair_coupling_weight(self) -> Fraction:
        """Weight of the paired-coordinate correction (zero unless SP)."""
        return self.mixing_weight - self.dephasing_weight

    @property
    def has_pair_term(self) -> bool:
        """True when the symplectic pairing term is present."""
        return self.mixing_weight != self.dephasing_weight


def dephase(m: np.ndarray) -> np.ndarray:
    """Project onto the diagonal in the fixed measurement basis.

    Parameters
    ----------
    m : ndarray, shape (..., d, d)
        Matrix or batch of matrices.

    Returns
    -------
    ndarray
        Copy of ``m`` with every off-diagonal entry zeroed.
    """
    m = np.asarray(m)
    if m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {m.shape}")
    out = np.zeros_like(m)
    idx = np.arange(m.shape[-1])
    out[..., idx, idx] = m[..., idx, idx]
    return out


def parent_channel(parent: str, m: np.ndarray) -> np.ndarray:
    """Measurement channel of a parent group acting on ``m``.

    Parameters
    ----------
    parent : str
        ``"U"`` or ``"SP"`` for (tr(m) 1 + m)/(d+1); ``"O"`` or ``"SO"``
        for (tr(m) 1 + m + m^T)/(d+2).
    m : ndarray, shape (..., d, d)

    Returns
    -------
    ndarray
        Channel output, same shape as ``m``.
    """
    m = np.asarray(m)
    if m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {m.shape}")
    d = m.shape[-1]
    tr = np.trace(m, axis1=-2, axis2=-1)
    eye = np.eye(d, dtype=m.dtype)
    if parent in ("U", "SP"):
        return (tr[..., None, None] * eye + m) / (d + 1)
    if parent in ("O", "SO"):
        mt = np.swapaxes(m, -1, -2)
        return (tr[..., None, None] * eye + m + mt) / (d + 2)
    raise ValueError(f"unsupported parent group {parent!r}")


def channel_weights(spec: SpaceSpec) -> ChannelWeights:
    """Exact rational channel parameters for a quotient ensemble.

    Parameters
    ----------
    spec : SpaceSpec
        A quotient-family ensemble (group families have no weights; their
        channel *is* :func:`parent_channel`).

    Returns
    -------
    ChannelWeights

    Raises
    ------
    ValueError
        If ``spec`` names a group family.

    Examples
    --------
    >>> from symshadows.spaces import make_space
    >>> channel_weights(make_space("AI", 4)).mixing_weight
    Fraction(1, 14)
    """
    if spec.is_group:
        raise ValueError(
            f"{spec.family} is a group family; its channel is parent_channel "
            "and carries no mixing weights"
        )
    d = spec.dim
    family = spec.family
    if family == "AI":
        a = b = Fraction(2, d * (d + 3))
    elif family == "AII":
        a = b = Fraction(2, d * (d - 1))
    elif family == "AIII":
        s = spec.signature
        a = b = Fraction(
            s**4 + 2 * s**2 * (d - 2) + d * d,
            d * d * (d - 1) * (d + 3),
        )
    elif family == "BDI":
        s = spec.signature
        a = b = Fraction(
            s**4 + (6 * d - 4) * s**2 + 3 * d * (d - 2),
            d * (d - 1) * (d + 1) * (d + 6),
        )
    elif family == "DIII":
        a = b = Fraction(3, d * d - 1)
    elif family == "CI":
        n = d // 2
        a = Fraction(3, (2 * n - 1) * (2 * n + 3))
        b = Fraction(6 * n + 1, (2 * n - 1) * (2 * n + 1) * (2 * n + 3))
    elif family == "CII":
        n = d // 2
        if n == 1:
            # Single quaternionic coordinate: one block is empty, the
            # ensemble is trivial and the channel is pure dephasing.
            a = b = Fraction(1)
        else:
            s = spec.signature
            a = Fraction(
                4 * s**4 - 10 * s**2 + 3 * n * n + 3 * n,
                n * (n - 1) * (2 * n - 1) * (2 * n + 3),
            )
            b = Fraction(
                3 * n * (n + 1) * (2 * n * n + n + 1)
                + 4 * s**2 * ((2 * n * n + n + 1) * s**2 + 2 * n**3 - 5 * n * n - 6 * n - 1),
                n * (n - 1) * (n + 1) * (2 * n - 1) * (2 * n + 1) * (2 * n + 3),
            )
    else:  # pragma: no cover - make_space already rejects unknown families
        raise ValueError(f"unknown family {family!r}")
    return ChannelWeights(mixing_weight=a, dephasing_weight=b, parent=spec.parent)


def apply_channel(spec: SpaceSpec, rho: np.ndarray) -> np.ndarray:
    """Apply the exact measurement channel of ``spec`` to ``rho``.

    Trace preserving for every ensemble; reduces to pure dephasing when the
    mixing weight reaches 1 (degenerate quotients).

    Parameters
    ----------
    spec : SpaceSpec
    rho : ndarray, shape (..., d, d)
        Input matrix (not required to be a state; the channel is linear).

    Returns
    -------
    ndarray
        Channel output, same shape as ``rho``.
    """
    rho = np.asarray(rho)
    if rho.shape[-1] != spec.dim or rho.shape[-2] != spec.dim:
        raise ValueError(
            f"matrix shape {rho.shape} does not match ensemble dimension {spec.dim}"
        )
    if spec.is_group:
        return parent_channel(spec.parent, rho)
    w = channel_weights(spec)
    a = float(w.mixing_weight)
    b = float(w.dephasing_weight)
    out = (1.0 - a) * parent_channel(w.parent, rho) + b * dephase(rho)
    if w.has_pair_term:
        c = float(w.pair_coupling_weight)
        j = symplectic_form(spec.dim)
        out = out + c * (j @ dephase(rho) @ j.T - dephase(rho @ j) @ j)
    return out


def _matrix_units(d: int, dtype=complex) -> np.ndarray:
    """All d^2 matrix units as a batch; entry a*d+b is E_ab."""
    basis = np.zeros((d * d, d, d), dtype=dtype)
    rows = np.repeat(np.arange(d), d)
    cols = np.tile(np.arange(d), d)
    basis[np.arange(d * d), rows, cols] = 1.0
    return basis


def build_superoperator(spec: SpaceSpec) -> np.ndarray:
    """Matrix of the channel in the matrix-unit basis.

    Uses the row-major vectorization vec(m)[i*d+j] = m[i, j], so that
    ``S @ vec(rho) == vec(apply_channel(spec, rho))``.  The result is
    Hermitian: the channel is self-adjoint in the Hilbert-Schmidt inner
    product because every effect V†|w><w|V entering its definition is.

    Returns
    -------
    ndarray, shape (d**2, d**2)
    """
    d = spec.dim
    images = apply_channel(spec, _matrix_units(d))
    # images[a*d+b] = M(E_ab); transpose so rows index the output entry.
    return images.reshape(d * d, d * d).T.copy()


def choi_matrix(spec: SpaceSpec) -> np.ndarray:
    """Choi matrix sum_ab E_ab (x) M(E_ab); PSD iff the channel is CP."""
    d = spec.dim
    s = build_superoperator(spec)
    return s.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)


@dataclass(frozen=True)
class SectorSpectrum:
    """Channel eigenvalues grouped by invariant operator sector.

    Attributes
    ----------
    labels : tuple of str
        Sector names (``"identity"``, ``"diagonal"``, ... or
        ``"cluster_k"`` for numerically extracted symplectic-parent
        spectra).
    eigenvalues : tuple of float
        One eigenvalue per sector.
    multiplicities : tuple of int
        Sector dimensions; they sum to d^2.
    """

    labels: tuple[str, ...]
    eigenvalues: tuple[float, ...]
    multiplicities: tuple[int, ...]

    def eigenvalue(self, label: str) -> float:
        """Eigenvalue of the named sector."""
        try:
            return self.eigenvalues[self.labels.index(label)]
        except ValueError:
            raise KeyError(f"no sector named {label!r}; have {self.labels}") from None

    def dense(self) -> np.ndarray:
        """All d^2 eigenvalues with multiplicity, sorted descending."""
        flat = np.repeat(self.eigenvalues, self.multiplicities)
        return np.sort(flat)[::-1]


def _cluster_descending(values: np.ndarray, tol: float) -> list[tuple[float, int]]:
    """Group a descending array into (mean, count) runs within ``tol``."""
    clusters: list[list[float]] = []
    for v in values:
        if clusters and abs(v - clusters[-1][0]) <= tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return [(float(np.mean(c)), len(c)) for c in clusters]


def channel_spectrum(spec: SpaceSpec, cluster_tol: float = 1e-9) -> SectorSpectrum:
    """Eigenvalues of the measurement channel by invariant sector.

    Unitary- and orthogonal-parent channels are diagonalized in closed
    form (identity / traceless-diagonal / off-diagonal sectors, with the
    off-diagonal sector splitting into symmetric and antisymmetric parts
    for orthogonal parents).  Symplectic-parent quotients are diagonalized
    numerically from :func:`build_superoperator` and grouped into
    degenerate clusters within ``cluster_tol``.

    Examples
    --------
    >>> from symshadows.spaces import make_space
    >>> channel_spectrum(make_space("AIII", 2, p=1, q=1)).eigenvalues
    (1.0, 0.4666666666666667, 0.26666666666666666)
    """
    d = spec.dim
    if spec.is_group:
        if spec.parent in ("U", "SP"):
            return SectorSpectrum(
                labels=("identity", "traceless"),
                eigenvalues=(1.0, 1.0 / (d + 1)),
                multiplicities=(1, d * d - 1),
            )
        return SectorSpectrum(
            labels=("identity", "symmetric_traceless", "antisymmetric"),
            eigenvalues=(1.0, 2.0 / (d + 2), 0.0),
            multiplicities=(1, d * (d + 1) // 2 - 1, d * (d - 1) // 2),
        )
    w = channel_weights(spec)
    a = w.mixing_weight
    if w.parent == "U":
        off = Fraction(1 - a, d + 1)
        return SectorSpectrum(
            labels=("identity", "diagonal", "off_diagonal"),
            eigenvalues=(1.0, float(off + a), float(off)),
            multiplicities=(1, d - 1, d * d - d),
        )
    if w.parent == "O":
        off = Fraction(2 * (1 - a), d + 2)
        return SectorSpectrum(
            labels=("identity", "diagonal", "symmetric_off_diagonal", "antisymmetric"),
            eigenvalues=(1.0, float(off + a), float(off), 0.0),
            multiplicities=(1, d - 1, d * (d - 1) // 2, d * (d - 1) // 2),
        )
    vals = np.linalg.eigvalsh(build_superoperator(spec))[::-1]
    clusters = _cluster_descending(vals, cluster_tol)
    return SectorSpectrum(
        labels=tuple(f"cluster_{k}" for k in range(len(clusters))),
        eigenvalues=tuple(v for v, _ in clusters),
        multiplicities=tuple(n for _, n in clusters),
    )


class ChannelInverse:
    """Moore-Penrose pseudo-inverse of a measurement channel.

    Reciprocates the channel eigenvalue on every sector with |eigenvalue|
    above :data:`NULL_TOL` and annihilates the rest (the antisymmetric
    sector of orthogonal parents is always null; the off-diagonal sector
    joins it for fully dephasing quotients).  Instances are cached and must
    be treated as immutable.

    Use :meth:`apply` (or call the object) for M+(m), and
    :meth:`removed_norm` to measure how much of an operator lives in the
    null space and is silently projected away.
    """

    def __init__(self, spec: SpaceSpec, null_tol: float = NULL_TOL):
        self.spec = spec
        self.null_tol = float(null_tol)
        self._pinv: np.ndarray | None = None
        self._null_proj: np.ndarray | None = None
        d = spec.dim
        if spec.parent in ("U", "O") or spec.is_group:
            spectrum = channel_spectrum(spec)
            self._diag_eig = (
                spectrum.eigenvalue("diagonal")
                if "diagonal" in spectrum.labels
                else spectrum.eigenvalues[1]
            )
            off_label = {
                "U": "off_diagonal" if not spec.is_group else "traceless",
                "SP": "traceless",
                "O": (
                    "symmetric_off_diagonal"
                    if not spec.is_group
                    else "symmetric_traceless"
                ),
            }[spec.parent]
            self._off_eig = spectrum.eigenvalue(off_label)
            if abs(self._diag_eig) <= null_tol and abs(self._off_eig) <= null_tol:
                raise ValueError(
                    f"{spec.label()} channel is null on every non-identity sector"
                )
        else:
            s = build_superoperator(spec)
            vals, vecs = np.linalg.eigh(s)
            keep = np.abs(vals) > null_tol
            if keep.sum() <= 1:
                raise ValueError(
                    f"{spec.label()} channel is null on every non-identity sector"
                )
            inv_vals = np.where(keep, 1.0 / np.where(keep, vals, 1.0), 0.0)
            self._pinv = (vecs * inv_vals) @ vecs.conj().T
            self._null_proj = (vecs * ~keep) @ vecs.conj().T

    def _split(self, m: np.ndarray):
        """Identity / traceless-diagonal / kept-off-diagonal / null parts."""
        spec = self.spec
        d = spec.dim
        m = np.asarray(m, dtype=complex)
        null = np.zeros_like(m)
        if spec.parent == "O":
            sym = (m + np.swapaxes(m, -1, -2)) / 2.0
            null = m - sym
            m = sym
        trace_part = (
            np.trace(m, axis1=-2, axis2=-1)[..., None, None] / d * np.eye(d)
        )
        diag_part = dephase(m) - trace_part
        off_part = m - dephase(m)
        return trace_part, diag_part, off_part, null

    def apply(self, m: np.ndarray) -> np.ndarray:
        """Evaluate M+(m); components in null sectors are projected out."""
        m = np.asarray(m, dtype=complex)
        d = self.spec.dim
        if m.shape[-1] != d or m.shape[-2] != d:
            raise ValueError(
                f"matrix shape {m.shape} does not match ensemble dimension {d}"
            )
        if self._pinv is not None:
            batch = m.shape[:-2]
            vec = m.reshape(*batch, d * d)
            return (vec @ self._pinv.T).reshape(*batch, d, d)
        trace_part, diag_part, off_part, _ = self._split(m)
        out = trace_part + diag_part / self._diag_eig
        if abs(self._off_eig) > self.null_tol:
            out = out + off_part / self._off_eig
        return out

    __call__ = apply

    def removed_norm(self, m: np.ndarray) -> float:
        """Hilbert-Schmidt norm of the null-sector component of ``m``."""
        m = np.asarray(m, dtype=complex)
        d = self.spec.dim
        if self._null_proj is not None:
            return float(np.linalg.norm(self._null_proj @ m.reshape(d * d)))
        _, _, off_part, null = self._split(m)
        removed_sq = float(np.linalg.norm(null) ** 2)
        if abs(self._off_eig) <= self.null_tol:
            removed_sq += float(np.linalg.norm(off_part) ** 2)
        return removed_sq**0.5

    def is_projected(self, m: np.ndarray) -> bool:
        """True when ``m`` has non-negligible weight outside the image."""
        scale = float(np.linalg.norm(np.asarray(m)))
        if scale == 0.0:
            return False
        return self.removed_norm(m) > 1e-9 * scale


@lru_cache(maxsize=64)
def invert_channel(spec: SpaceSpec) -> ChannelInverse:
    """Cached pseudo-inverse applier for the channel of ``spec``.

    Examples
    --------
    >>> from symshadows.spaces import make_space
    >>> import numpy as np
    >>> inv = invert_channel(make_space("U", 3))
    >>> bool(np.allclose(inv(np.eye(3)), np.eye(3)))
    True
    """
    return ChannelInverse(spec)
