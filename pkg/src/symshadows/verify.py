"""Named self-check suites behind the ``verify`` command.

Each suite runs a fixed grid of structural and statistical checks and
returns one :class:`Check` record per check — name, statistic, threshold,
and pass flag — so reports are machine readable.  Statistical checks report
their deviation in standard-error units with a threshold of
``tol_sems`` (default 5); structural checks report a residual against an
absolute tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import momentlab
from .channel import (
    build_superoperator,
    channel_spectrum,
    channel_weights,
    choi_matrix,
)
from .haar import symplectic_form
from .rng import RngStream
from .spaces import ALL_FAMILIES, GROUP_FAMILIES, make_space, sample_point, structural_witness
from .variance import second_moment_coefficients

__all__ = ["CHECK_COLUMNS", "Check", "SUITES", "all_passed", "run_suite"]

SUITES = ("haar", "witness", "channel", "moments", "equivariance", "all")

CHECK_COLUMNS = ("suite", "name", "statistic", "threshold", "passed")


@dataclass(frozen=True)
class Check:
    """One named verification outcome."""

    suite: str
    name: str
    statistic: float
    threshold: float
    passed: bool


def _check(suite: str, name: str, statistic: float, threshold: float) -> Check:
    return Check(suite, name, float(statistic), float(threshold), statistic <= threshold)


def all_passed(checks) -> bool:
    """True when every record in ``checks`` passed."""
    return all(c.passed for c in checks)


def _moment_check(suite, name, values, expected, tol_sems):
    """Check the empirical mean of per-sample ``values`` against ``expected``."""
    n = values.size
    mean = float(values.mean())
    sem = float(values.std(ddof=1) / np.sqrt(n))
    dev = abs(mean - expected) / sem if sem > 0 else 0.0
    return _check(suite, name, dev, tol_sems)


def _suite_haar(dim, samples, seed, tol_sems):
    dim = dim or 4
    samples = samples or 200_000
    checks = []
    root = RngStream(seed, (1,))
    batch = 128
    for gi, fam in enumerate(GROUP_FAMILIES):
        spec = make_space(fam, dim)
        v = sample_point(spec, root.child(gi, 0), size=batch)
        eye = np.eye(dim)
        resid = float(np.max(np.abs(np.swapaxes(v, -1, -2).conj() @ v - eye)))
        checks.append(_check("haar", f"unitarity/{spec.label()}", resid, 1e-12))
        if fam == "SO":
            det_resid = float(np.max(np.abs(np.linalg.det(v.real) - 1.0)))
            checks.append(_check("haar", f"determinant/{spec.label()}", det_resid, 1e-10))
        if fam == "SP":
            j = symplectic_form(dim)
            form_resid = float(np.max(np.abs(np.swapaxes(v, -1, -2) @ j @ v - j)))
            checks.append(_check("haar", f"form/{spec.label()}", form_resid, 1e-10))
        # entry moments of V_00 against the closed forms for each group
        big = sample_point(spec, root.child(gi, 1), size=samples)
        x = np.abs(big[:, 0, 0]) ** 2
        checks.append(
            _moment_check("haar", f"E|V00|^2/{spec.label()}", x, 1.0 / dim, tol_sems)
        )
        if fam == "U":
            checks.append(
                _moment_check(
                    "haar", f"E|V00|^4/{spec.label()}", x**2, 2.0 / (dim * (dim + 1)), tol_sems
                )
            )
        if fam == "O":
            checks.append(
                _moment_check(
                    "haar", f"E V00^4/{spec.label()}", x**2, 3.0 / (dim * (dim + 2)), tol_sems
                )
            )
    return checks


def _suite_witness(space, dim, seed):
    dim = dim or 4
    families = [space] if space else list(ALL_FAMILIES)
    checks = []
    root = RngStream(seed, (2,))
    for fi, fam in enumerate(families):
        spec = make_space(fam, dim)
        v = sample_point(spec, root.child(fi), size=64)
        result = structural_witness(spec, v)
        checks.append(
            _check("witness", f"structure/{spec.label()}", result.residual, result.tol)
        )
    # a degenerate quotient collapses to the identity matrix
    if space in (None, "AIII"):
        spec = make_space("AIII", dim, p=dim, q=0)
        v = sample_point(spec, root.child(99), size=8)
        resid = float(np.max(np.abs(v - np.eye(dim))))
        checks.append(_check("witness", f"degenerate-identity/{spec.label()}", resid, 0.0))
    return checks


def _eigenvalue_identity_residual(max_dim=32) -> float:
    """Exact cross-check of sector eigenvalues against channel weights."""
    worst = Fraction(0)
    for fam in ("AIII", "BDI"):
        for d in range(3, max_dim + 1):
            total = d
            for s in range(d % 2, d + 1, 2):
                p = (total + s) // 2
                spec = make_space(fam, d, p=p, q=total - p)
                coeff = second_moment_coefficients(fam, d, s)
                weights = channel_weights(spec)
                parent_gap = Fraction(1, d + 1) if fam == "AIII" else Fraction(2, d + 2)
                expected_off = (1 - weights.mixing_weight) * parent_gap
                worst = max(worst, abs(coeff.offdiag_eigenvalue - expected_off))
                worst = max(
                    worst,
                    abs(coeff.diag_eigenvalue - (expected_off + weights.mixing_weight)),
                )
    return float(worst)


def _suite_channel(space, dim, samples, seed, tol_sems):
    dim = dim or 4
    samples = samples or 200_000
    families = [space] if space else list(ALL_FAMILIES)
    checks = [
        _check("channel", "eigenvalue-identities/AIII+BDI", _eigenvalue_identity_residual(), 0.0)
    ]
    for fam in families:
        spec = make_space(fam, dim)
        s = build_superoperator(spec)
        numeric = np.sort(np.linalg.eigvalsh(s))[::-1]
        dense = channel_spectrum(spec).dense()
        checks.append(
            _check(
                "channel",
                f"spectrum/{spec.label()}",
                float(np.max(np.abs(numeric - dense))),
                1e-10,
            )
        )
        choi_min = float(np.linalg.eigvalsh(choi_matrix(spec))[0])
        checks.append(
            _check("channel", f"choi-psd/{spec.label()}", max(0.0, -choi_min), 1e-10)
        )
    # Monte-Carlo fit of the mixing weight for one ensemble
    fit_fam = space or "AI"
    if fit_fam not in GROUP_FAMILIES:
        spec = make_space(fit_fam, dim)
        fit = momentlab.fit_channel_coefficients(spec, samples, RngStream(seed, (3, 0)))
        target = float(channel_weights(spec).mixing_weight)
        dev = abs(fit.mixing_weight - target) / fit.mixing_weight_sem
        checks.append(_check("channel", f"fit-mixing-weight/{spec.label()}", dev, tol_sems))
    # Monte-Carlo single-matrix channel action against the closed form
    from .channel import apply_channel

    for fam in ("CI", "BDI"):
        if space and fam != space:
            continue
        spec = make_space(fam, dim)
        gen = RngStream(seed, (3, 1)).generator()
        raw = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
        a = (raw + raw.conj().T) / 2
        est = momentlab.mc_channel(spec, a, min(samples, 200_000), RngStream(seed, (3, 2)))
        exact = apply_channel(spec, a)
        dev = float(np.max(np.abs(est.mean - exact) / np.maximum(est.sem, 1e-15)))
        checks.append(_check("channel", f"mc-channel/{spec.label()}", dev, tol_sems))
    return checks


def _suite_moments(space, dim, samples, seed, tol_sems):
    samples = samples or 1_000_000
    checks = []
    worst = 0
    for k in range(1, 7):
        count = len(momentlab.pair_partitions(k))
        expected = 1
        for odd in range(1, 2 * k, 2):
            expected *= odd
        worst = max(worst, abs(count - expected))
    checks.append(_check("moments", "pair-partition-counts/k<=6", float(worst), 0.0))
    if space in (None, "AI"):
        d = dim or 2
        for chk in momentlab.moment_identities_ai(d, samples, RngStream(seed, (4, 0))):
            checks.append(
                _check("moments", f"AI(d={d})/{chk.name}", chk.deviation_sems, tol_sems)
            )
    tensor_spec = make_space(space or "AI", dim or 3)
    tensor = momentlab.mc_moment_tensor(
        tensor_spec, min(samples, 200_000), RngStream(seed, (4, 1))
    )
    d = tensor_spec.dim
    truth = (
        build_superoperator(tensor_spec)
        .reshape(d, d, d, d)
        .transpose(2, 3, 0, 1)
    )
    dev = float(np.max(np.abs(tensor.mean - truth) / np.maximum(tensor.sem, 1e-15)))
    checks.append(
        _check("moments", f"tensor-vs-channel/{tensor_spec.label()}", dev, tol_sems)
    )
    return checks


def _suite_equivariance(space, dim, samples, seed, tol_sems):
    dim = dim or 4
    samples = samples or 100_000
    families = [space] if space else list(ALL_FAMILIES)
    checks = []
    for fi, fam in enumerate(families):
        spec = make_space(fam, dim)
        resid = momentlab.h_equivariance_check(
            spec, n_trials=25, rng=RngStream(seed, (5, fi))
        )
        checks.append(_check("equivariance", f"exact/{spec.label()}", resid, 1e-12))
    mc_specs = []
    if space is None:
        mc_specs = [make_space("AI", 3), make_space("AIII", 4)]
    elif space not in GROUP_FAMILIES:
        mc_specs = [make_space(space, dim)]
    for si, spec in enumerate(mc_specs):
        report = momentlab.k_equivariance_check(
            spec, samples, RngStream(seed, (5, 50 + si))
        )
        checks.append(
            _check("equivariance", f"mc/{spec.label()}", report.max_sems, tol_sems)
        )
    return checks


def run_suite(
    suite: str,
    *,
    space: str | None = None,
    dim: int | None = None,
    samples: int | None = None,
    seed: int = 0,
    tol_sems: float = 5.0,
) -> list[Check]:
    """Run one named suite (or ``all``) and return its check records.

    Parameters
    ----------
    suite : str
        One of :data:`SUITES`.
    space : str, optional
        Restrict family-parameterized checks to one family.
    dim : int, optional
        Override the default dimension of the checks that take one.
    samples : int, optional
        Override the Monte-Carlo sample budget.
    seed : int, optional
        Root seed; the report is deterministic given the seed.
    tol_sems : float, optional
        Threshold, in standard errors, for the statistical checks.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    if space is not None and space not in ALL_FAMILIES:
        raise ValueError(f"unknown family {space!r}")
    if suite == "all":
        checks = []
        for name in SUITES[:-1]:
            checks.extend(
                run_suite(
                    name, space=space, dim=dim, samples=samples, seed=seed, tol_sems=tol_sems
                )
            )
        return checks
    if suite == "haar":
        return _suite_haar(dim, samples, seed, tol_sems)
    if suite == "witness":
        return _suite_witness(space, dim, seed)
    if suite == "channel":
        return _suite_channel(space, dim, samples, seed, tol_sems)
    if suite == "moments":
        return _suite_moments(space, dim, samples, seed, tol_sems)
    return _suite_equivariance(space, dim, samples, seed, tol_sems)
