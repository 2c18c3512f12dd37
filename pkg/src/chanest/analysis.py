"""Average estimation errors: closed forms, exact finite-shot oracles,
Monte Carlo checks, channel-averaged errors, and resource comparisons.

The figure of merit throughout is the mean squared deviation of the estimated
channel parameters, averaged over measurement outcomes.  Every closed form
here is an exact expectation (the estimators are unbiased and affine), so the
enumeration oracle must agree to float rounding; the test suite pins that.

All per-shot errors scale exactly as 1/shots.  The ``*_coef`` helpers return
the shot-independent coefficient (shots times error) and are vectorized over
trailing parameter axes for grid sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln, xlogy

from .channels import (
    BellProbs,
    ChannelParams,
    GenChannelParams,
    bell_probs_belldiag,
    bell_probs_werner,
)
from .estimation import (
    NonIdentifiableError,
    WALSH4,
    check_identifiable,
    separable_estimator,
)
from .measurement import (
    DEFAULT_ENUMERATION_CAP,
    EnumerationCapError,
    SeedSpec,
    all_outcomes,
    n_outcomes,
    outcome_weights,
)
from .states import BellDiagonal

_SINGULAR_TOL = 1e-12

# Syndrome rows of the Walsh inversion that produce (p1, p2, p3).
_P_SYNDROMES = (2, 3, 1)


@dataclass(frozen=True)
class MonteCarloResult:
    """Sample mean and standard error of the squared deviation."""

    mean: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class ErrorReport:
    """One scheme's closed-form error next to its validation estimates."""

    scheme: str
    closed_form: float
    oracle: Optional[float] = None
    monte_carlo: Optional[MonteCarloResult] = None


@dataclass(frozen=True)
class ComparisonPoint:
    """Entangled-vs-separable comparison at one channel point."""

    fidelity: float
    params: ChannelParams
    gain: float
    delta_resources: float
    target_error: float


def _check_shots(n: float) -> float:
    n = float(n)
    if not n >= 1.0:
        raise ValueError(f"shot count must be at least 1, got {n}")
    return n


def _werner_scale(fidelity: float) -> float:
    """The variance amplification (3/(4F-1))^2 of the Werner inversion."""
    f = float(fidelity)
    if abs(4.0 * f - 1.0) <= _SINGULAR_TOL:
        raise NonIdentifiableError(
            "fidelity 1/4 is the maximally mixed probe and carries no channel information"
        )
    return (3.0 / (4.0 * f - 1.0)) ** 2


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def werner_mse_coef(fidelity: float, p: np.ndarray) -> np.ndarray:
    """Shots x error for the Werner scheme, vectorized over p of shape (..., 3).

    Equals (3/(4F-1))^2 * sum_j P_j (1 - P_j) over the three non-singlet
    outcome probabilities.
    """
    scale = _werner_scale(fidelity)
    p = np.asarray(p, dtype=float)
    base = (1.0 - fidelity) / 3.0
    slope = (4.0 * fidelity - 1.0) / 3.0
    probs = base + slope * p
    return scale * (probs * (1.0 - probs)).sum(axis=-1)


def separable_mse_coef(p: np.ndarray) -> np.ndarray:
    """Shots-per-setting x error for the separable scheme, vectorized.

    Equals (3/2) [sum_i p_i(1 - p_i) - p1 p2 - p2 p3 - p1 p3].
    """
    p = np.asarray(p, dtype=float)
    diag = (p * (1.0 - p)).sum(axis=-1)
    cross = (
        p[..., 0] * p[..., 1] + p[..., 1] * p[..., 2] + p[..., 0] * p[..., 2]
    )
    return 1.5 * (diag - cross)


def mse_werner(n_pairs: float, fidelity: float, params: ChannelParams) -> float:
    """Average squared error of the Werner-probe estimator after n_pairs rounds."""
    n = _check_shots(n_pairs)
    probs = bell_probs_werner(fidelity, params).as_array()[:3]
    return _werner_scale(fidelity) * float(math.fsum(probs * (1.0 - probs))) / n


def mse_werner_quadratic(n_pairs: float, fidelity: float, params: ChannelParams) -> float:
    """Werner average error as an explicit quadratic in the channel parameters.

    Termwise expansion of the variance form: the bracket per component is
    p(1-p) + (4/3)(1-F)(p - 1/4)(2p - 1) - (16/9)(1-F)^2 (p - 1/4)^2.
    """
    n = _check_shots(n_pairs)
    scale = _werner_scale(fidelity)
    f = float(fidelity)
    total = 0.0
    for p in params.as_array():
        total += (
            p * (1.0 - p)
            + (4.0 / 3.0) * (1.0 - f) * (p - 0.25) * (2.0 * p - 1.0)
            - (16.0 / 9.0) * (1.0 - f) ** 2 * (p - 0.25) ** 2
        )
    return scale * total / n


def mse_werner_quadratic_plus_variant(n_pairs: float, fidelity: float, params: ChannelParams) -> float:
    """Quadratic expansion with the final term added instead of subtracted.

    Does NOT reproduce the exact finite-shot average for any fidelity below 1;
    kept only as a pinned regression fixture for the sign of the last term.
    """
    n = _check_shots(n_pairs)
    scale = _werner_scale(fidelity)
    f = float(fidelity)
    total = 0.0
    for p in params.as_array():
        total += (
            p * (1.0 - p)
            + (4.0 / 3.0) * (1.0 - f) * (p - 0.25) * (2.0 * p - 1.0)
            + (16.0 / 9.0) * (1.0 - f) ** 2 * (p - 0.25) ** 2
        )
    return scale * total / n


def mse_separable(shots_per_setting: float, params: ChannelParams) -> float:
    """Average squared error of the three-setting separable scheme."""
    m = _check_shots(shots_per_setting)
    return float(separable_mse_coef(params.as_array())) / m


def mse_belldiag(n_pairs: float, state: BellDiagonal, params: ChannelParams) -> float:
    """Average squared error of the Bell-diagonal-probe estimator.

    Exact covariance propagation: the estimator is linear in the outcome
    frequencies, whose multinomial covariance is (diag P - P P^T)/N.
    """
    n = _check_shots(n_pairs)
    what = check_identifiable(state)
    inversion = (WALSH4 * (1.0 / what)) @ WALSH4 / 4.0
    probs = bell_probs_belldiag(state, params).as_array()
    # BellProbs order back to syndrome order for the inversion rows.
    p_syn = probs[np.array([1, 0, 2, 3])]
    cov = (np.diag(p_syn) - np.outer(p_syn, p_syn)) / n
    total = 0.0
    for row_index in _P_SYNDROMES:
        row = inversion[row_index]
        total += float(row @ cov @ row)
    return total


def mse_isotropic(n_pairs: float, d: int, lam: float, params: GenChannelParams) -> float:
    """Average squared error of the isotropic-probe estimator in d dimensions.

    Sums, over every error component except the identity,
    [p(1-p) - (1-lam)(p - 1/d^2)(1 - 2p) - (1-lam)^2 (p - 1/d^2)^2] / (N lam^2).
    """
    n = _check_shots(n_pairs)
    d = int(d)
    if params.d != d:
        raise ValueError(f"params are for d = {params.d}, expected {d}")
    lam = float(lam)
    if abs(lam) <= _SINGULAR_TOL:
        raise NonIdentifiableError(
            "lam = 0 is the maximally mixed probe and carries no channel information"
        )
    mu = 1.0 - lam
    inv_d2 = 1.0 / (d * d)
    p = params.as_flat()[1:]
    terms = p * (1.0 - p) - mu * (p - inv_d2) * (1.0 - 2.0 * p) - mu * mu * (p - inv_d2) ** 2
    return float(math.fsum(terms)) / (n * lam * lam)


# ---------------------------------------------------------------------------
# Exact finite-shot oracle and Monte Carlo validation
# ---------------------------------------------------------------------------


def mse_exact(
    n_shots: int,
    probs: BellProbs,
    estimator: Callable[[np.ndarray], np.ndarray],
    true_params: np.ndarray,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Exact expectation of the squared deviation by full outcome enumeration.

    ``estimator`` must accept a count array of shape (n_outcomes, k); the
    weighted sum uses compensated summation so small-N oracles stay accurate
    to ~1e-14.
    """
    n = int(n_shots)
    parr = probs.as_array()
    k = parr.size
    if n_outcomes(k, n) > cap:
        raise EnumerationCapError(f"{n_outcomes(k, n)} outcomes exceed the cap of {cap}")
    table = all_outcomes(k, n)
    weights = outcome_weights(table, parr)
    estimates = estimator(table.astype(float))
    dev2 = ((estimates - np.asarray(true_params, dtype=float)) ** 2).sum(axis=-1)
    return float(math.fsum(weights * dev2))


def mse_monte_carlo(
    n_shots: int,
    probs: BellProbs,
    estimator: Callable[[np.ndarray], np.ndarray],
    true_params: np.ndarray,
    trials: int,
    seed: SeedSpec,
) -> MonteCarloResult:
    """Monte Carlo estimate of the squared deviation over independent runs."""
    trials = int(trials)
    if trials < 2:
        raise ValueError("trials must be at least 2")
    counts = seed.generator().multinomial(int(n_shots), probs.as_array(), size=trials)
    estimates = estimator(counts.astype(float))
    dev2 = ((estimates - np.asarray(true_params, dtype=float)) ** 2).sum(axis=-1)
    mean = float(dev2.mean())
    stderr = float(dev2.std(ddof=1) / math.sqrt(trials))
    return MonteCarloResult(mean, stderr, trials)


def _separable_plus_probs(params: ChannelParams) -> np.ndarray:
    """Per-setting probability of a +1 outcome: q_a = 1 - (p_b + p_c)."""
    p = params.as_array()
    return 1.0 - (p.sum() - p)


def mse_separable_exact(
    shots_per_setting: int,
    params: ChannelParams,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Exact separable-scheme error over the product of three binomials."""
    m = int(shots_per_setting)
    if m < 1:
        raise ValueError("shots_per_setting must be at least 1")
    if (m + 1) ** 3 > cap:
        raise EnumerationCapError(f"{(m + 1) ** 3} outcomes exceed the cap of {cap}")
    q = _separable_plus_probs(params)
    axis = np.arange(m + 1)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    counts = grid.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_hit = xlogy(counts, q)
        log_miss = xlogy(m - counts, 1.0 - q)
    log_hit = np.where((counts == 0) & (q == 0), 0.0, log_hit)
    log_miss = np.where((m - counts == 0) & (q == 1.0), 0.0, log_miss)
    log_binom = gammaln(m + 1.0) - gammaln(counts + 1.0) - gammaln(m - counts + 1.0)
    weights = np.exp((log_binom + log_hit + log_miss).sum(axis=-1))
    estimates = separable_estimator(m)(counts)
    dev2 = ((estimates - params.as_array()) ** 2).sum(axis=-1)
    return float(math.fsum(weights * dev2))


def mse_separable_monte_carlo(
    shots_per_setting: int,
    params: ChannelParams,
    trials: int,
    seed: SeedSpec,
) -> MonteCarloResult:
    """Monte Carlo check of the separable scheme (independent binomial settings)."""
    m = int(shots_per_setting)
    trials = int(trials)
    if trials < 2:
        raise ValueError("trials must be at least 2")
    q = _separable_plus_probs(params)
    plus = seed.generator().binomial(m, q, size=(trials, 3))
    estimates = separable_estimator(m)(plus.astype(float))
    dev2 = ((estimates - params.as_array()) ** 2).sum(axis=-1)
    mean = float(dev2.mean())
    stderr = float(dev2.std(ddof=1) / math.sqrt(trials))
    return MonteCarloResult(mean, stderr, trials)


# ---------------------------------------------------------------------------
# Channel-averaged error over the parameter simplex
# ---------------------------------------------------------------------------


def simplex_integral_quadratic(fn: Callable[[np.ndarray], float]) -> float:
    """Unnormalized integral over {p >= 0, sum p <= 1} of a quadratic in p.

    Exact for any polynomial of total degree <= 2: the ten coefficients are
    recovered from eleven in-simplex evaluations and integrated termwise with
    the simplex moments  int 1 = 1/6, int p_i = 1/24, int p_i^2 = 1/60,
    int p_i p_j = 1/120.
    """
    e = np.eye(3)
    zero = np.zeros(3)
    constant = fn(zero)
    linear = np.zeros(3)
    square = np.zeros(3)
    for i in range(3):
        half = fn(0.5 * e[i])
        full = fn(e[i])
        linear[i] = 4.0 * half - full - 3.0 * constant
        square[i] = 2.0 * full - 4.0 * half + 2.0 * constant
    cross = {}
    for i in range(3):
        for j in range(i + 1, 3):
            mixed = fn(0.5 * (e[i] + e[j]))
            cross[(i, j)] = 4.0 * (
                mixed
                - constant
                - 0.5 * (linear[i] + linear[j])
                - 0.25 * (square[i] + square[j])
            )
    return (
        constant / 6.0
        + linear.sum() / 24.0
        + square.sum() / 60.0
        + sum(cross.values()) / 120.0
    )


def channel_averaged_mse(state: BellDiagonal, n_pairs: float) -> float:
    """Bell-diagonal average error integrated over all Pauli channels.

    Unnormalized integral of :func:`mse_belldiag` over the parameter simplex;
    in terms of the probe's Walsh coefficients w_t it closes to
    (1/32N) [sum_t 1/w_t^2 - 3/5].
    """
    n = _check_shots(n_pairs)
    what = check_identifiable(state)
    # canonical summation order so weight permutations give bit-identical values
    total = math.fsum(sorted(1.0 / what[t] ** 2 for t in (1, 2, 3)))
    return (total - 0.6) / (32.0 * n)


# ---------------------------------------------------------------------------
# Resource comparisons between the entangled and separable schemes
# ---------------------------------------------------------------------------


def resource_gain(total_qubits: int, fidelity: float, params: ChannelParams) -> float:
    """Error gain of the entangled scheme at a fixed qubit budget.

    Separable error at R/3 shots per setting minus Werner error at R/2
    pairs; positive where entanglement wins.  The budget must divide by 6 so
    both shot counts are integral.
    """
    r = int(total_qubits)
    if r <= 0 or r % 6 != 0:
        raise ValueError(f"total qubit budget must be a positive multiple of 6, got {r}")
    return mse_separable(r // 3, params) - mse_werner(r // 2, fidelity, params)


def gain_times_resource(fidelity: float, p: np.ndarray) -> np.ndarray:
    """Budget-independent gain coefficient R x gain, vectorized over p (..., 3)."""
    return 3.0 * separable_mse_coef(p) - 2.0 * werner_mse_coef(fidelity, p)


def resource_difference(fidelity: float, params: ChannelParams, target_error: float) -> float:
    """Extra qubits the separable scheme needs to hit ``target_error``.

    Solves both 1/shots scalings for the required budgets and returns
    R_separable - R_entangled; the target only rescales the result linearly.
    Returns +/-inf when exactly one scheme reaches zero error, and raises
    when both do (no finite budget is needed by either).
    """
    target = float(target_error)
    if target <= 0.0:
        raise ValueError(f"target_error must be positive, got {target}")
    if params.p1 == 0.0 and params.p2 == 0.0 and params.p3 == 0.0:
        raise ValueError("error-free channel: the separable scheme needs no resources at all")
    coef_sep = float(separable_mse_coef(params.as_array()))
    coef_ent = float(werner_mse_coef(fidelity, params.as_array()))
    if coef_sep == 0.0 and coef_ent == 0.0:
        raise ValueError("both schemes estimate this channel exactly; no finite resource requirement")
    if coef_sep == 0.0:
        return float("-inf")
    if coef_ent == 0.0:
        return float("inf")
    return (3.0 * coef_sep - 2.0 * coef_ent) / target


def equivalent_shots(fidelity: float, n_pairs: float) -> float:
    """Pair count at which the noisy-probe scheme matches the clean probe.

    A Werner probe needs (3/(4F-1))^2 as many pairs as a maximally entangled
    one for the same per-outcome variance; equality only at F = 1.
    """
    n = _check_shots(n_pairs)
    return _werner_scale(fidelity) * n


def simplex_grid(steps: int) -> np.ndarray:
    """All grid points with p_i in {0, 1/steps, ..., 1} and sum <= 1, shape (M, 3)."""
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be at least 1")
    axis = np.arange(steps + 1)
    i, j, k = np.meshgrid(axis, axis, axis, indexing="ij")
    keep = (i + j + k) <= steps
    pts = np.stack([i[keep], j[keep], k[keep]], axis=-1) / steps
    return pts


def _min_gain_deficit(fidelity: float, grid: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimum over channels of 2*A_werner - 3*A_separable (entangled deficit).

    Negative minimum means some channel is estimated better with the
    entangled probe.  Grid seed, then Nelder-Mead polish with an out-of-simplex
    penalty (the optimum sits in the interior, so the penalty never binds).
    """
    vals = 2.0 * werner_mse_coef(fidelity, grid) - 3.0 * separable_mse_coef(grid)
    best = int(np.argmin(vals))
    x0 = grid[best]

    def objective(p: np.ndarray) -> float:
        if np.any(p < 0.0) or p.sum() > 1.0:
            return 1e6 + float(np.abs(p).sum())
        return float(
            2.0 * werner_mse_coef(fidelity, p[None, :])[0]
            - 3.0 * separable_mse_coef(p[None, :])[0]
        )

    res = minimize(objective, x0, method="Nelder-Mead", options={"xatol": 1e-7, "fatol": 1e-12})
    if res.fun <= vals[best]:
        return float(res.fun), np.asarray(res.x, dtype=float)
    return float(vals[best]), x0


def min_useful_fidelity(tolerance: float = 1e-4) -> tuple[float, ChannelParams]:
    """Smallest Werner fidelity at which entanglement can beat the separable scheme.

    Bisects the fidelity against the sign of the best-channel deficit; the
    inner minimization is a simplex grid seed polished by Nelder-Mead.
    Returns the threshold fidelity and the channel where the two schemes tie.
    """
    tolerance = float(tolerance)
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    grid = simplex_grid(50)
    lo, hi = 0.5 + 1e-9, 1.0
    if _min_gain_deficit(hi, grid)[0] > 0.0:
        raise RuntimeError("no fidelity in (0.5, 1] lets entanglement win; search is ill-posed")
    argmin = None
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        value, point = _min_gain_deficit(mid, grid)
        if value <= 0.0:
            hi = mid
            argmin = point
        else:
            lo = mid
    if argmin is None:
        _, argmin = _min_gain_deficit(hi, grid)
    return hi, ChannelParams(*argmin)
