"""Channel-parameter estimators for all four probe schemes.

Every estimator is an affine inversion of the corresponding outcome-probability
map, so all of them are unbiased.  Estimates may come out negative on unlucky
counts; they are NOT clipped by default, because clipping would break the
closed-form error identities validated elsewhere.  Pass ``clip=True`` to get
estimates truncated to [0, 1] for presentation purposes.

The vectorized ``*_estimator`` factories return callables mapping a count
array of shape (..., k) to estimates of shape (..., n_params); the scalar
``estimate_*`` functions wrap them for single outcome records.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import shift_index_map
from .measurement import OutcomeCounts
from .states import BellDiagonal

_SINGULAR_TOL = 1e-12

#: 2-bit Walsh (Hadamard) matrix over syndrome indices; H @ H = 4 I.
WALSH4 = np.array(
    [
        [1, 1, 1, 1],
        [1, -1, 1, -1],
        [1, 1, -1, -1],
        [1, -1, -1, 1],
    ],
    dtype=float,
)

# Rows of the inverse-transformed output that correspond to (p1, p2, p3):
# syndrome indices of the x, y, z errors.
_P_SYNDROMES = np.array([2, 3, 1])

#: Human-readable names of the three nontrivial Walsh coefficients of a
#: Bell-diagonal weight vector, keyed by Walsh index.
WALSH_COEFFICIENT_NAMES = {
    1: "1 - 2*alpha1 - 2*alpha3",
    2: "1 - 2*alpha1 - 2*alpha2",
    3: "1 - 2*alpha2 - 2*alpha3",
}


class NonIdentifiableError(ValueError):
    """The probe state carries no information about some channel direction."""


@dataclass(frozen=True, eq=False)
class ParamEstimate:
    """Estimated channel parameters plus a flag recording optional clipping."""

    values: np.ndarray
    clipped: bool = False

    def __init__(self, values, clipped: bool = False) -> None:
        vals = np.array(values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "clipped", bool(clipped))

    def as_array(self) -> np.ndarray:
        return self.values


@dataclass(frozen=True)
class SeparableCounts:
    """Per-setting tallies of the three-reference-state scheme.

    Setting a prepares the +1 eigenstate of the a-th Pauli axis, sends it
    through the channel, and measures that same axis on ``shots_per_setting``
    independent carriers; ``plus_counts[a]`` is the number of +1 outcomes.
    """

    shots_per_setting: int
    plus_counts: tuple[int, int, int]

    def __post_init__(self) -> None:
        m = int(self.shots_per_setting)
        if m < 1:
            raise ValueError("shots_per_setting must be at least 1")
        plus = tuple(int(c) for c in self.plus_counts)
        if len(plus) != 3:
            raise ValueError("plus_counts must have three entries")
        if any(not 0 <= c <= m for c in plus):
            raise ValueError(f"plus_counts {plus} out of range [0, {m}]")
        object.__setattr__(self, "shots_per_setting", m)
        object.__setattr__(self, "plus_counts", plus)


def _finalize(values: np.ndarray, clip: bool) -> ParamEstimate:
    if clip:
        return ParamEstimate(np.clip(values, 0.0, 1.0), clipped=True)
    return ParamEstimate(values, clipped=False)


def walsh_coefficients(state: BellDiagonal) -> np.ndarray:
    """Walsh transform of the Bell weights in syndrome order.

    Index 0 is always 1; indices 1..3 are the identifiability coefficients
    named in :data:`WALSH_COEFFICIENT_NAMES`.  Written as pair sums (using
    the unit normalization) so that swapping alpha2 and alpha3 permutes the
    coefficients bit-exactly.
    """
    a1, a2, a3, _ = state.alpha
    return np.array(
        [
            1.0,
            1.0 - 2.0 * (a1 + a3),
            1.0 - 2.0 * (a1 + a2),
            1.0 - 2.0 * (a2 + a3),
        ]
    )


def check_identifiable(state: BellDiagonal) -> np.ndarray:
    """Return the Walsh coefficients, or raise naming the vanishing one."""
    what = walsh_coefficients(state)
    for t in (1, 2, 3):
        if abs(what[t]) <= _SINGULAR_TOL:
            raise NonIdentifiableError(
                f"probe state is non-identifiable: {WALSH_COEFFICIENT_NAMES[t]} = 0"
            )
    return what


def werner_estimator(fidelity: float) -> Callable[[np.ndarray], np.ndarray]:
    """Affine inversion for a Werner probe: p_j = (3 i_j/N + F - 1)/(4F - 1)."""
    f = float(fidelity)
    if abs(4.0 * f - 1.0) <= _SINGULAR_TOL:
        raise NonIdentifiableError(
            "fidelity 1/4 is the maximally mixed probe and carries no channel information"
        )

    def estimate(counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)
        n = counts.sum(axis=-1, keepdims=True)
        freqs = counts[..., :3] / n
        return (3.0 * freqs + f - 1.0) / (4.0 * f - 1.0)

    return estimate


def estimate_werner(counts: OutcomeCounts, fidelity: float, *, clip: bool = False) -> ParamEstimate:
    """Estimate (p1, p2, p3) from Bell counts on a Werner probe.

    Count order is (phi-, phi+, psi+, psi-); the first three frequencies
    invert to p1, p2, p3 respectively.
    """
    values = werner_estimator(fidelity)(counts.as_array())
    return _finalize(values, clip)


def separable_estimator(shots_per_setting: int) -> Callable[[np.ndarray], np.ndarray]:
    """Linear inversion for the three-setting separable scheme.

    Each transmitted axis sees <sigma_a> = 1 - 2(p_b + p_c), so with
    s_a = (1 - <sigma_a>est)/2 the parameters invert as
    p1 = (s2 + s3 - s1)/2 and cyclic permutations.
    """
    m = int(shots_per_setting)
    if m < 1:
        raise ValueError("shots_per_setting must be at least 1")

    def estimate(plus_counts: np.ndarray) -> np.ndarray:
        plus = np.asarray(plus_counts, dtype=float)
        s = 1.0 - plus / m
        total = s.sum(axis=-1, keepdims=True)
        return (total - 2.0 * s) / 2.0

    return estimate


def estimate_separable(counts: SeparableCounts, *, clip: bool = False) -> ParamEstimate:
    """Estimate (p1, p2, p3) from the three-setting separable scheme."""
    values = separable_estimator(counts.shots_per_setting)(np.array(counts.plus_counts, dtype=float))
    return _finalize(values, clip)


def belldiag_estimator(state: BellDiagonal) -> Callable[[np.ndarray], np.ndarray]:
    """Walsh deconvolution of the error distribution for a Bell-diagonal probe.

    Frequencies are Walsh-transformed, divided componentwise by the Walsh
    coefficients of the probe weights, and transformed back; reduces to
    :func:`werner_estimator` when the probe is a Werner state.
    """
    what = check_identifiable(state)
    # q_syndrome = (1/4) H diag(1/what) H f_syndrome; rows picked for p1, p2, p3.
    inversion = (WALSH4 * (1.0 / what)) @ WALSH4 / 4.0
    rows = inversion[_P_SYNDROMES]
    # Count order (phi-, phi+, psi+, psi-) -> syndrome order (phi+, phi-, psi+, psi-).
    perm = np.array([1, 0, 2, 3])

    def estimate(counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)
        n = counts.sum(axis=-1, keepdims=True)
        f_syn = counts[..., perm] / n
        return f_syn @ rows.T

    return estimate


def estimate_belldiag(counts: OutcomeCounts, state: BellDiagonal, *, clip: bool = False) -> ParamEstimate:
    """Estimate (p1, p2, p3) from Bell counts on a Bell-diagonal probe."""
    values = belldiag_estimator(state)(counts.as_array())
    return _finalize(values, clip)


def isotropic_estimator(d: int, lam: float) -> Callable[[np.ndarray], np.ndarray]:
    """Affine inversion for an isotropic qudit-pair probe.

    For each error component (m, n) != (0, 0), the matching outcome
    frequency (through the discovered index map) inverts as
    p_mn = (f - (1 - lam)/d^2) / lam.
    """
    d = int(d)
    lam = float(lam)
    if abs(lam) <= _SINGULAR_TOL:
        raise NonIdentifiableError(
            "lam = 0 is the maximally mixed probe and carries no channel information"
        )
    pi = shift_index_map(d)
    offset = (1.0 - lam) / (d * d)
    outcome_for_error = pi[1:]  # error components in flat order, (0, 0) excluded

    def estimate(counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)
        n = counts.sum(axis=-1, keepdims=True)
        freqs = counts / n
        return (freqs[..., outcome_for_error] - offset) / lam

    return estimate


def estimate_isotropic(counts: OutcomeCounts, d: int, lam: float, *, clip: bool = False) -> ParamEstimate:
    """Estimate the d^2 - 1 error probabilities from generalized Bell counts.

    Returned values follow flat row-major (m, n) order with (0, 0) dropped;
    the no-error component is implied by normalization.
    """
    values = isotropic_estimator(d, lam)(counts.as_array())
    return _finalize(values, clip)
