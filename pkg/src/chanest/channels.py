"""Pauli channels on one half of an entangled pair, and their Bell-outcome maps.

The channel acts on the first tensor factor only (the transmitted qubit; the
partner qubit stays untouched).  For Bell-diagonal inputs the whole effect is
a group convolution of the error distribution with the Bell weights in
syndrome space, so the closed-form probability maps below do O(k^2) scalar
work; dense matrix application is also provided and doubles as the reference
route in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import check_density, dagger, kron
from .states import BELL_LABELS, BellDiagonal, bell_state, gen_bell_state

_SUM_TOL = 1e-12
_PROB_SLACK = 1e-12

#: Pauli matrices keyed by error index: 1 = bit flip, 2 = bit+phase flip,
#: 3 = phase flip, 4 = identity (no error).
SIGMA = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
    4: np.eye(2, dtype=complex),
}


@dataclass(frozen=True)
class ChannelParams:
    """Qubit Pauli error probabilities (p1, p2, p3); no-error weight is p4 = 1 - p1 - p2 - p3."""

    p1: float
    p2: float
    p3: float

    def __post_init__(self) -> None:
        p = (float(self.p1), float(self.p2), float(self.p3))
        if any(x < 0.0 for x in p):
            raise ValueError(f"error probabilities must be non-negative, got {p}")
        if math.fsum(p) > 1.0 + _SUM_TOL:
            raise ValueError(f"error probabilities sum to {math.fsum(p)} > 1")
        object.__setattr__(self, "p1", p[0])
        object.__setattr__(self, "p2", p[1])
        object.__setattr__(self, "p3", p[2])

    @property
    def p4(self) -> float:
        return 1.0 - self.p1 - self.p2 - self.p3

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3], dtype=float)

    def syndrome_dist(self) -> np.ndarray:
        """Error distribution in syndrome-index order (identity, z, x, y)."""
        return np.array([self.p4, self.p3, self.p1, self.p2], dtype=float)


@dataclass(frozen=True, eq=False)
class GenChannelParams:
    """d-level Pauli error probabilities p[m, n]; p[0, 0] is the no-error weight."""

    d: int
    probs: np.ndarray

    def __init__(self, d: int, probs) -> None:
        d = int(d)
        if d < 2:
            raise ValueError("d must be at least 2")
        mat = np.array(probs, dtype=float)
        if mat.shape != (d, d):
            raise ValueError(f"probs must have shape ({d}, {d}), got {mat.shape}")
        if np.any(mat < 0.0):
            raise ValueError("error probabilities must be non-negative")
        if abs(math.fsum(mat.ravel()) - 1.0) > _SUM_TOL:
            raise ValueError(f"error probabilities must sum to 1, got {math.fsum(mat.ravel())}")
        mat.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "probs", mat)

    def as_flat(self) -> np.ndarray:
        """Row-major flattening, index m*d + n."""
        return self.probs.ravel()


@dataclass(frozen=True, eq=False)
class BellProbs:
    """Outcome distribution of a (generalized) Bell measurement.

    Qubit case: four probabilities in the order (phi-, phi+, psi+, psi-).
    d-level case: d^2 probabilities in row-major (m, n) order.
    """

    values: np.ndarray

    def __init__(self, values) -> None:
        vals = np.array(values, dtype=float)
        if vals.ndim != 1 or vals.size < 4:
            raise ValueError("values must be a flat vector of at least 4 probabilities")
        if np.any(vals < -_PROB_SLACK) or np.any(vals > 1.0 + _PROB_SLACK):
            raise ValueError(f"probabilities out of [0, 1]: {vals}")
        if abs(math.fsum(vals) - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities must sum to 1, got {math.fsum(vals)}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    def as_array(self) -> np.ndarray:
        return self.values


# Permutation between the BellProbs order (phi-, phi+, psi+, psi-) and
# syndrome-index order (phi+, phi-, psi+, psi-); it is its own inverse.
_BELLPROBS_TO_SYNDROME = np.array([1, 0, 2, 3])


def syndrome_convolve(q: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Group convolution over Z2 x Z2: out[s] = sum_e q[e] * a[s ^ e]."""
    out = np.zeros(4, dtype=float)
    for s in range(4):
        out[s] = math.fsum(q[e] * a[s ^ e] for e in range(4))
    return out


def apply_pauli(rho: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Apply the qubit Pauli channel to the first qubit of a two-qubit state."""
    rho = check_density(rho, "input state")
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit state, got shape {rho.shape}")
    weights = {1: params.p1, 2: params.p2, 3: params.p3, 4: params.p4}
    out = np.zeros_like(rho)
    eye = np.eye(2, dtype=complex)
    for i, w in weights.items():
        op = kron(SIGMA[i], eye)
        out += w * (op @ rho @ dagger(op))
    return check_density(out, "channel output")


def bell_probs_werner(fidelity: float, params: ChannelParams) -> BellProbs:
    """Bell-measurement outcome probabilities for a Werner probe.

    P(phi-) = (1-F)/3 + (4F-1)/3 * p1, and cyclically for phi+ (p2) and
    psi+ (p3); the singlet probability carries the remainder.
    """
    f = float(fidelity)
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {f}")
    base = (1.0 - f) / 3.0
    slope = (4.0 * f - 1.0) / 3.0
    p = params.as_array()
    first_three = base + slope * p
    singlet = f - slope * float(p.sum())
    return BellProbs(np.append(first_three, singlet))


def bell_probs_belldiag(state: BellDiagonal, params: ChannelParams) -> BellProbs:
    """Bell-measurement outcome probabilities for a Bell-diagonal probe.

    Computed as the syndrome-space convolution of the error distribution
    with the Bell weights; reduces to :func:`bell_probs_werner` when the
    probe is a Werner state.
    """
    p_syn = syndrome_convolve(params.syndrome_dist(), state.syndrome_weights())
    return BellProbs(p_syn[_BELLPROBS_TO_SYNDROME])


def bell_measurement_probs(rho: np.ndarray) -> BellProbs:
    """Direct projection route: <bell_s| rho |bell_s> for all four Bell states.

    Reference implementation used to cross-check the closed-form maps.
    """
    rho = check_density(rho, "rho")
    # BellProbs order (phi-, phi+, psi+, psi-) as labels.
    labels = [BELL_LABELS[1], BELL_LABELS[0], BELL_LABELS[2], BELL_LABELS[3]]
    vals = []
    for label in labels:
        vec = bell_state(label)
        vals.append(float(np.real(vec.conj() @ rho @ vec)))
    return BellProbs(vals)


def gen_bell_measurement_probs(rho: np.ndarray, d: int) -> BellProbs:
    """Direct projection route onto the generalized Bell basis, row-major (m, n).

    Reference implementation used to cross-check :func:`bell_probs_isotropic`.
    """
    d = int(d)
    rho = check_density(rho, "rho")
    if rho.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d}x{d * d} pair state, got shape {rho.shape}")
    vals = []
    for m in range(d):
        for n in range(d):
            vec = gen_bell_state(d, m, n)
            vals.append(float(np.real(vec.conj() @ rho @ vec)))
    return BellProbs(vals)


def gen_pauli_unitary(d: int, m: int, n: int) -> np.ndarray:
    """Generalized Pauli error operator U[m,n] = sum_k w^(kn) |k+m><k|."""
    d = int(d)
    if not (0 <= m < d and 0 <= n < d):
        raise ValueError(f"indices (m, n) = ({m}, {n}) out of range for d = {d}")
    u = np.zeros((d, d), dtype=complex)
    for k in range(d):
        u[(k + m) % d, k] = np.exp(2j * np.pi * k * n / d)
    return u


def apply_gen_pauli(rho: np.ndarray, d: int, params: GenChannelParams) -> np.ndarray:
    """Apply the d-level Pauli channel to the first qudit of a pair state."""
    d = int(d)
    if params.d != d:
        raise ValueError(f"params are for d = {params.d}, expected {d}")
    rho = check_density(rho, "input state")
    if rho.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d}x{d * d} pair state, got shape {rho.shape}")
    eye = np.eye(d, dtype=complex)
    out = np.zeros_like(rho)
    for m in range(d):
        for n in range(d):
            w = params.probs[m, n]
            if w == 0.0:
                continue
            op = kron(gen_pauli_unitary(d, m, n), eye)
            out += w * (op @ rho @ dagger(op))
    return check_density(out, "channel output")


@lru_cache(maxsize=None)
def shift_index_map(d: int) -> np.ndarray:
    """Where each error operator sends the maximally entangled pair state.

    Entry ``pi[m*d + n]`` is the flat index (m', n') with
    (U[m,n] x 1)|psi_00> proportional to |psi_m'n'>.  Discovered numerically
    from overlaps rather than assumed from an index convention; the map is a
    bijection fixing (0, 0).
    """
    d = int(d)
    psi00 = gen_bell_state(d, 0, 0)
    basis = np.array([gen_bell_state(d, m, n) for m in range(d) for n in range(d)])
    eye = np.eye(d, dtype=complex)
    pi = np.full(d * d, -1, dtype=int)
    for m in range(d):
        for n in range(d):
            moved = kron(gen_pauli_unitary(d, m, n), eye) @ psi00
            overlaps = np.abs(basis.conj() @ moved)
            hits = np.flatnonzero(overlaps > 1.0 - 1e-9)
            if hits.size != 1:
                raise RuntimeError(f"error operator ({m}, {n}) does not map onto a unique basis state")
            pi[m * d + n] = int(hits[0])
    if sorted(pi.tolist()) != list(range(d * d)) or pi[0] != 0:
        raise RuntimeError("discovered index map is not a bijection fixing (0, 0)")
    pi.setflags(write=False)
    return pi


@lru_cache(maxsize=None)
def qubit_pauli_index_map() -> dict[tuple[int, int], int]:
    """Match the d = 2 error operators U[m,n] to Pauli matrices up to phase.

    Returns a mapping (m, n) -> Pauli index in {1, 2, 3, 4}; discovered
    numerically from |tr(sigma_i^dag U[m,n])| = 2.
    """
    table: dict[tuple[int, int], int] = {}
    for m in range(2):
        for n in range(2):
            u = gen_pauli_unitary(2, m, n)
            matches = [i for i, sig in SIGMA.items() if abs(np.trace(dagger(sig) @ u)) > 2.0 - 1e-9]
            if len(matches) != 1:
                raise RuntimeError(f"U[{m},{n}] does not match a unique Pauli")
            table[(m, n)] = matches[0]
    return table


def gen_params_from_qubit(params: ChannelParams) -> GenChannelParams:
    """Lift qubit channel parameters to the d = 2 generalized form."""
    table = qubit_pauli_index_map()
    weights = {1: params.p1, 2: params.p2, 3: params.p3, 4: params.p4}
    mat = np.zeros((2, 2), dtype=float)
    for (m, n), i in table.items():
        mat[m, n] = weights[i]
    return GenChannelParams(2, mat)


def bell_probs_isotropic(d: int, lam: float, params: GenChannelParams) -> BellProbs:
    """Generalized Bell-measurement probabilities for an isotropic probe.

    The maximally mixed part spreads uniformly; the entangled part follows
    the discovered index map, giving
    P[s] = (1 - lam)/d^2 + lam * p[pi^{-1}(s)].
    """
    d = int(d)
    if params.d != d:
        raise ValueError(f"params are for d = {params.d}, expected {d}")
    lam = float(lam)
    lo = -1.0 / (d * d - 1)
    if not lo - _SUM_TOL <= lam <= 1.0 + _SUM_TOL:
        raise ValueError(f"lam = {lam} outside the physical range [{lo}, 1]")
    pi = shift_index_map(d)
    inv = np.empty_like(pi)
    inv[pi] = np.arange(pi.size)
    flat = params.as_flat()
    vals = (1.0 - lam) / (d * d) + lam * flat[inv]
    return BellProbs(vals)
