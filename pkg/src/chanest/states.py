"""Bell, Werner, Bell-diagonal, and d-level isotropic probe states.

Label conventions
-----------------
Two-qubit Bell states carry a two-bit syndrome label (bit_flip, phase_flip):

    phi+ = (0, 0)    phi- = (0, 1)    psi+ = (1, 0)    psi- = (1, 1)

A Pauli error on the first qubit moves Bell states by XOR on the syndrome
(up to a global phase): sigma_x adds (1, 0), sigma_z adds (0, 1), sigma_y
adds (1, 1).  The error channel therefore acts on Bell-diagonal weights as a
group convolution over Z2 x Z2, which the estimation layer inverts with a
2-bit Walsh transform.

Bell-diagonal coefficient vectors use the (psi-, psi+, phi-, phi+) order;
``BellDiagonal.syndrome_weights`` converts to syndrome order (index
2*bit_flip + phase_flip) for the convolution machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import check_density, min_eigenvalue, partial_transpose

#: Werner states are nonseparable (negative partial transpose) above this
#: singlet fidelity.
SEPARABILITY_THRESHOLD = 0.5

#: Werner states violate the CHSH inequality above this singlet fidelity.
CHSH_THRESHOLD = (3.0 * math.sqrt(2.0) + 2.0) / 8.0

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class BellLabel:
    """Two-bit syndrome label of a Bell state."""

    bit_flip: int
    phase_flip: int

    def __post_init__(self) -> None:
        if self.bit_flip not in (0, 1) or self.phase_flip not in (0, 1):
            raise ValueError("bit_flip and phase_flip must each be 0 or 1")

    @property
    def index(self) -> int:
        """Syndrome index 2*bit_flip + phase_flip."""
        return 2 * self.bit_flip + self.phase_flip

    def __xor__(self, other: "BellLabel") -> "BellLabel":
        return BellLabel(self.bit_flip ^ other.bit_flip, self.phase_flip ^ other.phase_flip)


#: All four labels in syndrome-index order: phi+, phi-, psi+, psi-.
BELL_LABELS = tuple(BellLabel(b, f) for b in (0, 1) for f in (0, 1))

#: Syndrome labels of the Pauli errors, keyed by Pauli index (1=x, 2=y, 3=z, 4=identity).
PAULI_SYNDROMES = {
    1: BellLabel(1, 0),
    2: BellLabel(1, 1),
    3: BellLabel(0, 1),
    4: BellLabel(0, 0),
}


def bell_state(label: BellLabel) -> np.ndarray:
    """State vector of the labelled Bell state in the |ab> product basis."""
    vec = np.zeros(4, dtype=complex)
    sign = -1.0 if label.phase_flip else 1.0
    if label.bit_flip:
        vec[1] = 1.0  # |01>
        vec[2] = sign  # |10>
    else:
        vec[0] = 1.0  # |00>
        vec[3] = sign  # |11>
    return vec / math.sqrt(2.0)


@dataclass(frozen=True)
class BellDiagonal:
    """Two-qubit state diagonal in the Bell basis.

    ``alpha`` holds the four Bell weights in the order
    (psi-, psi+, phi-, phi+); all entries are probabilities summing to 1.
    """

    alpha: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        alpha = tuple(float(a) for a in self.alpha)
        if len(alpha) != 4:
            raise ValueError("alpha must have exactly four entries")
        if any(a < -_SUM_TOL for a in alpha):
            raise ValueError(f"alpha entries must be non-negative, got {alpha}")
        if abs(math.fsum(alpha) - 1.0) > _SUM_TOL:
            raise ValueError(f"alpha must sum to 1, got {math.fsum(alpha)}")
        object.__setattr__(self, "alpha", alpha)

    def syndrome_weights(self) -> np.ndarray:
        """Weights reordered to syndrome-index order (phi+, phi-, psi+, psi-)."""
        return np.array(self.alpha[::-1], dtype=float)

    @property
    def fidelity(self) -> float:
        """Overlap with the singlet psi-."""
        return self.alpha[0]

    def to_density(self) -> np.ndarray:
        """Dense 4x4 density operator sum_s alpha_s |bell_s><bell_s|."""
        # alpha order (psi-, psi+, phi-, phi+) maps to labels (1,1),(1,0),(0,1),(0,0).
        labels = (BellLabel(1, 1), BellLabel(1, 0), BellLabel(0, 1), BellLabel(0, 0))
        rho = np.zeros((4, 4), dtype=complex)
        for weight, label in zip(self.alpha, labels):
            vec = bell_state(label)
            rho += weight * np.outer(vec, vec.conj())
        return check_density(rho, "bell-diagonal state")


def from_syndrome_weights(weights: np.ndarray) -> BellDiagonal:
    """Inverse of :meth:`BellDiagonal.syndrome_weights`."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,):
        raise ValueError("syndrome weights must be a length-4 vector")
    return BellDiagonal(tuple(w[::-1]))


def werner(fidelity: float) -> BellDiagonal:
    """Werner state: singlet weight F, the other three Bell weights (1-F)/3."""
    f = float(fidelity)
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {f}")
    rest = (1.0 - f) / 3.0
    return BellDiagonal((f, rest, rest, rest))


def is_nonseparable(state: BellDiagonal) -> bool:
    """Partial-transpose (PPT) test: True iff the state is entangled.

    For Bell-diagonal states this coincides with max(alpha) > 1/2.
    """
    pt = partial_transpose(state.to_density(), 2)
    return min_eigenvalue(pt) < -1e-10


def chsh_violated(fidelity: float) -> bool:
    """Whether a Werner state of this fidelity violates the CHSH inequality."""
    f = float(fidelity)
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {f}")
    return f > CHSH_THRESHOLD


def gen_bell_state(d: int, m: int, n: int) -> np.ndarray:
    """Maximally entangled qudit-pair state (1/sqrt d) sum_j w^(jn) |j>|j+m>.

    The d^2 states for (m, n) in {0..d-1}^2 form an orthonormal basis; at
    d = 2 they reproduce the qubit Bell states up to relabelling.
    """
    d = int(d)
    if d < 2:
        raise ValueError("d must be at least 2")
    if not (0 <= m < d and 0 <= n < d):
        raise ValueError(f"indices (m, n) = ({m}, {n}) out of range for d = {d}")
    vec = np.zeros(d * d, dtype=complex)
    for j in range(d):
        phase = np.exp(2j * np.pi * j * n / d)
        vec[j * d + (j + m) % d] = phase
    return vec / math.sqrt(d)


@dataclass(frozen=True)
class IsotropicState:
    """d-level analogue of the Werner state: lam-mixture of the maximally
    entangled pair state with the maximally mixed state.

    Positivity requires lam in [-1/(d^2-1), 1]; the mixing weight relates to
    the entangled-state fidelity by F = lam + (1-lam)/d^2.
    """

    d: int
    lam: float

    def __post_init__(self) -> None:
        d = int(self.d)
        if d < 2:
            raise ValueError("d must be at least 2")
        lo = -1.0 / (d * d - 1)
        if not lo - _SUM_TOL <= self.lam <= 1.0 + _SUM_TOL:
            raise ValueError(f"lam = {self.lam} outside the physical range [{lo}, 1]")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def fidelity(self) -> float:
        return self.lam + (1.0 - self.lam) / (self.d * self.d)

    def to_density(self) -> np.ndarray:
        d2 = self.d * self.d
        vec = gen_bell_state(self.d, 0, 0)
        rho = (1.0 - self.lam) / d2 * np.eye(d2, dtype=complex)
        rho += self.lam * np.outer(vec, vec.conj())
        return check_density(rho, "isotropic state")


def isotropic(d: int, lam: float) -> IsotropicState:
    """Construct an isotropic state, validating the positivity range."""
    return IsotropicState(d, lam)
