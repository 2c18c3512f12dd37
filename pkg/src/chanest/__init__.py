"""Pauli-channel estimation with noisy entangled probes.

Core layers:

- :mod:`chanest.linalg` - dense complex matrix helpers and density checks
- :mod:`chanest.states` - Bell / Werner / Bell-diagonal / isotropic probes
- :mod:`chanest.channels` - Pauli channels and Bell-outcome probability maps
- :mod:`chanest.measurement` - seeded multinomial sampling, outcome enumeration
- :mod:`chanest.estimation` - affine inversion estimators for all schemes
- :mod:`chanest.analysis` - closed-form errors, exact oracles, resource analysis
- :mod:`chanest.cli` - CSV sweeps and threshold reports
"""

from .channels import BellProbs, ChannelParams, GenChannelParams
from .estimation import NonIdentifiableError, ParamEstimate, SeparableCounts
from .measurement import OutcomeCounts, SeedSpec
from .states import BellDiagonal, BellLabel, IsotropicState, isotropic, werner

__all__ = [
    "BellDiagonal",
    "BellLabel",
    "BellProbs",
    "ChannelParams",
    "GenChannelParams",
    "IsotropicState",
    "NonIdentifiableError",
    "OutcomeCounts",
    "ParamEstimate",
    "SeedSpec",
    "SeparableCounts",
    "isotropic",
    "werner",
]

__version__ = "0.1.0"
