"""Parameter records for the two-bath qubit junction.

Unit system: hbar = k_B = 1 and the qubit half-splitting ``delta`` is the
energy unit (conventionally 1). Temperatures, mode frequencies, couplings
and cutoffs are all expressed in these units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .linalg import TruncationError

DEFAULT_OMEGA = 8.0
DEFAULT_GAMMA = 0.05 / math.pi
DEFAULT_CUTOFF = 1000.0
DEFAULT_T_LEFT = 2.0
DEFAULT_T_RIGHT = 1.0
DEFAULT_TRUNCATION = 6

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BathSpec:
    """One structured bosonic bath.

    temperature : bath temperature T
    omega       : peak / collective-mode frequency of the bath spectrum
    gamma       : dimensionless width (residual-coupling) parameter
    lam         : system-bath coupling energy
    cutoff      : exponential cutoff of the residual Ohmic spectrum
    angle       : mixing angle of the system coupling operator,
                  cos(angle)*sigma_z + sin(angle)*sigma_x; stored mod 2*pi
    """

    label: str
    temperature: float
    omega: float = DEFAULT_OMEGA
    gamma: float = DEFAULT_GAMMA
    lam: float = 0.1
    cutoff: float = DEFAULT_CUTOFF
    angle: float = 0.0

    def __post_init__(self):
        if self.label not in ("L", "R"):
            raise ValueError(f"label must be 'L' or 'R', got {self.label!r}")
        for name in ("temperature", "omega", "gamma", "cutoff"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        object.__setattr__(self, "angle", float(self.angle) % _TWO_PI)


@dataclass(frozen=True)
class JunctionSpec:
    """Full physical problem: qubit, two baths, collective-mode truncation."""

    delta: float
    left: BathSpec
    right: BathSpec
    truncation: int

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if int(self.truncation) != self.truncation or self.truncation < 2:
            raise TruncationError(
                f"truncation must be an integer >= 2, got {self.truncation}"
            )
        if self.left.label != "L":
            raise ValueError("left bath must carry label 'L'")
        if self.right.label != "R":
            raise ValueError("right bath must carry label 'R'")

    @property
    def dim(self) -> int:
        """Hilbert-space dimension of the extended system, 2 M^2."""
        return 2 * self.truncation**2

    def with_couplings(self, lam: float) -> "JunctionSpec":
        """Copy with both coupling energies set to ``lam``."""
        return replace(
            self,
            left=replace(self.left, lam=lam),
            right=replace(self.right, lam=lam),
        )

    def with_swapped_temperatures(self) -> "JunctionSpec":
        """Copy with the two bath temperatures exchanged."""
        return replace(
            self,
            left=replace(self.left, temperature=self.right.temperature),
            right=replace(self.right, temperature=self.left.temperature),
        )


def standard_junction(
    lam: float = 0.1,
    theta: float = math.pi / 2,
    phi: float = math.pi / 2,
    t_left: float = DEFAULT_T_LEFT,
    t_right: float = DEFAULT_T_RIGHT,
    omega: float = DEFAULT_OMEGA,
    gamma: float = DEFAULT_GAMMA,
    truncation: int = DEFAULT_TRUNCATION,
    delta: float = 1.0,
    cutoff: float = DEFAULT_CUTOFF,
) -> JunctionSpec:
    """Symmetric two-bath junction with the usual defaults (hot bath left)."""
    left = BathSpec("L", t_left, omega, gamma, lam, cutoff, theta)
    right = BathSpec("R", t_right, omega, gamma, lam, cutoff, phi)
    return JunctionSpec(delta=delta, left=left, right=right, truncation=truncation)
