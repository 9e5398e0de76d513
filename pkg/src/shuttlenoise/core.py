"""Physical parameters, oscillator units and the exact final energy.

Every routine in the package is written with explicit ``hbar``, ``mass`` and
``omega0`` so it is homogeneous in the unit system: pass an SI
:class:`PhysicalSystem` and results come back in SI; pass
``system.oscillator()`` (hbar = m = omega0 = 1) and the same code returns
oscillator-unit values. Numerical integrators convert to oscillator units
internally.

Sensitivities G1, G2 have units of energy/time (hbar*omega0**2 sets the
scale). The noise strength ``lam`` is always given in oscillator units, so the
excitation energy is ``lam**2 * G / omega0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InvalidParameterError, SingularStateError

HBAR = 1.054571817e-34  # J s
CA40_MASS = 6.642e-26  # kg

__all__ = [
    "HBAR",
    "CA40_MASS",
    "PhysicalSystem",
    "OscillatorUnits",
    "AuxiliaryState",
    "reference_system",
    "to_dimensionless",
    "final_energy",
    "excitation_energy",
]


@dataclass(frozen=True)
class PhysicalSystem:
    """Particle in a harmonic trap of mean angular frequency ``omega0``.

    Parameters
    ----------
    mass : float
        Particle mass.
    omega0 : float
        Average trap angular frequency.
    distance : float
        Shuttling distance d.
    mode : int
        Initial transport-mode index n.
    hbar : float
        Reduced Planck constant in the chosen unit system.
    """

    mass: float
    omega0: float
    distance: float = 0.0
    mode: int = 0
    hbar: float = HBAR

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise InvalidParameterError(f"mass must be positive, got {self.mass!r}")
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise InvalidParameterError(f"omega0 must be positive, got {self.omega0!r}")
        if not (self.distance >= 0 and math.isfinite(self.distance)):
            raise InvalidParameterError(f"distance must be >= 0, got {self.distance!r}")
        if int(self.mode) != self.mode or self.mode < 0:
            raise InvalidParameterError(f"mode must be a non-negative integer, got {self.mode!r}")
        if not self.hbar > 0:
            raise InvalidParameterError(f"hbar must be positive, got {self.hbar!r}")

    @property
    def period(self) -> float:
        """Trap period T0 = 2 pi / omega0."""
        return 2.0 * math.pi / self.omega0

    @property
    def length_scale(self) -> float:
        return math.sqrt(self.hbar / (self.mass * self.omega0))

    @property
    def energy_quantum(self) -> float:
        return self.hbar * self.omega0

    @property
    def ground_energy(self) -> float:
        """Noiseless final energy hbar omega0 (n + 1/2)."""
        return self.hbar * self.omega0 * (self.mode + 0.5)

    def units(self) -> "OscillatorUnits":
        return to_dimensionless(self)

    def oscillator(self) -> "PhysicalSystem":
        """The same system expressed in oscillator units."""
        return PhysicalSystem(
            mass=1.0,
            omega0=1.0,
            distance=self.distance / self.length_scale,
            mode=self.mode,
            hbar=1.0,
        )

    def with_(self, **changes) -> "PhysicalSystem":
        return replace(self, **changes)


def reference_system(distance: float = 280e-6, mode: int = 0) -> PhysicalSystem:
    """40Ca+ in a 1.41 MHz trap shuttled over 280 micrometres."""
    return PhysicalSystem(
        mass=CA40_MASS, omega0=2 * math.pi * 1.41e6, distance=distance, mode=mode
    )


@dataclass(frozen=True)
class OscillatorUnits:
    """Scales of the oscillator unit system: lengths, times, energies."""

    length_scale: float
    time_scale: float
    energy_scale: float

    def length(self, x):
        return x / self.length_scale

    def time(self, t):
        return t / self.time_scale

    def energy(self, e):
        return e / self.energy_scale

    def length_si(self, x):
        return x * self.length_scale

    def time_si(self, t):
        return t * self.time_scale

    def energy_si(self, e):
        return e * self.energy_scale


def to_dimensionless(sys: PhysicalSystem) -> OscillatorUnits:
    """Scales that make hbar = m = omega0 = 1."""
    if not (sys.mass > 0 and sys.omega0 > 0):
        raise InvalidParameterError("mass and omega0 must be positive")
    return OscillatorUnits(
        length_scale=sys.length_scale,
        time_scale=1.0 / sys.omega0,
        energy_scale=sys.hbar * sys.omega0,
    )


@dataclass(frozen=True)
class AuxiliaryState:
    """Ermakov/Newton auxiliary variables at one instant."""

    rho: float
    rho_dot: float
    qc: float
    qc_dot: float


def excitation_energy(state: AuxiliaryState, sys: PhysicalSystem) -> float:
    """Final energy minus hbar omega0 (n + 1/2).

    Uses (1 + rho^4)/rho^2 = 2 + (rho - 1/rho)^2 so small excitations do not
    drown in cancellation against the ground energy.
    """
    rho = state.rho
    if not rho > 0:
        raise SingularStateError(f"rho must be positive at the final time, got {rho!r}")
    m, w, hbar = sys.mass, sys.omega0, sys.hbar
    two_n1 = 2 * sys.mode + 1
    dq = state.qc - sys.distance
    return (
        0.5 * m * w * w * dq * dq
        + 0.25 * hbar * w * two_n1 * (rho - 1.0 / rho) ** 2
        + 0.5 * m * state.qc_dot ** 2
        + 0.25 * hbar / w * two_n1 * state.rho_dot ** 2
    )


def final_energy(state: AuxiliaryState, sys: PhysicalSystem) -> float:
    """Energy expectation of the n-th transport mode in the final trap."""
    return sys.ground_energy + excitation_energy(state, sys)
