"""Final excitation of a particle shuttled by a moving harmonic trap whose
spring constant carries weak colored noise.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    CA40_MASS,
    HBAR,
    AuxiliaryState,
    OscillatorUnits,
    PhysicalSystem,
    excitation_energy,
    final_energy,
    reference_system,
    to_dimensionless,
)
from .noise import OU, Flicker, NoisePath, alpha, expint_ei, sample_path, spectrum  # noqa: E402
from .sensitivity import Method, Sensitivities, sensitivities  # noqa: E402
from .trajectory import Ansatz, Trajectory, make_cosine3, make_poly5, make_poly6  # noqa: E402

__all__ = [
    "CA40_MASS", "HBAR", "AuxiliaryState", "OscillatorUnits", "PhysicalSystem",
    "excitation_energy", "final_energy", "reference_system", "to_dimensionless",
    "OU", "Flicker", "NoisePath", "alpha", "expint_ei", "sample_path", "spectrum",
    "Method", "Sensitivities", "sensitivities",
    "Ansatz", "Trajectory", "make_cosine3", "make_poly5", "make_poly6",
]
