"""Hydrogen bound spectrum and revival-time analysis.

Atomic units throughout (hbar = m_e = e = 1): energies in Hartree, times
in hbar/Hartree, lengths in Bohr radii.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def energy(n) -> float:
    """Bound-level energy -1/(2 n^2) for principal quantum number n >= 1."""
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1):
        raise ValueError("principal quantum number must be >= 1")
    out = -0.5 / (n_arr * n_arr)
    return float(out) if np.isscalar(n) else out


def degeneracy(n: int) -> int:
    """Multiplicity n^2 of the level with principal quantum number n."""
    if n < 1:
        raise ValueError("principal quantum number must be >= 1")
    return n * n


@dataclass(frozen=True)
class EnergyExpansion:
    """Cubic Taylor expansion of the spectrum about a (real) center level.

    energy(n) ~ c0 + c1 (n - center) + c2 (n - center)^2 + c3 (n - center)^3
    """

    center: float
    c0: float
    c1: float
    c2: float
    c3: float

    def evaluate(self, n, order: int = 3):
        d = np.asarray(n, dtype=float) - self.center
        coeffs = [self.c0, self.c1, self.c2, self.c3][: order + 1]
        out = sum(c * d**k for k, c in enumerate(coeffs))
        return float(out) if np.isscalar(n) else out


def energy_expansion(center: float) -> EnergyExpansion:
    """Expansion coefficients of -1/(2 n^2) about n = center."""
    if center <= 0:
        raise ValueError("expansion center must be positive")
    return EnergyExpansion(
        center=center,
        c0=-0.5 / center**2,
        c1=1.0 / center**3,
        c2=-1.5 / center**4,
        c3=2.0 / center**5,
    )


def revival_time(mean_n: float) -> float:
    """Full-revival time (2 pi / 3) <n>^4 for a packet centered at <n>.

    The quadratic dephasing accumulated by level n relative to the packet
    center is an integer multiple of 2 pi at this time.
    """
    if mean_n <= 0:
        raise ValueError("mean level must be positive")
    return (2.0 * math.pi / 3.0) * mean_n**4


def revival_ratio(mean_n: float, spread_n: float) -> float:
    """Cubic-dephasing figure of merit 4 pi (dn)^3 / (3 <n>).

    Values well below 1 indicate the cubic spectral term stays small across
    the packet, so the revival at the full revival time is clean.
    """
    if mean_n <= 0 or spread_n < 0:
        raise ValueError("mean must be positive and spread nonnegative")
    return 4.0 * math.pi * spread_n**3 / (3.0 * mean_n)


#: fractions of the revival time at which partial reassembly occurs
REVIVAL_FRACTIONS = (
    ("0", 0.0),
    ("Tr/5", 1.0 / 5.0),
    ("Tr/4", 1.0 / 4.0),
    ("Tr/3", 1.0 / 3.0),
    ("Tr/2", 1.0 / 2.0),
    ("Tr", 1.0),
)


def fractional_revival_times(t_revival: float) -> list[tuple[str, float]]:
    """The standard probe times: 0 and T_r times 1/5, 1/4, 1/3, 1/2, 1."""
    if t_revival <= 0:
        raise ValueError("revival time must be positive")
    return [(label, frac * t_revival) for label, frac in REVIVAL_FRACTIONS]


def classical_period(mean_n: float) -> float:
    """Kepler orbital period 2 pi <n>^3 of the correspondence-limit orbit."""
    if mean_n <= 0:
        raise ValueError("mean level must be positive")
    return 2.0 * math.pi * mean_n**3
