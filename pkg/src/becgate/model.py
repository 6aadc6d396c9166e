"""Protocol parameters, spin ladders, spin coherent states, sector frequencies.

Internal unit convention: hbar = 1, every energy is an angular frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi

_REL_TOL = 1e-12


@dataclass(frozen=True)
class ProtocolParams:
    """Drive and coupling constants of the two-spin cavity protocol.

    ``detuning_Delta = 2 * coupling_G * integer_n`` together with
    ``duration_T = 2 pi / coupling_G`` puts every spin sector at an even
    harmonic of the drive period, which is what makes the displacement
    loop close exactly for odd ``integer_m``.
    """

    coupling_G: float
    detuning_Delta: float
    omega0: float
    drive_amp_F0: float
    integer_n: int
    integer_m: int
    duration_T: float

    def __post_init__(self):
        if self.coupling_G <= 0.0:
            raise ValidationError(f"coupling_G must be positive, got {self.coupling_G}")
        if self.integer_m != int(self.integer_m) or self.integer_m < 1:
            raise ValidationError(f"integer_m must be a positive integer, got {self.integer_m}")
        if self.integer_m % 2 == 0:
            raise ValidationError(
                f"integer_m must be odd, got {self.integer_m}: even harmonics leave the "
                "cavity displaced at the end of the pulse"
            )
        if self.duration_T <= 0.0:
            raise ValidationError(f"duration_T must be positive, got {self.duration_T}")

    @classmethod
    def closed(cls, coupling_G, integer_n, integer_m, drive_amp_F0, omega0=0.0):
        """Parameters satisfying the exact-closure conditions."""
        return cls(
            coupling_G=float(coupling_G),
            detuning_Delta=2.0 * float(coupling_G) * int(integer_n),
            omega0=float(omega0),
            drive_amp_F0=float(drive_amp_F0),
            integer_n=int(integer_n),
            integer_m=int(integer_m),
            duration_T=TWO_PI / float(coupling_G),
        )

    @property
    def is_exact_closure(self):
        """True when Delta and T satisfy the closure conditions to 1e-12."""
        target = 2.0 * self.coupling_G * self.integer_n
        scale = max(abs(self.detuning_Delta), abs(target), self.coupling_G)
        if abs(self.detuning_Delta - target) > _REL_TOL * scale:
            return False
        t_target = TWO_PI / self.coupling_G
        return abs(self.duration_T - t_target) <= _REL_TOL * t_target


@dataclass(frozen=True)
class SpinSector:
    """One branch (s1, s2) of the joint S^z superposition."""

    s1: int
    s2: int

    @property
    def total(self):
        return self.s1 + self.s2

    def validate(self, n_atoms_1, n_atoms_2):
        for s, n in ((self.s1, n_atoms_1), (self.s2, n_atoms_2)):
            if abs(s) > n or (s - n) % 2 != 0:
                raise ValidationError(
                    f"sector {(self.s1, self.s2)} invalid for atom numbers "
                    f"({n_atoms_1}, {n_atoms_2})"
                )
        return self


def spin_levels(n_atoms):
    """S^z eigenvalues of N two-level atoms: [-N, -N+2, ..., N]."""
    n_atoms = int(n_atoms)
    if n_atoms < 0:
        raise ValidationError(f"atom number must be non-negative, got {n_atoms}")
    return np.arange(-n_atoms, n_atoms + 1, 2)


def all_sectors(n_atoms_1, n_atoms_2):
    """All (s1, s2) sectors, s1-major, s2-minor ascending."""
    return [
        SpinSector(int(s1), int(s2))
        for s1 in spin_levels(n_atoms_1)
        for s2 in spin_levels(n_atoms_2)
    ]


@dataclass(frozen=True, eq=False)
class SpinState:
    """Normalized amplitudes over the S^z ladder of one collective spin."""

    atom_count_N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        if self.atom_count_N < 0:
            raise ValidationError(f"atom number must be non-negative, got {self.atom_count_N}")
        if amps.shape != (self.atom_count_N + 1,):
            raise ValidationError(
                f"need {self.atom_count_N + 1} amplitudes, got shape {amps.shape}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > 1e-12:
            raise ValidationError(f"state not normalized: sum |psi|^2 = {norm_sq!r}")

    @property
    def levels(self):
        return spin_levels(self.atom_count_N)


def coherent_spin_state(n_atoms, theta, phi=0.0):
    """Spin coherent state with all atoms along the (theta, phi) Bloch axis.

    Level k (S^z = 2k - N) carries sqrt(C(N,k)) cos(theta/2)^(N-k)
    sin(theta/2)^k e^(i k phi); theta = pi/2, phi = 0 is the maximal-S^x
    state used as the standard initial condition.
    """
    n_atoms = int(n_atoms)
    if n_atoms < 0:
        raise ValidationError(f"atom number must be non-negative, got {n_atoms}")
    k = np.arange(n_atoms + 1)
    binom = np.array([math.comb(n_atoms, int(i)) for i in k], dtype=np.float64)
    amps = (
        np.sqrt(binom)
        * np.cos(theta / 2.0) ** (n_atoms - k)
        * np.sin(theta / 2.0) ** k
        * np.exp(1j * k * phi)
    )
    amps /= np.linalg.norm(amps)
    return SpinState(n_atoms, amps)


def sector_frequency_index(params: ProtocolParams, sector: SpinSector):
    """Integer nu with Omega = nu * G, exact when the closure conditions hold."""
    if not params.is_exact_closure:
        raise ValidationError("sector_frequency_index requires exact-closure parameters")
    return 2 * params.integer_n + sector.total

def sector_frequency(params: ProtocolParams, sector: SpinSector):
    """Rotating-frame frequency Omega = Delta + G (s1 + s2) of one sector."""
    if params.is_exact_closure:
        # integer path keeps Omega an exact multiple of G
        return params.coupling_G * sector_frequency_index(params, sector)
    return params.detuning_Delta + params.coupling_G * sector.total
