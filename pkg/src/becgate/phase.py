"""Entangling phases: double-integral quadrature, Taylor coefficients, closed
forms, and the two-stage composition that cancels the quadratic spin terms.

The accumulated phase of a closed displacement loop is

    Phi(T) = (1/2) Im int_0^T dtau1 int_0^tau1 dtau2 F(tau1) F(tau2) e^(i Omega (tau1 - tau2))

evaluated here in a single pass: the inner cumulative integral is built
once by cumulative Simpson and reused across the outer Simpson sum, so the
cost is O(steps), not O(steps^2).  Expanding e^(i Omega tau_r) around the
detuning gives the sector-expansion coefficients phi0, phi1, phi2 with the
sin / tau_r cos / tau_r^2 sin kernels; for the sinusoidal drive those three
integrals have exact closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import cumulative_simpson, simpson_weights
from .errors import PhaseCancellationError, ValidationError
from .model import ProtocolParams, SpinSector, sector_frequency, spin_levels
from .trajectory import DrivePulse

CANCELLATION_TOL = 1e-10

STAGE_LABELS = ("stage1", "stage2", "stage2_bec1", "stage2_bec2", "total")


@dataclass(frozen=True)
class PhaseCoefficients:
    """Sector expansion Phi = phi0 + phi1 (s1+s2) + phi2/2 (s1^2+s2^2) + phi2 s1 s2."""

    phi0: float
    phi1: float
    phi2: float
    detuning_sign: int

    def __post_init__(self):
        for name in ("phi0", "phi1", "phi2"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} is not finite")
        if self.detuning_sign not in (-1, 1):
            raise ValidationError(f"detuning_sign must be +-1, got {self.detuning_sign}")


@dataclass(frozen=True, eq=False)
class PhaseTable:
    """Accumulated phase per (s1, s2) sector for one protocol stage."""

    n1: int
    n2: int
    stage: str
    gauge: float
    values: np.ndarray  # shape (n1+1, n2+1), s ascending on both axes
    coefficients: PhaseCoefficients | None = None

    def __post_init__(self):
        if self.stage not in STAGE_LABELS:
            raise ValidationError(f"unknown stage label {self.stage!r}")
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.shape != (self.n1 + 1, self.n2 + 1):
            raise ValidationError(
                f"table shape {vals.shape} does not match dims ({self.n1}, {self.n2})"
            )
        object.__setattr__(self, "values", vals)

    def value(self, sector: SpinSector):
        i1 = (sector.s1 + self.n1) // 2
        i2 = (sector.s2 + self.n2) // 2
        return float(self.values[i1, i2])

    __getitem__ = value

    def entries(self):
        """(sector, phase) pairs sorted by (s1, s2)."""
        for i1, s1 in enumerate(spin_levels(self.n1)):
            for i2, s2 in enumerate(spin_levels(self.n2)):
                yield SpinSector(int(s1), int(s2)), float(self.values[i1, i2])

    def to_json(self):
        from .serialize import phase_table_json

        return phase_table_json(self)


def design_drive(coupling_G, integer_n, integer_m, amp_F0, omega0=0.0):
    """Drive construction with exact per-sector closure.

    Delta = 2 G n puts every sector frequency at an even multiple of G over
    T = 2 pi / G; an odd harmonic F(t) = F0 sin(G m t) then integrates to
    zero against every sector phase factor.  Even m is rejected.
    """
    params = ProtocolParams.closed(coupling_G, integer_n, integer_m, amp_F0, omega0)
    pulse = DrivePulse.sinusoidal(amp_F0, integer_m, coupling_G)
    return params, pulse


def _double_integrals(fvals, t, h, omega, taylor):
    """One-pass iterated quadrature of the loop-phase double integrals.

    Returns (J0, J1, J2) with Jk = int F(t1) e^(i w t1) * int_0^t1 F(t2)
    e^(-i w t2) (t1 - t2)^k dt2 dt1; J1, J2 are None unless ``taylor``.
    """
    phase = np.exp(-1j * omega * t)
    outer = fvals * np.conj(phase)
    w = simpson_weights(t.size - 1) * h
    a0 = cumulative_simpson(fvals * phase, h)
    j0 = np.sum(w * outer * a0)
    if not taylor:
        return j0, None, None
    a1 = cumulative_simpson(t * fvals * phase, h)
    a2 = cumulative_simpson(t * t * fvals * phase, h)
    j1 = np.sum(w * outer * (t * a0 - a1))
    j2 = np.sum(w * outer * (t * t * a0 - 2.0 * t * a1 + a2))
    return j0, j1, j2


def _grid(drive, duration, steps):
    steps = int(steps)
    if steps < 16 or steps % 2 != 0:
        raise ValidationError(f"steps must be even and >= 16, got {steps}")
    if not drive.covers(duration):
        raise ValidationError("drive does not cover the integration window")
    t = np.linspace(0.0, duration, steps + 1)
    return drive.sample(t), t, duration / steps


def geometric_phase_quadrature(drive: DrivePulse, params: ProtocolParams,
                               sector: SpinSector, steps: int = 4096):
    """Phi(T) of one sector by the double-integral quadrature."""
    fvals, t, h = _grid(drive, params.duration_T, steps)
    j0, _, _ = _double_integrals(fvals, t, h, sector_frequency(params, sector), False)
    return 0.5 * float(np.imag(j0))


def phase_coefficients_numeric(drive: DrivePulse, detuning_Delta, duration_T,
                               coupling_G=None, steps: int = 4096):
    """phi0, phi1, phi2 from the kernel double integrals by quadrature.

    The linear and quadratic coefficients carry one and two powers of the
    coupling; for sinusoidal drives it is taken from the pulse, tabulated
    drives must pass ``coupling_G`` explicitly.
    """
    if coupling_G is None:
        coupling_G = drive.coupling_G
    if coupling_G is None:
        raise ValidationError("tabulated drives need an explicit coupling_G")
    fvals, t, h = _grid(drive, duration_T, steps)
    j0, j1, j2 = _double_integrals(fvals, t, h, detuning_Delta, True)
    return PhaseCoefficients(
        phi0=0.5 * float(np.imag(j0)),
        phi1=0.5 * coupling_G * float(np.real(j1)),
        phi2=-0.5 * coupling_G ** 2 * float(np.imag(j2)),
        detuning_sign=-1 if detuning_Delta < 0.0 else 1,
    )


def phase_coefficients_closed(amp_F0, coupling_G, integer_m, integer_n):
    """Exact coefficients for F(t) = F0 sin(G m t), Delta = 2 G n, T = 2 pi / G.

        phi0 = -pi F0^2 n / (G^2 (m^2 - 4 n^2))
        phi1 = -pi F0^2 (3 m^2 + 4 n^2) / (2 G^2 (m^2 - 4 n^2)^2)
        phi2 = -2 pi F0^2 n (11 m^2 + 4 n^2) / (G^2 (m^2 - 4 n^2)^3)
    """
    m = int(integer_m)
    n = int(integer_n)
    if m < 1 or m % 2 == 0:
        raise ValidationError(f"integer_m must be odd and positive, got {m}")
    d = m * m - 4 * n * n
    if d == 0:
        raise ValidationError("resonant denominator m^2 = 4 n^2")
    f2 = float(amp_F0) ** 2 / float(coupling_G) ** 2
    return PhaseCoefficients(
        phi0=-math.pi * f2 * n / d,
        phi1=-math.pi * f2 * (3 * m * m + 4 * n * n) / (2.0 * d * d),
        phi2=-2.0 * math.pi * f2 * n * (11 * m * m + 4 * n * n) / float(d) ** 3,
        detuning_sign=-1 if n < 0 else 1,
    )


def _sector_grids(n1, n2):
    s1 = spin_levels(n1).astype(np.float64)[:, None]
    s2 = spin_levels(n2).astype(np.float64)[None, :]
    return s1, s2


def stage1_phase_table(coeffs: PhaseCoefficients, n1, n2):
    """Common-mode stage: Phi = phi0 + phi1 (s1+s2) + phi2/2 (s1^2+s2^2) + phi2 s1 s2."""
    s1, s2 = _sector_grids(n1, n2)
    vals = (
        coeffs.phi0
        + coeffs.phi1 * (s1 + s2)
        + 0.5 * coeffs.phi2 * (s1 * s1 + s2 * s2)
        + coeffs.phi2 * s1 * s2
    )
    return PhaseTable(n1, n2, "stage1", coeffs.phi0, vals, coeffs)


def stage2_phase_table(coeffs_at_minus_Delta: PhaseCoefficients, n1, n2, spin=None):
    """Per-spin stage at the opposite detuning: Phi'_i = phi0 + phi1 s_i + phi2/2 s_i^2.

    ``spin`` selects one spin's table (1 or 2); the default returns the sum
    Phi'_1 + Phi'_2 applied by driving both spins separately.
    """
    c = coeffs_at_minus_Delta
    s1, s2 = _sector_grids(n1, n2)
    if spin == 1:
        vals = c.phi0 + c.phi1 * s1 + 0.5 * c.phi2 * s1 * s1 + 0.0 * s2
        return PhaseTable(n1, n2, "stage2_bec1", c.phi0, vals, c)
    if spin == 2:
        vals = c.phi0 + c.phi1 * s2 + 0.5 * c.phi2 * s2 * s2 + 0.0 * s1
        return PhaseTable(n1, n2, "stage2_bec2", c.phi0, vals, c)
    if spin is not None:
        raise ValidationError(f"spin must be 1, 2 or None, got {spin}")
    vals = (
        2.0 * c.phi0
        + c.phi1 * (s1 + s2)
        + 0.5 * c.phi2 * (s1 * s1 + s2 * s2)
    )
    return PhaseTable(n1, n2, "stage2", 2.0 * c.phi0, vals, c)


def total_phase_table(stage1: PhaseTable, stage2: PhaseTable):
    """Entrywise stage1 + stage2, verifying the quadratic-term cancellation.

    After subtracting 2 phi1 (s1+s2) + phi2 s1 s2 the remainder must be the
    same for every sector; a spread above 1e-10 means stage 2 was not run
    at the opposite detuning and the squeezing terms survive.
    """
    if (stage1.n1, stage1.n2) != (stage2.n1, stage2.n2):
        raise ValidationError("stage tables have mismatched dimensions")
    if stage1.coefficients is None:
        raise ValidationError("stage-1 table carries no coefficients to verify against")
    total = stage1.values + stage2.values
    c = stage1.coefficients
    s1, s2 = _sector_grids(stage1.n1, stage1.n2)
    residual = total - 2.0 * c.phi1 * (s1 + s2) - c.phi2 * s1 * s2
    spread = float(residual.max() - residual.min())
    if spread > CANCELLATION_TOL:
        raise PhaseCancellationError(
            f"quadratic spin terms survive the two-stage composition: residual "
            f"spread {spread:.3e} exceeds {CANCELLATION_TOL:.0e}; stage 2 must use "
            "the opposite detuning"
        )
    gauge = float(residual.mean())
    return PhaseTable(stage1.n1, stage1.n2, "total", gauge, total, c)
