"""Per-sector cavity trajectories: displacement integral, phase ODE, closure.

The rotating-frame amplitude obeys d(alpha_c)/dt = i F(t) e^(i Omega t) / sqrt(2)
from the vacuum, and the accumulated phase obeys dPhi/dt = Im(d(alpha_c)/dt
* conj(alpha_c)).  Both are integrated on a shared uniform grid: alpha_c by
cumulative Simpson, Phi by the trapezoid rule on the analytically known
integrand (no numerical differentiation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import cumulative_simpson
from .errors import ValidationError
from .model import ProtocolParams, SpinSector, sector_frequency

SQRT2 = math.sqrt(2.0)

# closure residuals above this (relative to F0/G) get a warning on tabulated drives
TABULATED_CLOSURE_WARN = 1e-6


@dataclass(frozen=True, eq=False)
class DrivePulse:
    """Displacement drive F(t): exact sinusoid parameters or tabulated samples."""

    kind: str
    amp_F0: float
    harmonic_m: int | None = None
    coupling_G: float | None = None
    times: np.ndarray | None = None
    values: np.ndarray | None = None

    @classmethod
    def sinusoidal(cls, amp_F0, harmonic_m, coupling_G):
        """F(t) = F0 sin(G m t), stored by parameters (never sampled)."""
        harmonic_m = int(harmonic_m)
        if harmonic_m < 1 or harmonic_m % 2 == 0:
            raise ValidationError(
                f"sinusoidal drives need an odd positive harmonic, got m={harmonic_m}"
            )
        if coupling_G <= 0.0:
            raise ValidationError(f"coupling_G must be positive, got {coupling_G}")
        return cls(
            kind="sinusoidal",
            amp_F0=float(amp_F0),
            harmonic_m=harmonic_m,
            coupling_G=float(coupling_G),
        )

    @classmethod
    def tabulated(cls, times, values):
        """Uniformly sampled drive on [0, T], interpolated piecewise-linearly."""
        times = np.ascontiguousarray(times, dtype=np.float64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValidationError("tabulated drive needs matching 1-d times and values")
        if times[0] != 0.0:
            raise ValidationError(f"tabulated drive must start at t=0, got {times[0]}")
        dt = np.diff(times)
        if np.any(dt <= 0.0) or np.max(dt) - np.min(dt) > 1e-9 * np.max(dt):
            raise ValidationError("tabulated drive grid must be uniform and increasing")
        return cls(
            kind="tabulated",
            amp_F0=float(np.max(np.abs(values))),
            times=times,
            values=values,
        )

    def sample(self, t):
        """Evaluate F at the given times (scalar or array)."""
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "sinusoidal":
            return self.amp_F0 * np.sin(self.coupling_G * self.harmonic_m * t)
        return np.interp(t, self.times, self.values)

    def covers(self, duration):
        if self.kind == "sinusoidal":
            return True
        return self.times[-1] >= duration * (1.0 - 1e-12)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled rotating-frame trajectory and accumulated phase of one sector."""

    sector: SpinSector
    params: ProtocolParams
    times: np.ndarray
    alpha_c: np.ndarray
    phase: np.ndarray
    warnings: tuple = ()

    @property
    def alpha_lab(self):
        """Lab-frame amplitude alpha(t) on the same grid."""
        return rotating_frame_convert(self.alpha_c, self.times, self.params, self.sector)


def integrate_trajectory(drive: DrivePulse, params: ProtocolParams,
                         sector: SpinSector, steps: int = 4096) -> Trajectory:
    """Integrate alpha_c(t) and Phi(t) over [0, T] from the cavity vacuum."""
    steps = int(steps)
    if steps < 16:
        raise ValidationError(f"steps must be at least 16, got {steps}")
    if steps % 2 != 0:
        raise ValidationError(f"Simpson quadrature needs an even step count, got {steps}")
    if not drive.covers(params.duration_T):
        raise ValidationError("tabulated drive does not cover the full pulse [0, T]")

    t = np.linspace(0.0, params.duration_T, steps + 1)
    h = params.duration_T / steps
    omega = sector_frequency(params, sector)
    dalpha = (1j / SQRT2) * drive.sample(t) * np.exp(1j * omega * t)
    alpha_c = cumulative_simpson(dalpha, h)

    integrand = np.imag(dalpha * np.conj(alpha_c))
    phase = np.empty_like(integrand)
    phase[0] = 0.0
    np.cumsum(0.5 * h * (integrand[1:] + integrand[:-1]), out=phase[1:])

    warnings = ()
    if drive.kind == "tabulated" and drive.amp_F0 > 0.0:
        scale = drive.amp_F0 / params.coupling_G
        residual = abs(alpha_c[-1])
        if residual > TABULATED_CLOSURE_WARN * scale:
            warnings = (
                f"tabulated drive leaves a remnant displacement |alpha_c(T)| = "
                f"{residual:.6e} (= {residual / scale:.3e} F0/G); feed it to the "
                "remnant-offset decoherence model",
            )
    return Trajectory(sector, params, t, alpha_c, phase, warnings)


def closure_residual(traj: Trajectory):
    """|alpha_c(T)|: zero (to quadrature accuracy) iff the loop closes."""
    return float(abs(traj.alpha_c[-1]))


def rotating_frame_convert(alpha_c, t, params: ProtocolParams, sector: SpinSector):
    """Rotating-frame -> lab-frame amplitude: alpha = alpha_c e^(-i (w0 + G s_tot) t)."""
    rot = params.omega0 + params.coupling_G * sector.total
    return alpha_c * np.exp(-1j * rot * np.asarray(t))


def trajectory_to_csv(traj: Trajectory, normalize: bool = False) -> str:
    """Render a trajectory as CSV (t, Re/Im alpha_c, Re/Im alpha, phase).

    With ``normalize`` the amplitudes are divided by alpha_0 = i F0 / (sqrt(2) G),
    the scale of the displacement loop; skipped when F0 = 0.
    """
    alpha_c = traj.alpha_c
    alpha = traj.alpha_lab
    header_units = "# units: hbar=1, time in 1/G, amplitudes dimensionless\n"
    norm_note = ""
    if normalize and traj.params.drive_amp_F0 != 0.0:
        alpha0 = 1j * traj.params.drive_amp_F0 / (SQRT2 * traj.params.coupling_G)
        alpha_c = alpha_c / alpha0
        alpha = alpha / alpha0
        norm_note = "# amplitudes normalized to alpha_0 = i F0 / (sqrt(2) G)\n"
    lines = [
        header_units,
        f"# sector: s1={traj.sector.s1} s2={traj.sector.s2}\n",
        norm_note,
        "t,Re(alpha_c),Im(alpha_c),Re(alpha),Im(alpha),phase\n",
    ]
    for k in range(traj.times.size):
        row = (
            traj.times[k],
            alpha_c[k].real,
            alpha_c[k].imag,
            alpha[k].real,
            alpha[k].imag,
            traj.phase[k],
        )
        lines.append(",".join(f"{x:.17g}" for x in row) + "\n")
    return "".join(lines)
