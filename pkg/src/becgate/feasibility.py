"""Experimental feasibility bounds: spontaneous emission, cavity loss, photon budget.

Pure rate arithmetic (no open-system dynamics): the effective spin-photon
coupling G = g0^2 / Delta competes with collectively enhanced spontaneous
emission Gamma_eff = Gamma N g0^2 / Delta^2, and cavity decay limits the
usable coherent amplitude.  All rates in the same frequency unit (MHz in,
MHz out).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class CavityParams:
    """Single-atom coupling, decay rates and atom number (rates in MHz)."""

    g0: float
    kappa: float
    Gamma: float
    atom_number_N: int

    def __post_init__(self):
        for name in ("g0", "kappa", "Gamma"):
            if getattr(self, name) < 0.0:
                raise ValidationError(f"{name} must be non-negative")
        if self.atom_number_N < 1:
            raise ValidationError("atom_number_N must be at least 1")


@dataclass(frozen=True)
class FeasibilityReport:
    delta_min: float
    G_eff: float
    Gamma_eff: float
    alpha_sq_max: float
    requested_alpha_sq: float
    kappa_eff: float
    gate_time_stark: float        # 1/G: single Stark-shift time scale
    gate_time_full_period: float  # 2 pi / G: full displacement-loop duration
    feasible: bool

    def to_json(self):
        from .serialize import feasibility_json

        return feasibility_json(self)


def effective_decoherence(g0, Delta, Gamma, atom_number_N):
    """(Gamma_eff, G): collectively enhanced emission rate and Stark coupling.

    Gamma_eff = Gamma N g0^2 / Delta^2 and G = g0^2 / Delta.
    """
    if Delta <= 0.0:
        raise ValidationError(f"detuning must be positive, got {Delta}")
    coupling = g0 * g0 / Delta
    return Gamma * atom_number_N * g0 * g0 / (Delta * Delta), coupling


def min_detuning(Gamma, atom_number_N):
    """Smallest detuning keeping the gate within the emission-limited window: Gamma N."""
    return Gamma * atom_number_N


def max_photon_number(g0, kappa, Gamma, atom_number_N):
    """Cavity-decay bound on the drive brightness: |alpha|^2 <= g0^2 / (kappa Gamma N)."""
    denom = kappa * Gamma * atom_number_N
    if denom <= 0.0:
        raise ValidationError("kappa, Gamma and N must all be positive")
    return g0 * g0 / denom


def feasibility_report(cavity: CavityParams, requested_alpha_sq: float):
    """Combine the three bounds at the minimum detuning.

    At Delta = Gamma N the coupling and the effective emission rate
    coincide (both g0^2 / (Gamma N)).  Two gate-time conventions are
    reported: the bare Stark time 1/G used by the rate bounds and the full
    loop duration 2 pi / G, which tightens feasibility by ~6.3x.
    """
    if requested_alpha_sq < 0.0:
        raise ValidationError("requested |alpha|^2 must be non-negative")
    delta_min = min_detuning(cavity.Gamma, cavity.atom_number_N)
    gamma_eff, g_eff = effective_decoherence(
        cavity.g0, delta_min, cavity.Gamma, cavity.atom_number_N
    )
    alpha_sq_max = max_photon_number(
        cavity.g0, cavity.kappa, cavity.Gamma, cavity.atom_number_N
    )
    return FeasibilityReport(
        delta_min=delta_min,
        G_eff=g_eff,
        Gamma_eff=gamma_eff,
        alpha_sq_max=alpha_sq_max,
        requested_alpha_sq=requested_alpha_sq,
        kappa_eff=cavity.kappa * requested_alpha_sq,
        gate_time_stark=1.0 / g_eff,
        gate_time_full_period=2.0 * math.pi / g_eff,
        feasible=alpha_sq_max > 0.0 and requested_alpha_sq <= alpha_sq_max,
    )


def report_table(report: FeasibilityReport) -> str:
    """Aligned human-readable rendering of a feasibility report."""
    rows = [
        ("minimum detuning Delta_min", f"{report.delta_min:.6g} MHz"),
        ("coupling G at Delta_min", f"{report.G_eff:.6g} MHz"),
        ("effective emission Gamma_eff", f"{report.Gamma_eff:.6g} MHz"),
        ("max photon number |alpha|^2", f"{report.alpha_sq_max:.6g}"),
        ("requested |alpha|^2", f"{report.requested_alpha_sq:.6g}"),
        ("cat-state decay kappa_eff", f"{report.kappa_eff:.6g} MHz"),
        ("gate time 1/G", f"{report.gate_time_stark:.6g} us"),
        ("gate time 2 pi / G", f"{report.gate_time_full_period:.6g} us"),
        ("feasible", "yes" if report.feasible else "no"),
    ]
    width = max(len(name) for name, _ in rows)
    lines = [f"{name.ljust(width)}  {value}" for name, value in rows]
    lines.append(
        f"{'note'.ljust(width)}  the full-loop convention tightens the time budget "
        f"by {report.gate_time_full_period / report.gate_time_stark:.3g}x"
    )
    return "\n".join(lines) + "\n"
