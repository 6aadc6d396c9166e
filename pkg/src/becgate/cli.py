"""Command-line interface: trajectory export, phase tables, entanglement,
feasibility bounds and the self-check suite.

Protocol subcommands work in internal units (hbar = 1, G = 1); the
feasibility subcommand takes rates in MHz.  Output files are deterministic:
fixed column order, 17-significant-digit floats, no timestamps.

Exit codes: 0 success, 2 validation error, 3 numerical-check failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import NumericalCheckError, ValidationError
from .feasibility import CavityParams, feasibility_report, report_table
from .model import SpinSector, all_sectors, coherent_spin_state, spin_levels
from .phase import (
    design_drive,
    geometric_phase_quadrature,
    phase_coefficients_closed,
    phase_coefficients_numeric,
    stage1_phase_table,
    stage2_phase_table,
    total_phase_table,
)
from .serialize import fmt
from .state import (
    RemnantModel,
    apply_phase_gate,
    exact_oracle_evolve,
    log_negativity,
    pure_state_negativity_oracle,
    reduced_density,
)
from .trajectory import (
    DrivePulse,
    closure_residual,
    integrate_trajectory,
    trajectory_to_csv,
)

INTERNAL_G = 1.0


@dataclass
class RunConfig:
    """Validated bundle of the shared numeric options."""

    n1: int = 20
    n2: int = 20
    f0: float = 1.0
    m: int = 1
    n: int = 1
    steps: int = 4096
    delta_alpha: float = 0.5
    delta_theta: float = 0.1
    theta: float = math.pi / 2.0
    phi: float = 0.0
    fmt: str = "json"
    out: str | None = None
    sweep: int = 0

    def validate(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValidationError("atom numbers must be non-negative")
        if self.m < 1 or self.m % 2 == 0:
            raise ValidationError("m must be odd")
        if self.steps < 16 or self.steps % 2 != 0:
            raise ValidationError("steps must be even and >= 16")
        if self.fmt not in ("json", "csv"):
            raise ValidationError(f"unknown format {self.fmt!r}")
        if self.sweep < 0 or self.sweep == 1:
            raise ValidationError("sweep needs at least 2 grid points")
        return self


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(
        n1=args.n1,
        n2=args.n2,
        f0=args.f0,
        m=args.m,
        n=args.n,
        steps=args.steps,
        delta_alpha=args.delta_alpha,
        delta_theta=args.delta_theta,
        theta=args.theta,
        phi=args.phi,
        fmt=args.format,
        out=args.out,
        sweep=getattr(args, "sweep", 0),
    )
    return cfg.validate()


def _write(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# trajectory
# ---------------------------------------------------------------------------

def _representative_sector(n1, n2, s_tot) -> SpinSector:
    s1 = min(n1, s_tot + n2)
    return SpinSector(int(s1), int(s_tot - s1))


def cmd_trajectory(cfg: RunConfig) -> int:
    if cfg.out is None:
        raise ValidationError("trajectory output needs --out DIRECTORY")
    params, pulse = design_drive(INTERNAL_G, cfg.n, cfg.m, cfg.f0)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for s_tot in range(-(cfg.n1 + cfg.n2), cfg.n1 + cfg.n2 + 1, 2):
        sector = _representative_sector(cfg.n1, cfg.n2, s_tot)
        traj = integrate_trajectory(pulse, params, sector, cfg.steps)
        text = trajectory_to_csv(traj, normalize=cfg.f0 != 0.0)
        (outdir / f"trajectory_stot_{s_tot:+03d}.csv").write_text(text)
    return 0


# ---------------------------------------------------------------------------
# phases
# ---------------------------------------------------------------------------

def _coeff_block(closed, quad):
    def rel(a, b):
        return abs(a - b) / abs(b) if b != 0.0 else abs(a)

    pairs = (("phi0", quad.phi0, closed.phi0),
             ("phi1", quad.phi1, closed.phi1),
             ("phi2", quad.phi2, closed.phi2))
    closed_rows = ",\n      ".join(f'"{k}": {fmt(c)}' for k, _, c in pairs)
    quad_rows = ",\n      ".join(f'"{k}": {fmt(q)}' for k, q, _ in pairs)
    err_rows = ",\n      ".join(f'"{k}": {fmt(rel(q, c))}' for k, q, c in pairs)
    return (
        "{\n"
        f'    "closed": {{\n      {closed_rows}\n    }},\n'
        f'    "quadrature": {{\n      {quad_rows}\n    }},\n'
        f'    "relative_error": {{\n      {err_rows}\n    }}\n'
        "  }"
    )


def _table_block(table):
    rows = ",\n      ".join(
        f'{{"s1": {sec.s1}, "s2": {sec.s2}, "phi": {fmt(phi)}}}'
        for sec, phi in table.entries()
    )
    return (
        "{\n"
        f'    "stage": "{table.stage}",\n'
        f'    "gauge": {fmt(table.gauge)},\n'
        f'    "entries": [\n      {rows}\n    ]\n'
        "  }"
    )


def cmd_phases(cfg: RunConfig) -> int:
    params, pulse = design_drive(INTERNAL_G, cfg.n, cfg.m, cfg.f0)
    closed_plus = phase_coefficients_closed(cfg.f0, INTERNAL_G, cfg.m, cfg.n)
    closed_minus = phase_coefficients_closed(cfg.f0, INTERNAL_G, cfg.m, -cfg.n)
    quad_plus = phase_coefficients_numeric(
        pulse, params.detuning_Delta, params.duration_T, steps=cfg.steps
    )
    quad_minus = phase_coefficients_numeric(
        pulse, -params.detuning_Delta, params.duration_T, steps=cfg.steps
    )
    stage1 = stage1_phase_table(closed_plus, cfg.n1, cfg.n2)
    stage2 = stage2_phase_table(closed_minus, cfg.n1, cfg.n2)
    total = total_phase_table(stage1, stage2)

    if cfg.fmt == "json":
        text = (
            "{\n"
            f'  "params": {{"G": {fmt(INTERNAL_G)}, "F0": {fmt(cfg.f0)}, '
            f'"m": {cfg.m}, "n": {cfg.n}, "steps": {cfg.steps}}},\n'
            f'  "coefficients_stage1": {_coeff_block(closed_plus, quad_plus)},\n'
            f'  "coefficients_stage2": {_coeff_block(closed_minus, quad_minus)},\n'
            f'  "stage1": {_table_block(stage1)},\n'
            f'  "stage2": {_table_block(stage2)},\n'
            f'  "total": {_table_block(total)}\n'
            "}\n"
        )
    else:
        lines = [
            "# units: hbar=1, G=1; phases in radians\n",
            f"# closed-form stage1: phi0={fmt(closed_plus.phi0)} "
            f"phi1={fmt(closed_plus.phi1)} phi2={fmt(closed_plus.phi2)}\n",
            f"# total gauge: {fmt(total.gauge)}\n",
            "s1,s2,phi_stage1,phi_stage2,phi_total\n",
        ]
        for (sec, v1), (_, v2), (_, vt) in zip(
            stage1.entries(), stage2.entries(), total.entries()
        ):
            lines.append(f"{sec.s1},{sec.s2},{fmt(v1)},{fmt(v2)},{fmt(vt)}\n")
        text = "".join(lines)
    _write(cfg.out, text)
    return 0


# ---------------------------------------------------------------------------
# entangle
# ---------------------------------------------------------------------------

def _gate_phase_table(lam, n1, n2):
    from .phase import PhaseTable

    s1 = spin_levels(n1).astype(float)[:, None]
    s2 = spin_levels(n2).astype(float)[None, :]
    return PhaseTable(n1, n2, "total", 0.0, lam * s1 * s2)


def cmd_entangle(cfg: RunConfig) -> int:
    psi1 = coherent_spin_state(cfg.n1, cfg.theta, cfg.phi)
    psi2 = coherent_spin_state(cfg.n2, cfg.theta, cfg.phi)

    if cfg.sweep:
        lam_max = 2.0 * math.pi / max(cfg.n1, cfg.n2, 1)
        lams = np.linspace(0.0, lam_max, cfg.sweep)
        lines = [
            "# units: hbar=1; gate_phase in radians, entanglement in bits\n",
            f"# N1={cfg.n1} N2={cfg.n2} delta_alpha={fmt(cfg.delta_alpha)} "
            f"delta_theta={fmt(cfg.delta_theta)}\n",
            "gate_phase,log_neg_ideal,log_neg_remnant,normalized_ideal,"
            "normalized_remnant\n",
        ]
        e_max = math.log2(min(cfg.n1, cfg.n2) + 1)
        remnant = RemnantModel(cfg.delta_alpha, cfg.delta_theta)
        for lam in lams:
            table = _gate_phase_table(float(lam), cfg.n1, cfg.n2)
            joint = apply_phase_gate(psi1, psi2, table)
            # ideal closure leaves a pure state: Schmidt route, no eigensolve
            e_ideal = pure_state_negativity_oracle(joint)
            rho = reduced_density(joint, remnant)
            e_rem = log_negativity(rho).log_negativity
            norm_i = e_ideal / e_max if e_max > 0 else 0.0
            norm_r = e_rem / e_max if e_max > 0 else 0.0
            lines.append(
                f"{fmt(lam)},{fmt(e_ideal)},{fmt(e_rem)},{fmt(norm_i)},{fmt(norm_r)}\n"
            )
        _write(cfg.out, "".join(lines))
        return 0

    closed_plus = phase_coefficients_closed(cfg.f0, INTERNAL_G, cfg.m, cfg.n)
    closed_minus = phase_coefficients_closed(cfg.f0, INTERNAL_G, cfg.m, -cfg.n)
    total = total_phase_table(
        stage1_phase_table(closed_plus, cfg.n1, cfg.n2),
        stage2_phase_table(closed_minus, cfg.n1, cfg.n2),
    )
    joint = apply_phase_gate(psi1, psi2, total)
    rho = reduced_density(joint, RemnantModel(cfg.delta_alpha, cfg.delta_theta))
    report = log_negativity(rho)
    _write(cfg.out, report.to_json())
    return 0


# ---------------------------------------------------------------------------
# feasibility
# ---------------------------------------------------------------------------

def cmd_feasibility(args) -> int:
    cavity = CavityParams(
        g0=args.g0_mhz,
        kappa=args.kappa_mhz,
        Gamma=args.gamma_mhz,
        atom_number_N=args.atoms,
    )
    if args.kappa_mhz <= 0.0 or args.gamma_mhz <= 0.0:
        raise ValidationError("kappa and Gamma must be positive")
    report = feasibility_report(cavity, args.alpha_sq)
    sys.stdout.write(report_table(report))
    if args.format == "csv":
        text = (
            "# units: MHz\nquantity,value\n"
            f"delta_min,{fmt(report.delta_min)}\n"
            f"G_eff,{fmt(report.G_eff)}\n"
            f"Gamma_eff,{fmt(report.Gamma_eff)}\n"
            f"alpha_sq_max,{fmt(report.alpha_sq_max)}\n"
            f"requested_alpha_sq,{fmt(report.requested_alpha_sq)}\n"
            f"kappa_eff,{fmt(report.kappa_eff)}\n"
            f"feasible,{1 if report.feasible else 0}\n"
        )
    else:
        text = report.to_json()
    if args.out is not None:
        Path(args.out).write_text(text)
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _check_closure(cfg: RunConfig, f0, inject_even_m):
    # small (m, n) grid, all distinct total spins of N1=N2=6
    worst = 0.0
    for m in (1, 3):
        for n in (1, 2):
            if inject_even_m:
                params, _ = design_drive(INTERNAL_G, n, 1, f0)
                t_tab = np.linspace(0.0, params.duration_T, 4097)
                pulse = DrivePulse.tabulated(t_tab, f0 * np.sin(2.0 * INTERNAL_G * t_tab))
            else:
                params, pulse = design_drive(INTERNAL_G, n, m, f0)
            for s_tot in range(-12, 13, 2):
                sector = _representative_sector(6, 6, s_tot)
                traj = integrate_trajectory(pulse, params, sector, cfg.steps)
                worst = max(worst, closure_residual(traj) / (f0 / INTERNAL_G))
    return worst, 1e-9


def _check_closed_vs_quadrature(cfg: RunConfig, f0):
    worst = 0.0
    for m in (1, 3):
        for n in (1, 2):
            params, pulse = design_drive(INTERNAL_G, n, m, f0)
            quad = phase_coefficients_numeric(
                pulse, params.detuning_Delta, params.duration_T, steps=cfg.steps
            )
            closed = phase_coefficients_closed(f0, INTERNAL_G, m, n)
            for a, b in (
                (quad.phi0, closed.phi0),
                (quad.phi1, closed.phi1),
                (quad.phi2, closed.phi2),
            ):
                worst = max(worst, abs(a - b) / abs(b))
    return worst, 1e-6


def _check_parity(cfg: RunConfig, f0):
    worst = 0.0
    for n in (1, 2):
        params, pulse = design_drive(INTERNAL_G, n, 1, f0)
        plus = phase_coefficients_numeric(
            pulse, params.detuning_Delta, params.duration_T, steps=cfg.steps
        )
        minus = phase_coefficients_numeric(
            pulse, -params.detuning_Delta, params.duration_T, steps=cfg.steps
        )
        worst = max(
            worst,
            abs(minus.phi0 + plus.phi0) / abs(plus.phi0),
            abs(minus.phi1 - plus.phi1) / abs(plus.phi1),
            abs(minus.phi2 + plus.phi2) / abs(plus.phi2),
        )
    return worst, 1e-8


def _check_ode_vs_quadrature(cfg: RunConfig, f0):
    params, pulse = design_drive(INTERNAL_G, 1, 1, f0)
    worst = 0.0
    for s_tot in range(-8, 9, 2):
        sector = _representative_sector(4, 4, s_tot)
        traj = integrate_trajectory(pulse, params, sector, cfg.steps)
        quad = geometric_phase_quadrature(pulse, params, sector, cfg.steps)
        denom = max(abs(quad), 1e-12)
        worst = max(worst, abs(traj.phase[-1] - quad) / denom)
    return worst, 1e-7


def _check_convergence(cfg: RunConfig, f0):
    # doubling the step count must not move the results
    params, pulse = design_drive(INTERNAL_G, 1, 1, f0)
    sector = SpinSector(2, 0)
    t1 = integrate_trajectory(pulse, params, sector, cfg.steps)
    t2 = integrate_trajectory(pulse, params, sector, 2 * cfg.steps)
    dphi = abs(t1.phase[-1] - t2.phase[-1]) / max(abs(t2.phase[-1]), 1e-12)
    mid = abs(t1.alpha_c[cfg.steps // 2] - t2.alpha_c[cfg.steps]) / max(
        abs(t2.alpha_c[cfg.steps]), 1e-12
    )
    return max(dphi, mid), 1e-8


def _check_fock_oracle(cfg: RunConfig, f0):
    params, pulse = design_drive(INTERNAL_G, 1, 1, f0)
    worst = 0.0
    for sector in all_sectors(2, 2):
        ac, ph = exact_oracle_evolve(params, pulse, sector, 30, min(cfg.steps, 4096))
        traj = integrate_trajectory(pulse, params, sector, cfg.steps)
        quad = geometric_phase_quadrature(pulse, params, sector, cfg.steps)
        worst = max(worst, abs(ac - traj.alpha_c[-1]), abs(ph - quad))
    return worst, 1e-6


def _check_eigensolver(cfg: RunConfig, f0):
    rng = np.random.default_rng(20200713)
    mat = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))
    mat = (mat + mat.conj().T) / 2.0
    w, v, _ = _kernels.hermitian_eig(mat)
    recon = float(np.max(np.abs((v * w) @ v.conj().T - mat)))
    sv, _ = _kernels.hermitian_singular_values(mat)
    engines = abs(float(np.sum(np.abs(w))) - float(np.sum(sv)))
    return max(recon, engines), 1e-10


def _check_cancellation(cfg: RunConfig, f0):
    params, pulse = design_drive(INTERNAL_G, 1, 1, f0)
    quad_p = phase_coefficients_numeric(
        pulse, params.detuning_Delta, params.duration_T, steps=cfg.steps
    )
    quad_m = phase_coefficients_numeric(
        pulse, -params.detuning_Delta, params.duration_T, steps=cfg.steps
    )
    total = total_phase_table(
        stage1_phase_table(quad_p, 6, 6), stage2_phase_table(quad_m, 6, 6)
    )
    s1 = spin_levels(6).astype(float)[:, None]
    s2 = spin_levels(6).astype(float)[None, :]
    resid = total.values - 2.0 * quad_p.phi1 * (s1 + s2) - quad_p.phi2 * s1 * s2
    return float(resid.max() - resid.min()), 1e-10


def cmd_validate(cfg: RunConfig, inject_even_m: bool = False) -> int:
    f0 = cfg.f0 if cfg.f0 != 0.0 else 1.0
    suite = [
        ("closure_all_sectors", lambda: _check_closure(cfg, f0, inject_even_m)),
        ("closed_vs_quadrature", lambda: _check_closed_vs_quadrature(cfg, f0)),
        ("coefficient_parity", lambda: _check_parity(cfg, f0)),
        ("ode_vs_double_integral", lambda: _check_ode_vs_quadrature(cfg, f0)),
        ("quadrature_convergence", lambda: _check_convergence(cfg, f0)),
        ("fock_oracle", lambda: _check_fock_oracle(cfg, f0)),
        ("eigensolver_reconstruction", lambda: _check_eigensolver(cfg, f0)),
        ("squeezing_cancellation", lambda: _check_cancellation(cfg, f0)),
    ]
    lines = []
    all_ok = True
    for name, run in suite:
        try:
            measured, tol = run()
            ok = measured < tol
            detail = f"measured={fmt(measured)}, tolerance={fmt(tol)}"
        except (NumericalCheckError, ValidationError) as exc:
            ok = False
            detail = f"aborted: {exc}"
        all_ok &= ok
        lines.append(f"{name}: {'PASS' if ok else 'FAIL'} ({detail})\n")
    lines.append(f"result: {'PASS' if all_ok else 'FAIL'} ({len(suite)} checks)\n")
    text = "".join(lines)
    sys.stdout.write(text)
    if cfg.out is not None:
        Path(cfg.out).write_text(text)
    return 0 if all_ok else 3


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="becgate",
        description="Geometric-phase entangling gate for two collective spins "
        "coupled through a driven cavity mode.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n1", type=int, default=20, help="atoms in spin 1")
    common.add_argument("--n2", type=int, default=20, help="atoms in spin 2")
    common.add_argument("--f0", type=float, default=1.0, help="drive amplitude in units of G")
    common.add_argument("--m", type=int, default=1, help="odd drive harmonic")
    common.add_argument("--n", type=int, default=1, help="detuning index: Delta = 2 G n")
    common.add_argument("--steps", type=int, default=4096, help="quadrature steps per period")
    common.add_argument("--delta-alpha", type=float, default=0.5,
                        help="remnant coherent offset magnitude")
    common.add_argument("--delta-theta", type=float, default=0.1,
                        help="remnant phase per spin unit")
    common.add_argument("--theta", type=float, default=math.pi / 2.0,
                        help="initial Bloch polar angle")
    common.add_argument("--phi", type=float, default=0.0,
                        help="initial Bloch azimuth")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output file (or directory)")

    sub.add_parser("trajectory", parents=[common],
                   help="per-total-spin trajectory CSV files")
    sub.add_parser("phases", parents=[common],
                   help="phase tables and coefficient comparison")
    p_ent = sub.add_parser("entangle", parents=[common],
                           help="logarithmic negativity of the gated state")
    p_ent.add_argument("--sweep", type=int, default=0,
                       help="emit a CSV over this many gate-phase grid points")
    p_feas = sub.add_parser("feasibility", help="experimental rate bounds (MHz)")
    p_feas.add_argument("--g0-mhz", type=float, required=True)
    p_feas.add_argument("--kappa-mhz", type=float, required=True)
    p_feas.add_argument("--gamma-mhz", type=float, required=True)
    p_feas.add_argument("--atoms", type=int, required=True)
    p_feas.add_argument("--alpha-sq", type=float, default=0.25,
                        help="requested photon number |alpha|^2")
    p_feas.add_argument("--format", choices=("json", "csv"), default="json")
    p_feas.add_argument("--out", default=None)
    p_val = sub.add_parser("validate", parents=[common],
                           help="run the reduced numerical self-check suite")
    p_val.add_argument("--inject-even-m", action="store_true",
                       help="negative control: tabulated even harmonic must fail closure")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "feasibility":
            return cmd_feasibility(args)
        cfg = _config_from_args(args)
        if args.command == "trajectory":
            return cmd_trajectory(cfg)
        if args.command == "phases":
            return cmd_phases(cfg)
        if args.command == "entangle":
            return cmd_entangle(cfg)
        if args.command == "validate":
            return cmd_validate(cfg, args.inject_even_m)
        raise ValidationError(f"unknown command {args.command!r}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalCheckError as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
