"""Deterministic text output: fixed key order, 17-significant-digit floats.

JSON is assembled by hand so identical inputs give byte-identical files
(no dict-order or float-repr surprises across interpreter versions).
"""

from __future__ import annotations

import numpy as np


def fmt(x) -> str:
    """Lowercase 17-significant-digit rendering, round-trip exact."""
    return f"{float(x):.17g}"


def _complex_pair(z) -> str:
    return f"[{fmt(z.real)}, {fmt(z.imag)}]"


def phase_table_json(table) -> str:
    rows = ",\n    ".join(
        f'{{"s1": {sec.s1}, "s2": {sec.s2}, "phi": {fmt(phi)}}}'
        for sec, phi in table.entries()
    )
    return (
        "{\n"
        f'  "dims": [{table.n1}, {table.n2}],\n'
        f'  "stage": "{table.stage}",\n'
        f'  "gauge": {fmt(table.gauge)},\n'
        f'  "entries": [\n    {rows}\n  ]\n'
        "}\n"
    )


def density_matrix_json(rho) -> str:
    flat = np.ravel(rho.matrix)
    body = ",\n    ".join(_complex_pair(z) for z in flat)
    return (
        "{\n"
        f'  "dims": [{rho.n1 + 1}, {rho.n2 + 1}],\n'
        '  "layout": "row-major over (s1, s2), s1-major ascending",\n'
        f'  "entries_re_im": [\n    {body}\n  ]\n'
        "}\n"
    )


def entanglement_report_json(report) -> str:
    return (
        "{\n"
        f'  "log_negativity_bits": {fmt(report.log_negativity)},\n'
        f'  "max_entanglement_bits": {fmt(report.max_entanglement)},\n'
        f'  "normalized": {fmt(report.normalized)}\n'
        "}\n"
    )


def feasibility_json(report) -> str:
    return (
        "{\n"
        '  "units": "MHz",\n'
        f'  "delta_min": {fmt(report.delta_min)},\n'
        f'  "G_eff": {fmt(report.G_eff)},\n'
        f'  "Gamma_eff": {fmt(report.Gamma_eff)},\n'
        f'  "alpha_sq_max": {fmt(report.alpha_sq_max)},\n'
        f'  "requested_alpha_sq": {fmt(report.requested_alpha_sq)},\n'
        f'  "kappa_eff": {fmt(report.kappa_eff)},\n'
        f'  "gate_time_stark_us": {fmt(report.gate_time_stark)},\n'
        f'  "gate_time_full_period_us": {fmt(report.gate_time_full_period)},\n'
        f'  "feasible": {"true" if report.feasible else "false"}\n'
        "}\n"
    )
