"""Hot numerical kernels with numba and pure-numpy backends.

The numba path is used when numba imports cleanly; set the environment
variable ``BECGATE_PURE_NUMPY=1`` to force the numpy fallback.  Both
backends run the same algorithms with the same pivot / step ordering, so
results agree to rounding.  ``benchmarks/bench_kernels.py`` compares them.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import JacobiConvergenceError, ValidationError

_EPS = float(np.finfo(np.float64).eps)

FORCE_NUMPY = os.environ.get("BECGATE_PURE_NUMPY", "").strip().lower() in (
    "1",
    "true",
    "yes",
    "on",
)

if not FORCE_NUMPY:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

ACTIVE_BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# cumulative Simpson quadrature (vectorized; no jit needed)
# ---------------------------------------------------------------------------

def cumulative_simpson(values, step):
    """Cumulative integral of uniformly sampled values by composite Simpson.

    Interval pairs are integrated with the standard Simpson weights; the
    odd interior nodes get the integral of the same local parabola over the
    half panel, so even-index entries reproduce composite Simpson exactly.
    Requires an even number of intervals (odd number of samples).
    """
    values = np.asarray(values)
    n = values.shape[0] - 1
    if n < 2 or n % 2 != 0:
        raise ValidationError(f"cumulative Simpson needs an even interval count, got {n}")
    f0 = values[0:-2:2]
    f1 = values[1::2]
    f2 = values[2::2]
    half = step / 12.0 * (5.0 * f0 + 8.0 * f1 - f2)
    pair = step / 3.0 * (f0 + 4.0 * f1 + f2)
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum(pair, out=out[2::2])
    out[1::2] = out[0:-2:2] + half
    return out


def simpson_weights(intervals):
    """Composite Simpson weights (already divided by 3) on an even grid."""
    if intervals < 2 or intervals % 2 != 0:
        raise ValidationError(f"Simpson needs an even interval count, got {intervals}")
    w = np.ones(intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


# ---------------------------------------------------------------------------
# two-sided cyclic Jacobi (full Hermitian eigendecomposition)
# ---------------------------------------------------------------------------

def _twosided_py(ar, ai, vtr, vti, want_v, tol, max_sweeps):
    n = ar.shape[0]
    scale = math.sqrt(float(np.sum(ar * ar) + np.sum(ai * ai)))
    if scale == 0.0:
        return 0, 0.0
    sweeps = 0
    off = 0.0
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps):
        off2 = float(np.sum(ar[iu] ** 2) + np.sum(ai[iu] ** 2))
        off = math.sqrt(2.0 * off2)
        sweeps = sweep
        if off <= tol * scale:
            break
        skip2 = (tol * scale) ** 2 / (n * (n - 1.0))
        th2 = max(off2 / (n * (n - 1.0)), skip2)
        for p in range(n - 1):
            for q in range(p + 1, n):
                xr = ar[p, q]
                xi = ai[p, q]
                r2 = xr * xr + xi * xi
                if r2 <= th2:
                    continue
                r = math.sqrt(r2)
                app = ar[p, p]
                aqq = ar[q, q]
                phr = xr / r
                phi = xi / r
                tau = (app - aqq) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(tau * tau + 1.0))
                else:
                    t = -1.0 / (-tau + math.sqrt(tau * tau + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cpr = c * phr
                cpi = c * phi
                spr = s * phr
                spi = s * phi
                pr = ar[p].copy()
                pi = ai[p].copy()
                qr = ar[q].copy()
                qi = ai[q].copy()
                # rows pass M = U^H A, then columns from Hermitian symmetry
                ar[p] = cpr * pr + cpi * pi + s * qr
                ai[p] = cpr * pi - cpi * pr + s * qi
                ar[q] = -(spr * pr + spi * pi) + c * qr
                ai[q] = -(spr * pi - spi * pr) + c * qi
                ar[:, p] = ar[p]
                ai[:, p] = -ai[p]
                ar[:, q] = ar[q]
                ai[:, q] = -ai[q]
                ar[p, p] = app + t * r
                ai[p, p] = 0.0
                ar[q, q] = aqq - t * r
                ai[q, q] = 0.0
                ar[p, q] = ai[p, q] = 0.0
                ar[q, p] = ai[q, p] = 0.0
                if want_v:
                    pr = vtr[p].copy()
                    pi = vti[p].copy()
                    qr = vtr[q].copy()
                    qi = vti[q].copy()
                    vtr[p] = cpr * pr - cpi * pi + s * qr
                    vti[p] = cpr * pi + cpi * pr + s * qi
                    vtr[q] = -(spr * pr - spi * pi) + c * qr
                    vti[q] = -(spr * pi + spi * pr) + c * qi
    return sweeps, off


def _onesided_py(br, bi, tol, max_sweeps):
    n = br.shape[0]
    nn = np.sum(br * br + bi * bi, axis=1)
    tot = float(np.sum(nn))
    if tot == 0.0:
        return 0, 0.0
    null2 = (50.0 * _EPS) ** 2 * tot
    sweeps = 0
    worst = 0.0
    tol2 = tol * tol
    for sweep in range(max_sweeps):
        nn = np.sum(br * br + bi * bi, axis=1)
        worst = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                if nn[p] <= null2 and nn[q] <= null2:
                    continue
                npq = nn[p] * nn[q]
                if npq == 0.0:
                    continue
                gr = float(br[p] @ br[q] + bi[p] @ bi[q])
                gi = float(br[p] @ bi[q] - bi[p] @ br[q])
                g2 = gr * gr + gi * gi
                cos2 = g2 / npq
                if cos2 > worst:
                    worst = cos2
                if cos2 <= tol2:
                    continue
                r = math.sqrt(g2)
                phr = gr / r
                phi = gi / r
                tau = (nn[p] - nn[q]) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(tau * tau + 1.0))
                else:
                    t = -1.0 / (-tau + math.sqrt(tau * tau + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cpr = c * phr
                cpi = c * phi
                spr = s * phr
                spi = s * phi
                pr = br[p].copy()
                pi = bi[p].copy()
                qr = br[q].copy()
                qi = bi[q].copy()
                br[p] = cpr * pr - cpi * pi + s * qr
                bi[p] = cpr * pi + cpi * pr + s * qi
                br[q] = -(spr * pr - spi * pi) + c * qr
                bi[q] = -(spr * pi + spi * pr) + c * qi
                nn[p] += t * r
                nn[q] -= t * r
        sweeps = sweep + 1
        if worst <= tol2:
            break
    return sweeps, math.sqrt(worst)


def _fock_rk4_py(c0, omega_n, u_half, sqrtn, dt, steps):
    dim = c0.shape[0]
    c = c0.astype(np.complex128).copy()
    sq = sqrtn[1:]

    def h_apply(u, x):
        out = omega_n * x
        out[1:] += u * sq * x[:-1]
        out[:-1] += np.conj(u) * sq * x[1:]
        return -1j * out

    max_a2 = 0.0
    phase = 0.0
    prev_arg = 0.0
    for step in range(steps):
        u0 = u_half[2 * step]
        um = u_half[2 * step + 1]
        u1 = u_half[2 * step + 2]
        k1 = h_apply(u0, c)
        k2 = h_apply(um, c + 0.5 * dt * k1)
        k3 = h_apply(um, c + 0.5 * dt * k2)
        k4 = h_apply(u1, c + dt * k3)
        c += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        a_ex = complex(np.sum(np.conj(c[:-1]) * c[1:] * sq))
        a2 = a_ex.real * a_ex.real + a_ex.imag * a_ex.imag
        if a2 > max_a2:
            max_a2 = a2
        arg = math.atan2(c[0].imag, c[0].real)
        d = arg - prev_arg
        if d > math.pi:
            d -= 2.0 * math.pi
        elif d < -math.pi:
            d += 2.0 * math.pi
        phase += d
        prev_arg = arg
    a_ex = complex(np.sum(np.conj(c[:-1]) * c[1:] * sq))
    norm = float(np.sum(c.real ** 2 + c.imag ** 2))
    return c, a_ex, phase, max_a2, norm


if HAVE_NUMBA:

    @njit(cache=True, fastmath=True)
    def _twosided_nb(ar, ai, vtr, vti, want_v, tol, max_sweeps):  # pragma: no cover
        n = ar.shape[0]
        sc2 = 0.0
        for i in range(n):
            for j in range(n):
                sc2 += ar[i, j] * ar[i, j] + ai[i, j] * ai[i, j]
        scale = math.sqrt(sc2)
        if scale == 0.0:
            return 0, 0.0
        sweeps = 0
        off = 0.0
        for sweep in range(max_sweeps):
            off2 = 0.0
            for i in range(n - 1):
                for j in range(i + 1, n):
                    off2 += ar[i, j] * ar[i, j] + ai[i, j] * ai[i, j]
            off = math.sqrt(2.0 * off2)
            sweeps = sweep
            if off <= tol * scale:
                break
            skip2 = (tol * scale) ** 2 / (n * (n - 1.0))
            th2 = off2 / (n * (n - 1.0))
            if th2 < skip2:
                th2 = skip2
            for p in range(n - 1):
                arp = ar[p]
                aip = ai[p]
                for q in range(p + 1, n):
                    xr = arp[q]
                    xi = aip[q]
                    r2 = xr * xr + xi * xi
                    if r2 <= th2:
                        continue
                    r = math.sqrt(r2)
                    app = arp[p]
                    aqq = ar[q, q]
                    phr = xr / r
                    phi = xi / r
                    tau = (app - aqq) / (2.0 * r)
                    if tau >= 0.0:
                        t = 1.0 / (tau + math.sqrt(tau * tau + 1.0))
                    else:
                        t = -1.0 / (-tau + math.sqrt(tau * tau + 1.0))
                    c = 1.0 / math.sqrt(t * t + 1.0)
                    s = t * c
                    cpr = c * phr
                    cpi = c * phi
                    spr = s * phr
                    spi = s * phi
                    arq = ar[q]
                    aiq = ai[q]
                    for k in range(n):
                        pkr = arp[k]
                        pki = aip[k]
                        qkr = arq[k]
                        qki = aiq[k]
                        arp[k] = cpr * pkr + cpi * pki + s * qkr
                        aip[k] = cpr * pki - cpi * pkr + s * qki
                        arq[k] = -(spr * pkr + spi * pki) + c * qkr
                        aiq[k] = -(spr * pki - spi * pkr) + c * qki
                    for k in range(n):
                        ar[k, p] = arp[k]
                        ai[k, p] = -aip[k]
                        ar[k, q] = arq[k]
                        ai[k, q] = -aiq[k]
                    arp[p] = app + t * r
                    aip[p] = 0.0
                    arq[q] = aqq - t * r
                    aiq[q] = 0.0
                    arp[q] = 0.0
                    aip[q] = 0.0
                    arq[p] = 0.0
                    aiq[p] = 0.0
                    if want_v:
                        vpr = vtr[p]
                        vpi = vti[p]
                        vqr = vtr[q]
                        vqi = vti[q]
                        for k in range(n):
                            pkr = vpr[k]
                            pki = vpi[k]
                            qkr = vqr[k]
                            qki = vqi[k]
                            vpr[k] = cpr * pkr - cpi * pki + s * qkr
                            vpi[k] = cpr * pki + cpi * pkr + s * qki
                            vqr[k] = -(spr * pkr - spi * pki) + c * qkr
                            vqi[k] = -(spr * pki + spi * pkr) + c * qki
        return sweeps, off

    @njit(cache=True, fastmath=True)
    def _onesided_nb(br, bi, tol, max_sweeps):  # pragma: no cover
        n = br.shape[0]
        nn = np.empty(n)
        tot = 0.0
        for p in range(n):
            acc = 0.0
            for k in range(n):
                acc += br[p, k] * br[p, k] + bi[p, k] * bi[p, k]
            nn[p] = acc
            tot += acc
        if tot == 0.0:
            return 0, 0.0
        null2 = (50.0 * 2.220446049250313e-16) ** 2 * tot
        sweeps = 0
        worst = 0.0
        tol2 = tol * tol
        for sweep in range(max_sweeps):
            for p in range(n):
                acc = 0.0
                bpr = br[p]
                bpi = bi[p]
                for k in range(n):
                    acc += bpr[k] * bpr[k] + bpi[k] * bpi[k]
                nn[p] = acc
            worst = 0.0
            for p in range(n - 1):
                bpr = br[p]
                bpi = bi[p]
                for q in range(p + 1, n):
                    if nn[p] <= null2 and nn[q] <= null2:
                        continue
                    npq = nn[p] * nn[q]
                    if npq == 0.0:
                        continue
                    bqr = br[q]
                    bqi = bi[q]
                    gr = 0.0
                    gi = 0.0
                    for k in range(n):
                        gr += bpr[k] * bqr[k] + bpi[k] * bqi[k]
                        gi += bpr[k] * bqi[k] - bpi[k] * bqr[k]
                    g2 = gr * gr + gi * gi
                    cos2 = g2 / npq
                    if cos2 > worst:
                        worst = cos2
                    if cos2 <= tol2:
                        continue
                    r = math.sqrt(g2)
                    phr = gr / r
                    phi = gi / r
                    tau = (nn[p] - nn[q]) / (2.0 * r)
                    if tau >= 0.0:
                        t = 1.0 / (tau + math.sqrt(tau * tau + 1.0))
                    else:
                        t = -1.0 / (-tau + math.sqrt(tau * tau + 1.0))
                    c = 1.0 / math.sqrt(t * t + 1.0)
                    s = t * c
                    cpr = c * phr
                    cpi = c * phi
                    spr = s * phr
                    spi = s * phi
                    for k in range(n):
                        pkr = bpr[k]
                        pki = bpi[k]
                        qkr = bqr[k]
                        qki = bqi[k]
                        bpr[k] = cpr * pkr - cpi * pki + s * qkr
                        bpi[k] = cpr * pki + cpi * pkr + s * qki
                        bqr[k] = -(spr * pkr - spi * pki) + c * qkr
                        bqi[k] = -(spr * pki + spi * pkr) + c * qki
                    nn[p] += t * r
                    nn[q] -= t * r
            sweeps = sweep + 1
            if worst <= tol2:
                break
        return sweeps, math.sqrt(worst)

    @njit(cache=True)
    def _fock_rk4_nb(c0, omega_n, u_half, sqrtn, dt, steps):  # pragma: no cover
        dim = c0.shape[0]
        c = c0.copy()
        k1 = np.empty(dim, dtype=np.complex128)
        k2 = np.empty(dim, dtype=np.complex128)
        k3 = np.empty(dim, dtype=np.complex128)
        k4 = np.empty(dim, dtype=np.complex128)
        tmp = np.empty(dim, dtype=np.complex128)
        max_a2 = 0.0
        phase = 0.0
        prev_arg = 0.0
        for step in range(steps):
            u0 = u_half[2 * step]
            um = u_half[2 * step + 1]
            u1 = u_half[2 * step + 2]
            for nn in range(dim):
                acc = omega_n[nn] * c[nn]
                if nn > 0:
                    acc += u0 * sqrtn[nn] * c[nn - 1]
                if nn < dim - 1:
                    acc += np.conj(u0) * sqrtn[nn + 1] * c[nn + 1]
                k1[nn] = -1j * acc
            for nn in range(dim):
                tmp[nn] = c[nn] + 0.5 * dt * k1[nn]
            for nn in range(dim):
                acc = omega_n[nn] * tmp[nn]
                if nn > 0:
                    acc += um * sqrtn[nn] * tmp[nn - 1]
                if nn < dim - 1:
                    acc += np.conj(um) * sqrtn[nn + 1] * tmp[nn + 1]
                k2[nn] = -1j * acc
            for nn in range(dim):
                tmp[nn] = c[nn] + 0.5 * dt * k2[nn]
            for nn in range(dim):
                acc = omega_n[nn] * tmp[nn]
                if nn > 0:
                    acc += um * sqrtn[nn] * tmp[nn - 1]
                if nn < dim - 1:
                    acc += np.conj(um) * sqrtn[nn + 1] * tmp[nn + 1]
                k3[nn] = -1j * acc
            for nn in range(dim):
                tmp[nn] = c[nn] + dt * k3[nn]
            for nn in range(dim):
                acc = omega_n[nn] * tmp[nn]
                if nn > 0:
                    acc += u1 * sqrtn[nn] * tmp[nn - 1]
                if nn < dim - 1:
                    acc += np.conj(u1) * sqrtn[nn + 1] * tmp[nn + 1]
                k4[nn] = -1j * acc
            for nn in range(dim):
                c[nn] = c[nn] + (dt / 6.0) * (k1[nn] + 2.0 * k2[nn] + 2.0 * k3[nn] + k4[nn])
            a_ex = 0.0 + 0.0j
            for nn in range(1, dim):
                a_ex += np.conj(c[nn - 1]) * c[nn] * sqrtn[nn]
            a2 = a_ex.real * a_ex.real + a_ex.imag * a_ex.imag
            if a2 > max_a2:
                max_a2 = a2
            arg = math.atan2(c[0].imag, c[0].real)
            d = arg - prev_arg
            if d > math.pi:
                d -= 2.0 * math.pi
            elif d < -math.pi:
                d += 2.0 * math.pi
            phase += d
            prev_arg = arg
        a_ex = 0.0 + 0.0j
        for nn in range(1, dim):
            a_ex += np.conj(c[nn - 1]) * c[nn] * sqrtn[nn]
        norm = 0.0
        for nn in range(dim):
            norm += c[nn].real ** 2 + c[nn].imag ** 2
        return c, a_ex, phase, max_a2, norm

    _twosided_impl = _twosided_nb
    _onesided_impl = _onesided_nb
    _fock_rk4_impl = _fock_rk4_nb
else:
    _twosided_impl = _twosided_py
    _onesided_impl = _onesided_py
    _fock_rk4_impl = _fock_rk4_py


# ---------------------------------------------------------------------------
# public wrappers
# ---------------------------------------------------------------------------

def _split(matrix):
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    return (
        np.ascontiguousarray(m.real).copy(),
        np.ascontiguousarray(m.imag).copy(),
    )


def hermitian_eig(matrix, tol=1e-12, max_sweeps=100, want_vectors=True):
    """Eigendecomposition of a Hermitian matrix by two-sided cyclic Jacobi.

    Returns (eigenvalues, eigenvectors_or_None, sweeps).  Deterministic:
    fixed row-cyclic pivot order, no randomization.
    """
    ar, ai = _split(matrix)
    n = ar.shape[0]
    if want_vectors:
        vtr = np.eye(n)
        vti = np.zeros((n, n))
    else:
        vtr = np.zeros((1, 1))
        vti = np.zeros((1, 1))
    sweeps, off = _twosided_impl(ar, ai, vtr, vti, want_vectors, tol, max_sweeps)
    scale = float(np.linalg.norm(matrix))
    if scale > 0.0 and off > tol * scale and sweeps >= max_sweeps - 1:
        raise JacobiConvergenceError(sweeps + 1, off, tol * scale)
    w = np.diagonal(ar).copy()
    if not want_vectors:
        return w, None, sweeps
    v = (vtr + 1j * vti).T.copy()
    return w, v, sweeps


def hermitian_singular_values(matrix, tol=1e-12, max_sweeps=100):
    """Singular values of a Hermitian matrix by one-sided cyclic Jacobi.

    Columns are rotated pairwise until mutually orthogonal; the column
    norms are then the singular values, i.e. the absolute eigenvalues.
    Only contiguous row operations, so it is much faster than the
    two-sided sweep at a few hundred dimensions.
    """
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    br = np.ascontiguousarray(m.real.T).copy()
    bi = np.ascontiguousarray(m.imag.T).copy()
    sweeps, worst = _onesided_impl(br, bi, tol, max_sweeps)
    if worst > tol and sweeps >= max_sweeps:
        raise JacobiConvergenceError(sweeps, worst, tol)
    return np.sqrt(np.sum(br * br + bi * bi, axis=1)), sweeps


def fock_rk4_evolve(c0, omega_n, u_half, sqrtn, dt, steps):
    """Order-4 Runge-Kutta propagation of a driven single-mode Fock vector.

    ``u_half`` holds the time-dependent raising-operator coefficient on the
    half-step grid (2*steps + 1 samples).  Tracks the running maximum of
    |<a>|^2 and the continuously unwrapped phase of the vacuum amplitude.
    Returns (c_final, a_expectation, phase, max_abs_a_sq, norm_sq).
    """
    c0 = np.ascontiguousarray(c0, dtype=np.complex128)
    omega_n = np.ascontiguousarray(omega_n, dtype=np.float64)
    u_half = np.ascontiguousarray(u_half, dtype=np.complex128)
    sqrtn = np.ascontiguousarray(sqrtn, dtype=np.float64)
    if u_half.shape[0] != 2 * steps + 1:
        raise ValidationError("u_half must be sampled on the half-step grid")
    return _fock_rk4_impl(c0, omega_n, u_half, sqrtn, float(dt), int(steps))


def warm_up():
    """Trigger JIT compilation on tiny inputs (no-op on the numpy backend)."""
    if not HAVE_NUMBA:
        return
    m = np.array([[2.0, 1.0 + 0.5j], [1.0 - 0.5j, -1.0]], dtype=np.complex128)
    hermitian_eig(m)
    hermitian_eig(m, want_vectors=False)
    hermitian_singular_values(m)
    c0 = np.array([1.0, 0.0, 0.0], dtype=np.complex128)
    fock_rk4_evolve(
        c0,
        np.arange(3.0),
        np.full(5, 0.1 + 0.0j),
        np.sqrt(np.arange(3.0)),
        0.01,
        2,
    )
