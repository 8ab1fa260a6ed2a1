"""Compiled inner loop of the master-equation integrator."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _phases(t, dt, free_half, free_full, atom, eps, phi, eta, ph, pf):
    # exp(-i theta) over [t, t + dt/2] and [t, t + dt]
    half = np.zeros(3)
    full = np.zeros(3)
    if eta > 0.0:
        for k in range(1, 3):
            if eps[k] != 0.0:
                c0 = np.cos(eta * t + phi[k])
                half[k] = eps[k] * (c0 - np.cos(eta * (t + 0.5 * dt) + phi[k])) / eta
                full[k] = eps[k] * (c0 - np.cos(eta * (t + dt) + phi[k])) / eta
    for i in range(atom.size):
        a = atom[i]
        ph[i] = free_half[i] * np.exp(-1j * half[a])
        pf[i] = free_full[i] * np.exp(-1j * full[a])


@njit(cache=True)
def _rhs(r, p, use_p, rows, cols, vals, weight, ladder, n_ph, decays, out, x):
    dim = r.shape[0]
    for i in range(dim):
        for j in range(dim):
            x[i, j] = 0.0
    # x = conj(P) Hg P r, with the phases folded into each coupling entry
    for e in range(rows.size):
        i = rows[e]
        j = cols[e]
        v = vals[e] * np.conj(p[i]) * p[j] if use_p else vals[e] + 0.0j
        for c in range(dim):
            x[i, c] += v * r[j, c]
    for i in range(dim):
        for j in range(dim):
            out[i, j] = -1j * (x[i, j] - np.conj(x[j, i])) + weight[i, j] * r[i, j]
    # cavity jump a rho a^dag
    if ladder[0, 0] != 0.0:
        for n in range(n_ph - 1):
            for m in range(n_ph - 1):
                c = ladder[n, m]
                for a in range(3):
                    for b in range(3):
                        out[3 * n + a, 3 * m + b] += c * r[3 * (n + 1) + a, 3 * (m + 1) + b]
    # atomic jumps sigma_{lo,up} rho sigma_{up,lo}
    for d in range(decays.shape[0]):
        lo = int(decays[d, 0])
        up = int(decays[d, 1])
        g = decays[d, 2]
        for n in range(n_ph):
            for m in range(n_ph):
                out[3 * n + lo, 3 * m + lo] += g * r[3 * n + up, 3 * m + up]


@njit(cache=True)
def lindblad_steps(rho, t0, dt, n_steps, free_half, free_full, atom, eps, phi, eta,
                   rows, cols, vals, weight, ladder, n_ph, decays):
    """Advance rho by n_steps Lawson-RK4 steps starting at t0; returns the new matrix."""
    dim = rho.shape[0]
    ph = np.empty(dim, dtype=np.complex128)
    pf = np.empty(dim, dtype=np.complex128)
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    tmp = np.empty_like(rho)
    x = np.empty_like(rho)
    r = rho.copy()
    for s in range(n_steps):
        t = t0 + s * dt
        _phases(t, dt, free_half, free_full, atom, eps, phi, eta, ph, pf)
        _rhs(r, ph, False, rows, cols, vals, weight, ladder, n_ph, decays, k1, x)
        for i in range(dim):
            for j in range(dim):
                tmp[i, j] = r[i, j] + 0.5 * dt * k1[i, j]
        _rhs(tmp, ph, True, rows, cols, vals, weight, ladder, n_ph, decays, k2, x)
        for i in range(dim):
            for j in range(dim):
                tmp[i, j] = r[i, j] + 0.5 * dt * k2[i, j]
        _rhs(tmp, ph, True, rows, cols, vals, weight, ladder, n_ph, decays, k3, x)
        for i in range(dim):
            for j in range(dim):
                tmp[i, j] = r[i, j] + dt * k3[i, j]
        _rhs(tmp, pf, True, rows, cols, vals, weight, ladder, n_ph, decays, k4, x)
        for i in range(dim):
            for j in range(dim):
                tmp[i, j] = (r[i, j] + (dt / 6.0) * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])) \
                    * pf[i] * np.conj(pf[j])
        for i in range(dim):
            for j in range(i, dim):
                v = 0.5 * (tmp[i, j] + np.conj(tmp[j, i]))
                r[i, j] = v
                r[j, i] = np.conj(v)
    return r
