"""Photon-number and atomic observables of pure states and density matrices.

Every function accepts either a state vector (1-D) or a density matrix (2-D)
in the composite basis of :mod:`qutrit_dce.model`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import N_LEVELS

VACUUM_THRESHOLD = 1e-12


def _diag_probs(state):
    state = np.asarray(state)
    if state.ndim == 1:
        p = np.abs(state) ** 2
    elif state.ndim == 2:
        p = np.real(np.diagonal(state))
    else:
        raise ValidationError(f"expected a vector or a square matrix, got shape {state.shape}")
    if p.size % N_LEVELS:
        raise ValidationError(f"dimension {p.size} is not a multiple of 3")
    return p.reshape(-1, N_LEVELS)  # rows: photon number, columns: atom level


def photon_distribution(state) -> np.ndarray:
    """P(n) = Tr(rho |n><n|), n = 0..n_max."""
    return _diag_probs(state).sum(axis=1)


def populations(state):
    """Atomic populations (P_0, P_1, P_2)."""
    p0, p1, p2 = _diag_probs(state).sum(axis=0)
    return float(p0), float(p1), float(p2)


def photon_number(state) -> float:
    pn = photon_distribution(state)
    return float(np.arange(pn.size) @ pn)


def photon_variance(state) -> float:
    pn = photon_distribution(state)
    n = np.arange(pn.size)
    mean = n @ pn
    return float((n - mean) ** 2 @ pn)


def mandel_q(state):
    """[<(dn)^2> - n_ph] / n_ph, or None for the vacuum."""
    pn = photon_distribution(state)
    return _mandel_from_distribution(pn)


def _mandel_from_distribution(pn):
    n = np.arange(pn.size)
    mean = float(n @ pn)
    if mean < VACUUM_THRESHOLD:
        return None
    var = float((n - mean) ** 2 @ pn)
    return (var - mean) / mean


def norm_or_trace(state) -> float:
    state = np.asarray(state)
    if state.ndim == 1:
        return float(np.linalg.norm(state))
    return float(np.real(np.trace(state)))


def purity(rho) -> float:
    rho = np.asarray(rho)
    if rho.ndim == 1:
        return float(np.linalg.norm(rho) ** 4)
    return float(np.real(np.vdot(rho.conj().T, rho)))


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    n_ph: float
    mandel_q: float | None
    p0: float
    p1: float
    p2: float
    norm_or_trace: float


def record(state, t=0.0) -> ObservableRecord:
    pn = photon_distribution(state)
    p0, p1, p2 = populations(state)
    return ObservableRecord(
        t=float(t),
        n_ph=float(np.arange(pn.size) @ pn),
        mandel_q=_mandel_from_distribution(pn),
        p0=p0,
        p1=p1,
        p2=p2,
        norm_or_trace=norm_or_trace(state),
    )


# Reference field states (atom in |0>), used for checks of the Mandel factor.

def _embed_field(amplitudes):
    psi = np.zeros(N_LEVELS * amplitudes.size, dtype=complex)
    psi[0::N_LEVELS] = amplitudes
    return psi


def fock_state(n, n_max, atom=0):
    psi = np.zeros(N_LEVELS * (n_max + 1), dtype=complex)
    psi[N_LEVELS * n + atom] = 1.0
    return psi


def coherent_state(alpha, n_max):
    """Truncated coherent state |alpha>, renormalized on 0..n_max."""
    n = np.arange(n_max + 1)
    logfact = np.array([math.lgamma(k + 1) for k in n])
    amp = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(complex(alpha)) - logfact / 2) if alpha else (n == 0) * 1.0
    amp = np.asarray(amp, dtype=complex)
    return _embed_field(amp / np.linalg.norm(amp))


def squeezed_vacuum(r, n_max, theta=0.0):
    """Truncated squeezed vacuum S(r e^{i theta})|0>, renormalized on 0..n_max.

    Even components: (-e^{i theta} tanh r)^m sqrt((2m)!) / (2^m m!) / sqrt(cosh r).
    """
    amp = np.zeros(n_max + 1, dtype=complex)
    t = -np.exp(1j * theta) * math.tanh(r)
    for m in range(n_max // 2 + 1):
        log_mag = 0.5 * math.lgamma(2 * m + 1) - m * math.log(2) - math.lgamma(m + 1)
        amp[2 * m] = t**m * math.exp(log_mag) / math.sqrt(math.cosh(r))
    return _embed_field(amp / np.linalg.norm(amp))
