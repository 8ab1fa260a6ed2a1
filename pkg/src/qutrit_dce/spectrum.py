"""Exact dressed states of H_0 and numerically exact transition rates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousBranch, DCEError, ValidationError
from .model import N_LEVELS, Drive, HilbertSpace


@dataclass(frozen=True, eq=False)
class DressedSpectrum:
    """Eigenpairs of H_0 sorted by energy.

    ``eigenvectors[:, n]`` is |phi_n>, phase-fixed so that its largest-magnitude
    component is real and positive.  ``labels[n]`` is the bare basis index with
    the largest |overlap|^2.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.size

    @property
    def space(self):
        return HilbertSpace(self.dim // N_LEVELS - 1)

    def atom_weights(self):
        """<phi_n| sigma_kk |phi_m> for k = 0, 1, 2, stacked as (3, dim, dim)."""
        atom = self.space.atom_of
        v = self.eigenvectors
        return np.stack([v.conj().T @ (v * (atom == k)[:, None]) for k in range(N_LEVELS)])


def diagonalize(h0: np.ndarray) -> DressedSpectrum:
    h0 = np.asarray(h0)
    if h0.ndim != 2 or h0.shape[0] != h0.shape[1] or h0.shape[0] % N_LEVELS:
        raise ValidationError(f"expected a square matrix of dimension 3*(n_max+1), got {h0.shape}")
    if not np.allclose(h0, h0.conj().T, atol=1e-12 * max(1.0, np.abs(h0).max())):
        raise ValidationError("H_0 is not Hermitian")
    try:
        vals, vecs = np.linalg.eigh(h0)
    except np.linalg.LinAlgError as exc:
        raise DCEError(f"eigensolver failed: {exc}") from exc
    cols = np.arange(vecs.shape[1])
    big = np.argmax(np.abs(vecs), axis=0)
    pivot = vecs[big, cols]
    vecs = vecs * (np.abs(pivot) / pivot)[None, :]
    if np.isrealobj(h0):
        vecs = vecs.real
    labels = np.argmax(np.abs(vecs) ** 2, axis=0)
    for arr in (vals, vecs, labels):
        arr.setflags(write=False)
    return DressedSpectrum(vals, vecs, labels)


@dataclass(frozen=True, eq=False)
class ZetaBranch:
    """Dressed states |zeta_k>, k = 0..k_max, with the atom mostly in |0>."""

    indices: np.ndarray  # position of zeta_k in the spectrum
    energies: np.ndarray  # numeric Lambda_k
    vectors: np.ndarray  # columns |zeta_k>
    overlaps: np.ndarray  # |<0,k|zeta_k>|^2

    @property
    def k_max(self):
        return self.indices.size - 1


def zeta_branch(spec: DressedSpectrum, space: HilbertSpace | None = None, k_max=None) -> ZetaBranch:
    """Match |0,k> to dressed states by maximum overlap, each eigenpair used once."""
    space = space or spec.space
    if space.dim != spec.dim:
        raise ValidationError(f"space dim {space.dim} does not match spectrum dim {spec.dim}")
    if k_max is None:
        k_max = max(space.n_max - 4, 0)
    if not 0 <= k_max <= space.n_max:
        raise ValidationError(f"k_max={k_max} outside [0, {space.n_max}]")
    rows = [space.index(0, k) for k in range(k_max + 1)]
    ov = np.abs(spec.eigenvectors[rows, :]) ** 2

    # greedy assignment by descending overlap
    assigned = -np.ones(k_max + 1, dtype=int)
    used = np.zeros(spec.dim, dtype=bool)
    for flat in np.argsort(-ov, axis=None, kind="stable"):
        k, n = divmod(int(flat), spec.dim)
        if assigned[k] >= 0 or used[n]:
            continue
        if ov[k, n] <= 0.5:
            break
        assigned[k] = n
        used[n] = True
    for k in range(k_max + 1):
        if assigned[k] < 0:
            free = np.where(~used, ov[k], 0.0)
            raise AmbiguousBranch(k, float(free.max()))
    ks = np.arange(k_max + 1)
    return ZetaBranch(
        indices=assigned,
        energies=spec.eigenvalues[assigned].copy(),
        vectors=spec.eigenvectors[:, assigned].copy(),
        overlaps=ov[ks, assigned],
    )


def rate_matrix(spec: DressedSpectrum, drive: Drive) -> np.ndarray:
    """Theta_{n;m} = 1/2 sum_k eps_k e^{i phi_k} <phi_n|sigma_kk|phi_m> for all n, m."""
    atom = spec.space.atom_of
    weight = np.zeros(spec.dim, dtype=complex)
    for k in (1, 2):
        weight += 0.5 * drive.amplitudes[k] * np.exp(1j * drive.phases[k]) * (atom == k)
    v = spec.eigenvectors
    return v.conj().T @ (weight[:, None] * v)


def numeric_rate(spec: DressedSpectrum, drive: Drive, n, m) -> complex:
    """Exact rate Theta_{n;m} between dressed states n and m (n != m)."""
    _check_index(spec, n)
    _check_index(spec, m)
    if n == m:
        raise ValidationError("numeric_rate needs two different dressed states")
    atom = spec.space.atom_of
    phi_n = spec.eigenvectors[:, n]
    phi_m = spec.eigenvectors[:, m]
    theta = 0j
    for k in (1, 2):
        eps = drive.amplitudes[k]
        if eps:
            theta += 0.5 * eps * np.exp(1j * drive.phases[k]) * np.vdot(phi_n, (atom == k) * phi_m)
    return complex(theta)


def transition_frequency(spec: DressedSpectrum, n, m) -> float:
    _check_index(spec, n)
    _check_index(spec, m)
    return float(abs(spec.eigenvalues[m] - spec.eigenvalues[n]))


def _check_index(spec, n):
    if not 0 <= n < spec.dim:
        raise IndexError(f"dressed index {n} outside [0, {spec.dim})")
