"""Cyclic qutrit coupled to a single cavity mode.

Basis convention (frozen, shared by every module): the composite basis state
``|j, k>`` with atomic level ``j in {0, 1, 2}`` and photon number
``k in [0, n_max]`` sits at index ``3 * k + j`` (atom index runs fastest).
Units: ``omega`` sets the scale; energies are angular frequencies, hbar = 1.
"""
from __future__ import annotations

import math
import dataclasses
from dataclasses import dataclass, fields

import numpy as np

from .errors import DimensionMismatch, ValidationError

N_LEVELS = 3

# (lower level, upper level, coupling attribute, CRT flag attribute)
TRANSITIONS = (
    (0, 1, "g01", "c01"),
    (1, 2, "g12", "c12"),
    (0, 2, "g02", "c02"),
)


@dataclass(frozen=True)
class ModelParams:
    """Static parameters of the bare Hamiltonian (everything except the drive)."""

    omega: float = 1.0
    e1: float = 0.0
    e2: float = 0.0
    g01: float = 0.0
    g12: float = 0.0
    g02: float = 0.0
    c01: int = 1
    c12: int = 1
    c02: int = 1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValidationError(f"{f.name} must be finite, got {v!r}")
        if self.omega <= 0:
            raise ValidationError(f"omega must be positive, got {self.omega}")
        for name in ("g01", "g12", "g02"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative, got {getattr(self, name)}")
        for name in ("c01", "c12", "c02"):
            v = getattr(self, name)
            if v not in (0, 1):
                raise ValidationError(f"{name} must be 0 or 1, got {v!r}")
            object.__setattr__(self, name, int(v))

    @classmethod
    def from_detunings(cls, d1, d2, g01=0.0, g12=0.0, g02=0.0, c01=1, c12=1, c02=1, omega=1.0):
        """Build parameters from the detunings Delta_1, Delta_2 instead of level energies."""
        e1 = omega - d1
        e2 = e1 + omega - d2
        return cls(omega=omega, e1=e1, e2=e2, g01=g01, g12=g12, g02=g02, c01=c01, c12=c12, c02=c02)

    @property
    def energies(self):
        return (0.0, self.e1, self.e2)

    @property
    def gmax(self):
        return max(self.g01, self.g12, self.g02)

    def coupling(self, lower, upper):
        for lo, up, g, c in TRANSITIONS:
            if (lo, up) == (lower, upper):
                return getattr(self, g), getattr(self, c)
        raise KeyError((lower, upper))

    def is_dispersive(self, n_max):
        """True when |Delta_1|, |Delta_2|, |Delta_3| all exceed sqrt(n_max) * max(g)."""
        d = detunings(self)
        bound = math.sqrt(n_max) * self.gmax
        return min(abs(d.d1), abs(d.d2), abs(d.d3)) > bound

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Drive:
    """Harmonic modulation E_k(t) = E_k + eps_k sin(eta t + phi_k) of the excited levels."""

    eps1: float = 0.0
    eps2: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValidationError(f"{f.name} must be finite, got {v!r}")
        if self.eps1 < 0 or self.eps2 < 0:
            raise ValidationError("modulation amplitudes eps1, eps2 must be nonnegative")
        if self.eta < 0:
            raise ValidationError(f"eta must be nonnegative, got {self.eta}")

    @property
    def amplitudes(self):
        return (0.0, self.eps1, self.eps2)

    @property
    def phases(self):
        return (0.0, self.phi1, self.phi2)

    @property
    def is_off(self):
        return self.eps1 == 0 and self.eps2 == 0

    @property
    def period(self):
        return 2 * math.pi / self.eta if self.eta > 0 else math.inf

    def strong_levels(self, params: ModelParams, ratio=0.2):
        """Levels k whose modulation violates eps_k <= ratio * E_k (weak-modulation check)."""
        return [k for k in (1, 2) if self.amplitudes[k] > ratio * abs(params.energies[k])]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Detunings:
    d1: float
    d2: float
    d3: float


def detunings(params: ModelParams) -> Detunings:
    d1 = params.omega - params.e1
    d2 = params.omega - (params.e2 - params.e1)
    return Detunings(d1, d2, d1 + d2)


@dataclass(frozen=True)
class HilbertSpace:
    """Truncated space: 3 atomic levels times photon numbers 0..n_max."""

    n_max: int = 30

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValidationError(f"n_max must be an integer >= 1, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def dim(self):
        return N_LEVELS * (self.n_max + 1)

    @property
    def n_photons(self):
        return self.n_max + 1

    def index(self, j, k):
        if not (0 <= j < N_LEVELS and 0 <= k <= self.n_max):
            raise IndexError(f"|{j},{k}> outside the truncated space")
        return N_LEVELS * k + j

    def label(self, index):
        """(atom level, photon number) of a basis index."""
        if not 0 <= index < self.dim:
            raise IndexError(index)
        k, j = divmod(int(index), N_LEVELS)
        return j, k

    @property
    def atom_of(self):
        return np.tile(np.arange(N_LEVELS), self.n_photons)

    @property
    def photons_of(self):
        return np.repeat(np.arange(self.n_photons), N_LEVELS)

    def basis_state(self, j, k):
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(j, k)] = 1.0
        return psi


def _check_dim(h, space):
    if h.shape != (space.dim, space.dim):
        raise DimensionMismatch(f"matrix shape {h.shape} does not match dim {space.dim}")


def bare_hamiltonian(params: ModelParams, space: HilbertSpace) -> np.ndarray:
    """H_0 / hbar as a dense real symmetric matrix.

    Diagonal: omega * k + E_j.  Coupling of levels l < u:
    g (a sigma_{u,l} + c a sigma_{l,u} + h.c.).
    """
    dim = space.dim
    h = np.zeros((dim, dim))
    atom, phot = space.atom_of, space.photons_of
    h[np.arange(dim), np.arange(dim)] = params.omega * phot + np.asarray(params.energies)[atom]
    for lo, up, gname, cname in TRANSITIONS:
        g, c = getattr(params, gname), getattr(params, cname)
        for k in range(space.n_max):
            amp = g * math.sqrt(k + 1)
            # a sigma_{up,lo}: |lo, k+1> -> |up, k>
            _set_lower(h, space.index(up, k), space.index(lo, k + 1), amp)
            # c a sigma_{lo,up}: |up, k+1> -> |lo, k>
            _set_lower(h, space.index(lo, k), space.index(up, k + 1), c * amp)
    lower = np.tril(h, -1)
    return np.diag(np.diag(h)) + lower + lower.T


def _set_lower(h, i, j, value):
    if i > j:
        h[i, j] += value
    else:
        h[j, i] += value


def modulation_diagonal(params: ModelParams, drive: Drive, space: HilbertSpace, t) -> np.ndarray:
    """Diagonal of the instantaneous level shift sum_k eps_k sin(eta t + phi_k) sigma_kk."""
    shift = np.zeros(N_LEVELS)
    for k in (1, 2):
        eps = drive.amplitudes[k]
        if eps:
            shift[k] = eps * math.sin(drive.eta * t + drive.phases[k])
    return shift[space.atom_of]


def hamiltonian_at(params: ModelParams, drive: Drive, t, space: HilbertSpace, h0=None) -> np.ndarray:
    """Full H(t) / hbar."""
    if h0 is None:
        h0 = bare_hamiltonian(params, space)
    else:
        _check_dim(h0, space)
    return h0 + np.diag(modulation_diagonal(params, drive, space, t))


# Operators in the composite basis.

def annihilation(space: HilbertSpace) -> np.ndarray:
    a = np.zeros((space.dim, space.dim))
    for k in range(1, space.n_photons):
        for j in range(N_LEVELS):
            a[space.index(j, k - 1), space.index(j, k)] = math.sqrt(k)
    return a


def number_operator(space: HilbertSpace) -> np.ndarray:
    return np.diag(space.photons_of.astype(float))


def sigma(space: HilbertSpace, k, l) -> np.ndarray:
    """Atomic operator |k><l| tensored with the photon identity."""
    s = np.zeros((space.dim, space.dim))
    for n in range(space.n_photons):
        s[space.index(k, n), space.index(l, n)] = 1.0
    return s


def atom_projector_diag(space: HilbertSpace, k) -> np.ndarray:
    """Diagonal of sigma_kk as a 0/1 vector."""
    return (space.atom_of == k).astype(float)
