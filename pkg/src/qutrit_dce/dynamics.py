"""Time evolution of the driven qutrit-cavity system.

Three propagators share one fixed-step fourth-order scheme:

* :func:`evolve_schrodinger` -- pure states under the full H(t);
* :func:`evolve_lindblad` -- density matrices under the Lindblad master equation;
* :func:`evolve_effective` -- the dressed-frame amplitude equations, keeping only
  near-resonant couplings.

The full-model integrators use classical RK4 in the interaction picture of the
diagonal part ``omega n + sum_k E_k(t) sigma_kk`` (whose phase is integrated
exactly), i.e. a Lawson/integrating-factor RK4.  Only the atom-field coupling,
whose norm is O(g sqrt(n)), is handled by the RK stages, which keeps the norm
drift at round-off level over 10^5 carrier periods.

When the drive period is an integer number of steps, one RK4 pass over a
period is the same linear map for every period.  The pure-state integrator
then builds that map once and applies it repeatedly; this is the same
arithmetic as stepping, reordered.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NormDrift, PositivityLoss, TraceDrift, ValidationError
from .model import N_LEVELS, Drive, HilbertSpace, ModelParams, bare_hamiltonian
from ._kernels import lindblad_steps
from .spectrum import DressedSpectrum, rate_matrix

NORM_DRIFT_LIMIT = 1e-4
TRACE_DRIFT_LIMIT = 1e-6
POSITIVITY_LIMIT = -1e-6


@dataclass(frozen=True)
class DissipationRates:
    kappa: float = 0.0
    gamma01: float = 0.0
    gamma02: float = 0.0
    gamma12: float = 0.0
    gphi1: float = 0.0
    gphi2: float = 0.0

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be a finite nonnegative rate, got {v!r}")

    @property
    def is_zero(self):
        return not any(self.__dict__.values())


def max_frequency(drive: Drive, space: HilbertSpace, omega=1.0):
    return max(drive.eta, omega * (space.n_max + 2))


def max_dt(drive: Drive, space: HilbertSpace, omega=1.0):
    """Largest step accepted by the full-model integrators."""
    return 2 * math.pi / (20 * max_frequency(drive, space, omega))


def default_dt(drive: Drive, space: HilbertSpace, omega=1.0):
    return 2 * math.pi / (40 * max_frequency(drive, space, omega))


@dataclass(frozen=True)
class TimeGrid:
    """Fixed-step grid: ``n_steps`` steps of ``dt`` from ``t0``; sample every ``stride`` steps.

    The final time is always sampled, even when it is not a multiple of ``stride``.
    """

    t1: float
    dt: float
    stride: int = 1
    t0: float = 0.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.t1 < self.t0:
            raise ValidationError("t1 must not precede t0")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValidationError(f"stride must be a positive integer, got {self.stride}")
        object.__setattr__(self, "stride", int(self.stride))

    @property
    def n_steps(self):
        return int(round((self.t1 - self.t0) / self.dt))

    @property
    def sample_steps(self):
        steps = list(range(0, self.n_steps + 1, self.stride))
        if steps[-1] != self.n_steps:
            steps.append(self.n_steps)
        return np.array(steps)

    @property
    def times(self):
        return self.t0 + self.sample_steps * self.dt

    @classmethod
    def for_drive(cls, drive: Drive, space: HilbertSpace, t1, sample_dt=None, omega=1.0,
                  steps_per_period=None, t0=0.0):
        """Grid whose step divides the drive period and whose samples fall on period boundaries.

        The step is the largest ``period / m`` not exceeding the default step
        2 pi / (40 f_max); ``steps_per_period`` overrides ``m``.
        """
        dt_target = default_dt(drive, space, omega)
        if drive.is_off or drive.eta == 0:
            dt = dt_target
            stride = max(1, int(round((sample_dt or dt) / dt)))
            return cls(t1=t1, dt=dt, stride=stride, t0=t0)
        period = drive.period
        m = steps_per_period or math.ceil(period / dt_target - 1e-9)
        dt = period / m
        periods_per_sample = max(1, int(round((sample_dt or period) / period)))
        return cls(t1=t1, dt=dt, stride=m * periods_per_sample, t0=t0)


@dataclass
class TimeSeries:
    """Sampled observables of a trajectory."""

    t: np.ndarray
    n_ph: np.ndarray
    mandel_q: np.ndarray  # NaN where undefined (vacuum)
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    norm_or_trace: np.ndarray
    photon_dist: np.ndarray  # (samples, n_max + 1)
    tracked: np.ndarray | None = None  # (samples, K) populations of tracked states
    states: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    COLUMNS = ("t", "n_ph", "mandel_q", "p0", "p1", "p2", "norm_or_trace")

    def __len__(self):
        return self.t.size

    @property
    def norm_drift(self):
        return float(np.max(np.abs(self.norm_or_trace - 1.0)))

    def sample_index(self, t):
        return int(np.argmin(np.abs(self.t - t)))


class _Sampler:
    def __init__(self, n_samples, n_photons, track, keep_states, mixed):
        self.i = 0
        self.t = np.empty(n_samples)
        self.pn = np.empty((n_samples, n_photons))
        self.pa = np.empty((n_samples, N_LEVELS))
        self.norm = np.empty(n_samples)
        self.track = None if track is None else np.asarray(track).reshape(track.shape[0], -1)
        self.tracked = None if track is None else np.empty((n_samples, self.track.shape[1]))
        self.states = [] if keep_states else None
        self.mixed = mixed
        if mixed:
            self.min_eig = np.empty(n_samples)
            self.herm = np.empty(n_samples)
            self.purity = np.empty(n_samples)

    def add(self, t, state):
        i = self.i
        self.t[i] = t
        if self.mixed:
            probs = np.real(np.diagonal(state)).reshape(-1, N_LEVELS)
            self.norm[i] = float(np.real(np.trace(state)))
            self.herm[i] = float(np.abs(state - state.conj().T).max())
            self.min_eig[i] = float(np.linalg.eigvalsh(state)[0])
            self.purity[i] = float(np.real(np.vdot(state.conj().T, state)))
            if self.track is not None:
                v = self.track
                self.tracked[i] = np.real(np.einsum("ik,ij,jk->k", v.conj(), state, v))
        else:
            probs = (np.abs(state) ** 2).reshape(-1, N_LEVELS)
            self.norm[i] = float(np.linalg.norm(state))
            if self.track is not None:
                self.tracked[i] = np.abs(self.track.conj().T @ state) ** 2
        self.pn[i] = probs.sum(axis=1)
        self.pa[i] = probs.sum(axis=0)
        if self.states is not None:
            self.states.append(np.array(state, copy=True))
        self.i += 1

    def series(self):
        n = np.arange(self.pn.shape[1])
        nph = self.pn @ n
        var = self.pn @ n**2 - nph**2
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(nph < 1e-12, np.nan, (var - nph) / nph)
        ts = TimeSeries(
            t=self.t, n_ph=nph, mandel_q=q,
            p0=self.pa[:, 0], p1=self.pa[:, 1], p2=self.pa[:, 2],
            norm_or_trace=self.norm, photon_dist=self.pn, tracked=self.tracked,
            states=None if self.states is None else np.array(self.states),
        )
        if self.mixed:
            ts.diagnostics = {"min_eigenvalue": self.min_eig, "hermiticity": self.herm,
                              "purity": self.purity}
        return ts


class _LawsonRK4:
    """RK4 in the interaction picture of the diagonal part of H(t).

    The diagonal phase accumulated over [t, t+s] is
    ``theta = e s + sum_k eps_k [atom == k] (cos(eta t + phi_k) - cos(eta (t+s) + phi_k)) / eta``.
    """

    def __init__(self, params: ModelParams, drive: Drive, space: HilbertSpace, dt):
        h0 = bare_hamiltonian(params, space)
        self.diag = np.diag(h0).copy()
        self.coupling = (h0 - np.diag(self.diag)).astype(complex)
        self.atom = space.atom_of
        self.drive = drive
        self.dt = dt
        self.free_half = np.exp(-0.5j * dt * self.diag)
        self.free_full = np.exp(-1j * dt * self.diag)
        self.modulated = [k for k in (1, 2) if drive.amplitudes[k] and drive.eta > 0]
        # eta == 0 turns the modulation into a static shift eps_k sin(phi_k)
        static = np.zeros(N_LEVELS)
        if drive.eta == 0:
            for k in (1, 2):
                static[k] = drive.amplitudes[k] * math.sin(drive.phases[k])
        if static.any():
            self.free_half = self.free_half * np.exp(-0.5j * dt * static[self.atom])
            self.free_full = self.free_full * np.exp(-1j * dt * static[self.atom])

    def phases(self, t):
        """exp(-i theta) over [t, t+dt/2] and [t, t+dt]."""
        if not self.modulated:
            return self.free_half, self.free_full
        d = self.drive
        half = np.zeros(N_LEVELS)
        full = np.zeros(N_LEVELS)
        for k in self.modulated:
            eps, ph = d.amplitudes[k], d.phases[k]
            c0 = math.cos(d.eta * t + ph)
            half[k] = eps * (c0 - math.cos(d.eta * (t + 0.5 * self.dt) + ph)) / d.eta
            full[k] = eps * (c0 - math.cos(d.eta * (t + self.dt) + ph)) / d.eta
        return (self.free_half * np.exp(-1j * half)[self.atom],
                self.free_full * np.exp(-1j * full)[self.atom])

    def _hi(self, p, y):
        """-i H_I y with H_I = conj(P) H_g P (rows of y are basis components)."""
        if y.ndim == 1:
            return -1j * p.conj() * (self.coupling @ (p * y))
        return -1j * p.conj()[:, None] * (self.coupling @ (p[:, None] * y))

    def step(self, y, t):
        """Advance a state vector, or every column of a matrix, by one step."""
        dt = self.dt
        ph, pf = self.phases(t)
        k1 = -1j * (self.coupling @ y)
        k2 = self._hi(ph, y + 0.5 * dt * k1)
        k3 = self._hi(ph, y + 0.5 * dt * k2)
        k4 = self._hi(pf, y + dt * k3)
        y = y + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        return pf * y if y.ndim == 1 else pf[:, None] * y

    def propagator(self, t, n_steps):
        u = np.eye(self.diag.size, dtype=complex)
        for j in range(n_steps):
            u = self.step(u, t + j * self.dt)
        return u


class _Dissipator:
    """Lindblad dissipator for the cavity and atomic channels.

    The anticommutator and dephasing parts reduce to an elementwise weight
    matrix; the jump terms are index shifts on the (photon, atom) tensor view.
    """

    def __init__(self, rates: DissipationRates, space: HilbertSpace):
        n = space.photons_of.astype(float)
        proj = [(space.atom_of == k).astype(float) for k in range(N_LEVELS)]
        w = -0.5 * rates.kappa * (n[:, None] + n[None, :])
        decays = []
        for lo, up, g in ((0, 1, rates.gamma01), (0, 2, rates.gamma02), (1, 2, rates.gamma12)):
            if g:
                w -= 0.5 * g * (proj[up][:, None] + proj[up][None, :])
                decays.append((lo, up, g))
        for k, g in ((1, rates.gphi1), (2, rates.gphi2)):
            if g:
                w += g * (np.outer(proj[k], proj[k]) - 0.5 * (proj[k][:, None] + proj[k][None, :]))
        self.weight = w
        s = np.sqrt(np.arange(1, space.n_photons))
        self.ladder = rates.kappa * np.outer(s, s)
        self.decays = np.array(decays, dtype=float).reshape(-1, 3)
        self.n_photons = space.n_photons


def _check_state(psi0, space):
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (space.dim,):
        raise ValidationError(f"state has shape {psi0.shape}, expected ({space.dim},)")
    if abs(np.linalg.norm(psi0) - 1) > 1e-8:
        raise ValidationError("initial state must be normalized")
    return psi0


def _check_grid(grid: TimeGrid, drive: Drive, space: HilbertSpace, omega):
    limit = max_dt(drive, space, omega)
    if grid.dt > limit * (1 + 1e-12):
        raise ValidationError(
            f"dt={grid.dt:.4g} does not resolve the fastest frequency; need dt <= {limit:.4g}"
        )


def _chunks(grid: TimeGrid):
    """(start step, length) of each interval between consecutive samples."""
    s = grid.sample_steps
    return list(zip(s[:-1], np.diff(s)))


def _steps_per_period(drive: Drive, dt):
    """Number of steps in one drive period if dt divides it, else 0.

    Without modulation the step map is the same at every step, so one step
    plays the role of the period.
    """
    if drive.is_off or drive.eta == 0:
        return 1
    m = drive.period / dt
    return int(round(m)) if abs(m - round(m)) < 1e-9 * max(1.0, m) and round(m) >= 1 else 0


def evolve_schrodinger(params: ModelParams, drive: Drive, psi0, grid: TimeGrid,
                       space: HilbertSpace | None = None, track=None, keep_states=False,
                       check_norm=True) -> TimeSeries:
    """Integrate i d|psi>/dt = H(t)|psi> and sample observables.

    ``track`` is an optional (dim, K) matrix of states whose populations are
    recorded.  No renormalization is applied; the norm is reported per sample.
    """
    if space is None:
        space = HilbertSpace(len(psi0) // N_LEVELS - 1)
    psi = _check_state(psi0, space)
    _check_grid(grid, drive, space, params.omega)
    stepper = _LawsonRK4(params, drive, space, grid.dt)
    sampler = _Sampler(len(grid.sample_steps), space.n_photons, track, keep_states, mixed=False)
    sampler.add(grid.t0, psi)

    # one-period map, reused for every chunk spanning whole periods
    per_period = _steps_per_period(drive, grid.dt)
    cache = {}
    # a diverging run overflows before the drift check sees it; the check reports it instead
    with np.errstate(over="ignore", invalid="ignore"):
        period_map = stepper.propagator(grid.t0, per_period) if per_period else None
        for start, length in _chunks(grid):
            t = grid.t0 + start * grid.dt
            if period_map is not None and length % per_period == 0:
                if length not in cache:
                    cache[length] = np.linalg.matrix_power(period_map, length // per_period)
                psi = cache[length] @ psi
            else:
                for j in range(length):
                    psi = stepper.step(psi, t + j * grid.dt)
            sampler.add(t + length * grid.dt, psi)
            if check_norm and not abs(sampler.norm[sampler.i - 1] - 1) <= NORM_DRIFT_LIMIT:
                raise NormDrift(
                    f"norm drifted to {sampler.norm[sampler.i - 1]:.8f} at t={t + length * grid.dt:.6g}; "
                    "reduce dt"
                )
    return sampler.series()


def evolve_lindblad(params: ModelParams, drive: Drive, rates: DissipationRates, rho0,
                    grid: TimeGrid, space: HilbertSpace | None = None, track=None,
                    keep_states=False, check=True) -> TimeSeries:
    """Integrate the Lindblad master equation with the same Lawson-RK4 step.

    The dissipator commutes with the diagonal part of H(t) (all jump operators
    only pick up phases under it), so it is unchanged in the interaction
    picture.  The state is symmetrized after every step.
    """
    rho = np.array(rho0, dtype=complex)
    if space is None:
        space = HilbertSpace(rho.shape[0] // N_LEVELS - 1)
    if rho.shape != (space.dim, space.dim):
        raise ValidationError(f"density matrix has shape {rho.shape}, expected {(space.dim,) * 2}")
    if abs(np.trace(rho) - 1) > 1e-8 or np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ValidationError("initial density matrix must be Hermitian with unit trace")
    if np.linalg.eigvalsh(rho)[0] < -1e-8:
        raise ValidationError("initial density matrix is not positive semidefinite")
    _check_grid(grid, drive, space, params.omega)

    stepper = _LawsonRK4(params, drive, space, grid.dt)
    diss = _Dissipator(rates, space)
    rows, cols = np.nonzero(stepper.coupling)
    vals = stepper.coupling[rows, cols].real.copy()
    drive_args = (
        stepper.free_half, stepper.free_full, space.atom_of.astype(np.int64),
        np.array(drive.amplitudes, dtype=float), np.array(drive.phases, dtype=float),
        float(drive.eta) if stepper.modulated else 0.0,
    )

    sampler = _Sampler(len(grid.sample_steps), space.n_photons, track, keep_states, mixed=True)
    sampler.add(grid.t0, rho)
    for start, length in _chunks(grid):
        t = grid.t0 + start * grid.dt
        rho = lindblad_steps(rho, t, grid.dt, int(length), *drive_args,
                             rows.astype(np.int64), cols.astype(np.int64), vals,
                             diss.weight, diss.ladder, diss.n_photons, diss.decays)
        sampler.add(t + length * grid.dt, rho)
        i = sampler.i - 1
        if check:
            if not abs(sampler.norm[i] - 1) <= TRACE_DRIFT_LIMIT:
                raise TraceDrift(f"trace drifted to {sampler.norm[i]:.10f} at t={sampler.t[i]:.6g}")
            if not sampler.min_eig[i] >= POSITIVITY_LIMIT:
                raise PositivityLoss(
                    f"density matrix eigenvalue {sampler.min_eig[i]:.3e} at t={sampler.t[i]:.6g}"
                )
    return sampler.series()


def pure_to_density(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def time_reversed_drive(drive: Drive, t1) -> Drive:
    """Drive that, applied to the conjugated state at t1, retraces [0, t1] backwards.

    For real H(t), conj(psi(t1 - s)) evolves under H(t1 - s); the modulation
    sin(eta (t1 - s) + phi) equals sin(eta s + pi - eta t1 - phi).
    """
    def flip(phi):
        return math.remainder(math.pi - drive.eta * t1 - phi, 2 * math.pi)
    return drive.replace(phi1=flip(drive.phi1), phi2=flip(drive.phi2))


# Dressed-frame amplitude equations.

@dataclass
class EffectiveState:
    """Slow amplitudes b_n over the dressed basis of ``spectrum``."""

    b: np.ndarray
    spectrum: DressedSpectrum

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=complex)
        if self.b.shape != (self.spectrum.dim,):
            raise ValidationError("amplitude vector does not match the spectrum dimension")
        if abs(np.linalg.norm(self.b) - 1) > 1e-6:
            raise ValidationError("effective state must be normalized")

    @classmethod
    def from_state(cls, spectrum: DressedSpectrum, drive: Drive, psi0, t0=0.0):
        """Amplitudes reproducing the bare-basis state psi0 at time t0."""
        c = spectrum.eigenvectors.conj().T @ np.asarray(psi0, dtype=complex)
        f = dressed_phase_factor(spectrum, drive, t0)
        return cls(c * np.exp(1j * spectrum.eigenvalues * t0) / f, spectrum)


def dressed_phase_factor(spectrum: DressedSpectrum, drive: Drive, t) -> np.ndarray:
    """F_n(t) = exp{ sum_k i eps_k / eta [cos(eta t + phi_k) - 1] <phi_n|sigma_kk|phi_n> }."""
    if drive.is_off or drive.eta == 0:
        return np.ones(spectrum.dim, dtype=complex)
    atom = spectrum.space.atom_of
    w = np.abs(spectrum.eigenvectors) ** 2
    expo = np.zeros(spectrum.dim)
    for k in (1, 2):
        eps = drive.amplitudes[k]
        if eps:
            expo += eps / drive.eta * (math.cos(drive.eta * t + drive.phases[k]) - 1) * (w[atom == k].sum(axis=0))
    return np.exp(1j * expo)


def effective_couplings(spectrum: DressedSpectrum, drive: Drive, rotating_cutoff=0.1, keep=None):
    """Retained terms of the amplitude equations as (rows, cols, coefficients, frequencies).

    db_n/dt gets b_m Theta*_{m;n} e^{i t (l_n - l_m - eta)} and
    -b_m Theta_{n;m} e^{-i t (l_m - l_n - eta)}; each is kept when its
    frequency is within ``rotating_cutoff`` of zero.
    """
    theta = rate_matrix(spectrum, drive)
    lam = spectrum.eigenvalues
    diff = lam[:, None] - lam[None, :]  # l_n - l_m
    rows, cols, coef, freq = [], [], [], []
    for c, f in ((theta.conj().T, diff - drive.eta), (-theta, diff + drive.eta)):
        mask = np.abs(f) <= rotating_cutoff
        np.fill_diagonal(mask, False)
        if keep is not None:
            sel = np.zeros(spectrum.dim, dtype=bool)
            sel[list(keep)] = True
            mask &= sel[:, None] & sel[None, :]
        mask &= c != 0
        r, cc = np.nonzero(mask)
        rows.append(r)
        cols.append(cc)
        coef.append(c[r, cc])
        freq.append(f[r, cc])
    return (np.concatenate(rows), np.concatenate(cols), np.concatenate(coef), np.concatenate(freq))


def effective_dt(rotating_cutoff=0.1, max_rate=0.0):
    """Default step for the amplitude equations: 40 steps per fastest retained oscillation.

    The equations only carry frequencies up to ``rotating_cutoff`` and the
    coupling strengths, so this step is far coarser than the full-model one.
    """
    fastest = max(rotating_cutoff, max_rate, 1e-3)
    return 2 * math.pi / (40 * fastest)


def evolve_effective(spectrum: DressedSpectrum, drive: Drive, b0, grid: TimeGrid,
                     rotating_cutoff=0.1, keep=None, track=None, keep_states=False) -> TimeSeries:
    """RK4 integration of the near-resonant dressed-frame amplitude equations.

    Observables are computed from the bare-basis state
    |psi(t)> = sum_n e^{-i t l_n} b_n(t) F_n(t) |phi_n>.  ``keep`` restricts the
    dynamics to a subset of dressed indices.  With ``keep_states`` the
    amplitudes b(t) are stored in ``states``.
    """
    if isinstance(b0, EffectiveState):
        b = b0.b.copy()
    else:
        b = EffectiveState(b0, spectrum).b.copy()
    rows, cols, coef, freq = effective_couplings(spectrum, drive, rotating_cutoff, keep)
    lam = spectrum.eigenvalues
    vecs = spectrum.eigenvectors
    dim = spectrum.dim

    def rhs(t, y):
        out = np.zeros(dim, dtype=complex)
        np.add.at(out, rows, coef * np.exp(1j * freq * t) * y[cols])
        return out

    sampler = _Sampler(len(grid.sample_steps), dim // N_LEVELS, track, False, mixed=False)
    amps = [] if keep_states else None

    def sample(t, y):
        psi = vecs @ (np.exp(-1j * lam * t) * y * dressed_phase_factor(spectrum, drive, t))
        sampler.add(t, psi)
        if amps is not None:
            amps.append(y.copy())

    dt = grid.dt
    sample(grid.t0, b)
    step = 0
    for _, length in _chunks(grid):
        for _ in range(length):
            t = grid.t0 + step * dt
            k1 = rhs(t, b)
            k2 = rhs(t + 0.5 * dt, b + 0.5 * dt * k1)
            k3 = rhs(t + 0.5 * dt, b + 0.5 * dt * k2)
            k4 = rhs(t + dt, b + dt * k3)
            b = b + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            step += 1
        t = grid.t0 + step * dt
        sample(t, b)
        if abs(np.linalg.norm(b) - 1) > NORM_DRIFT_LIMIT:
            raise NormDrift(f"amplitude norm drifted to {np.linalg.norm(b):.8f} at t={t:.6g}")
    ts = sampler.series()
    if amps is not None:
        ts.states = np.array(amps)
    return ts
