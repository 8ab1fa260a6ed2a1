"""Locating the resonant modulation frequency for J-photon generation from vacuum."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import TimeGrid, evolve_schrodinger
from .errors import DCEError, ValidationError
from .model import Drive, HilbertSpace, ModelParams, bare_hamiltonian
from .spectrum import DressedSpectrum, diagonalize, zeta_branch

DEFAULT_HORIZON = 1e5
DEFAULT_SPAN = 0.02


@dataclass
class ScanResult:
    eta_grid: np.ndarray
    merit: np.ndarray  # peak n_ph over the horizon; NaN for failed points
    predicted_eta: float
    best_eta: float
    failures: dict = field(default_factory=dict)  # eta -> error message

    @property
    def delta_nu(self):
        return self.best_eta - self.predicted_eta

    @property
    def ok(self):
        return np.isfinite(self.merit)


def predict_eta(spec: DressedSpectrum, J) -> float:
    """Zeroth-order resonance Lambda_J - Lambda_0 on the ground-atom branch."""
    if J not in (1, 3):
        raise ValidationError(f"J must be 1 or 3, got {J!r}")
    branch = zeta_branch(spec, k_max=J)
    return float(branch.energies[J] - branch.energies[0])


def peak_photon_number(params: ModelParams, drive: Drive, horizon=DEFAULT_HORIZON, n_max=30,
                       sample_dt=None):
    """Largest n_ph reached from |0,0> within the horizon."""
    space = HilbertSpace(n_max)
    grid = TimeGrid.for_drive(drive, space, horizon, sample_dt=sample_dt, omega=params.omega)
    ts = evolve_schrodinger(params, drive, space.basis_state(0, 0), grid, space)
    return float(ts.n_ph.max())


def _merit_point(args):
    params, drive, horizon, n_max, sample_dt = args
    try:
        return peak_photon_number(params, drive, horizon, n_max, sample_dt), None
    except DCEError as exc:
        return math.nan, f"{type(exc).__name__}: {exc}"


def scan_eta(params: ModelParams, drive_template: Drive, J, span=DEFAULT_SPAN, points=11,
             horizon=DEFAULT_HORIZON, n_max=30, center=None, sample_dt=None, workers=None):
    """Grid scan of eta around the predicted resonance, maximizing peak n_ph.

    The grid has ``points`` values spread over ``span`` centered on
    ``center`` (default: :func:`predict_eta`).  Points run in parallel when
    ``workers`` > 1; results are collected in grid order.  Ties go to the
    smallest eta.
    """
    if points < 5:
        raise ValidationError(f"points must be at least 5, got {points}")
    if not span > 0:
        raise ValidationError(f"span must be positive, got {span}")
    space = HilbertSpace(n_max)
    predicted = predict_eta(diagonalize(bare_hamiltonian(params, space)), J)
    if center is None:
        center = predicted
    grid = center + np.linspace(-span / 2, span / 2, points)
    if grid[0] <= 0:
        raise ValidationError("scan window reaches non-positive eta")
    jobs = [(params, drive_template.replace(eta=float(eta)), horizon, n_max, sample_dt) for eta in grid]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_merit_point, jobs))
    else:
        results = [_merit_point(job) for job in jobs]

    merit = np.array([r[0] for r in results])
    failures = {float(eta): msg for eta, (_, msg) in zip(grid, results) if msg is not None}
    if not np.isfinite(merit).any():
        raise DCEError(f"every scan point failed: {failures}")
    best = int(np.argmax(np.where(np.isfinite(merit), merit, -np.inf)))  # first index on ties
    return ScanResult(eta_grid=grid, merit=merit, predicted_eta=predicted,
                      best_eta=float(grid[best]), failures=failures)
