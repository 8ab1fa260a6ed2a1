"""Dispersive-regime closed forms: dressed states, spectrum and multiphoton rates.

All expressions are lowest nonvanishing order in the couplings.  Every
denominator is checked against ``SINGULAR_TOL * omega``; a term whose
numerator is exactly zero is skipped without checking, so switching off a
coupling or a counter-rotating flag gives exact zeros even at detunings where
some unused denominator vanishes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NearSingularDenominator, ValidationError
from .model import Drive, HilbertSpace, ModelParams, detunings

SINGULAR_TOL = 1e-6


class _Denominators:
    def __init__(self, params: ModelParams):
        w = params.omega
        d = detunings(params)
        d1, d3 = d.d1, d.d3
        self.tol = SINGULAR_TOL * w
        self.values = {
            "Delta_1": d1,
            "Delta_3": d3,
            "omega-Delta_1": w - d1,
            "omega+Delta_1": w + d1,
            "omega-Delta_3": w - d3,
            "2omega": 2 * w,
            "2omega-Delta_1": 2 * w - d1,
            "2omega-Delta_3": 2 * w - d3,
            "3omega-Delta_1": 3 * w - d1,
            "3omega-Delta_3": 3 * w - d3,
            "4omega-Delta_3": 4 * w - d3,
        }

    def __call__(self, num, *names):
        """num / prod(denominators), or exactly 0.0 when num == 0."""
        if num == 0:
            return 0.0
        out = num
        for name in names:
            den = self.values[name]
            if abs(den) <= self.tol:
                raise NearSingularDenominator(name, den)
            out /= den
        return out


def _lazy_product(a, b):
    """a * b() without evaluating b when a == 0."""
    return a * b() if a else 0.0


@dataclass(frozen=True)
class EffectiveSpectrumParams:
    omega_ef: float
    alpha: float


def effective_spectrum(params: ModelParams) -> EffectiveSpectrumParams:
    """omega_ef and Kerr alpha of the quadratic fit Lambda_k ~ omega_ef k + alpha k^2."""
    f = _Denominators(params)
    w = params.omega
    g01s, g12s, g02s = params.g01**2, params.g12**2, params.g02**2
    c01, c12, c02 = params.c01, params.c12, params.c02

    omega_ef = (
        w
        + _lazy_product(f(g01s, "Delta_1"), lambda: 1 - f(g12s, "Delta_1", "Delta_3"))
        - f(g02s, "omega-Delta_3")
        - f(c01 * g01s, "2omega-Delta_1")
        - f(c02 * g02s, "3omega-Delta_3")
    )
    bracket = (
        f(g12s, "Delta_3")
        - f(g01s, "Delta_1")
        + f(c01 * g01s, "2omega")
        - f(c12 * g12s, "2omega-Delta_3")
        + f(g02s, "omega-Delta_3")
        + f(c01 * g01s, "2omega-Delta_1")
        + f(c02 * g02s, "3omega-Delta_3")
    )
    alpha = _lazy_product(bracket, lambda: f(g01s, "Delta_1", "Delta_1"))
    return EffectiveSpectrumParams(omega_ef=omega_ef, alpha=alpha)


@dataclass(frozen=True)
class FourthOrderShifts:
    """Shift parameters delta_1..delta_6 and the k-dependent pieces of Lambda_k."""

    params: ModelParams
    delta1: float
    delta2: float
    delta3: float
    delta4: float
    delta5: float
    delta6: float

    @classmethod
    def from_params(cls, params: ModelParams) -> FourthOrderShifts:
        f = _Denominators(params)
        return cls(
            params,
            delta1=f(params.g01**2, "Delta_1"),
            delta2=f(params.g02**2, "omega-Delta_3"),
            delta3=f(params.g01**2, "2omega-Delta_1"),
            delta4=f(params.g02**2, "3omega-Delta_3"),
            delta5=f(params.g12**2, "2omega-Delta_3"),
            delta6=f(params.g12**2, "omega-Delta_1"),
        )

    @property
    def _f(self):
        return _Denominators(self.params)

    def L1(self, k):
        p = self.params
        crt = p.c01 * self.delta3 + p.c02 * self.delta4
        return (self.delta1 - self.delta2 - crt) * k - crt

    def beta1(self, k):
        p, f = self.params, self._f
        g12s = p.g12**2
        return (
            f((self.delta1 - p.c02 * self.delta2) * p.c01 * (k - 1), "2omega")
            + f(g12s * (k - 1), "Delta_1", "Delta_3")
            + _lazy_product(
                p.c12 * self.delta5, lambda: f(p.c01 * (k + 1), "2omega-Delta_1") - f(k, "Delta_1")
            )
            - f(self.L1(k), "Delta_1")
        )

    def beta2(self, k):
        p, f = self.params, self._f
        g12s = p.g12**2
        return (
            f((p.c01 * self.delta1 - self.delta2) * p.c02 * (k - 1), "2omega")
            - f(p.c12 * g12s * (k - 1), "omega-Delta_3", "omega+Delta_1")
            + _lazy_product(
                self.delta6,
                lambda: f(p.c12 * p.c02 * (k + 1), "3omega-Delta_3") + f(k, "omega-Delta_3"),
            )
            + f(self.L1(k), "omega-Delta_3")
        )

    def beta3(self, k):
        p, f = self.params, self._f
        g12s = p.g12**2
        return (
            f((self.delta3 + p.c02 * self.delta4) * (k + 2), "2omega")
            + _lazy_product(self.delta5, lambda: f(k + 1, "2omega-Delta_1") - f(p.c12 * k, "Delta_1"))
            + f(p.c12 * g12s * (k + 2), "2omega-Delta_1", "4omega-Delta_3")
            + f(self.L1(k), "2omega-Delta_1")
        )

    def beta4(self, k):
        p, f = self.params, self._f
        g12s = p.g12**2
        # c12 appears twice in the printed expression; kept as printed
        return (
            f((p.c01 * self.delta3 + self.delta4) * (k + 2), "2omega")
            + _lazy_product(
                p.c12 * self.delta6,
                lambda: f(p.c12 * (k + 1), "3omega-Delta_3") + f(k, "omega-Delta_3"),
            )
            + f(g12s * (k + 2), "3omega-Delta_3", "3omega-Delta_1")
            + f(self.L1(k), "3omega-Delta_3")
        )

    def L2(self, k):
        p = self.params
        d1, d2, d3, d4 = self.delta1, self.delta2, self.delta3, self.delta4
        rwa = (d1 * self.beta1(k) if d1 else 0.0) - (d2 * self.beta2(k) if d2 else 0.0)
        crt = (p.c01 * d3 * self.beta3(k) if p.c01 * d3 else 0.0) + (
            p.c02 * d4 * self.beta4(k) if p.c02 * d4 else 0.0
        )
        return rwa * k - crt * (k + 1)


def lambda_fourth_order(k, params: ModelParams) -> float:
    """Lambda_k = omega k + L_1(k) + L_2(k)."""
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    s = FourthOrderShifts.from_params(params)
    return params.omega * k + s.L1(k) + s.L2(k)


def zeta_state_pert(k, params: ModelParams, space: HilbertSpace) -> np.ndarray:
    """Second-order dressed state |zeta_k>, normalized numerically."""
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    if k + 2 > space.n_max:
        raise ValidationError(f"zeta_{k} needs photon number k+2={k + 2} but n_max={space.n_max}")
    f = _Denominators(params)
    p = params
    g01, g12, g02 = p.g01, p.g12, p.g02
    c01, c12, c02 = p.c01, p.c12, p.c02
    sk, sk1 = math.sqrt(k), math.sqrt(k + 1)
    up2 = math.sqrt((k + 1) * (k + 2))
    dn2 = math.sqrt(k * (k - 1)) if k >= 2 else 0.0

    coeff = {
        (0, k): 1.0,
        (1, k - 1): f(g01 * sk, "Delta_1"),
        (1, k + 1): -f(c01 * g01 * sk1, "2omega-Delta_1"),
        (2, k - 1): -f(g02 * sk, "omega-Delta_3"),
        (2, k + 1): -f(c02 * g02 * sk1, "3omega-Delta_3"),
        (0, k + 2): f(
            (f(c01 * g01**2, "2omega-Delta_1") + f(c02 * g02**2, "3omega-Delta_3")) * up2, "2omega"
        ),
        (0, k - 2): f((f(c01 * g01**2, "Delta_1") - f(c02 * g02**2, "omega-Delta_3")) * dn2, "2omega"),
        (1, k): f(
            (f(c12 * c02 * (k + 1), "3omega-Delta_3") + f(k, "omega-Delta_3")) * g12 * g02,
            "omega-Delta_1",
        ),
        (2, k): f(
            (f(c01 * (k + 1), "2omega-Delta_1") - f(c12 * k, "Delta_1")) * g01 * g12,
            "2omega-Delta_3",
        ),
        (1, k + 2): f(c02 * g12 * g02 * up2, "3omega-Delta_3", "3omega-Delta_1"),
        (1, k - 2): -f(c12 * g12 * g02 * dn2, "omega-Delta_3", "omega+Delta_1"),
        (2, k + 2): f(c01 * c12 * g01 * g12 * up2, "2omega-Delta_1", "4omega-Delta_3"),
        (2, k - 2): f(g01 * g12 * dn2, "Delta_1", "Delta_3"),
    }
    psi = np.zeros(space.dim, dtype=complex)
    for (j, n), c in coeff.items():
        if c != 0:
            psi[space.index(j, n)] += c
    return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class RateResult:
    value: complex
    k: int
    J: int

    @property
    def magnitude(self):
        return abs(self.value)


def g_cubed(params: ModelParams) -> float:
    """G^3 = g01 g12 g02 / 2."""
    return params.g01 * params.g12 * params.g02 / 2


def three_photon_q(params: ModelParams):
    """The k-independent factors (q_1, q_2) of the 3-photon rate."""
    f = _Denominators(params)
    c01, c12, c02 = params.c01, params.c12, params.c02
    q1 = f(c02, "Delta_1", "3omega-Delta_3", "3omega-Delta_1") + f(
        c01 * c12, "2omega-Delta_1", "omega-Delta_3", "omega+Delta_1"
    )
    q2 = f(c02, "Delta_1", "Delta_3", "3omega-Delta_3") + f(
        c01 * c12, "2omega-Delta_1", "omega-Delta_3", "4omega-Delta_3"
    )
    return q1, q2


def one_photon_Q(k, params: ModelParams):
    """The k-dependent factors (Q_1(k), Q_2(k)) of the 1-photon rate."""
    f = _Denominators(params)
    c01, c12, c02 = params.c01, params.c12, params.c02
    Q1 = (
        f(f(c12 * c02 * (k + 1), "3omega-Delta_3") + f(k, "omega-Delta_3"), "Delta_1", "omega-Delta_1")
        - f(c01 * c02 * (k + 2), "2omega-Delta_1", "3omega-Delta_3", "3omega-Delta_1")
        - f(c12 * k, "Delta_1", "omega-Delta_3", "omega+Delta_1")
        - f(
            c01 * (f(c12 * c02 * (k + 2), "3omega-Delta_3") + f(k + 1, "omega-Delta_3")),
            "omega-Delta_1",
            "2omega-Delta_1",
        )
    )
    Q2 = (
        f(f(c01 * (k + 1), "2omega-Delta_1") - f(c12 * k, "Delta_1"), "2omega-Delta_3", "omega-Delta_3")
        + f(c01 * c12 * c02 * (k + 2), "2omega-Delta_1", "4omega-Delta_3", "3omega-Delta_3")
        + f(k, "Delta_1", "Delta_3", "omega-Delta_3")
        + f(
            c02 * (f(c01 * (k + 2), "2omega-Delta_1") - f(c12 * (k + 1), "Delta_1")),
            "2omega-Delta_3",
            "3omega-Delta_3",
        )
    )
    return Q1, Q2


def _combine(drive: Drive, x1, x2):
    out = 0j
    if drive.eps1 and x1:
        out += drive.eps1 * x1 * np.exp(1j * drive.phi1)
    if drive.eps2 and x2:
        out -= drive.eps2 * x2 * np.exp(1j * drive.phi2)
    return complex(out)


def rate_3photon(k, params: ModelParams, drive: Drive) -> RateResult:
    """Lowest-order rate of |zeta_k> <-> |zeta_{k+3}>."""
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    G3 = g_cubed(params)
    if G3 == 0 or drive.is_off:
        return RateResult(0j, k, 3)
    q1, q2 = three_photon_q(params)
    factor = math.sqrt(math.factorial(k + 3) / math.factorial(k))
    return RateResult(G3 * factor * _combine(drive, q1, q2), k, 3)


def rate_1photon(k, params: ModelParams, drive: Drive) -> RateResult:
    """Lowest-order rate of |zeta_k> <-> |zeta_{k+1}>."""
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    G3 = g_cubed(params)
    if G3 == 0 or drive.is_off:
        return RateResult(0j, k, 1)
    Q1, Q2 = one_photon_Q(k, params)
    return RateResult(G3 * math.sqrt(k + 1) * _combine(drive, Q1, Q2), k, 1)


def resonance_mismatch(k, J, eff: EffectiveSpectrumParams) -> float:
    """Lambda_{k+J} - Lambda_k from the quadratic effective spectrum."""
    if J not in (1, 3):
        raise ValidationError(f"J must be 1 or 3, got {J}")
    return (eff.omega_ef + J * eff.alpha) * J + 2 * eff.alpha * J * k
