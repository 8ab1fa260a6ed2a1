import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import fig_drive, random_dispersive
from qutrit_dce.errors import NearSingularDenominator, ValidationError
from qutrit_dce.model import Drive, HilbertSpace, ModelParams, bare_hamiltonian
from qutrit_dce.perturbation import (
    EffectiveSpectrumParams,
    effective_spectrum,
    lambda_fourth_order,
    rate_1photon,
    rate_3photon,
    resonance_mismatch,
    three_photon_q,
    zeta_state_pert,
)
from qutrit_dce.spectrum import diagonalize, numeric_rate, zeta_branch


def exact_branch(params, k_max, n_max=30):
    spec = diagonalize(bare_hamiltonian(params, HilbertSpace(n_max)))
    return spec, zeta_branch(spec, k_max=k_max)


# effective spectrum

def test_effective_spectrum_uncoupled():
    eff = effective_spectrum(ModelParams(e1=0.5, e2=1.2))
    assert (eff.omega_ef, eff.alpha) == (1.0, 0.0)


def test_effective_spectrum_single_coupling_reduction():
    p = ModelParams.from_detunings(0.3, 0.2, g01=0.04, c01=0)
    eff = effective_spectrum(p)
    assert eff.omega_ef == pytest.approx(1 + 0.04**2 / 0.3, rel=1e-14)
    assert eff.alpha == pytest.approx(-(0.04**4) / 0.3**3, rel=1e-14)


@pytest.mark.xfail(strict=True, reason="closed-form alpha is 4.4e-5, quadratic fit of the exact levels 2.1e-6; see ledger")
def test_fig1_alpha_against_quadratic_fit(fig1):
    _, branch = exact_branch(fig1, 4)
    k = np.arange(5)
    alpha_fit = np.polyfit(k, branch.energies - branch.energies[0], 2)[0]
    assert abs(effective_spectrum(fig1).alpha - alpha_fit) <= 0.2 * abs(alpha_fit)


@pytest.mark.parametrize("d1, d2, name", [(0.0, 0.3, "Delta_1"), (0.3, -0.3, "Delta_3")])
def test_singular_denominator_is_named(d1, d2, name):
    p = ModelParams.from_detunings(d1, d2, g01=0.05, g12=0.06, g02=0.03)
    with pytest.raises(NearSingularDenominator, match=name):
        effective_spectrum(p)
    with pytest.raises(NearSingularDenominator):
        lambda_fourth_order(2, p)


def test_vanishing_numerator_never_trips_singularity_check():
    # Delta_1 = 0 but g01 = 0: every term with that denominator is absent
    p = ModelParams.from_detunings(0.0, 0.3, g12=0.05, g02=0.03)
    assert math.isfinite(effective_spectrum(p).alpha)


# fourth-order levels

@pytest.mark.parametrize("k", range(6))
def test_fourth_order_uncoupled(k):
    assert lambda_fourth_order(k, ModelParams(e1=0.7, e2=1.1)) == float(k)


def test_fourth_order_no_crt_vacuum_shift():
    p = ModelParams.from_detunings(0.3, 0.2, g01=0.05, c01=0, c12=0, c02=0)
    assert lambda_fourth_order(0, p) == 0.0


def test_fig1_fourth_order_levels_k_le_4(fig1):
    _, branch = exact_branch(fig1, 4)
    for k in range(5):
        shift = abs(branch.energies[k] - k)
        assert abs(lambda_fourth_order(k, fig1) - branch.energies[k]) <= 0.15 * shift


def test_fourth_order_error_drops_at_sixth_order(fig1):
    def errors(s):
        p = fig1.replace(g01=fig1.g01 * s, g12=fig1.g12 * s, g02=fig1.g02 * s)
        _, branch = exact_branch(p, 4, n_max=15)
        return np.array([abs(lambda_fourth_order(k, p) - branch.energies[k]) for k in range(5)])

    assert np.all(errors(0.5) / errors(0.25) >= 30)


# second-order dressed states

@pytest.mark.parametrize("k", [0, 3, 7])
def test_pert_state_uncoupled_is_bare(k):
    space = HilbertSpace(12)
    psi = zeta_state_pert(k, ModelParams(e1=0.6, e2=1.4), space)
    assert np.array_equal(psi, space.basis_state(0, k))


def test_pert_state_vacuum_without_crt_is_bare():
    # at k = 0 every rotating-wave term carries sqrt(k); only CRT admixtures remain
    space = HilbertSpace(6)
    p = ModelParams.from_detunings(0.3, 0.2, g01=0.05, g12=0.06, g02=0.03, c01=0, c12=0, c02=0)
    assert np.array_equal(zeta_state_pert(0, p, space), space.basis_state(0, 0))
    psi = zeta_state_pert(0, p.replace(c01=1), space)
    assert abs(psi[space.index(1, 1)]) > 0
    assert np.all(psi[space.photons_of > 2] == 0)


def test_fig1_pert_state_fidelity(fig1, space30):
    _, branch = exact_branch(fig1, 2)
    psi = zeta_state_pert(2, fig1, space30)
    assert abs(np.vdot(branch.vectors[:, 2], psi)) ** 2 > 0.98
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-14)


def test_pert_state_truncation_overflow(fig1):
    with pytest.raises(ValidationError):
        zeta_state_pert(5, fig1, HilbertSpace(6))


# rates

def test_three_photon_rate_ladder_limit(fig1):
    drive = fig_drive(fig1, 3.0)
    assert rate_3photon(2, fig1.replace(g02=0.0), drive).value == 0


def test_three_photon_rate_needs_crt(fig1):
    p = fig1.replace(c02=0, c12=0)
    assert three_photon_q(p) == (0.0, 0.0)
    assert rate_3photon(0, p, fig_drive(p, 3.0)).value == 0


def test_fig1_three_photon_rate_k0(fig1):
    drive = fig_drive(fig1, 3.0037)
    spec, branch = exact_branch(fig1, 3)
    numeric = abs(numeric_rate(spec, drive, int(branch.indices[0]), int(branch.indices[3])))
    assert abs(rate_3photon(0, fig1, drive).magnitude - numeric) <= 0.25 * numeric


@pytest.mark.parametrize("zero", ["g01", "g12", "g02"])
def test_one_photon_rate_vanishes_with_any_coupling(fig2, zero):
    p = fig2.replace(**{zero: 0.0})
    for k in range(4):
        assert rate_1photon(k, p, fig_drive(p, 1.0)).value == 0


def test_one_photon_vacuum_rate_needs_crt(fig2):
    p = fig2.replace(c01=0, c02=0)
    assert rate_1photon(0, p, fig_drive(p, 1.0)).value == 0


def test_fig2_one_photon_rate_k0(fig2):
    drive = fig_drive(fig2, 0.9978)
    spec, branch = exact_branch(fig2, 1)
    numeric = abs(numeric_rate(spec, drive, int(branch.indices[0]), int(branch.indices[1])))
    assert abs(rate_1photon(0, fig2, drive).magnitude - numeric) <= 0.25 * numeric


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.integers(0, 6), st.sampled_from([rate_1photon, rate_3photon]))
def test_rate_scaling_laws(s, k, rate):
    p = ModelParams.from_detunings(0.464, 0.106, g01=0.05, g12=0.06, g02=0.03)
    drive = Drive(eps1=0.02, eps2=0.1, phi1=0.3, phi2=1.2, eta=3.0)
    base = rate(k, p, drive).value
    scaled_g = rate(k, p.replace(g01=s * p.g01, g12=s * p.g12, g02=s * p.g02), drive).value
    scaled_eps = rate(k, p, drive.replace(eps1=s * drive.eps1, eps2=s * drive.eps2)).value
    assert scaled_g == pytest.approx(s**3 * base, rel=1e-12)
    assert scaled_eps == pytest.approx(s * base, rel=1e-12)


@pytest.mark.parametrize("k", range(8))
def test_three_photon_rate_factorial_law(fig1, k):
    drive = fig_drive(fig1, 3.0)
    ratio = rate_3photon(k, fig1, drive).magnitude / rate_3photon(0, fig1, drive).magnitude
    assert ratio == pytest.approx(math.sqrt(math.factorial(k + 3) / math.factorial(k) / 6), rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_crt_selection_rules_random_draws(seed):
    p = random_dispersive(np.random.default_rng(seed))
    drive = Drive(eps1=0.01, eps2=0.05, phi1=0.2, phi2=0.9, eta=1.0)
    for c01, c12 in ((0, 0), (0, 1), (1, 0)):
        assert rate_3photon(0, p.replace(c02=0, c01=c01, c12=c12), drive).value == 0
    for c12, c02 in ((0, 0), (0, 1), (1, 0)):
        assert rate_1photon(0, p.replace(c01=0, c12=c12, c02=c02), drive).value == 0
    for zero in ("g01", "g12", "g02"):
        q = p.replace(**{zero: 0.0})
        for k in range(6):
            assert rate_3photon(k, q, drive).value == 0
            assert rate_1photon(k, q, drive).value == 0


def test_rates_reject_negative_k(fig1):
    with pytest.raises(ValidationError):
        rate_3photon(-1, fig1, Drive(eps2=0.1))


# resonance mismatch

@pytest.mark.parametrize("J", [1, 3])
def test_mismatch_without_kerr_is_k_independent(J):
    eff = EffectiveSpectrumParams(omega_ef=1.002, alpha=0.0)
    assert {resonance_mismatch(k, J, eff) for k in range(6)} == {J * 1.002}


def test_mismatch_vacuum_three_photon():
    eff = EffectiveSpectrumParams(omega_ef=1.01, alpha=-3e-4)
    assert resonance_mismatch(0, 3, eff) == pytest.approx(3 * 1.01 + 9 * -3e-4, abs=1e-15)


def test_mismatch_matches_quadratic_spectrum():
    eff = EffectiveSpectrumParams(omega_ef=0.998, alpha=2e-4)
    lam = lambda k: eff.omega_ef * k + eff.alpha * k**2
    for J in (1, 3):
        for k in range(5):
            assert resonance_mismatch(k, J, eff) == pytest.approx(lam(k + J) - lam(k), rel=1e-13)


@pytest.mark.xfail(strict=True, reason="closed-form 6 alpha = 2.6e-4 vs exact growth of order 1e-5; see ledger")
def test_fig1_mismatch_growth_against_exact_levels(fig1):
    _, branch = exact_branch(fig1, 9)
    lam = branch.energies
    growth = np.diff([lam[k + 3] - lam[k] for k in range(7)])
    six_alpha = 6 * effective_spectrum(fig1).alpha
    assert np.all(np.abs(growth - six_alpha) <= 0.2 * np.abs(growth))


def test_mismatch_rejects_bad_J():
    with pytest.raises(ValidationError):
        resonance_mismatch(0, 2, EffectiveSpectrumParams(1.0, 0.0))

