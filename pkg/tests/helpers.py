"""Shared test helpers: figure parameter sets and independent oracles."""
import numpy as np

from qutrit_dce.model import Drive, ModelParams

COUPLINGS = dict(g01=0.05, g12=0.06, g02=0.03)


def fig_params(name):
    d1, d2 = {"fig1": (0.464, 0.106), "fig2": (0.362, 0.51), "fig3": (0.24, -0.132)}[name]
    return ModelParams.from_detunings(d1, d2, **COUPLINGS)


def fig_drive(params, eta):
    return Drive(eps2=0.07 * params.e2, eta=eta)


def oracle_hamiltonian(params: ModelParams, n_max):
    """H_0 assembled from Kronecker products (photon factor first), independent of the library."""
    nph = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, nph)), 1)
    eye_f, eye_a = np.eye(nph), np.eye(3)

    def s(k, l):
        m = np.zeros((3, 3))
        m[k, l] = 1.0
        return m

    h = params.omega * np.kron(a.T @ a, eye_a) + np.kron(eye_f, np.diag([0.0, params.e1, params.e2]))
    for lo, up, g, c in ((0, 1, params.g01, params.c01), (1, 2, params.g12, params.c12),
                         (0, 2, params.g02, params.c02)):
        term = g * (np.kron(a, s(up, lo)) + c * np.kron(a, s(lo, up)))
        h = h + term + term.T
    return h


def random_dispersive(rng, n_max=20):
    """Random parameters with all detunings well above sqrt(n_max) g and away from multiphoton poles."""
    while True:
        g = rng.uniform(0.005, 0.03, size=3)
        d1, d2 = rng.uniform(-0.6, 0.6, size=2)
        p = ModelParams.from_detunings(d1, d2, g01=g[0], g12=g[1], g02=g[2])
        d3 = d1 + d2
        poles = [d1, d3, 1 - d1, 1 + d1, 1 - d3, 2 - d1, 2 - d3, 3 - d1, 3 - d3, 4 - d3]
        if min(abs(x) for x in poles) > 0.05 and p.is_dispersive(n_max):
            return p
