"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

from nmqfi.bath import ContinuousSpectrum, DiscreteBath, OccupationModel, discretize
from nmqfi.response import TimeGrid, solve_response


def exact_single_mode_g(coupling_sq: float, delta: float, tau):
    """Closed-form response for one mode: the 2x2 linear system solved exactly.

    G(tau) = e^{i d tau/2} [cos(mu tau) - i d/(2 mu) sin(mu tau)] with
    mu = sqrt(d^2/4 + c); reduces to cos(sqrt(c) tau) on resonance.
    """
    tau = np.asarray(tau, dtype=float)
    mu = np.sqrt(0.25 * delta * delta + coupling_sq)
    return np.exp(0.5j * delta * tau) * (np.cos(mu * tau)
                                         - 1j * (0.5 * delta / mu) * np.sin(mu * tau))


def amplitude_drift(bath: DiscreteBath) -> np.ndarray:
    """Mode-amplitude drift matrix of the full linear Heisenberg equations.

    d<a>/dt = -i omega0 <a> - sum_n K_n <b_n>;
    d<b_n>/dt = -i omega_n <b_n> + K_n <a>, with K_n = sqrt(|K_n|^2) real.
    The solved response obeys G(tau) = e^{i omega0 tau} [expm(A tau)]_00.
    """
    k = np.sqrt(bath.coupling_sq)
    n = bath.n_modes
    a = np.zeros((n + 1, n + 1), dtype=complex)
    a[0, 0] = -1j * bath.probe_frequency
    a[0, 1:] = -k
    a[1:, 0] = k
    a[1:, 1:] = np.diag(-1j * bath.frequencies)
    return a


def quadrature_drift_propagator(bath: DiscreteBath, t: float) -> np.ndarray:
    """expm of the symplectic drift for probe + bath quadratures at time t.

    Ordering (x_a, p_a, x_1, p_1, ...); the coupling contributes
    K_n (x_a p_n - p_a x_n) to the quadratic Hamiltonian.
    """
    from scipy.linalg import expm

    k = np.sqrt(bath.coupling_sq)
    n = bath.n_modes
    dim = 2 * (n + 1)
    m = np.zeros((dim, dim))
    m[0, 0] = m[1, 1] = bath.probe_frequency
    for j in range(n):
        o = 2 + 2 * j
        m[o, o] = m[o + 1, o + 1] = bath.frequencies[j]
        m[0, o + 1] = m[o + 1, 0] = k[j]
        m[1, o] = m[o, 1] = -k[j]
    omega = np.zeros((dim, dim))
    for j in range(n + 1):
        omega[2 * j, 2 * j + 1] = 1.0
        omega[2 * j + 1, 2 * j] = -1.0
    return expm(omega @ m * t)


def initial_joint_covariance(bath: DiscreteBath, probe_cov: np.ndarray) -> np.ndarray:
    """Block covariance of the uncorrelated probe (x) thermal-bath state."""
    n = bath.n_modes
    sigma = np.zeros((2 * (n + 1), 2 * (n + 1)))
    sigma[:2, :2] = probe_cov
    for j in range(n):
        o = 2 + 2 * j
        sigma[o:o + 2, o:o + 2] = (bath.occupations[j] + 0.5) * np.eye(2)
    return sigma


@pytest.fixture(scope="session")
def resonant_bath():
    """Single resonant mode |K|^2 = 0.25 at the probe frequency."""
    return DiscreteBath.from_arrays([0.25], [1.0], [0.0], 1.0)


@pytest.fixture(scope="session")
def resonant_response(resonant_bath):
    return solve_response(resonant_bath, TimeGrid(0.0, 8.0 * np.pi, 4096))


@pytest.fixture(scope="session")
def detuned_bath():
    """Single mode |K| = 0.5 with detuning omega0 - omega_n = 1.0."""
    return DiscreteBath.from_arrays([0.25], [1.0], [0.0], 2.0)


@pytest.fixture(scope="session")
def two_mode_bath():
    return DiscreteBath.from_arrays([0.3, 0.2], [1.9, 0.3], [0.0, 0.4], 1.0)


@pytest.fixture(scope="session")
def ohmic_bath():
    spec = ContinuousSpectrum("ohmic", scale=0.05, cutoff=2.0, exponent=1.0,
                              cutoff_shape="exponential",
                              occupation=OccupationModel.thermal(0.8))
    return discretize(spec, 32, 1.0)


@pytest.fixture(scope="session")
def ohmic_response(ohmic_bath):
    return solve_response(ohmic_bath, TimeGrid(0.0, 8.0, 2048))
