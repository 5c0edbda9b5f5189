"""Exact Heisenberg-picture Gaussian moments of the probe oscillator.

Conventions: quadratures X(theta) = (a^dag e^{i theta} + a e^{-i theta})/sqrt(2)
and P(theta) = X(theta + pi/2); the vacuum covariance is diag(1/2, 1/2).
Every expectation is taken in the initial (uncorrelated) probe-bath state
with operators evolved over a window [t0, t].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ._quad import adaptive_simpson, adaptive_simpson_vector
from .bath import BathMode, DiscreteBath
from .errors import ConsistencyError
from .force import ForceModulation
from .response import ResponseFunction

Window = tuple[float, float]

_MIN_DET = 0.25 * (1.0 - 1e-9)


def _check_window(window: Window) -> tuple[float, float]:
    t0, t1 = float(window[0]), float(window[1])
    if t1 < t0:
        raise ValueError("window must satisfy t0 <= t")
    return t0, t1


@dataclass(frozen=True, eq=False)
class GaussianProbeInit:
    """Initial Gaussian probe state: mean amplitude and 2x2 covariance.

    The covariance is over (X, P) at theta = 0 and must satisfy the
    uncertainty bound det >= 1/4, with equality exactly for pure states.
    """

    mean_amplitude: complex
    covariance: np.ndarray

    def __post_init__(self):
        cov = np.array(self.covariance, dtype=float)
        if cov.shape != (2, 2):
            raise ValueError("covariance must be 2x2")
        if abs(cov[0, 1] - cov[1, 0]) > 1e-12 * (1.0 + abs(cov).max()):
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        cov.setflags(write=False)
        if np.linalg.det(cov) < _MIN_DET or cov[0, 0] <= 0 or cov[1, 1] <= 0:
            raise ValueError("covariance violates the uncertainty bound det >= 1/4")
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "mean_amplitude", complex(self.mean_amplitude))

    @classmethod
    def vacuum(cls) -> "GaussianProbeInit":
        return cls(0.0, 0.5 * np.eye(2))

    @classmethod
    def coherent(cls, alpha: complex) -> "GaussianProbeInit":
        return cls(alpha, 0.5 * np.eye(2))

    @classmethod
    def thermal(cls, nbar: float) -> "GaussianProbeInit":
        if nbar < 0:
            raise ValueError("nbar must be >= 0")
        return cls(0.0, (nbar + 0.5) * np.eye(2))

    @classmethod
    def squeezed(cls, r: float, axis_angle: float = 0.0,
                 mean_amplitude: complex = 0.0) -> "GaussianProbeInit":
        """Pure squeezed state with max-variance quadrature X(axis_angle).

        Variances along/against the axis are e^{2r}/2 and e^{-2r}/2.
        """
        big, small = 0.5 * np.exp(2.0 * r), 0.5 * np.exp(-2.0 * r)
        c, s = np.cos(axis_angle), np.sin(axis_angle)
        rot = np.array([[c, -s], [s, c]])
        cov = rot @ np.diag([big, small]) @ rot.T
        return cls(mean_amplitude, cov)

    def variance(self, theta: float) -> float:
        """Initial variance of X(theta)."""
        v = np.array([np.cos(theta), np.sin(theta)])
        return float(v @ self.covariance @ v)

    def mean_x(self, theta) -> Union[float, np.ndarray]:
        """Initial mean of X(theta) = sqrt(2) Re(<a> e^{-i theta})."""
        return np.sqrt(2.0) * np.real(self.mean_amplitude * np.exp(-1j * np.asarray(theta)))

    @property
    def trace(self) -> float:
        return float(np.trace(self.covariance))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.covariance))

    @property
    def is_pure(self) -> bool:
        return abs(self.det - 0.25) <= 1e-9

    @property
    def mean_energy(self) -> float:
        """<a^dag a> + 1/2 in units of the probe quantum."""
        return 0.5 * self.trace + abs(self.mean_amplitude) ** 2

    @property
    def is_isotropic(self) -> bool:
        c = self.covariance
        tol = 1e-9 * self.trace
        return abs(c[0, 0] - c[1, 1]) <= tol and abs(c[0, 1]) <= tol

    def max_variance_angle(self) -> float:
        """Angle in [0, pi) of the maximum-variance quadrature.

        For an isotropic covariance every angle is extremal; returns 0.
        """
        if self.is_isotropic:
            return 0.0
        c = self.covariance
        ang = 0.5 * np.arctan2(2.0 * c[0, 1], c[0, 0] - c[1, 1])
        return float(np.mod(ang, np.pi))


@dataclass(frozen=True)
class DisplacementCoefficient:
    """Noise-dressed displacement induced by the force over a window."""

    value: complex
    window: Window

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def phase(self) -> float:
        """arg(value) in [0, 2pi); zero by convention when value vanishes."""
        if self.value == 0:
            return 0.0
        return float(np.mod(np.angle(self.value), 2.0 * np.pi))


@dataclass(frozen=True)
class CovarianceSnapshot:
    """Evolved second moments at one window, in the frame of angle theta."""

    theta: float
    var_x_theta: float
    var_p_theta: float
    cross: float
    det_sigma: float
    noise_term: float
    g_abs_sq: float


def displacement(response: ResponseFunction, force: ForceModulation,
                 omega0: float, window: Window,
                 rel_tol: float = 1e-10) -> DisplacementCoefficient:
    """Displacement coefficient omega0 * int zeta(u) e^{i omega0 (u-t0)} G(t-u) du.

    The integral runs over the window clipped to the force support; an
    empty intersection gives zero.
    """
    t0, t1 = _check_window(window)
    response.require_coverage(t1 - t0)
    lo, hi = force.clipped(t0, t1)
    if hi <= lo:
        return DisplacementCoefficient(0.0 + 0.0j, (t0, t1))

    def integrand(u):
        return (np.asarray(force.value(u))
                * np.exp(1j * omega0 * (u - t0))
                * response.g(t1 - u))

    val = omega0 * adaptive_simpson(integrand, lo, hi, rel_tol=rel_tol)
    return DisplacementCoefficient(val, (t0, t1))


def mode_displacement(response: ResponseFunction, force: ForceModulation,
                      mode: BathMode, omega0: float, window: Window,
                      rel_tol: float = 1e-7) -> complex:
    """Force-induced displacement pushed into one bath mode.

    Nested quadrature of
    omega0 |K| int du zeta(u) e^{i omega0 (u-t0)} int_u^t ds e^{i(omega_n-omega0)(s-t0)} G(s-u);
    the coupling is taken with unit phase since only the modulus is consumed.
    """
    t0, t1 = _check_window(window)
    response.require_coverage(t1 - t0)
    if mode.coupling_sq == 0.0:
        return 0.0 + 0.0j
    lo, hi = force.clipped(t0, t1)
    if hi <= lo:
        return 0.0 + 0.0j
    det = mode.frequency - omega0   # omega_n - omega0

    def inner(u: float) -> complex:
        span = t1 - u
        if span <= 0:
            return 0.0 + 0.0j
        val = adaptive_simpson(
            lambda v: np.exp(1j * det * v) * response.g(v),
            0.0, span, rel_tol=rel_tol, min_panels=4)
        return np.exp(1j * det * (u - t0)) * val

    def outer(u):
        inner_vals = np.array([inner(float(x)) for x in np.atleast_1d(u)])
        return (np.asarray(force.value(u)) * np.exp(1j * omega0 * (u - t0))
                * inner_vals)

    val = omega0 * np.sqrt(mode.coupling_sq) * adaptive_simpson(
        outer, lo, hi, rel_tol=rel_tol, min_panels=4)
    return complex(val)


def _mode_noise_integrals(response: ResponseFunction, bath: DiscreteBath,
                          tau: float, rel_tol: float = 1e-9) -> np.ndarray:
    """Per-mode integrals int_0^tau G(tau-u) e^{i (omega0-omega_n) u} du."""
    if bath.n_modes == 0 or tau <= 0.0:
        return np.zeros(bath.n_modes, dtype=complex)
    delta = bath.detunings

    def rows(u):
        return np.exp(1j * np.outer(delta, u)) * response.g(tau - u)[None, :]

    return adaptive_simpson_vector(rows, 0.0, tau, rel_tol=rel_tol)


def noise_term(response: ResponseFunction, bath: DiscreteBath,
               window: Window) -> float:
    """Bath-injected quadrature noise n_B, identical for every angle.

    Sum over modes of |K_n|^2 (N_n + 1/2) |int G e^{i delta u} du|^2; zero
    exactly for an empty bath or a zero-length window.
    """
    t0, t1 = _check_window(window)
    response.require_coverage(t1 - t0)
    if bath.n_modes == 0:
        return 0.0
    integrals = _mode_noise_integrals(response, bath, t1 - t0)
    weights = bath.coupling_sq * (bath.occupations + 0.5)
    return float(np.dot(weights, np.abs(integrals) ** 2))


def quadrature_mean(init: GaussianProbeInit, response: ResponseFunction,
                    disp: DisplacementCoefficient, theta: float,
                    force_amplitude: float, omega0: float,
                    window: Window) -> float:
    """Mean of X(theta) after the window.

    |G| <X[theta + omega0 (t-t0) - phase(G)]>_0
    + F |D| sin[theta + omega0 (t-t0) - phase(D)].
    """
    t0, t1 = _check_window(window)
    tau = t1 - t0
    gval = response.g(tau)
    rotation = theta + omega0 * tau
    free = abs(gval) * init.mean_x(rotation - np.angle(gval))
    driven = force_amplitude * disp.magnitude * np.sin(rotation - disp.phase)
    return float(free + driven)


def quadrature_variance(init: GaussianProbeInit, response: ResponseFunction,
                        bath: DiscreteBath, theta: float, omega0: float,
                        window: Window) -> float:
    """Variance of X(theta) after the window.

    |G|^2 <Delta^2 X[theta + omega0 (t-t0) - phase(G)]>_0 + n_B(t, t0).
    """
    t0, t1 = _check_window(window)
    tau = t1 - t0
    gval = response.g(tau)
    rotated = theta + omega0 * tau - np.angle(gval)
    return (abs(gval) ** 2 * init.variance(rotated)
            + noise_term(response, bath, window))


def variance_p(init: GaussianProbeInit, response: ResponseFunction,
               bath: DiscreteBath, theta: float, omega0: float,
               window: Window) -> float:
    """Variance of P(theta) = X(theta + pi/2) after the window."""
    return quadrature_variance(init, response, bath, theta + 0.5 * np.pi,
                               omega0, window)


def covariance_snapshot(init: GaussianProbeInit, response: ResponseFunction,
                        bath: DiscreteBath, theta: float, omega0: float,
                        window: Window) -> CovarianceSnapshot:
    """Full second-moment snapshot in the theta frame.

    The cross term comes from the variance at theta + pi/4; the covariance
    determinant is computed both from the 2x2 matrix and from the closed
    combination |G|^4 det0 + |G|^2 tr0 n_B + n_B^2, which must agree to
    1e-8 relative.
    """
    t0, t1 = _check_window(window)
    tau = t1 - t0
    gval = response.g(tau)
    g2 = abs(gval) ** 2
    n_b = noise_term(response, bath, window)
    rot = theta + omega0 * tau - np.angle(gval)
    var_t = g2 * init.variance(rot) + n_b
    var_p = g2 * init.variance(rot + 0.5 * np.pi) + n_b
    var_d = g2 * init.variance(rot + 0.25 * np.pi) + n_b
    cross = var_d - 0.5 * (var_t + var_p)
    det_matrix = var_t * var_p - cross * cross
    det_closed = (g2 * g2 * init.det + g2 * init.trace * n_b + n_b * n_b)
    scale = max(abs(det_closed), 0.25)
    if abs(det_matrix - det_closed) > 1e-8 * scale:
        raise ConsistencyError(
            f"determinant routes disagree: {det_matrix!r} vs {det_closed!r}")
    return CovarianceSnapshot(theta=float(theta), var_x_theta=float(var_t),
                              var_p_theta=float(var_p), cross=float(cross),
                              det_sigma=float(det_closed), noise_term=float(n_b),
                              g_abs_sq=float(g2))


def rotated_max_variance_angle(theta_m0: float, response: ResponseFunction,
                               omega0: float, window: Window) -> float:
    """Angle of maximal variance after the window, reduced mod pi.

    The affine map theta_m0 + phase(G) - omega0 (t - t0).
    """
    t0, t1 = _check_window(window)
    tau = t1 - t0
    gval = response.g(tau)
    return float(np.mod(theta_m0 + np.angle(gval) - omega0 * tau, np.pi))
