"""Two-time bath correlation function and its memory-timescale diagnostic.

The correlation of the collective bath coupling splits into a free (Born)
part, set entirely by the bare bath, and an interaction part carrying the
response derivative; the interaction part scales with the squared total
coupling and the decay time of the whole function matches the inverse
moment frequencies of the coupling spectrum. Windows are measured from
t0 = 0, the start of the solved response grid. Evaluation is at zero force
amplitude: the amplitude-dependent piece shifts only the mean of the
collective coupling and the correlation subtracts means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._quad import adaptive_simpson, simpson_weights
from .bath import DiscreteBath, bare_correlation, moments
from .response import ResponseFunction


@dataclass(frozen=True)
class CorrelationResult:
    """Two-time correlation split into free and interaction parts."""

    total: complex
    born: complex
    interaction: complex


def _double_term(response: ResponseFunction, bath: DiscreteBath, t: float,
                 t_prime: float, rel_tol: float = 1e-7,
                 max_panels: int = 2048) -> complex:
    """int_0^t ds int_0^t' ds' C0(s-s') Gdot(t-s) conj(Gdot(t'-s'))."""
    if t <= 0.0 or t_prime <= 0.0:
        return 0.0 + 0.0j
    value = None
    n = 32
    while n <= max_panels:
        s = np.linspace(0.0, t, n + 1)
        sp = np.linspace(0.0, t_prime, n + 1)
        ws = simpson_weights(n) * (t / n)
        wsp = simpson_weights(n) * (t_prime / n)
        left = ws * np.asarray(response.g_dot(t - s))
        right = wsp * np.conj(np.asarray(response.g_dot(t_prime - sp)))
        c0 = np.asarray(bare_correlation(bath, s[:, None] - sp[None, :]))
        refined = complex(left @ c0 @ right)
        if value is not None and abs(refined - value) <= max(1e-14, rel_tol * abs(refined)):
            return refined
        value = refined
        n *= 2
    return value


def bath_correlation(bath: DiscreteBath, response: ResponseFunction,
                     probe_fluctuation: float, t: float, t_prime: float,
                     omega0: float, rel_tol: float = 1e-7) -> CorrelationResult:
    """Correlation of the collective coupling between times t and t_prime.

    probe_fluctuation is the centered symmetric second moment of the
    initial probe, (<a adag + adag a>/2 - |<a>|^2); one half for any pure
    coherent or vacuum preparation. The Born part is
    e^{-i omega0 (t - t')} C0(t - t'); the interaction part collects the
    four response-derivative terms.
    """
    response.require_coverage(max(t, t_prime))
    phase = np.exp(-1j * omega0 * (t - t_prime))
    born = phase * bare_correlation(bath, t - t_prime)

    first = adaptive_simpson(
        lambda s: (np.asarray(bare_correlation(bath, t - s))
                   * np.conj(np.asarray(response.g_dot(t_prime - s)))),
        0.0, t_prime, rel_tol=rel_tol)
    second = adaptive_simpson(
        lambda s: (np.asarray(bare_correlation(bath, s - t_prime))
                   * np.asarray(response.g_dot(t - s))),
        0.0, t, rel_tol=rel_tol)
    point = probe_fluctuation * response.g_dot(t) * np.conj(response.g_dot(t_prime))
    double = _double_term(response, bath, t, t_prime, rel_tol=rel_tol)
    interaction = phase * (first + second + point + double)
    return CorrelationResult(total=complex(born + interaction),
                             born=complex(born),
                             interaction=complex(interaction))


def equal_start_correlation(bath: DiscreteBath, response: ResponseFunction,
                            t: float, omega0: float,
                            rel_tol: float = 1e-9) -> complex:
    """Reduced form at t_prime = 0: the interaction collapses to one integral.

    e^{-i omega0 t} [C0(t) + int_0^t C0(s) Gdot(t - s) ds]; useful as an
    independent check of the general assembly.
    """
    response.require_coverage(t)
    tail = adaptive_simpson(
        lambda s: np.asarray(bare_correlation(bath, s))
        * np.asarray(response.g_dot(t - s)),
        0.0, t, rel_tol=rel_tol)
    return complex(np.exp(-1j * omega0 * t) * (bare_correlation(bath, t) + tail))


@dataclass(frozen=True)
class TimescaleCheck:
    """Observed decay scale of |C| against the moment-frequency prediction."""

    decay_scale: float
    predicted: float
    decayed: bool    # False when |C| never dropped inside the grid

    @property
    def ratio(self) -> float:
        return self.decay_scale / self.predicted


def correlation_timescale_check(bath: DiscreteBath, response: ResponseFunction,
                                n_samples: int = 512) -> TimescaleCheck:
    """Compare the e-folding scale of |C(t, t0 | t0, t0)| with moment rates.

    The scale is the first time |C| falls below |C(0)|/e; the prediction
    is min(1/Omega_2, 1/|chi_2|). Order-of-magnitude agreement only; the
    ratio is reported, not clamped.
    """
    m = moments(bath, 2)
    if m.script_n <= 0:
        raise ValueError("timescale check needs a bath with noise weight")
    rates = [m.omega(2)]
    if m.chi_defined and m.chi(2) > 0:
        rates.append(m.chi(2))
    predicted = 1.0 / max(rates) if max(rates) > 0 else np.inf
    times = np.linspace(0.0, response.t_end, n_samples + 1)[1:]
    mags = np.array([abs(equal_start_correlation(bath, response, float(t),
                                                 bath.probe_frequency,
                                                 rel_tol=1e-6))
                     for t in times])
    threshold = m.script_n / np.e
    below = np.nonzero(mags <= threshold)[0]
    if below.size == 0:
        return TimescaleCheck(decay_scale=float(response.t_end),
                              predicted=float(predicted), decayed=False)
    return TimescaleCheck(decay_scale=float(times[below[0]]),
                          predicted=float(predicted), decayed=True)
