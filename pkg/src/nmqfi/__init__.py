"""Force estimation with an oscillator probe in an arbitrary Gaussian bath.

The engine solves the probe's exact open-system response, builds the
Gaussian moments it induces, and evaluates the quantum Fisher information
together with the optimal probe state, optimal quadrature measurement, and
the optimal cadence of a repeated prepare-sense-measure protocol.
"""

from .bath import (BathMode, BathMoments, ContinuousSpectrum, DiscreteBath,
                   OccupationModel, bare_correlation, discretize,
                   memory_kernel, moments)
from .correlation import (CorrelationResult, bath_correlation,
                          correlation_timescale_check, equal_start_correlation)
from .errors import (AlignmentError, ConfigError, ConsistencyError,
                     CoverageError, EstimationError, NmqfiError,
                     SolverInstabilityError)
from .force import (ConstantForce, ForceModulation, GaussianPulseForce,
                    SinusoidForce, TabulatedForce, constant, gaussian_pulse,
                    sinusoid)
from .metrology import (BestStateSpec, EstimationResult, QfiResult,
                        best_state, energy_for_script_e, fisher_quadrature,
                        markov_qfi, optimal_angle, qfi_aligned, qfi_best_state,
                        qfi_general, script_e, short_time_qfi,
                        simulate_estimation)
from .probe import (CovarianceSnapshot, DisplacementCoefficient,
                    GaussianProbeInit, covariance_snapshot, displacement,
                    mode_displacement, noise_term, quadrature_mean,
                    quadrature_variance, rotated_max_variance_angle,
                    variance_p)
from .response import (ResponseFunction, TimeGrid, default_grid, dyson_series,
                       first_order_asymptote, first_order_response,
                       long_time_first_order, markov_closed_form,
                       markov_decay_rate, short_time_response, solve_response,
                       solver_residual)
from .sequential import (ForceWindowIntegrals, MarkovSeqResult, SeqResult,
                         SequentialScheme, TauOptimum, default_tau_bounds,
                         markov_seq, optimize_tau, seq_qfi,
                         seq_qfi_asymptotic, step_noise_variance,
                         tau_opt_asymptotic, xi_and_c)

__version__ = "0.1.0"
