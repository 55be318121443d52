"""Numerical laboratory for the Benjamin-Ono equation on the torus.

The package simulates the (optionally perturbed) equation pseudo-spectrally,
measures its action variables through the spectrum of the truncated Lax
operator, and evaluates long-time stability certificates built from
simultaneous rational approximation of the frequency vector.
"""

from .birkhoff import (FrequencyVector, GapSequence, ReferenceTorus,
                       TorusChartPoint, chart_to_birkhoff, birkhoff_to_chart,
                       expansion_check, frequencies, gaps_from_frequencies,
                       h_omega, hamiltonians, in_domain_G, partial_sums,
                       phase_norm, unperturbed_flow, x_h4)
from .errors import (BlowupDetected, BolabError, ChartDomain, ConfigError,
                     DimensionMismatch, DivisionGuard, InvalidFrequency,
                     NoConvergence, ParamDomain, SizeTooSmall,
                     UnsupportedPerturbation)
from .lax import (ActionTrajectory, GapEstimate, LaxTruncation, actions_along,
                  build_lax, extract_gaps, truncation_gaps)
from .pde import (IntegratorConfig, Perturbation, RealState, Trajectory,
                  antiderivative, best_shift_distance, bo_rhs, calibrate_gaps,
                  evolve, hilbert, observables, perturbation_field,
                  poisson_state, project_zero_mean)
from .resonance import (CertificateConstants, RationalApproximant,
                        ResonantTorus, StabilityCertificate,
                        appendix_constants, build_resonant_torus,
                        certificate_constants, choose_Q, dirichlet,
                        full_certificate, stability_times)

__version__ = "0.1.0"
