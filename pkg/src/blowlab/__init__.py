"""Numerical laboratory for self-similar blowup of the radial quintic
wave equation: spectral collocation in similarity coordinates, the
linearized generator and its resolvent, free-wave closed forms,
Fourier-Laplace kernel checks, and stability experiments."""

__version__ = "0.1.0"

from .errors import (BlowlabError, DegenerateParameterError,
                     DomainTooSmallError, EigenvalueSingularityError,
                     EvaluationDomainError, GaugeSingularError,
                     InconsistentWronskianError, IntegrationFailureError,
                     InvalidArgumentError, NumericalFailureError,
                     OutOfStripError, PartialResultError, PoleError,
                     ShootingBracketError, SpectralFailureError,
                     StiffFailureError, UndefinedRateError)
from .grid import (Grid, cheb_coeffs, differentiate, even_projector,
                   interpolate, make_grid, sample_matrix, sup_norm)
from .coords import (C3, BlowupConstant, CoordinateFrame, PhysicalData,
                     State, constant_state, from_similarity, gauge_solution,
                     gauge_time_derivative, to_similarity, zero_state)
from .norms import (NormReport, StrichartzExponents, as_exponents, g_norm,
                    g_transform, gram_matrix, h1_ball, h_norm, l2_ball,
                    lq_ball, strichartz_norm)
from .generator import (OperatorMatrix, Projection, assemble,
                        cached_projection, eigenpairs, gauge_vector,
                        projection, spurious_filter)
from .evolution import (EvolveConfig, Trajectory, growth_rate, integrate,
                        rhs, rk4_step)
from .resolvent import (LINEARIZED_POTENTIAL, ZERO_POTENTIAL,
                        FundamentalPair, PotentialSpec, ResolventRHS,
                        SpectralPoint, apply_resolvent, fundamental_pair,
                        green, potential, resolvent_rhs, solve_u0, solve_u1,
                        wronskian_w0)
from .hypergeom import HypParams, ZeroScanResult, f21, w0_closed, zero_scan
from .freewave import (WindowSpec, free_strichartz_constant,
                       s0_first_component, s0_matrix, s0_row, s0_state)
from .kernels import (KernelSample, KernelSweep, LaplaceSweep, OscResult,
                      envelope, filon_linear, laplace_semigroup_check,
                      osc_check, perturbation_kernel)
from .experiments import (ExperimentReport, RandomDataSpec, ShootingResult,
                          StabilityConfig, find_blowup_time,
                          gauge_perturbation, linear_bound_experiment,
                          ordered_map, physical_similarity_consistency,
                          random_perturbation, random_state,
                          stability_experiment)

__all__ = [name for name in dir() if not name.startswith("_")]
