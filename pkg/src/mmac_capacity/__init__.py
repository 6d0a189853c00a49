"""Rate region of the multiplicative multiple-access channel formed by a
passive reflecting secondary transmitter riding on a primary carrier."""

__version__ = "0.1.0"

from .channel import (ChannelConfig, SnrPoint, c1_primary_capacity,
                      c_sum_max, composite_gain)
from .distributions import (AveragePower, BoundaryWeights,
                            MassPointDistribution, UnitDisk,
                            rayleigh_quantile_distribution)
from .errors import (CapacityError, ConfigError, DomainError, NumericError,
                     QuadratureError, SchemeError)
from .mass_optimization import (BoundaryPointResult, KktReport, SolverOptions,
                                optimize_boundary_point, optimize_fixed_support,
                                optimize_secondary_disk, verify_kkt,
                                weighted_objective)
from .monte_carlo import (AwgnFamily, CirclesFamily, MassPointFamily,
                          McEstimate, SchemeFamily, UnitPhaseFamily,
                          comparison_z, mc_mutual_information)
from .mutual_information import (ConditionalRadialDensity,
                                 MixtureRadialDensity, PhaseScheme, RatePair,
                                 c2_unit_modulus, corner_b_secondary_rate,
                                 h_y_given_amplitude, marginal_entropy,
                                 mi_disk_conditional, mi_phase_uniform,
                                 mi_phase_uniform_asymptotic,
                                 mi_upper_bound_disk, rates_discrete_amplitude,
                                 scheme_rate_pair)
from .numerics import (QuadratureSpec, integrate_angular, integrate_radial,
                       log_bessel_i0, radial_nodes, rayleigh_expectation)
from .region import (RegionBoundary, assemble_region, boundary_ab,
                     boundary_bc, corner_points, dof_slope, validate_region)

__all__ = [name for name in dir() if not name.startswith("_")]
