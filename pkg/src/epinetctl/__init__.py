"""Simulation, control and analysis of continuous-time networked SIS epidemics."""
from .dynamics import (EpidemicParams, closed_loop_field, control_input, open_loop_field,
                       scaling_factor)
from .equilibrium import (EquilibriumReport, Regime, classify, equilibrium_residual,
                          scalar_cap_root, solve_endemic)
from .errors import (ConvergenceError, DimensionError, DisconnectedError, EpinetError,
                     IntegrationError, NotIrreducibleError, ParameterError, ScenarioError,
                     WrongRegimeError)
from .graph import (Network, from_positions, is_strongly_connected, neighbor_sum,
                    random_clustered, random_geometric)
from .integrate import Method, RunOptions, Status, Trajectory, integrate, simulate_until_converged
from .spectral import SpectralResult, build_linearized, spectral_abscissa
from .verify import (InvarianceReport, LyapunovReport, check_cap_invariance,
                     check_lyapunov_decrease, compare_open_closed)

__version__ = "0.1.0"
