"""Finite-horizon coherent quantum LQG (CQLQG) controller synthesis.

Physically realizable linear quantum controllers are parameterized by the
triple (b, e, R); the optimal gains solve linear operator equations driven
by the forward/backward Lyapunov Gramians of the closed loop, coupled into
a split boundary value problem.
"""

from .bvp import SolveReport, SolverConfig, evaluate_candidate, solve_cqlqg
from .dynamics import (TimeGrid, Trajectory, hankelian, hankelian_rhs,
                       integrate_p, integrate_q, integrate_theta, lqg_cost)
from .errors import (CqlqgError, IndefiniteOperatorError, NonFiniteStateError,
                     NonSymmetricRError, ScenarioError, ShapeError,
                     SingularOperatorError)
from .gains import (BlockView, GainPair, PlantNode, control_hamiltonian,
                    gain_b, gain_e, minimized_hamiltonian, operator_m,
                    operator_n, optimal_gains, well_posedness)
from .grade_ops import GradeROperator, SelfAdjointCertificate
from .linalg import (canonical_ccr, classify, devectorize, frobenius, kron,
                     mat_exp, project, random_symplectic, vectorize)
from .model import (ClosedLoop, ControllerParams, ControllerRealization,
                    Dimensions, QuantumPlant, assemble_closed_loop,
                    check_initial_covariance, equivalent_classical_plant,
                    make_pr_plant, realize_controller, realize_node,
                    theta0, theta_rhs, validate_controller_pr,
                    validate_plant_pr)
from .scenario import Scenario, load_scenario, parse_scenario, template
from .verify import CheckResult, check_appendix_a, pde_operator_m_of_v, \
    run_standard_checks

__version__ = "0.1.0"
