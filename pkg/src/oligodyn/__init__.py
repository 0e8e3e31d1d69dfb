"""Cournot oligopoly adjustment dynamics: equilibria, stability, Darboux polynomials and first integrals."""

from .darboux import DarbouxPoly, cofactor_check, linear_darboux_conditions, search_darboux
from .dynamics import (Trajectory, integrate, line_dynamics, reduce_on_leaf, verify_attraction,
                       verify_conservation)
from .equilibria import CriticalPoint, admissibility_case, enumerate_critical_points
from .errors import (ConsistencyError, DecoupledSystemError, DegenerateError, DomainError,
                     IntegrationError, NotApplicableError, OligodynError, ScalarModeError,
                     ValidationError)
from .integrals import FirstIntegral, n_firm_family, singular_beta_integral, synthesize_integrals
from .levelset import export_levelset
from .model import (OligopolyModel, ReducedModel, load_model, profit_and_marginal, reduce,
                    total_supply_and_price, vector_field)
from .poly import MultiPoly
from .stability import (analyze_point, characteristic_and_eigenvalues, jacobian_at,
                        lyapunov_duopoly, poincare_obstruction, routh_hurwitz)

__version__ = "0.1.0"

__all__ = [
    "DarbouxPoly", "cofactor_check", "linear_darboux_conditions", "search_darboux",
    "Trajectory", "integrate", "line_dynamics", "reduce_on_leaf", "verify_attraction",
    "verify_conservation", "CriticalPoint", "admissibility_case",
    "enumerate_critical_points", "ConsistencyError", "DecoupledSystemError",
    "DegenerateError", "DomainError", "IntegrationError", "NotApplicableError",
    "OligodynError", "ScalarModeError", "ValidationError", "FirstIntegral", "n_firm_family",
    "singular_beta_integral", "synthesize_integrals", "export_levelset", "OligopolyModel",
    "ReducedModel", "load_model", "profit_and_marginal", "reduce", "total_supply_and_price",
    "vector_field", "MultiPoly", "analyze_point", "characteristic_and_eigenvalues",
    "jacobian_at", "lyapunov_duopoly", "poincare_obstruction", "routh_hurwitz"
]
