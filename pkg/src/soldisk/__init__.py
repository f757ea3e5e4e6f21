"""Nested-disk commuting actions: exact planning, evaluation, certification.

The pipeline: build a plan (an exact chain of kernel lattices plus disk
geometry), expand its nested disk tree, evaluate the commuting action,
certify the derivative budgets numerically, and classify the fiber type.
"""

from .action import (ActionError, DiskNode, DiskTree, fiber_disks,
                     orbit_to_csv, tree_to_json)
from .certify import (CertifyError, CheckResult, c1_check, cauchy_check,
                      cp_check, fd_jacobian, finite_diff, orthonormal_frame,
                      property_suite, run_certification)
from .classify import (ClassifyError, CoveringDegrees, FiberAddress,
                       SupernaturalNumber, baer_equivalent, cech_invariant,
                       covering_degrees, discard_witness, fiber_address)
from .lattice import (FiniteQuotient, IntegerLattice, LatticeChain,
                      LatticeError, RationalRep, exact_inverse, extend_chain,
                      hermite_column_form, kernel_lattice, oriented_basis,
                      quotient, smith_normal_form)
from .plan import (PlanBudgetError, PlanError, SolenoidPlan, build, center,
                   choose_generic_point, genericity_margin, pick_representation,
                   plan_from_json, plan_table, plan_to_json, safe_radius,
                   thin_budget, verify_plan)
from .profile import (BumpProfile, ProfileError, bound_constants,
                      standard_model, standard_model_jacobian, torus_rotation)

__version__ = "0.1.0"

__all__ = [
    "ActionError", "BumpProfile", "CertifyError", "CheckResult",
    "ClassifyError", "CoveringDegrees", "DiskNode", "DiskTree",
    "FiberAddress", "FiniteQuotient", "IntegerLattice", "LatticeChain",
    "LatticeError", "PlanBudgetError", "PlanError", "RationalRep",
    "SolenoidPlan", "SupernaturalNumber", "baer_equivalent", "bound_constants",
    "build", "c1_check", "cauchy_check", "cech_invariant", "center",
    "choose_generic_point", "covering_degrees", "cp_check", "discard_witness",
    "exact_inverse", "extend_chain", "fd_jacobian", "fiber_address",
    "fiber_disks", "finite_diff", "genericity_margin", "hermite_column_form",
    "kernel_lattice", "orbit_to_csv", "oriented_basis", "orthonormal_frame",
    "pick_representation", "plan_from_json", "plan_table", "plan_to_json",
    "property_suite", "quotient", "run_certification", "safe_radius",
    "smith_normal_form", "standard_model", "standard_model_jacobian",
    "thin_budget", "torus_rotation", "tree_to_json", "verify_plan",
    "__version__",
]
