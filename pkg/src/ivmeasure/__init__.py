"""Ideal-valued measures: graded algebras and ideals, cubical cohomology
models, quasi-measures on spheres and tori, centerpoint solvers and the
homotopical algebra of cubes of complexes over the Novikov field."""

from .novikov import F2, QQ, GroundField, NovikovField, NovikovScalar, T
from .graded_algebra import GradedAlgebra, build_algebra, exterior_algebra, qh_sphere, qh_torus, torus
from .ideals import GradedIdeal, a_slash_r, d_rank, ideal_power, ideal_product, kunneth_rank_witness
from .cubical_space import AxisInterval, Polyinterval, SphereModel, Subcomplex, TorusGrid
from .ivm_engine import (CohomologyMeasure, SphereIVQM, TorusBox, TorusIVQM, check_axioms,
                         check_sphere_ivqm, torus_ivqm_value, torus_oracle_value)
from .centerpoint import FiniteTarget, find_centerpoints, gromov_harness, simplex_harness
from .cubes import BasedComplex, Cube, CubeRay, cone, cocone, homology, telescope

__version__ = "0.1.0"

__all__ = [
    "F2", "QQ", "GroundField", "NovikovField", "NovikovScalar", "T",
    "GradedAlgebra", "build_algebra", "exterior_algebra", "qh_sphere", "qh_torus", "torus",
    "GradedIdeal", "a_slash_r", "d_rank", "ideal_power", "ideal_product", "kunneth_rank_witness",
    "AxisInterval", "Polyinterval", "SphereModel", "Subcomplex", "TorusGrid",
    "CohomologyMeasure", "SphereIVQM", "TorusBox", "TorusIVQM", "check_axioms",
    "check_sphere_ivqm", "torus_ivqm_value", "torus_oracle_value",
    "FiniteTarget", "find_centerpoints", "gromov_harness", "simplex_harness",
    "BasedComplex", "Cube", "CubeRay", "cone", "cocone", "homology", "telescope",
    "__version__",
]
