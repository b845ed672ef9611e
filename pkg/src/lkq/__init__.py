"""Toric Kahler metrics from quotients of products of odd spheres.

Construction and verification of the closed-form quotient metrics attached
to labelled polytopes with product-of-simplices combinatorics: symplectic
potentials, scalar curvature, weighted extremality, ambitoric quadrilateral
quotients, fibred constructions, and Monte-Carlo checks of momentum images.
"""

from . import calabi, cube, curvature, levi, polytope, potential, quad, sphere_lab
from .polytope import (
    AffineFunction,
    LabelledPolytope,
    box,
    detect_projective_cube,
    face_lattice,
    is_simple,
    matches_product_of_simplices,
    product_of_simplices,
    stabilizer_order,
)
from .levi import (
    LeviSetup,
    SigmaPoint,
    characteristic,
    is_positive_pair,
    moment,
    setup_from_polytope,
    transversality_det,
)
from .potential import (
    SymplecticPotential,
    abreu_boundary_check,
    guillemin_potential,
    kahler_potential,
    levi_kahler_potential,
    metric_H,
)
from .curvature import (
    CurvatureSample,
    abreu_scalar,
    affine_fit,
    curvature_samples,
    futaki,
    laplacian_affine,
    wp_scalar,
)
from .cube import AngularFrame, AxisPolynomial, CubeAnsatz, labels_from_cube
from .quad import QuadData, classify, extremal_check, quad_setup, segre_coordinates
from .calabi import FibrationData, HFKGData, compose_check, csc_certify, hat_polytope, hfkg_fibre

__version__ = "0.1.0"

__all__ = [
    "AffineFunction", "LabelledPolytope", "box", "product_of_simplices",
    "face_lattice", "is_simple", "matches_product_of_simplices",
    "detect_projective_cube", "stabilizer_order",
    "LeviSetup", "SigmaPoint", "setup_from_polytope", "transversality_det",
    "characteristic", "moment", "is_positive_pair",
    "SymplecticPotential", "levi_kahler_potential", "guillemin_potential",
    "metric_H", "kahler_potential", "abreu_boundary_check",
    "abreu_scalar", "laplacian_affine", "wp_scalar", "affine_fit", "futaki",
    "CurvatureSample", "curvature_samples",
    "AngularFrame", "AxisPolynomial", "CubeAnsatz", "labels_from_cube",
    "QuadData", "classify", "quad_setup", "segre_coordinates", "extremal_check",
    "FibrationData", "HFKGData", "hat_polytope", "compose_check", "hfkg_fibre",
    "csc_certify",
    "polytope", "levi", "potential", "curvature", "cube", "quad", "calabi",
    "sphere_lab",
]
