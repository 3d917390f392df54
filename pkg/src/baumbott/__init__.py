"""Exact and numerical Baum-Bott residues of isolated vector-field singularities."""

__version__ = "0.1.0"

from .charclass import SymmetricPolynomial, elem_symm, newton_convert, parse_phi, phi_eval, phi_mixed
from .foliation import (
    FoliationP2,
    SingularPoint,
    VectorField,
    bb_residue,
    chern_normal_sheaf_p2,
    global_sum_check,
    milnor_at,
    p2_charts,
    translate_to_origin,
)
from .localalg import (
    GroebnerBasis,
    QuotientAlgebra,
    buchberger_with_cofactors,
    grothendieck_residue,
    milnor_number,
    nilpotent_power,
    normal_form,
    quotient_basis,
    residue_pairing_matrix,
)
from .polycore import GaussianRational, MonomialOrder, Polynomial, jacobian, parse_polynomial

__all__ = [
    "FoliationP2", "GaussianRational", "GroebnerBasis", "MonomialOrder", "Polynomial",
    "QuotientAlgebra", "SingularPoint", "SymmetricPolynomial", "VectorField", "bb_residue",
    "buchberger_with_cofactors", "chern_normal_sheaf_p2", "elem_symm", "global_sum_check",
    "grothendieck_residue", "jacobian", "milnor_at", "milnor_number", "newton_convert",
    "nilpotent_power", "normal_form", "p2_charts", "parse_phi", "parse_polynomial",
    "phi_eval", "phi_mixed", "quotient_basis", "residue_pairing_matrix", "translate_to_origin",
]
