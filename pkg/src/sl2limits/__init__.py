"""Involutions of SL(2) over p-adic fields, their fixed-point groups and the
Chabauty limits of those groups under diagonal conjugation."""

from .padic import (ExtKind, PrimeContext, class_representative, hensel_root, is_square,
                    sqrt, square_class)
from .sl2 import (ConjugatorCertificate, Involution, Mat2, conjugator_to_diagonal,
                  conjugator_to_sigma, conjugator_with_retry, involution_f1a, involution_f1b,
                  involution_f2, verify_involution)
from .bttree import End, TreeVertex, base_vertex, distance, orbit_experiment
from .chabauty import (LimitGroupDescriptor, LimitTarget, RotationContext, Shape,
                       limit_sequence_for_target, polar_decompose, polar_pair,
                       verify_convergence)

__version__ = "0.1.0"

__all__ = [
    "ExtKind", "PrimeContext", "class_representative", "hensel_root", "is_square", "sqrt",
    "square_class", "ConjugatorCertificate", "Involution", "Mat2", "conjugator_to_diagonal",
    "conjugator_to_sigma", "conjugator_with_retry", "involution_f1a", "involution_f1b",
    "involution_f2", "verify_involution", "End", "TreeVertex", "base_vertex", "distance",
    "orbit_experiment", "LimitGroupDescriptor", "LimitTarget", "RotationContext", "Shape",
    "limit_sequence_for_target", "polar_decompose", "polar_pair", "verify_convergence",
]
