"""Rips complexes of hyperbolic groups: exact word metrics, four-point delta,
flag complexes, homology, and certified equivariant contraction."""

from .errors import (CertificateFailure, DomainError, HyperRipsError, OutOfRange, ResourceExhausted,
                     ValidationError)
from .groups import (FreeAbelian, FreeGroup, FreeProductCyclic, GroupElement, GroupOracle, GroupSpec,
                     PermutationGroup, free_abelian, free_group, free_product, infinite_dihedral, load_group,
                     symmetric_group)
from .cayley import Ball, geodesic, word_distance, word_length
from .hyperbolicity import Budget, DeltaReport, delta_of_ball, delta_of_matrix, naive_delta, pruned_delta
from .complex import (ExplicitComplex, FlagComplex, barycentric_subdivision, greedy_collapse, reduced_homology,
                      rips_complex)
from .equivariant import (conjugacy_classes, enumerate_finite_subgroups, fixed_point_complex,
                          invariant_simplex_poset, rips_theorem_checks, small_orbit_vertex, subgroup_closure)
from .contraction import ContractionConfig, contract, trace_to_dict, verify_trace

__version__ = "0.1.0"
