"""Finite-grid kernel for incomplete preferences and their maximal elements."""

from .domains import (CliqueCapExceeded, DomainCollection, best_elements, characterize_domain,
                      extend_to_maximal_domain, is_maximal_domain, max_via_domains, maximal_domains)
from .preference import (MultiUtility, Preference, from_multi_utility, indifference_partition, is_dense,
                         is_partial_order, max_elements, min_elements, relation_hausdorff_distance, validate)
from .sequences import (LimitProblem, ProblemSequence, Term, Verdict, condition3_holds, corollary_floor_check,
                        detect_limits, ls_domains, midpoint_certificate, verify_certificate, verify_equivalence,
                        verify_general_max_theorem, verify_simple_max_theorem)
from .space import FeasibleSet, GroundSpace, LimitPolicy, hausdorff_distance, set_sequence_limit

__all__ = [name for name in dir() if not name.startswith("_")]
