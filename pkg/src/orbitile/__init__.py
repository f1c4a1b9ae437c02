"""orbitile: substitution systems, overlay orbit windows, {p,q} orbit
graphs, and the tooling to verify aperiodicity properties at finite scale."""

from .config import bit_budget, set_bit_budget
from .errors import (BadParameters, BoundaryEdge, BoundaryVertex,
                     DegenerateOffset, InconsistentCycle,
                     IndeterminateComparison, InvalidConstruction,
                     NotExpansive, NotPrimitive, OrbitileError, ParseError,
                     UnknownLetter, WindowTooNarrow)
from .graph import (GraphPatch, Pattern, build_orbit_graph, canonical_pattern,
                    check_pq, classify_faces, extract_pattern, galleries,
                    patch_periods, pattern_candidates, patterns_isomorphic,
                    reduce_patch)
from .orbit import (BaseWindow, OverlayWindow, build_overlay_orbit,
                    delta_sequence, growth_exponent_check, nabla_indices,
                    period_search, seed_orbit, validate_base_window,
                    validate_overlay_window)
from .overlay import (OverlayLetter, OverlaySystem, adjacent, approx_eq,
                      compute_K, enumerate_alphabet, scale_distributions,
                      verify_property3)
from .pq import (DecoratedSystem, PatternFamily, check_membership,
                 collect_pattern_family, decorate, dy, horizontal_type,
                 pq_substitution, reconstruct_rows)
from .precision import AdaptiveReal, compare_affine_exp
from .render import render_tiling, tiling_cells
from .substitution import (Commensurate, Distribution, Indeterminate,
                           IncommensurateUpTo, SubstitutionSystem, apply,
                           distribution, growth_rate, incommensurate,
                           is_expansive, is_primitive, make_system, nu_length,
                           parse_system, substitution_matrix, system_to_text)

__version__ = "0.1.0"
