"""Exact finite-level machinery for homology gradients over group towers."""

from .groups import (
    FiniteQuotient,
    Presentation,
    fox_derivative,
    parse_word,
    push_to_quotient,
    reduce_word,
)
from .crossring import (
    Augmentation,
    LevelSpace,
    MarkedModule,
    MarkedMorphism,
    almost_eq,
    marked_inclusion,
    marked_projection,
    marked_rank,
    morphism_stats,
    op_norm,
    vector_stats,
)
from .complexes import (
    MarkedComplex,
    check_chain_map,
    defect_report,
    gh_verify,
    induce_resolution,
    kappa_stats,
    mapping_cone,
    tensor_complex,
    witness_report,
)
from .strictify import make_surjective, strictify_complex, strictify_map
from .discretize import (
    betti_mod_p,
    coinvariants_complex,
    coinvariants_matrix,
    homology_of_complex,
    invariant_factors,
    retract_inequality_check,
    shapiro_complex,
    smith_normal_form,
)
from .lognorm import (
    gabber_column_bound,
    gabber_exact,
    gabber_split_bound,
    lognorm_certificate,
    lognorm_exact,
    lognorm_of_decomposition,
    lognorm_upper,
)
from .constructions import (
    degree0_cheap,
    integers_embedding,
    resolution_by_name,
    rokhlin_partition,
    supp1_chain_extend,
    supp1_extend,
)
from .pipeline import main, random_morphism, run_gradient, run_verify

__version__ = "0.1.0"

__all__ = [
    "FiniteQuotient", "Presentation", "fox_derivative", "parse_word",
    "push_to_quotient", "reduce_word",
    "Augmentation", "LevelSpace", "MarkedModule", "MarkedMorphism",
    "almost_eq", "marked_inclusion", "marked_projection", "marked_rank",
    "morphism_stats", "op_norm", "vector_stats",
    "MarkedComplex", "check_chain_map", "defect_report", "gh_verify",
    "induce_resolution", "kappa_stats", "mapping_cone", "tensor_complex",
    "witness_report",
    "make_surjective", "strictify_complex", "strictify_map",
    "betti_mod_p", "coinvariants_complex", "coinvariants_matrix",
    "homology_of_complex", "invariant_factors", "retract_inequality_check",
    "shapiro_complex", "smith_normal_form",
    "gabber_column_bound", "gabber_exact", "gabber_split_bound",
    "lognorm_certificate", "lognorm_exact", "lognorm_of_decomposition",
    "lognorm_upper",
    "degree0_cheap", "integers_embedding", "resolution_by_name",
    "rokhlin_partition", "supp1_chain_extend", "supp1_extend",
    "main", "random_morphism", "run_gradient", "run_verify",
]
