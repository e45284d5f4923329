"""Finite-scale geometric logic: indexed models, logical topologies,
topological groupoids, equivariant sheaves, and the Mod/Form dualization."""

from .errors import (
    HeadroomError,
    InterpretationError,
    LimitExceeded,
    ModformError,
    ParseError,
    SignatureError,
    SiteError,
)
from .logic import (
    And,
    App,
    BOT,
    Bot,
    EMPTY_SIGNATURE,
    EQUALITY_THEORY,
    Eq,
    Exists,
    FormulaInContext,
    INCONSISTENT_THEORY,
    Interpretation,
    Or,
    Rel,
    Sequent,
    Signature,
    Theory,
    TOP,
    Top,
    Var,
    canonical_form,
    conj,
    disj,
    fic,
    formula_to_str,
    identity_interpretation,
    initial_interpretation,
    sequent,
    substitute,
    theory_to_str,
)
from .models import (
    IndexSet,
    IndexedStructure,
    ModelClass,
    StructIso,
    build_model_class,
    entails,
    enumerate_isomorphisms,
    enumerate_structures,
    eval_formula,
    is_model,
    model_class,
    reduct,
    star_headroom,
    star_lemma,
)
from .parser import parse_formula_in_context, parse_theory, print_theory
from .topology import (
    BasicOpenI,
    BasicOpenM,
    CPFilter,
    FinSpace,
    arrow_space,
    basic_open_arrows,
    basic_open_points,
    cp_filters,
    filter_to_model,
    generate_opens,
    horn_diagram,
    minimal_varray,
    model_space,
    neighborhood_filter,
    sobriety_report,
    symmetric_varray,
    trivial_open_i,
    trivial_open_m,
)
from .groupoid import (
    GroupoidMorphism,
    TopGroupoid,
    build_S_groupoid,
    build_model_groupoid,
    identity_morphism,
    mod_on_interpretation,
    open_image_d,
    structure_map_preimages,
)
from .sheaves import (
    DefinableSheaf,
    EquivariantSheaf,
    MoerdijkSiteObject,
    SheafMorphism,
    act_theta,
    definable_sheaf,
    density_certificate,
    lift_section,
    moerdijk_sheaf,
    rewrite_symmetric,
    stabilize,
    stable_opens_of_site,
)
from .search import FormulaSearch
from .duality import (
    GroupoidOverS,
    RelationCategory,
    TheoryCategory,
    check_pullback_square,
    check_reconstruction,
    check_sem_conditions,
    check_strong_fullness,
    check_triangle_identities,
    coherent_check,
    counit,
    form_functor,
    mod_functor,
    pullback_sheaf,
    semantic_quotient,
    syntactic_category,
    theory_view,
    u_power,
    unit,
)
__version__ = "0.1.0"
