"""Toolkit for Herbrand-style proof theory: Skolemization, champs finis and
expansions, sentential tautology checking, three quantifier calculi with a
checking kernel, and mechanical construction of linear derivations."""

from .construct import (
    ConstructError,
    OrderBound,
    PropertyCResult,
    construct_derivation,
    construct_fv_derivation,
    demo_false_lemma,
    demo_upper_bound,
    derivation_order_bound,
    goedel_dreben_bound,
    min_order,
    procedure1_order,
    property_c,
)
from .expansion import (
    BudgetError,
    ChampFini,
    ExpansionError,
    SelQuant,
    build_sub_expansion,
    champ,
    expand,
    expansion_leaf_count,
    expansion_node_count,
    parse_selection,
    print_selection,
    selection_within,
)
from .kernel import (
    CheckReport,
    Derivation,
    RuleStep,
    ScriptError,
    apply_passage,
    check_derivation,
    check_step,
    parse_script,
    print_script,
)
from .oracle import Countermodel, find_countermodel, valid_up_to
from .skolem import (
    SkolemRegistry,
    canonical_key,
    deltapp_skolemize,
    nameify_term,
    outer_skolemize,
)
from .syntax import (
    FormulaError,
    Signature,
    alpha_equal,
    classify_quantifier,
    collect_signature,
    parse_formula,
    parse_term,
    print_formula,
    print_term,
    quantifier_positions,
    rectify,
    substitute,
)
from .taut import emit_dimacs, is_tautology

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "ChampFini",
    "CheckReport",
    "ConstructError",
    "Countermodel",
    "Derivation",
    "ExpansionError",
    "FormulaError",
    "OrderBound",
    "PropertyCResult",
    "RuleStep",
    "ScriptError",
    "SelQuant",
    "Signature",
    "SkolemRegistry",
    "alpha_equal",
    "apply_passage",
    "build_sub_expansion",
    "canonical_key",
    "champ",
    "check_derivation",
    "check_step",
    "classify_quantifier",
    "collect_signature",
    "construct_derivation",
    "construct_fv_derivation",
    "deltapp_skolemize",
    "demo_false_lemma",
    "demo_upper_bound",
    "derivation_order_bound",
    "emit_dimacs",
    "expand",
    "expansion_leaf_count",
    "expansion_node_count",
    "find_countermodel",
    "goedel_dreben_bound",
    "is_tautology",
    "min_order",
    "nameify_term",
    "outer_skolemize",
    "parse_formula",
    "parse_script",
    "parse_selection",
    "parse_term",
    "print_formula",
    "print_script",
    "print_selection",
    "print_term",
    "procedure1_order",
    "property_c",
    "quantifier_positions",
    "rectify",
    "selection_within",
    "substitute",
    "valid_up_to",
]
