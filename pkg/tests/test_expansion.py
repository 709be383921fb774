"""Term domains, expansions, sub-expansions, and selection trees."""

import random

import pytest

from herbrandkit.expansion import (
    LEAF,
    BudgetError,
    ExpansionError,
    SelNot,
    SelOr,
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
from herbrandkit.skolem import outer_skolemize
from herbrandkit.syntax import (
    DOT,
    formula_size,
    is_quantifier_free,
    parse_formula,
    parse_term,
    print_formula,
    print_term,
    rectify,
    term_height,
)
from herbrandkit.taut import is_tautology


# ---------------------------------------------------------------------------
# champs

def test_champ_order_one_is_empty():
    assert champ(parse_formula("p(c)"), 1).terms == ()


def test_champ_enumerates_heights_below_order():
    f = parse_formula("p(f(c))")
    ch = champ(f, 3)
    prints = [print_term(t) for t in ch.terms]
    assert prints == ["c", "f(c)"]
    assert all(term_height(t) < 3 for t in ch.terms)


def test_champ_adds_dot_only_when_no_base_terms(drinker):
    sk = outer_skolemize(drinker)
    ch = champ(sk, 2)
    assert [print_term(t) for t in ch.terms] == ["@dot"]
    with_free = champ(parse_formula("p(x)"), 2)
    assert [print_term(t) for t in with_free.terms] == ["x"]


def test_champ_canonical_order_is_height_then_print():
    f = parse_formula("p(g(b), f(a))")
    ch = champ(f, 3)
    prints = [print_term(t) for t in ch.terms]
    heights = [term_height(t) for t in ch.terms]
    assert heights == sorted(heights)
    for h in set(heights):
        group = [p for p, hh in zip(prints, heights) if hh == h]
        assert group == sorted(group)


def test_champ_monotone_in_order():
    f = parse_formula("p(f(c), g(c, d))")
    smaller = {print_term(t) for t in champ(f, 2).terms}
    larger = {print_term(t) for t in champ(f, 3).terms}
    assert smaller <= larger


def test_champ_counts_on_transitivity_example(upper_bound):
    sk = outer_skolemize(rectify(upper_bound))
    assert len(champ(sk, 2).terms) == 3
    assert len(champ(sk, 3).terms) == 12
    assert len(champ(sk, 4).terms) == 147


def test_champ_budget_guard():
    f = parse_formula("p(g(c, d))")
    with pytest.raises(BudgetError):
        champ(f, 6, budget=100)


def test_champ_herbrand_heights_admit_variables_early():
    f = parse_formula("p(x, c)")
    plain = champ(f, 1)
    assert plain.terms == ()
    herb = champ(f, 1, herbrand=True)
    assert [print_term(t) for t in herb.terms] == ["c", "x"]


# ---------------------------------------------------------------------------
# expansions

def test_expand_replaces_quantifiers_by_junctions():
    f = parse_formula("exists a. p(a)")
    e = expand(f, [parse_term("c"), parse_term("d")])
    assert print_formula(e) == "p(c) | p(d)"
    g = parse_formula("forall a. p(a)")
    assert print_formula(expand(g, [parse_term("c"), parse_term("d")])) == \
        "p(c) & p(d)"


def test_expand_quantifier_free_fixed_point():
    f = parse_formula("p(c) | ~q")
    assert expand(f, []) == f


def test_expand_empty_terms_on_quantified_formula_is_an_error():
    with pytest.raises(ExpansionError):
        expand(parse_formula("exists a. p(a)"), [])


def test_expand_renames_against_term_variable_collisions():
    f = parse_formula("exists a. p(a, x)")
    e = expand(f, [parse_term("x")])
    assert print_formula(e) == "p(x,x)"
    g = parse_formula("forall x. exists a. p(a, x)")
    e2 = expand(g, [parse_term("x"), parse_term("c")])
    assert is_quantifier_free(e2)


def test_expansion_counts_match_built_expansion():
    rng = random.Random(11)
    for _ in range(20):
        n_quants = rng.randrange(1, 3)
        body = "p(x0)" if n_quants == 1 else "q(x0, x1)"
        text = body
        for i in range(n_quants):
            kind = rng.choice(["forall", "exists"])
            text = f"{kind} x{i}. ({text})"
        f = parse_formula(text)
        terms = [parse_term(t) for t in ["c", "d", "f(c)"][:rng.randrange(1, 4)]]
        e = expand(f, terms)
        assert formula_size(e) == expansion_node_count(f, len(terms))
        leaves = expansion_leaf_count(f, len(terms))
        assert leaves == len(terms) ** n_quants


def test_leaf_count_arithmetic_without_building(upper_bound):
    sk = outer_skolemize(rectify(upper_bound))
    assert expansion_leaf_count(sk, 4) == 4**2 + 4**3 + 4
    assert expansion_node_count(sk, 1000000) > 10**12


def test_expand_budget_guard(upper_bound):
    sk = outer_skolemize(rectify(upper_bound))
    ch = champ(sk, 4)
    with pytest.raises(BudgetError):
        expand(sk, ch, budget=10000)


# ---------------------------------------------------------------------------
# selections

def test_selection_parse_print_round_trip(upper_bound_selection):
    text = print_selection(upper_bound_selection)
    assert parse_selection(text) == upper_bound_selection


def test_selection_comments_and_underscore_leaf():
    sel = parse_selection("; choose both witnesses\n(exists a (c d) _)")
    assert isinstance(sel, SelQuant)
    assert sel.kind == "exists" and sel.var == "a"
    assert [print_term(t) for t in sel.terms] == ["c", "d"]
    assert sel.branches == (LEAF, LEAF)


def test_selection_rejects_empty_term_lists():
    with pytest.raises(ExpansionError):
        parse_selection("(exists a () _)")


def test_selection_within_champ(upper_bound_selection, upper_bound):
    sk = outer_skolemize(rectify(upper_bound))
    ok, missing = selection_within(upper_bound_selection, champ(sk, 4))
    assert ok and missing == []
    ok, missing = selection_within(upper_bound_selection, champ(sk, 3))
    assert not ok
    assert {print_term(t) for t in missing} == {"sk_m(sk_u,sk_m(sk_v,sk_w))"}


def test_build_sub_expansion_drinker(drinker):
    sk = outer_skolemize(drinker)
    sel = parse_selection("(exists a (@dot sk_b(@dot)) _ _)")
    e = build_sub_expansion(sk, sel)
    assert is_quantifier_free(e)
    assert is_tautology(e)


def test_build_sub_expansion_single_choice_is_not_tautological(drinker):
    sk = outer_skolemize(drinker)
    sel = parse_selection("(exists a (@dot) _)")
    e = build_sub_expansion(sk, sel)
    assert print_formula(e) == "~p(sk_b(@dot)) | p(@dot)"
    assert not is_tautology(e)


def test_build_sub_expansion_skeleton_mismatch(drinker):
    sk = outer_skolemize(drinker)
    with pytest.raises(ExpansionError):
        build_sub_expansion(sk, parse_selection("(forall a (@dot) _)"))


def test_tautological_sub_expansion_implies_tautological_expansion():
    # on formulas whose quantifiers all sit in gamma position, choosing a
    # subset of the terms can only weaken the expansion
    rng = random.Random(23)
    hits = 0
    for _ in range(40):
        if rng.random() < 0.5:
            f = parse_formula("exists a. (p(a, x) | ~p(c, x))")
            ch = champ(f, 2)
            k = rng.randrange(1, len(ch.terms) + 1)
            chosen = tuple(rng.sample(list(ch.terms), k))
            sel = SelQuant("exists", "a", chosen, (LEAF,) * k)
        else:
            f = parse_formula("~(forall a. p(a, x)) | p(c, x)")
            ch = champ(f, 2)
            k = rng.randrange(1, len(ch.terms) + 1)
            chosen = tuple(rng.sample(list(ch.terms), k))
            sel = SelOr(SelNot(SelQuant("forall", "a", chosen, (LEAF,) * k)),
                        LEAF)
        sub = build_sub_expansion(f, sel)
        if is_tautology(sub):
            hits += 1
            assert is_tautology(expand(f, ch))
    assert hits > 0
