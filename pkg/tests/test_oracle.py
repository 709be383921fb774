"""Brute-force finite-model validity checking."""

import pytest

from herbrandkit.oracle import (
    OracleBudgetError,
    find_countermodel,
    valid_up_to,
)
from herbrandkit.syntax import parse_formula


def test_propositional_validity():
    assert valid_up_to(parse_formula("p | ~p"), 2)
    assert not valid_up_to(parse_formula("p"), 1)


def test_quantifier_semantics():
    assert valid_up_to(parse_formula("(forall x. p(x)) -> p(c)"), 2)
    assert valid_up_to(parse_formula("p(c) -> (exists x. p(x))"), 2)
    assert not valid_up_to(parse_formula("(exists x. p(x)) -> p(c)"), 2)


def test_drinker_is_valid(drinker):
    assert valid_up_to(drinker, 2)


def test_transitivity_example_is_valid_in_tiny_models(upper_bound):
    assert valid_up_to(upper_bound, 2)


def test_countermodel_contents():
    cm = find_countermodel(parse_formula("p(f(c))"), max_size=2)
    assert cm is not None
    assert cm.size in (1, 2)
    assert "f" in cm.functions
    assert "p" in cm.predicates
    assert "c" in cm.env
    text = cm.describe()
    assert "domain size" in text and "p" in text


def test_free_variables_read_universally():
    # p(x) -> p(x) is valid; p(x) -> p(y) is refuted by distinct values
    assert valid_up_to(parse_formula("p(x) -> p(x)"), 2)
    cm = find_countermodel(parse_formula("p(x) -> p(y)"), max_size=2)
    assert cm is not None
    assert cm.env["x"] != cm.env["y"]


def test_gamma_variables_range_over_the_domain():
    assert valid_up_to(parse_formula("p(?x) -> p(?x)"), 2)
    assert find_countermodel(parse_formula("p(?x)"), max_size=2) is not None


def test_smallest_countermodel_is_preferred():
    cm = find_countermodel(parse_formula("p(c)"), max_size=2)
    assert cm.size == 1


def test_skolem_named_variables_are_generic():
    # a formula false under some reading of the named variable is refutable
    f = parse_formula("p(sk_b(@dot))")
    cm = find_countermodel(f, max_size=2)
    assert cm is not None


def test_validity_monotone_down_in_size():
    # valid at size 2 implies valid at size 1 for these samples
    for text in ("p | ~p", "(forall x. p(x)) -> p(c)",
                 "exists a. (~(exists b. p(b)) | p(a))"):
        f = parse_formula(text)
        if valid_up_to(f, 2):
            assert valid_up_to(f, 1)


def test_budget_guard():
    f = parse_formula("p(g(x, y), h(y, z)) | q(k(x, z))")
    with pytest.raises(OracleBudgetError):
        find_countermodel(f, max_size=3, budget=50)
