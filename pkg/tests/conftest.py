"""Shared fixtures and random generators for the test suite."""

import pytest

from herbrandkit.construct import (
    UPPER_BOUND_SELECTION,
    UPPER_BOUND_TEXT,
    construct_derivation,
)
from herbrandkit.expansion import parse_selection
from herbrandkit.syntax import (
    And,
    App,
    Atom,
    Exists,
    Forall,
    Not,
    Or,
    Var,
    parse_formula,
    rectify,
    substitute,
)

DRINKER_TEXT = "exists a. (~(exists b. p(b)) | p(a))"
TWO_DISJUNCT_TEXT = ("(~(exists b. p(b)) | (exists a. q(a))) | "
                     "((exists x. p(x)) & ~(exists y. q(y)))")


@pytest.fixture(scope="session")
def upper_bound():
    return parse_formula(UPPER_BOUND_TEXT)


@pytest.fixture(scope="session")
def upper_bound_selection():
    return parse_selection(UPPER_BOUND_SELECTION)


@pytest.fixture(scope="session")
def drinker():
    return parse_formula(DRINKER_TEXT)


@pytest.fixture(scope="session")
def two_disjunct():
    return parse_formula(TWO_DISJUNCT_TEXT)


@pytest.fixture(scope="session")
def showcase_derivation(upper_bound, upper_bound_selection):
    """The order-4 derivation for the transitivity example, built once."""
    return construct_derivation(upper_bound, 4, upper_bound_selection)


# ---------------------------------------------------------------------------
# random generators (plain functions so tests control their own seeds)

def random_qf(rng, atoms, depth=2):
    """Random quantifier-free formula over the given atom pool."""
    roll = rng.random()
    if depth == 0 or roll < 0.35:
        return rng.choice(atoms)
    if roll < 0.55:
        return Not(random_qf(rng, atoms, depth - 1))
    make = And if rng.random() < 0.5 else Or
    return make(random_qf(rng, atoms, depth - 1),
                random_qf(rng, atoms, depth - 1))


def random_candidate(rng):
    """Random closed formula with at most two quantifiers over a signature
    of at most three symbols, biased toward shapes that are valid at low
    expansion orders (instances of quantified parts, one-sided duplication)
    with a tail of unbiased noise."""
    x, y = Var("x"), Var("y")
    c = Var("c")
    px, pc, r = Atom("p", (x,)), Atom("p", (c,)), Atom("r", ())
    g = random_qf(rng, [px, pc, r], depth=2)
    gy = substitute(g, {"x": y})
    shape = rng.randrange(8)
    if shape == 0:
        f = Exists("x", Or(Not(Exists("y", gy)), g))
    elif shape == 1:
        t = App("f", False, (c,)) if rng.random() < 0.4 else c
        inst = substitute(g, {"x": t})
        f = Or(Not(Forall("x", g)), inst)
    elif shape == 2:
        f = Exists("x", Or(g, Not(substitute(g, {"x": c}))))
    elif shape == 3:
        f = Forall("x", Or(g, Not(g)))
    elif shape == 4:
        f = Or(Not(Exists("x", g)), Exists("y", gy))
    elif shape == 5:
        f = Forall("x", Exists("y", Or(Not(g), gy)))
    else:
        quant = Exists if rng.random() < 0.5 else Forall
        body = random_qf(rng, [px, pc, r], depth=2)
        f = quant("x", body)
        if rng.random() < 0.5:
            inner = Exists if rng.random() < 0.5 else Forall
            f = quant("x", inner("y", random_qf(rng, [px, Atom("p", (y,)), r],
                                                depth=2)))
    return rectify(f)
