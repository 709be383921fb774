"""Champs finis and expansions.

The champ of order n over a formula's free symbols is the set of terms of
height strictly below n.  Expanding a formula over a term list replaces an
existential quantifier by the disjunction of the instances and a universal
quantifier by the conjunction; a sub-expansion expands every quantifier over
a chosen nonempty subset of terms, chosen per branch via a selection tree
mirroring the quantifier skeleton.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .syntax import (
    And, App, Atom, DOT, Exists, Forall, Formula, FormulaError, GammaVar,
    Not, Or, Quant, Term, Var, all_names, bound_names, collect_signature,
    fresh_name, is_quantifier_free, parse_term, print_term, substitute,
    term_free_names, term_height, var_for_name,
)

DEFAULT_BUDGET = 10_000_000


class ExpansionError(FormulaError):
    pass


class BudgetError(ExpansionError):
    """The enumeration or expansion would exceed the configured size guard."""


# ---------------------------------------------------------------------------
# champs finis

def term_order_key(t: Term, herbrand: bool = False):
    return (term_height(t, herbrand), print_term(t))


@dataclass(frozen=True)
class ChampFini:
    order: int
    herbrand: bool
    terms: tuple[Term, ...]  # sorted by (height, print)

    def __contains__(self, t: Term) -> bool:
        return t in self._set

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def _set(self):
        return set(self.terms)


def _term_nodes(t: Term) -> int:
    if isinstance(t, App) and t.args:
        return 1 + sum(_term_nodes(a) for a in t.args)
    return 1


def champ(f: Formula, order: int, herbrand: bool = False,
          budget: int = DEFAULT_BUDGET) -> ChampFini:
    """All terms of height < order over the formula's free symbols: its
    function symbols, its constants and free variables, with the fresh
    constant @dot thrown in exactly when there is no constant or free
    variable to start from."""
    if order < 1:
        raise ExpansionError(f"champ order must be at least 1, got {order}")
    sig = collect_signature(f)
    base: list[Term] = []
    for name, (arity, sk) in sorted(sig.functions.items()):
        if arity == 0:
            base.append(App(name, sk, ()))
    for name in sig.free_vars:
        base.append(var_for_name(name) if "(" in name else Var(name))
    for name in sig.gamma_vars:
        base.append(GammaVar(name))
    if sig.uses_dot or not base:
        base.append(DOT)
    funcs = [(name, arity, sk) for name, (arity, sk) in sorted(sig.functions.items())
             if arity >= 1]

    seen: set[Term] = set()
    nodes = 0
    for t in base:
        if term_height(t, herbrand) < order and t not in seen:
            seen.add(t)
            nodes += _term_nodes(t)
    while True:
        current = sorted(seen, key=lambda t: term_order_key(t, herbrand))
        added = False
        for name, arity, sk in funcs:
            if len(current) ** arity > budget:
                raise BudgetError(
                    f"champ enumeration over {len(current)} terms with {name}/{arity} "
                    f"exceeds the size guard of {budget}")
            for args in itertools.product(current, repeat=arity):
                t = App(name, sk, args)
                if t in seen or term_height(t, herbrand) >= order:
                    continue
                seen.add(t)
                added = True
                nodes += _term_nodes(t)
                if nodes > budget:
                    raise BudgetError(
                        f"champ enumeration exceeds the size guard of {budget} nodes")
        if not added:
            break
    terms = tuple(sorted(seen, key=lambda t: term_order_key(t, herbrand)))
    return ChampFini(order, herbrand, terms)


# ---------------------------------------------------------------------------
# full expansion

def expansion_node_count(f: Formula, n_terms: int) -> int:
    """Exact node count of the expansion of f over n_terms terms."""
    match f:
        case Atom():
            return 1
        case Not(s):
            return 1 + expansion_node_count(s, n_terms)
        case And(l, r) | Or(l, r):
            return 1 + expansion_node_count(l, n_terms) + expansion_node_count(r, n_terms)
        case Forall(_, b) | Exists(_, b):
            return n_terms * expansion_node_count(b, n_terms) + (n_terms - 1)


def expansion_leaf_count(f: Formula, n_terms: int) -> int:
    """Number of instances of the maximal quantifier-free subformulas in the
    expansion of f over n_terms terms, computed without building anything."""
    match f:
        case _ if is_quantifier_free(f):
            return 1
        case Not(s):
            return expansion_leaf_count(s, n_terms)
        case And(l, r) | Or(l, r):
            return expansion_leaf_count(l, n_terms) + expansion_leaf_count(r, n_terms)
        case Forall(_, b) | Exists(_, b):
            return n_terms * expansion_leaf_count(b, n_terms)


def _rename_away(f: Formula, avoid: set[str]) -> Formula:
    """Rename bound variables of f that collide with the given names (the
    formula is renamed, never the terms)."""
    clash = bound_names(f) & avoid
    if not clash:
        return f
    used = all_names(f) | avoid

    def walk(g):
        match g:
            case Forall(v, b) | Exists(v, b):
                make = Forall if isinstance(g, Forall) else Exists
                if v in avoid:
                    v2 = fresh_name(v, used)
                    used.add(v2)
                    b = substitute(b, {v: var_for_name(v2)})
                    return make(v2, walk(b))
                return make(v, walk(b))
            case Not(s):
                return Not(walk(s))
            case And(l, r):
                return And(walk(l), walk(r))
            case Or(l, r):
                return Or(walk(l), walk(r))
            case Atom():
                return g

    return walk(f)


def expand(f: Formula, terms, budget: int = DEFAULT_BUDGET,
           herbrand: bool = False) -> Formula:
    """The expansion of f over a term list: every exists becomes the
    disjunction, every forall the conjunction, of the instances, recursively
    over the same terms.  Instances are ordered canonically."""
    if isinstance(terms, ChampFini):
        herbrand = terms.herbrand
        terms = terms.terms
    terms = tuple(sorted(set(terms), key=lambda t: term_order_key(t, herbrand)))
    if not terms:
        if is_quantifier_free(f):
            return f
        raise ExpansionError("expansion over an empty term list is undefined "
                             "for a formula with quantifiers")
    total = expansion_node_count(f, len(terms))
    if total > budget:
        raise BudgetError(
            f"expansion would have {total} nodes, over the size guard of {budget}")
    avoid = set()
    for t in terms:
        avoid |= term_free_names(t)
    f = _rename_away(f, avoid)

    def walk(g):
        match g:
            case Atom():
                return g
            case Not(s):
                return Not(walk(s))
            case And(l, r):
                return And(walk(l), walk(r))
            case Or(l, r):
                return Or(walk(l), walk(r))
            case Forall(v, b) | Exists(v, b):
                combine = And if isinstance(g, Forall) else Or
                body = walk(b)
                acc = None
                for t in terms:
                    inst = substitute(body, {v: t})
                    acc = inst if acc is None else combine(acc, inst)
                return acc

    return walk(f)


# ---------------------------------------------------------------------------
# selection trees

@dataclass(frozen=True)
class SelLeaf:
    pass


@dataclass(frozen=True)
class SelNot:
    sub: "Selection"


@dataclass(frozen=True)
class SelAnd:
    left: "Selection"
    right: "Selection"


@dataclass(frozen=True)
class SelOr:
    left: "Selection"
    right: "Selection"


@dataclass(frozen=True)
class SelQuant:
    kind: str  # forall | exists
    var: str
    terms: tuple[Term, ...]
    branches: tuple["Selection", ...]  # one per term


Selection = SelLeaf | SelNot | SelAnd | SelOr | SelQuant
LEAF = SelLeaf()


class SelectionError(ExpansionError):
    pass


def _sel_tokens(text: str):
    """Tokens for the s-expression selection syntax.  A term token may
    contain balanced parentheses of its own (sk_m(sk_v,sk_w))."""
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in "()":
            toks.append(c)
            i += 1
            continue
        j = i
        depth = 0
        while j < n:
            c = text[j]
            if c.isspace() and depth == 0:
                break
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    break
                depth -= 1
            j += 1
        toks.append(text[i:j])
        i = j
    return toks


def parse_selection(text: str) -> Selection:
    toks = _sel_tokens(text)
    pos = [0]

    def peek():
        return toks[pos[0]] if pos[0] < len(toks) else None

    def take():
        t = peek()
        if t is None:
            raise SelectionError("unexpected end of selection")
        pos[0] += 1
        return t

    def node() -> Selection:
        t = take()
        if t == "_":
            return LEAF
        if t != "(":
            raise SelectionError(f"expected ( or _, found {t!r}")
        head = take()
        if head == "not":
            s = SelNot(node())
        elif head in ("and", "or"):
            l = node()
            r = node()
            s = (SelAnd if head == "and" else SelOr)(l, r)
        elif head in ("forall", "exists"):
            var = take()
            if take() != "(":
                raise SelectionError(f"expected a term list after {head} {var}")
            terms = []
            while peek() != ")":
                if peek() is None:
                    raise SelectionError("unclosed term list")
                terms.append(parse_term(take()))
            take()
            if not terms:
                raise SelectionError(f"empty term list at quantifier {var}")
            branches = []
            while peek() != ")":
                branches.append(node())
            if len(branches) == 1 or not branches:
                sub = branches[0] if branches else LEAF
                branches = [sub] * len(terms)
            elif len(branches) != len(terms):
                raise SelectionError(
                    f"quantifier {var} lists {len(terms)} terms but "
                    f"{len(branches)} sub-selections")
            s = SelQuant(head, var, tuple(terms), tuple(branches))
        else:
            raise SelectionError(f"unknown selection node {head!r}")
        if take() != ")":
            raise SelectionError("expected ) in selection")
        return s

    s = node()
    if pos[0] != len(toks):
        raise SelectionError("trailing input in selection")
    return s


def print_selection(s: Selection) -> str:
    match s:
        case SelLeaf():
            return "_"
        case SelNot(sub):
            return f"(not {print_selection(sub)})"
        case SelAnd(l, r):
            return f"(and {print_selection(l)} {print_selection(r)})"
        case SelOr(l, r):
            return f"(or {print_selection(l)} {print_selection(r)})"
        case SelQuant(kind, var, terms, branches):
            ts = " ".join(print_term(t) for t in terms)
            if all(b == branches[0] for b in branches):
                bs = " " + print_selection(branches[0])
            else:
                bs = " " + " ".join(print_selection(b) for b in branches)
            return f"({kind} {var} ({ts}){bs})"


def selection_terms(s: Selection) -> list[Term]:
    out = []
    match s:
        case SelNot(sub):
            out += selection_terms(sub)
        case SelAnd(l, r) | SelOr(l, r):
            out += selection_terms(l)
            out += selection_terms(r)
        case SelQuant(_, _, terms, branches):
            out += list(terms)
            for b in branches:
                out += selection_terms(b)
    return out


def selection_within(s: Selection, ch: ChampFini) -> tuple[bool, list[Term]]:
    """Whether every chosen term lies in the champ; also the offenders."""
    offenders = [t for t in selection_terms(s) if t not in ch]
    return not offenders, offenders


def build_sub_expansion(f: Formula, sel: Selection,
                        budget: int = DEFAULT_BUDGET) -> Formula:
    """Expand each quantifier over its per-branch chosen terms.  The
    selection must mirror the formula's skeleton down to quantifier-free
    subformulas; chosen terms must not use variables bound in the formula."""
    avoid = set()
    for t in selection_terms(sel):
        avoid |= term_free_names(t)
    clash = bound_names(f) & avoid
    if clash:
        raise SelectionError(
            "selection terms use bound variable names: " + ", ".join(sorted(clash)))
    count = [0]

    def walk(g, s):
        if isinstance(s, SelLeaf):
            if not is_quantifier_free(g):
                raise SelectionError(
                    "selection stops at a subformula that still has quantifiers")
            count[0] += 1
            return g
        match g, s:
            case Not(sub), SelNot(ssub):
                count[0] += 1
                return Not(walk(sub, ssub))
            case And(l, r), SelAnd(sl, sr):
                count[0] += 1
                return And(walk(l, sl), walk(r, sr))
            case Or(l, r), SelOr(sl, sr):
                count[0] += 1
                return Or(walk(l, sl), walk(r, sr))
            case (Forall(v, b), SelQuant(skind, sv, terms, branches)) | \
                 (Exists(v, b), SelQuant(skind, sv, terms, branches)):
                fkind = "forall" if isinstance(g, Forall) else "exists"
                if sv != v or skind != fkind:
                    raise SelectionError(
                        f"selection names quantifier {skind} {sv!r} where the "
                        f"formula binds {fkind} {v!r}")
                combine = And if isinstance(g, Forall) else Or
                acc = None
                for t, br in zip(terms, branches):
                    inst = substitute(walk(b, br), {v: t})
                    acc = inst if acc is None else combine(acc, inst)
                count[0] += len(terms) - 1
                if count[0] > budget:
                    raise BudgetError(
                        f"sub-expansion exceeds the size guard of {budget} nodes")
                return acc
        raise SelectionError(
            f"selection node {type(s).__name__} does not match "
            f"formula node {type(g).__name__}")

    return walk(f, sel)
