"""Skolemization: the outer form, the delta++ form with its symbol registry,
and the Skolem-name view in which bound delta-variables are renamed to the
print of their Skolem term.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .syntax import (
    And, App, Atom, Exists, Forall, Formula, FormulaError, GammaVar, Not, Or,
    Quant, SkolemNamedVar, Term, Var, collect_signature, free_names,
    is_rectified, print_term, substitute, term_var_name,
)


class SkolemError(FormulaError):
    pass


# ---------------------------------------------------------------------------
# canonical scope keys

def canonical_key(scope: Formula, listed: list[Term]) -> str:
    """Canonical print of a quantified scope for the delta-function registry.

    Bound variables are numbered b0, b1, ... in preorder binding order and
    the listed argument variables are replaced positionally by g0, g1, ...,
    so the key is invariant under renaming of bound variables and under
    bijective renaming of the listed variables."""
    positional = {term_var_name(t): f"g{i}" for i, t in enumerate(listed)}
    counter = [0]

    def pt(t: Term, env) -> str:
        match t:
            case Var() | GammaVar() | SkolemNamedVar():
                nm = term_var_name(t)
                return env.get(nm, positional.get(nm, nm))
            case App(sym, _, args):
                if not args:
                    return sym
                return sym + "(" + ",".join(pt(a, env) for a in args) + ")"

    def pf(f: Formula, env) -> str:
        match f:
            case Atom(p, args):
                return p + "(" + ",".join(pt(a, env) for a in args) + ")"
            case Not(s):
                return "(not " + pf(s, env) + ")"
            case And(l, r):
                return "(and " + pf(l, env) + " " + pf(r, env) + ")"
            case Or(l, r):
                return "(or " + pf(l, env) + " " + pf(r, env) + ")"
            case Forall(v, b) | Exists(v, b):
                kind = "forall" if isinstance(f, Forall) else "exists"
                bn = f"b{counter[0]}"
                counter[0] += 1
                return f"({kind} {bn} " + pf(b, {**env, v: bn}) + ")"

    return pf(scope, {})


def key_hash(key: str) -> str:
    return hashlib.sha256(key.encode()).hexdigest()[:16]


@dataclass
class SkolemRegistry:
    """Maps canonical scope keys to Skolem symbols, shared between
    Skolemization and derivation checking so both use the same symbols.

    Entries are stored under the key hash; a registry loaded from a dump can
    therefore answer lookups without the full key text."""

    entries: dict[str, tuple[str, int]] = field(default_factory=dict)

    def symbols(self) -> set[str]:
        return {sym for sym, _ in self.entries.values()}

    def lookup(self, key: str) -> tuple[str, int] | None:
        return self.entries.get(key_hash(key))

    def bind(self, key: str, base: str, arity: int, avoid: set[str] = frozenset()) -> str:
        h = key_hash(key)
        if h in self.entries:
            sym, known_arity = self.entries[h]
            if known_arity != arity:
                raise SkolemError(
                    f"registry arity clash for {sym}: {known_arity} vs {arity}")
            return sym
        taken = self.symbols() | set(avoid)
        sym = f"sk_{base}"
        i = 2
        while sym in taken:
            sym = f"sk_{base}_{i}"
            i += 1
        self.entries[h] = (sym, arity)
        return sym

    def record(self, key: str, sym: str, arity: int) -> None:
        """Bind a key to a caller-chosen symbol, e.g. one read off a
        derivation line.  Rejects clashes with an existing entry."""
        h = key_hash(key)
        if h in self.entries:
            known_sym, known_arity = self.entries[h]
            if (known_sym, known_arity) != (sym, arity):
                raise SkolemError(
                    f"registry clash: key bound to {known_sym}/{known_arity}, "
                    f"asked to record {sym}/{arity}")
            return
        self.entries[h] = (sym, arity)

    def dump(self) -> str:
        lines = [f"{h} {sym} {arity}" for h, (sym, arity) in self.entries.items()]
        return "\n".join(sorted(lines)) + ("\n" if lines else "")

    @classmethod
    def load(cls, text: str) -> "SkolemRegistry":
        reg = cls()
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3 or not parts[2].isdigit():
                raise SkolemError(f"bad registry line {ln}: {line!r}")
            reg.entries[parts[0]] = (parts[1], int(parts[2]))
        return reg


# ---------------------------------------------------------------------------
# traversal shared by the three skolemizing operations

def _gamma_is(kind: str, sign: int) -> bool:
    return (kind == "exists") == (sign > 0)


def _occurrence_order(scope: Formula, candidates: set[str]) -> list[str]:
    """Candidate variable names in order of first occurrence in the scope
    (preorder, left to right through atom arguments)."""
    out: list[str] = []

    def walk_term(t):
        match t:
            case Var() | GammaVar() | SkolemNamedVar():
                nm = term_var_name(t)
                if nm in candidates and nm not in out:
                    out.append(nm)
            case App(_, _, args):
                for a in args:
                    walk_term(a)

    def walk(g):
        match g:
            case Atom(_, args):
                for a in args:
                    walk_term(a)
            case Not(s):
                walk(s)
            case And(l, r) | Or(l, r):
                walk(l)
                walk(r)
            case Forall(_, b) | Exists(_, b):
                walk(b)

    walk(scope)
    return out


def _fresh_symbol(base: str, taken: set[str]) -> str:
    sym = f"sk_{base}"
    i = 2
    while sym in taken:
        sym = f"sk_{base}_{i}"
        i += 1
    taken.add(sym)
    return sym


def outer_skolemize(f: Formula, record: dict[str, str] | None = None) -> Formula:
    """Remove every delta-quantifier, replacing its variable by a fresh
    Skolem function applied to the variables of all enclosing
    gamma-quantifiers, in nesting order.  Gamma-quantifiers stay.

    When record is given it is filled with binder name -> chosen symbol."""
    if not is_rectified(f):
        raise SkolemError("outer Skolemization requires a rectified formula")
    sig = collect_signature(f)
    taken = set(sig.functions) | set(sig.free_vars)

    def walk(g, gammas, sign):
        match g:
            case Atom():
                return g
            case Not(s):
                return Not(walk(s, gammas, -sign))
            case And(l, r):
                return And(walk(l, gammas, sign), walk(r, gammas, sign))
            case Or(l, r):
                return Or(walk(l, gammas, sign), walk(r, gammas, sign))
            case Forall(v, b) | Exists(v, b):
                kind = "forall" if isinstance(g, Forall) else "exists"
                if _gamma_is(kind, sign):
                    make = Forall if kind == "forall" else Exists
                    return make(v, walk(b, gammas + [v], sign))
                sym = _fresh_symbol(v, taken)
                if record is not None:
                    record[v] = sym
                t = App(sym, True, tuple(Var(x) for x in gammas))
                return walk(substitute(b, {v: t}), gammas, sign)

    return walk(f, [], 1)


def skolem_name_view(f: Formula) -> Formula:
    """Rename every bound delta-variable to the print of its outer Skolem
    term; the quantifier itself stays.  Occurrences become Skolem-named
    variables, opaque to substitution."""
    if not is_rectified(f):
        raise SkolemError("the Skolem-name view requires a rectified formula")
    sig = collect_signature(f)
    taken = set(sig.functions) | set(sig.free_vars)

    def walk(g, gammas, sign):
        match g:
            case Atom():
                return g
            case Not(s):
                return Not(walk(s, gammas, -sign))
            case And(l, r):
                return And(walk(l, gammas, sign), walk(r, gammas, sign))
            case Or(l, r):
                return Or(walk(l, gammas, sign), walk(r, gammas, sign))
            case Forall(v, b) | Exists(v, b):
                kind = "forall" if isinstance(g, Forall) else "exists"
                make = Forall if kind == "forall" else Exists
                if _gamma_is(kind, sign):
                    return make(v, walk(b, gammas + [v], sign))
                sym = _fresh_symbol(v, taken)
                enc = App(sym, True, tuple(Var(x) for x in gammas))
                name = print_term(enc)
                body = substitute(b, {v: SkolemNamedVar(enc)})
                return make(name, walk(body, gammas, sign))

    return walk(f, [], 1)


def deltapp_skolemize(f: Formula, registry: SkolemRegistry) -> Formula:
    """Remove every delta-quantifier outermost-first, replacing its variable
    by a registry symbol applied to exactly the gamma-variables that occur in
    the quantifier's scope, in order of first occurrence.  The registry
    reuses the same symbol for scopes equal up to bound renaming and
    bijective renaming of the argument variables."""
    if not is_rectified(f):
        raise SkolemError("delta++ Skolemization requires a rectified formula")
    sig = collect_signature(f)
    avoid = set(sig.functions) | set(sig.free_vars)

    def var_term(nm: str) -> Term:
        return GammaVar(nm[1:]) if nm.startswith("?") else Var(nm)

    def walk(g, gammas, sign):
        match g:
            case Atom():
                return g
            case Not(s):
                return Not(walk(s, gammas, -sign))
            case And(l, r):
                return And(walk(l, gammas, sign), walk(r, gammas, sign))
            case Or(l, r):
                return Or(walk(l, gammas, sign), walk(r, gammas, sign))
            case Forall(v, b) | Exists(v, b):
                kind = "forall" if isinstance(g, Forall) else "exists"
                make = Forall if kind == "forall" else Exists
                if _gamma_is(kind, sign):
                    return make(v, walk(b, gammas + [v], sign))
                scope_free = free_names(g)
                cands = (set(gammas) & scope_free) | {
                    nm for nm in scope_free if nm.startswith("?")}
                listed = [var_term(nm) for nm in _occurrence_order(g, cands)]
                key = canonical_key(g, listed)
                sym = registry.bind(key, v, len(listed), avoid)
                t = App(sym, True, tuple(listed))
                return walk(substitute(b, {v: t}), gammas, sign)

    return walk(f, [], 1)


def nameify_term(t: Term) -> Term:
    """Maximal Skolem-headed subterms become Skolem-named variables."""
    match t:
        case App(_, True, _):
            return SkolemNamedVar(t)
        case App(sym, sk, args):
            if not args:
                return t
            return App(sym, sk, tuple(nameify_term(a) for a in args))
        case _:
            return t
