"""First-order syntax: terms, formulas, parsing, printing, and the
structural operations everything else is built on.

Terms
    Var           plain variable (also used for constants given as bare names)
    GammaVar      instantiation variable, printed with a leading ?
    SkolemNamedVar  a variable whose name is the print of an encoded term;
                  the encoding is opaque to substitution and variable capture
    App           function application; nullary Apps are constants
                  (the fresh constant prints as @dot, Skolem symbols carry
                  a flag and print by their registered sk_* name)

Formulas
    Atom, Not, And, Or, Forall, Exists.  Implication is desugared at parse
    time.  Quantifier binders are name strings; a Skolem-named binder stores
    the printed encoding as its name.

Paths are tuples of child indices: Not and quantifiers have child 0,
And/Or have children 0 and 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache


class FormulaError(Exception):
    pass


class ParseError(FormulaError):
    def __init__(self, msg, line=None, col=None):
        if line is not None:
            msg = f"{msg} (line {line}, column {col})"
        super().__init__(msg)
        self.line = line
        self.col = col


class CaptureError(FormulaError):
    """Strict substitution found a variable that would be captured."""


class PathError(FormulaError):
    pass


# ---------------------------------------------------------------------------
# terms

@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class GammaVar:
    name: str  # printed with a leading ?


@dataclass(frozen=True, slots=True)
class SkolemNamedVar:
    encoded: Term


@dataclass(frozen=True, slots=True)
class App:
    sym: str
    skolem: bool
    args: tuple[Term, ...] = ()


Term = Var | GammaVar | SkolemNamedVar | App

DOT = App("@dot", False, ())

_SKOLEM_SYM_RE = re.compile(r"^sk(\d|_|$)")


def is_skolem_symbol(name: str) -> bool:
    return bool(_SKOLEM_SYM_RE.match(name))


@lru_cache(maxsize=None)
def print_term(t: Term) -> str:
    match t:
        case Var(name):
            return name
        case GammaVar(name):
            return "?" + name
        case SkolemNamedVar(encoded):
            return print_term(encoded)
        case App(sym, _, args):
            if not args:
                return sym
            return sym + "(" + ",".join(print_term(a) for a in args) + ")"
    raise TypeError(f"not a term: {t!r}")


def term_var_name(t: Term) -> str:
    """The name under which a variable occurrence is bound or substituted."""
    match t:
        case Var(name):
            return name
        case GammaVar(name):
            return "?" + name
        case SkolemNamedVar(_):
            return print_term(t)
    raise TypeError(f"not a variable: {t!r}")


def term_free_names(t: Term) -> set[str]:
    """Names of variable occurrences in t.  Skolem-named variables count as
    a single opaque name; their encoding is never entered."""
    match t:
        case Var() | GammaVar() | SkolemNamedVar():
            return {term_var_name(t)}
        case App(_, _, args):
            out: set[str] = set()
            for a in args:
                out |= term_free_names(a)
            return out
    raise TypeError(f"not a term: {t!r}")


def substitute_term(t: Term, mapping: dict[str, Term]) -> Term:
    match t:
        case Var() | GammaVar() | SkolemNamedVar():
            return mapping.get(term_var_name(t), t)
        case App(sym, sk, args):
            if not args:
                return t
            return App(sym, sk, tuple(substitute_term(a, mapping) for a in args))
    raise TypeError(f"not a term: {t!r}")


def term_height(t: Term, herbrand: bool = False) -> int:
    """Height of a term.  Standard mode: variables and constants 1,
    f(t1..tk) is 1 + max height of the arguments.  Herbrand mode: plain
    variables, instantiation variables and @dot have height 0, Skolem
    constants keep height 1."""
    match t:
        case Var() | GammaVar():
            return 0 if herbrand else 1
        case SkolemNamedVar(encoded):
            return term_height(encoded, herbrand)
        case App(sym, skolem, args):
            if not args:
                if herbrand:
                    return 0 if sym == "@dot" else 1
                return 1
            return 1 + max(term_height(a, herbrand) for a in args)
    raise TypeError(f"not a term: {t!r}")


def term_subterms(t: Term):
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from term_subterms(a)


# ---------------------------------------------------------------------------
# formulas

@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True, slots=True)
class Not:
    sub: Formula


@dataclass(frozen=True, slots=True)
class And:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Forall:
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class Exists:
    var: str
    body: Formula


Formula = Atom | Not | And | Or | Forall | Exists
Quant = (Forall, Exists)

_PREC = {Or: 1, And: 2, Not: 3, Atom: 4, Forall: 0, Exists: 0}


@lru_cache(maxsize=None)
def _print_formula(f: Formula, need: int) -> str:
    match f:
        case Atom("<", (a, b)):
            s = f"{print_term(a)} < {print_term(b)}"
        case Atom(pred, args):
            s = pred if not args else pred + "(" + ",".join(print_term(a) for a in args) + ")"
        case Not(sub):
            s = "~" + _print_formula(sub, 3)
        case And(l, r):
            s = _print_formula(l, 2) + " & " + _print_formula(r, 3)
        case Or(l, r):
            s = _print_formula(l, 1) + " | " + _print_formula(r, 2)
        case Forall(v, body):
            s = f"forall {v}. " + _print_formula(body, 0)
        case Exists(v, body):
            s = f"exists {v}. " + _print_formula(body, 0)
        case _:
            raise TypeError(f"not a formula: {f!r}")
    if _PREC[type(f)] < need:
        return "(" + s + ")"
    return s


def print_formula(f: Formula) -> str:
    return _print_formula(f, 0)


def formula_size(f: Formula) -> int:
    match f:
        case Atom():
            return 1
        case Not(sub):
            return 1 + formula_size(sub)
        case And(l, r) | Or(l, r):
            return 1 + formula_size(l) + formula_size(r)
        case Forall(_, b) | Exists(_, b):
            return 1 + formula_size(b)


def children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case Atom():
            return ()
        case Not(sub):
            return (sub,)
        case And(l, r) | Or(l, r):
            return (l, r)
        case Forall(_, b) | Exists(_, b):
            return (b,)


def subformula_at(f: Formula, path: tuple[int, ...]) -> Formula:
    cur = f
    for i, step in enumerate(path):
        kids = children(cur)
        if step >= len(kids):
            raise PathError(f"path {'.'.join(map(str, path))} leaves the formula at position {i}")
        cur = kids[step]
    return cur


def replace_at(f: Formula, path: tuple[int, ...], new: Formula) -> Formula:
    if not path:
        return new
    step, rest = path[0], path[1:]
    match f:
        case Not(sub) if step == 0:
            return Not(replace_at(sub, rest, new))
        case And(l, r):
            if step == 0:
                return And(replace_at(l, rest, new), r)
            if step == 1:
                return And(l, replace_at(r, rest, new))
        case Or(l, r):
            if step == 0:
                return Or(replace_at(l, rest, new), r)
            if step == 1:
                return Or(l, replace_at(r, rest, new))
        case Forall(v, b) if step == 0:
            return Forall(v, replace_at(b, rest, new))
        case Exists(v, b) if step == 0:
            return Exists(v, replace_at(b, rest, new))
    raise PathError(f"path step {step} does not exist at {type(f).__name__}")


def polarity_at(f: Formula, path: tuple[int, ...]) -> int:
    """+1 if the position is under an even number of negations, -1 otherwise."""
    sign = 1
    cur = f
    for step in path:
        if isinstance(cur, Not):
            sign = -sign
        cur = children(cur)[step]
    return sign


def quantifier_positions(f: Formula) -> list[tuple[tuple[int, ...], str, str]]:
    """Preorder list of (path, 'forall'|'exists', binder name)."""
    out = []

    def walk(g, path):
        match g:
            case Forall(v, b):
                out.append((path, "forall", v))
                walk(b, path + (0,))
            case Exists(v, b):
                out.append((path, "exists", v))
                walk(b, path + (0,))
            case Not(s):
                walk(s, path + (0,))
            case And(l, r) | Or(l, r):
                walk(l, path + (0,))
                walk(r, path + (1,))

    walk(f, ())
    return out


def classify_quantifier(f: Formula, path: tuple[int, ...]) -> tuple[str, str, bool]:
    """(kind, 'gamma'|'delta', accessible) for the quantifier at path.

    A quantifier is gamma when it is an exists under even negations or a
    forall under odd negations; delta otherwise.  It is accessible when no
    quantifier stands strictly above it."""
    q = subformula_at(f, path)
    if not isinstance(q, Quant):
        raise PathError(f"no quantifier at path {'.'.join(map(str, path)) or '.'}")
    kind = "forall" if isinstance(q, Forall) else "exists"
    sign = polarity_at(f, path)
    if (kind == "exists") == (sign > 0):
        klass = "gamma"
    else:
        klass = "delta"
    accessible = True
    cur = f
    for step in path:
        if isinstance(cur, Quant):
            accessible = False
            break
        cur = children(cur)[step]
    return kind, klass, accessible


def is_quantifier_free(f: Formula) -> bool:
    match f:
        case Atom():
            return True
        case Not(s):
            return is_quantifier_free(s)
        case And(l, r) | Or(l, r):
            return is_quantifier_free(l) and is_quantifier_free(r)
        case Forall() | Exists():
            return False


# ---------------------------------------------------------------------------
# variables, substitution

def free_names(f: Formula) -> set[str]:
    """Free variable names of a formula (plain names, ?names, and prints of
    free Skolem-named variables)."""

    def walk(g, bound):
        match g:
            case Atom(_, args):
                out = set()
                for a in args:
                    out |= term_free_names(a)
                return out - bound
            case Not(s):
                return walk(s, bound)
            case And(l, r) | Or(l, r):
                return walk(l, bound) | walk(r, bound)
            case Forall(v, b) | Exists(v, b):
                return walk(b, bound | {v})

    return walk(f, frozenset())


def free_gamma_vars(f: Formula) -> list[str]:
    """Free instantiation variables in order of first occurrence (preorder,
    left to right through atom arguments).  Names are returned bare, without
    the ? prefix."""
    seen: list[str] = []

    def walk_term(t):
        match t:
            case GammaVar(name):
                if name not in seen:
                    seen.append(name)
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

    walk(f)
    return seen


def bound_names(f: Formula) -> set[str]:
    return {v for _, _, v in quantifier_positions(f)}


def all_names(f: Formula) -> set[str]:
    return free_names(f) | bound_names(f)


def fresh_name(base: str, used: set[str]) -> str:
    if base not in used:
        return base
    i = 1
    while f"{base}_{i}" in used:
        i += 1
    return f"{base}_{i}"


def var_for_name(name: str) -> Term:
    """The variable term a binder of this name binds.  A name that reads as
    a Skolem application denotes a Skolem-named variable."""
    if name.startswith("?"):
        raise FormulaError(f"instantiation variable {name} cannot be bound")
    if "(" in name or is_skolem_symbol(name):
        t = parse_term(name)
        if not (isinstance(t, App) and t.skolem):
            raise FormulaError(f"binder name {name!r} is not a Skolem encoding")
        return SkolemNamedVar(t)
    return Var(name)


def substitute(f: Formula, mapping: dict[str, Term], strict: bool = False) -> Formula:
    """Replace free variable occurrences by terms.  Keys are variable names
    as printed (?names for instantiation variables, full prints for
    Skolem-named variables).

    Lenient mode renames a binder that would capture a variable of an
    incoming term; strict mode raises CaptureError instead."""

    def walk(g, mp):
        match g:
            case Atom(p, args):
                return Atom(p, tuple(substitute_term(a, mp) for a in args))
            case Not(s):
                return Not(walk(s, mp))
            case And(l, r):
                return And(walk(l, mp), walk(r, mp))
            case Or(l, r):
                return Or(walk(l, mp), walk(r, mp))
            case Forall(v, b) | Exists(v, b):
                inner = {k: t for k, t in mp.items() if k != v}
                live = {k for k in inner if k in free_names(b) - {v}}
                inner = {k: inner[k] for k in live}
                make = Forall if isinstance(g, Forall) else Exists
                if not inner:
                    return make(v, b)
                incoming = set()
                for t in inner.values():
                    incoming |= term_free_names(t)
                if v in incoming:
                    if strict:
                        raise CaptureError(
                            f"substitution would capture {v} bound at {print_formula(g)[:60]}")
                    used = all_names(b) | incoming | set(inner)
                    v2 = fresh_name(v, used)
                    b = walk(b, {v: var_for_name(v2)})
                    return make(v2, walk(b, inner))
                return make(v, walk(b, inner))

    mapping = {k: t for k, t in mapping.items()}
    return walk(f, mapping)


# ---------------------------------------------------------------------------
# rectification

def rectify(f: Formula) -> Formula:
    """Rename binders apart and drop vacuous quantifiers.

    Walks in preorder; the first use of a base name is kept, later colliding
    binders get _1, _2, ... suffixes; names colliding with free variables are
    renamed the same way.  A quantifier whose variable does not occur in its
    body is deleted."""
    used = set(free_names(f))

    def walk(g, env):
        match g:
            case Atom(p, args):
                return Atom(p, tuple(substitute_term(a, env) for a in args))
            case Not(s):
                return Not(walk(s, env))
            case And(l, r):
                return And(walk(l, env), walk(r, env))
            case Or(l, r):
                return Or(walk(l, env), walk(r, env))
            case Forall(v, b) | Exists(v, b):
                if v not in free_names(b):
                    return walk(b, env)
                v2 = fresh_name(v, used)
                used.add(v2)
                env2 = dict(env)
                if v2 != v:
                    env2[v] = var_for_name(v2)
                else:
                    env2.pop(v, None)
                make = Forall if isinstance(g, Forall) else Exists
                return make(v2, walk(b, env2))

    return walk(f, {})


def is_rectified(f: Formula) -> bool:
    seen = set()
    free = free_names(f)

    def walk(g):
        match g:
            case Forall(v, b) | Exists(v, b):
                if v in seen or v in free or v not in free_names(b):
                    return False
                seen.add(v)
                return walk(b)
            case Not(s):
                return walk(s)
            case And(l, r) | Or(l, r):
                return walk(l) and walk(r)
            case Atom():
                return True

    return walk(f)


# ---------------------------------------------------------------------------
# equality up to renaming

def _alpha_walk(f, g, envf, envg, gmap):
    """Structural comparison; envf/envg map bound names to levels, gmap is
    None for plain alpha comparison or a dict building a bijection on free
    instantiation variables."""

    def term_eq(s, t):
        sv = isinstance(s, (Var, SkolemNamedVar))
        tv = isinstance(t, (Var, SkolemNamedVar))
        if sv and tv:
            sn, tn = term_var_name(s), term_var_name(t)
            if sn in envf or tn in envg:
                return envf.get(sn) == envg.get(tn)
            return sn == tn
        if isinstance(s, GammaVar) and isinstance(t, GammaVar):
            if gmap is None:
                return s.name == t.name
            if s.name in gmap:
                return gmap[s.name] == t.name
            if t.name in gmap.values():
                return False
            gmap[s.name] = t.name
            return True
        if isinstance(s, App) and isinstance(t, App):
            return (s.sym == t.sym and s.skolem == t.skolem
                    and len(s.args) == len(t.args)
                    and all(term_eq(a, b) for a, b in zip(s.args, t.args)))
        return False

    match f, g:
        case Atom(p1, a1), Atom(p2, a2):
            return (p1 == p2 and len(a1) == len(a2)
                    and all(term_eq(x, y) for x, y in zip(a1, a2)))
        case Not(s1), Not(s2):
            return _alpha_walk(s1, s2, envf, envg, gmap)
        case And(l1, r1), And(l2, r2):
            return (_alpha_walk(l1, l2, envf, envg, gmap)
                    and _alpha_walk(r1, r2, envf, envg, gmap))
        case Or(l1, r1), Or(l2, r2):
            return (_alpha_walk(l1, l2, envf, envg, gmap)
                    and _alpha_walk(r1, r2, envf, envg, gmap))
        case (Forall(v1, b1), Forall(v2, b2)) | (Exists(v1, b1), Exists(v2, b2)):
            lvl = len(envf)
            return _alpha_walk(b1, b2, {**envf, v1: lvl}, {**envg, v2: lvl}, gmap)
    return False


def alpha_equal(f: Formula, g: Formula) -> bool:
    """Equal up to renaming of bound variables."""
    return _alpha_walk(f, g, {}, {}, None)


def variant_equal_gamma(f: Formula, g: Formula) -> bool:
    """Equal up to renaming of bound variables plus a bijective renaming of
    free instantiation variables."""
    return _alpha_walk(f, g, {}, {}, {})


def ac_flatten_equal(f: Formula, g: Formula) -> bool:
    """Equal after flattening nested And / Or into multisets."""

    def norm(h):
        match h:
            case And():
                parts = []
                stack = [h]
                while stack:
                    x = stack.pop()
                    if isinstance(x, And):
                        stack.append(x.right)
                        stack.append(x.left)
                    else:
                        parts.append(norm(x))
                return ("and",) + tuple(sorted(parts))
            case Or():
                parts = []
                stack = [h]
                while stack:
                    x = stack.pop()
                    if isinstance(x, Or):
                        stack.append(x.right)
                        stack.append(x.left)
                    else:
                        parts.append(norm(x))
                return ("or",) + tuple(sorted(parts))
            case Not(s):
                return ("not", norm(s))
            case Atom():
                return ("atom", print_formula(h))
            case Forall(v, b) | Exists(v, b):
                kind = "forall" if isinstance(h, Forall) else "exists"
                return (kind, v, norm(b))

    return norm(f) == norm(g)


# ---------------------------------------------------------------------------
# name view helpers

def promote_skolem_apps(f: Formula) -> Formula:
    """Turn every maximal Skolem-headed application into a Skolem-named
    variable.  Used when reading formulas of a derivation that works in the
    Skolem-name view, where such terms stand for variables."""

    def conv(t):
        match t:
            case App(_, True, _):
                return SkolemNamedVar(t)
            case App(sym, sk, args):
                if not args:
                    return t
                return App(sym, sk, tuple(conv(a) for a in args))
            case _:
                return t

    def walk(g):
        match g:
            case Atom(p, args):
                return Atom(p, tuple(conv(a) for a in args))
            case Not(s):
                return Not(walk(s))
            case And(l, r):
                return And(walk(l), walk(r))
            case Or(l, r):
                return Or(walk(l), walk(r))
            case Forall(v, b):
                return Forall(v, walk(b))
            case Exists(v, b):
                return Exists(v, walk(b))

    return walk(f)


def unname(x):
    """Replace every Skolem-named variable by its encoded term (terms and
    formulas)."""
    match x:
        case SkolemNamedVar(encoded):
            return unname(encoded)
        case Var() | GammaVar():
            return x
        case App(sym, sk, args):
            return App(sym, sk, tuple(unname(a) for a in args))
        case Atom(p, args):
            return Atom(p, tuple(unname(a) for a in args))
        case Not(s):
            return Not(unname(s))
        case And(l, r):
            return And(unname(l), unname(r))
        case Or(l, r):
            return Or(unname(l), unname(r))
        case Forall(v, b):
            return Forall(v, unname(b))
        case Exists(v, b):
            return Exists(v, unname(b))


# ---------------------------------------------------------------------------
# signature

@dataclass
class Signature:
    functions: dict[str, tuple[int, bool]]  # name -> (arity, skolem flag)
    predicates: dict[str, int]
    free_vars: list[str]   # plain free variable names, first occurrence order
    gamma_vars: list[str]  # free instantiation variable names (bare)
    uses_dot: bool


def collect_signature(f: Formula) -> Signature:
    funcs: dict[str, tuple[int, bool]] = {}
    preds: dict[str, int] = {}
    fvars: list[str] = []
    gvars: list[str] = []
    dot = False

    def walk_term(t, bound):
        nonlocal dot
        match t:
            case Var(name):
                if name not in bound and name not in fvars:
                    fvars.append(name)
            case GammaVar(name):
                if name not in gvars:
                    gvars.append(name)
            case SkolemNamedVar(_):
                nm = print_term(t)
                if nm not in bound and nm not in fvars:
                    fvars.append(nm)
            case App(sym, sk, args):
                if sym == "@dot":
                    dot = True
                else:
                    funcs[sym] = (len(args), sk)
                for a in args:
                    walk_term(a, bound)

    def walk(g, bound):
        match g:
            case Atom(p, args):
                preds[p] = len(args)
                for a in args:
                    walk_term(a, bound)
            case Not(s):
                walk(s, bound)
            case And(l, r) | Or(l, r):
                walk(l, bound)
                walk(r, bound)
            case Forall(v, b) | Exists(v, b):
                walk(b, bound | {v})

    walk(f, frozenset())
    return Signature(funcs, preds, fvars, gvars, dot)


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<gvar>\?[a-z][a-zA-Z0-9_]*)
  | (?P<dot_const>@dot)
  | (?P<kw>\b(?:forall|exists)\b)
  | (?P<ident>[a-z][a-zA-Z0-9_]*)
  | (?P<punct>[().,~&|<])
""", re.VERBOSE)


class _Tokens:
    def __init__(self, text):
        self.toks = []
        line, col = 1, 1
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", line, col)
            kind = m.lastgroup
            val = m.group()
            if kind != "ws":
                self.toks.append((kind, val, line, col))
            nl = val.count("\n")
            if nl:
                line += nl
                col = len(val) - val.rfind("\n")
            else:
                col += len(val)
            pos = m.end()
        self.toks.append(("eof", "", line, col))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, val):
        kind, v, line, col = self.next()
        if v != val:
            raise ParseError(f"expected {val!r}, found {v or 'end of input'!r}", line, col)

    def error(self, msg):
        _, v, line, col = self.peek()
        raise ParseError(f"{msg}, found {v or 'end of input'!r}", line, col)


def _parse_term(ts: _Tokens) -> Term:
    kind, val, line, col = ts.next()
    if kind == "gvar":
        return GammaVar(val[1:])
    if kind == "dot_const":
        return DOT
    if kind == "ident":
        if ts.peek()[1] == "(":
            ts.next()
            args = [_parse_term(ts)]
            while ts.peek()[1] == ",":
                ts.next()
                args.append(_parse_term(ts))
            ts.expect(")")
            return App(val, is_skolem_symbol(val), tuple(args))
        if is_skolem_symbol(val):
            return App(val, True, ())
        return Var(val)
    raise ParseError(f"expected a term, found {val or 'end of input'!r}", line, col)


def _bind_named(body: Formula, name: str, var: Term) -> Formula:
    """Replace, inside the scope of a Skolem-named binder, every term that
    prints as the binder name by the bound variable itself."""

    def conv(t):
        if print_term(t) == name:
            return var
        if isinstance(t, App) and t.args:
            return App(t.sym, t.skolem, tuple(conv(a) for a in t.args))
        return t

    def walk(g):
        match g:
            case Atom(p, args):
                return Atom(p, tuple(conv(a) for a in args))
            case Not(s):
                return Not(walk(s))
            case And(l, r):
                return And(walk(l), walk(r))
            case Or(l, r):
                return Or(walk(l), walk(r))
            case Forall(v, b):
                return Forall(v, b if v == name else walk(b))
            case Exists(v, b):
                return Exists(v, b if v == name else walk(b))

    return walk(body)


def _parse_unary(ts: _Tokens) -> Formula:
    kind, val, line, col = ts.peek()
    if val == "~":
        ts.next()
        return Not(_parse_unary(ts))
    if kind == "kw":
        ts.next()
        bkind, bval, bline, bcol = ts.peek()
        if bkind not in ("ident", "gvar"):
            ts.error("expected a binder name")
        if bkind == "gvar":
            raise ParseError("instantiation variables cannot be bound", bline, bcol)
        binder_term = _parse_term(ts)
        if isinstance(binder_term, Var):
            name = binder_term.name
            var = None
        elif isinstance(binder_term, App) and binder_term.skolem:
            name = print_term(binder_term)
            var = SkolemNamedVar(binder_term)
        else:
            raise ParseError(f"bad binder {print_term(binder_term)!r}", bline, bcol)
        ts.expect(".")
        body = _parse_implication(ts)
        if var is not None:
            body = _bind_named(body, name, var)
        return Forall(name, body) if val == "forall" else Exists(name, body)
    if val == "(":
        ts.next()
        f = _parse_implication(ts)
        ts.expect(")")
        return f
    if kind in ("ident", "gvar", "dot_const"):
        t = _parse_term(ts)
        if ts.peek()[1] == "<":
            ts.next()
            rhs = _parse_term(ts)
            return Atom("<", (t, rhs))
        match t:
            case App(sym, False, args) if args:
                return Atom(sym, args)
            case Var(name):
                return Atom(name, ())
        raise ParseError(f"{print_term(t)!r} is not a formula", line, col)
    ts.error("expected a formula")


def _parse_conjunction(ts):
    f = _parse_unary(ts)
    while ts.peek()[1] == "&":
        ts.next()
        f = And(f, _parse_unary(ts))
    return f


def _parse_disjunction(ts):
    f = _parse_conjunction(ts)
    while ts.peek()[1] == "|":
        ts.next()
        f = Or(f, _parse_conjunction(ts))
    return f


def _parse_implication(ts):
    f = _parse_disjunction(ts)
    while ts.peek()[1] == "->":
        ts.next()
        f = Or(Not(f), _parse_disjunction(ts))
    return f


def _check_arities(f: Formula):
    funcs: dict[str, int] = {}
    preds: dict[str, int] = {}

    def seen(table, other, name, arity, what):
        if name in other:
            raise ParseError(f"{name!r} used both as function and predicate")
        if table.setdefault(name, arity) != arity:
            raise ParseError(
                f"{what} {name!r} used with arities {table[name]} and {arity}")

    def walk_term(t):
        match t:
            case App(sym, _, args) if sym != "@dot":
                seen(funcs, preds, sym, len(args), "function")
                for a in args:
                    walk_term(a)
            case SkolemNamedVar(encoded):
                walk_term(encoded)

    def walk(g):
        match g:
            case Atom(p, args):
                if p != "<":
                    seen(preds, funcs, p, len(args), "predicate")
                for a in args:
                    walk_term(a)
            case Not(s):
                walk(s)
            case And(l, r) | Or(l, r):
                walk(l)
                walk(r)
            case Forall(_, b) | Exists(_, b):
                walk(b)

    walk(f)


def parse_formula(text: str) -> Formula:
    ts = _Tokens(text)
    f = _parse_implication(ts)
    if ts.peek()[0] != "eof":
        ts.error("trailing input")
    _check_arities(f)
    return f


def parse_term(text: str) -> Term:
    ts = _Tokens(text)
    t = _parse_term(ts)
    if ts.peek()[0] != "eof":
        ts.error("trailing input")
    return t
