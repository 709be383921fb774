"""Deciding the finite-expansion property and constructing derivations.

The pipeline from a first-order formula to a checkable derivation:

  * ``property_c`` Skolemizes a formula (outer or delta-plus-plus), expands
    it over the height-bounded term domain of a given order, and asks the
    tautology checker; a selection tree restricts the expansion to chosen
    witnesses, which can only confirm, never refute.
  * ``min_order`` scans orders upward for the least one that works.
  * ``construct_derivation`` turns a confirmed order plus a selection into
    a derivation in the single-premise calculus: name the removed-quantifier
    variables by their Skolem terms, duplicate quantifiers once per chosen
    witness, then remove quantifiers in height stages; read backward, the
    recorded steps rebuild the formula from its expansion.
  * ``construct_fv_derivation`` does the free-variable analogue: witnesses
    become placeholder variables, the removed quantifiers become registry
    applications, and the witness substitution comes out alongside.
  * ``derivation_order_bound`` reads an order back off a checked derivation.
  * ``demo_false_lemma`` and ``demo_upper_bound`` run the two showcase
    computations end to end, recomputing every verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

from .expansion import (
    DEFAULT_BUDGET,
    LEAF,
    BudgetError,
    ChampFini,
    SelAnd,
    SelLeaf,
    SelNot,
    SelOr,
    SelQuant,
    Selection,
    build_sub_expansion,
    champ,
    expand,
    expansion_leaf_count,
    expansion_node_count,
    parse_selection,
    selection_within,
)
from .kernel import (
    DELTA_MINUS,
    DELTAPP,
    GAMMA_QUANT,
    GAMMA_SIMP,
    RENAME,
    RESTRICTED_GAMMA,
    Derivation,
    RuleStep,
    apply_passage,
    check_derivation,
)
from .skolem import (
    SkolemRegistry,
    canonical_key,
    deltapp_skolemize,
    nameify_term,
    outer_skolemize,
)
from .syntax import (
    And,
    App,
    Atom,
    Exists,
    Forall,
    Formula,
    FormulaError,
    GammaVar,
    Not,
    Or,
    Quant,
    SkolemNamedVar,
    Term,
    Var,
    all_names,
    classify_quantifier,
    collect_signature,
    free_gamma_vars,
    fresh_name,
    is_quantifier_free,
    parse_formula,
    parse_term,
    print_formula,
    print_term,
    quantifier_positions,
    rectify,
    replace_at,
    subformula_at,
    substitute,
    substitute_term,
    term_free_names,
    term_height,
    var_for_name,
)
from .taut import is_tautology


class ConstructError(FormulaError):
    pass


# ---------------------------------------------------------------------------
# the finite-expansion property

@dataclass(frozen=True)
class PropertyCResult:
    """Outcome of one expansion check.

    ``status`` is three-valued: a selection that fails to produce a
    tautology proves nothing about the full expansion, so it reports
    ``inconclusive`` rather than ``fails``."""

    status: str                  # "holds" | "fails" | "inconclusive"
    order: int
    star: bool
    herbrand_heights: bool
    witness: str                 # "full-expansion" | "sub-expansion selection" | "none"
    skolemized: Formula
    term_count: int = 0
    node_count: int | None = None
    tautology: bool | None = None
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.status == "holds"

    @property
    def kind(self) -> str:
        return "C*" if self.star else "C"


def _as_selection(sel) -> Selection:
    return parse_selection(sel) if isinstance(sel, str) else sel


def property_c(a: Formula, n: int, star: bool = False, sel=None,
               herbrand_heights: bool = False, budget: int = DEFAULT_BUDGET,
               registry: SkolemRegistry | None = None) -> PropertyCResult:
    """Does the order-n expansion of a's Skolemized form come out
    tautological?  With a selection, only the chosen sub-expansion is
    built; a positive answer is then still conclusive, a negative one is
    not."""
    if n < 1:
        raise ConstructError(f"the order must be at least 1, got {n}")
    a_r = rectify(a)
    if star:
        reg = registry if registry is not None else SkolemRegistry()
        sk = deltapp_skolemize(a_r, reg)
    else:
        sk = outer_skolemize(a_r)
    ch = champ(sk, n, herbrand=herbrand_heights, budget=budget)
    base = dict(order=n, star=star, herbrand_heights=herbrand_heights,
                skolemized=sk, term_count=len(ch.terms))
    if sel is not None:
        sel_tree = _as_selection(sel)
        ok, offenders = selection_within(sel_tree, ch)
        if not ok:
            shown = ", ".join(print_term(t) for t in offenders[:5])
            raise ConstructError(
                f"the selection uses terms outside the order-{n} domain: {shown}")
        e = build_sub_expansion(sk, sel_tree)
        taut = is_tautology(e)
        if taut:
            return PropertyCResult("holds", witness="sub-expansion selection",
                                   tautology=True, **base)
        return PropertyCResult(
            "inconclusive", witness="none", tautology=False,
            detail="the chosen sub-expansion is not a tautology; "
                   "the full expansion may still be", **base)
    if not ch.terms:
        if is_quantifier_free(sk):
            taut = is_tautology(sk)
            return PropertyCResult(
                "holds" if taut else "fails",
                witness="full-expansion" if taut else "none", tautology=taut,
                detail="empty term domain; the quantifier-free form itself decides",
                **base)
        return PropertyCResult(
            "fails", witness="none",
            detail=f"no terms of height below {n} but quantifiers remain", **base)
    count = expansion_node_count(sk, len(ch.terms))
    if count > budget:
        raise BudgetError(
            f"the order-{n} expansion has {count} formula nodes, "
            f"over the size guard of {budget}")
    e = expand(sk, ch, budget=budget)
    taut = is_tautology(e)
    return PropertyCResult("holds" if taut else "fails",
                           witness="full-expansion" if taut else "none",
                           tautology=taut, node_count=count, **base)


def min_order(a: Formula, star: bool = False, n_max: int = 8,
              herbrand_heights: bool = False, budget: int = DEFAULT_BUDGET,
              registry: SkolemRegistry | None = None) -> int | None:
    """Least order up to n_max at which the full expansion is tautological,
    or None.  Selections play no part here; this is the search the
    round-trip theorems quantify over."""
    reg = registry
    if star and reg is None:
        reg = SkolemRegistry()
    for n in range(1, n_max + 1):
        r = property_c(a, n, star=star, herbrand_heights=herbrand_heights,
                       budget=budget, registry=reg)
        if r.holds:
            return n
    return None


# ---------------------------------------------------------------------------
# duplicating quantifiers along a selection

@dataclass
class _CopyState:
    used: set[str]               # every name to steer clear of, grows with claims
    sym_map: dict[str, str]
    named: bool
    claimed: set[str] = field(default_factory=set)   # binder names already placed
    plan: dict[str, Term] = field(default_factory=dict)
    original: dict[str, str] = field(default_factory=dict)
    copies: list[tuple[tuple[int, ...], int]] = field(default_factory=list)

    def claim(self, v: str, first: bool) -> str:
        """v itself for the first placement of this binder, a fresh variant
        for every further copy."""
        name = v if first and v not in self.claimed else fresh_name(v, self.used)
        self.used.add(name)
        self.claimed.add(name)
        return name


def _is_gamma(kind: str, sign: int) -> bool:
    return (kind == "exists") == (sign > 0)


def _chain_offset(j: int, k: int) -> tuple[int, ...]:
    """Position of copy j inside a left-nested chain of k copies."""
    if k == 1:
        return ()
    return (0,) * (k - 1 - j) + ((1,) if j > 0 else ())


def _copy_pass(f: Formula, sel: Selection, sign: int, path: tuple[int, ...],
               env: dict[str, Term], gammas: list[str], st: _CopyState) -> Formula:
    """Rebuild f with one copy of every quantifier whose selection lists a
    witness per copy; in named mode the removed-quantifier variables are
    spelled as their Skolem terms on the way down."""
    match f:
        case Atom(p, args):
            if not isinstance(sel, SelLeaf):
                raise ConstructError(
                    f"selection shape mismatch: choices given for the atom {p}")
            return Atom(p, tuple(substitute_term(t, env) for t in args))
        case Not(s):
            if isinstance(sel, SelLeaf):
                inner = LEAF
            elif isinstance(sel, SelNot):
                inner = sel.sub
            else:
                raise ConstructError("selection shape mismatch under a negation")
            return Not(_copy_pass(s, inner, -sign, path + (0,), env, gammas, st))
        case And(l, r) | Or(l, r):
            junction = And if isinstance(f, And) else Or
            want = SelAnd if isinstance(f, And) else SelOr
            if isinstance(sel, SelLeaf):
                sl, sr = LEAF, LEAF
            elif isinstance(sel, want):
                sl, sr = sel.left, sel.right
            else:
                raise ConstructError("selection shape mismatch at a junction")
            return junction(
                _copy_pass(l, sl, sign, path + (0,), env, gammas, st),
                _copy_pass(r, sr, sign, path + (1,), env, gammas, st))
        case Forall(v, b) | Exists(v, b):
            kind = "forall" if isinstance(f, Forall) else "exists"
            make = Forall if isinstance(f, Forall) else Exists
            if _is_gamma(kind, sign):
                if isinstance(sel, SelLeaf):
                    raise ConstructError(
                        f"the selection chooses no witness terms for {kind} {v}")
                if not isinstance(sel, SelQuant) or sel.kind != kind or sel.var != v:
                    raise ConstructError(
                        f"selection shape mismatch at {kind} {v}")
                if len(set(sel.terms)) != len(sel.terms):
                    raise ConstructError(
                        f"the witness terms chosen for {v} must be pairwise distinct")
                if len(sel.branches) != len(sel.terms):
                    raise ConstructError(
                        f"need one selection branch per witness term for {v}")
                k = len(sel.terms)
                nodes = []
                for j, (t, br) in enumerate(zip(sel.terms, sel.branches)):
                    name = st.claim(v, first=j == 0)
                    copy_path = path + _chain_offset(j, k)
                    body = _copy_pass(b, br, sign, copy_path + (0,),
                                      env | {v: Var(name)}, gammas + [name], st)
                    st.plan[name] = nameify_term(t) if st.named else t
                    nodes.append(make(name, body))
                if k > 1:
                    st.copies.append((path, k))
                junction = And if sign < 0 else Or
                return reduce(junction, nodes)
            if st.named:
                sym = st.sym_map[v]
                enc = App(sym, True, tuple(Var(g) for g in gammas))
                name = print_term(enc)
                st.used.add(name)
                st.original[name] = v
                body = _copy_pass(b, sel, sign, path + (0,),
                                  env | {v: SkolemNamedVar(enc)}, gammas, st)
                return make(name, body)
            name = st.claim(v, first=True)
            body = _copy_pass(b, sel, sign, path + (0,),
                              env | {v: Var(name)}, gammas, st)
            return make(name, body)
    raise ConstructError("unreachable formula shape")


def _full_selection(a_r: Formula, terms: tuple[Term, ...]) -> Selection:
    """The selection that chooses every domain term at every removable
    quantifier: duplicating along it rebuilds the full expansion."""

    def walk(g: Formula, sign: int) -> Selection:
        match g:
            case Atom():
                return LEAF
            case Not(s):
                return SelNot(walk(s, -sign))
            case And(l, r):
                return SelAnd(walk(l, sign), walk(r, sign))
            case Or(l, r):
                return SelOr(walk(l, sign), walk(r, sign))
            case Forall(v, b) | Exists(v, b):
                kind = "forall" if isinstance(g, Forall) else "exists"
                sub = walk(b, sign)
                if _is_gamma(kind, sign):
                    return SelQuant(kind, v, tuple(terms),
                                    tuple(sub for _ in terms))
                return sub

    return walk(a_r, 1)


# ---------------------------------------------------------------------------
# staged quantifier removal

@dataclass(frozen=True)
class PlanEntry:
    stage: int
    kind: str                    # "gamma" | "delta"
    quant: str                   # "forall" | "exists"
    var: str                     # variable as spelled at removal time
    path: tuple[int, ...]        # position at removal time
    term: Term | None = None     # witness, removable quantifiers only


@dataclass(frozen=True)
class Procedure1Plan:
    order: int
    entries: tuple[PlanEntry, ...]

    def stage(self, i: int) -> tuple[PlanEntry, ...]:
        return tuple(e for e in self.entries if e.stage == i)


def _encoded_binder(name: str) -> Term | None:
    v = var_for_name(name)
    return v.encoded if isinstance(v, SkolemNamedVar) else None


def _execute_stages(q: Formula, plan: dict[str, Term], n: int):
    """Remove quantifiers from q in stages 1..n: at stage i, witnesses of
    height below i go first, then every reachable Skolem-named quantifier,
    repeating until the stage adds nothing.  Returns the quantifier-free
    residue, the stage log, and the rule steps in removal order."""
    for v, t in plan.items():
        if term_height(t) >= n:
            raise ConstructError(
                f"the witness {print_term(t)} for {v} has height "
                f"{term_height(t)}, beyond the order-{n} ceiling of {n - 1}")
    cur = q
    entries: list[PlanEntry] = []
    steps: list[RuleStep] = []

    def first(want_kind: str, stage: int):
        for path, kind, var in quantifier_positions(cur):
            _, klass, accessible = classify_quantifier(cur, path)
            if not accessible or klass != want_kind:
                continue
            if want_kind == "gamma" and term_height(plan[var]) >= stage:
                continue
            return path, kind, var
        return None

    for i in range(1, n + 1):
        while True:
            progressed = False
            while (hit := first("gamma", i)) is not None:
                path, kind, var = hit
                t = plan[var]
                node = subformula_at(cur, path)
                for rel, _, rvar in quantifier_positions(node.body):
                    enc = _encoded_binder(rvar)
                    if enc is None or var not in term_free_names(enc):
                        continue
                    new_name = print_term(substitute_term(parse_term(rvar), {var: t}))
                    dpath = path + (0,) + rel
                    steps.append(RuleStep(RENAME, path=dpath, var=new_name, new=rvar))
                    dnode = subformula_at(cur, dpath)
                    dmake = Forall if isinstance(dnode, Forall) else Exists
                    cur = replace_at(cur, dpath, dmake(
                        new_name,
                        substitute(dnode.body, {rvar: var_for_name(new_name)})))
                node = subformula_at(cur, path)
                entries.append(PlanEntry(i, "gamma", kind, var, path, t))
                steps.append(RuleStep(GAMMA_QUANT, path=path, quant=kind,
                                      var=var, scope=node.body, term=t))
                cur = replace_at(cur, path, substitute(node.body, {var: t}))
                progressed = True
            while (hit := first("delta", i)) is not None:
                path, kind, var = hit
                node = subformula_at(cur, path)
                entries.append(PlanEntry(i, "delta", kind, var, path))
                steps.append(RuleStep(DELTA_MINUS, path=path, quant=kind, var=var))
                cur = replace_at(cur, path, node.body)
                progressed = True
            if not progressed:
                break
    if not is_quantifier_free(cur):
        left = ", ".join(v for _, _, v in quantifier_positions(cur))
        raise ConstructError(f"quantifiers remain after stage {n}: {left}")
    return cur, tuple(entries), steps


def _match_plan(f: Formula, sel: Selection) -> dict[str, Term]:
    """Read the witness plan back off an already-duplicated named form by
    walking it alongside the selection that shaped it."""
    plan: dict[str, Term] = {}

    def chain(g: Formula, s: SelQuant, sign: int):
        k = len(s.terms)
        junction = And if sign < 0 else Or
        rights = []
        cur = g
        for _ in range(k - 1):
            if not isinstance(cur, junction):
                raise ConstructError(
                    f"expected a {k}-copy chain for {s.var}, found "
                    f"{print_formula(cur)[:60]}")
            rights.append(cur.right)
            cur = cur.left
        copies = [cur] + rights[::-1]
        branches = s.branches if len(s.branches) == k else tuple(s.branches[0] for _ in range(k))
        for copy, t, br in zip(copies, s.terms, branches):
            if not isinstance(copy, Quant):
                raise ConstructError(f"copy of {s.var} is not a quantifier")
            kind = "forall" if isinstance(copy, Forall) else "exists"
            if kind != s.kind:
                raise ConstructError(f"copy of {s.var} has the wrong quantifier kind")
            plan[copy.var] = nameify_term(t)
            walk(copy.body, br, sign)

    def walk(g: Formula, s: Selection, sign: int):
        if isinstance(s, SelQuant):
            if isinstance(g, Quant):
                kind = "forall" if isinstance(g, Forall) else "exists"
                if not _is_gamma(kind, sign):
                    walk(g.body, s, sign)
                    return
            chain(g, s, sign)
            return
        match g:
            case Atom():
                return
            case Not(sub):
                walk(sub, s.sub if isinstance(s, SelNot) else LEAF, -sign)
            case And(l, r):
                sl, sr = (s.left, s.right) if isinstance(s, SelAnd) else (LEAF, LEAF)
                walk(l, sl, sign)
                walk(r, sr, sign)
            case Or(l, r):
                sl, sr = (s.left, s.right) if isinstance(s, SelOr) else (LEAF, LEAF)
                walk(l, sl, sign)
                walk(r, sr, sign)
            case Forall(v, b) | Exists(v, b):
                kind = "forall" if isinstance(g, Forall) else "exists"
                if _is_gamma(kind, sign):
                    raise ConstructError(
                        f"the selection chooses no witness terms for {kind} {v}")
                walk(b, s, sign)

    walk(f, sel, 1)
    return plan


def procedure1_order(f_named: Formula, sel, n: int) -> Procedure1Plan:
    """The staged removal plan for an already-duplicated named form: which
    quantifier falls at which stage, in removal order."""
    sel_tree = _as_selection(sel)
    plan = _match_plan(f_named, sel_tree)
    _, entries, _ = _execute_stages(f_named, plan, n)
    return Procedure1Plan(n, entries)


# ---------------------------------------------------------------------------
# merging the copies and restoring the names

def _merge_chains(q: Formula, copies: list[tuple[tuple[int, ...], int]]):
    """Deduction steps that collapse every copy chain back to its first
    copy, innermost chains first; the discarded copies are variants of the
    kept ones by construction."""
    steps: list[RuleStep] = []
    cur = q
    for path, k in sorted(copies, key=lambda e: (-len(e[0]), e[0])):
        for depth in range(k - 2, -1, -1):
            p = path + (0,) * depth
            node = subformula_at(cur, p)
            steps.append(RuleStep(GAMMA_SIMP, path=p, keep="left"))
            cur = replace_at(cur, p, node.left)
    return cur, steps


def _final_renames(merged: Formula, original: dict[str, str]):
    """Deduction steps that give every Skolem-term-named quantifier its
    source variable back."""
    steps = [RuleStep(RENAME, path=path, var=var, new=original[var])
             for path, _, var in quantifier_positions(merged)
             if _encoded_binder(var) is not None]
    cur = merged
    for s in steps:
        node = subformula_at(cur, s.path)
        make = Forall if isinstance(node, Forall) else Exists
        cur = replace_at(cur, s.path,
                         make(s.new, substitute(node.body, {s.var: var_for_name(s.new)})))
    return cur, steps


# ---------------------------------------------------------------------------
# the two constructions

def construct_derivation(a: Formula, n: int, sel=None,
                         budget: int = DEFAULT_BUDGET) -> Derivation:
    """A checked derivation of a from its order-n expansion (or from the
    chosen sub-expansion).  The reductive reading: rename removed-quantifier
    variables to their Skolem terms, duplicate per witness, remove in
    stages; the recorded steps run the other way, from the tautology up to
    a."""
    a_r = rectify(a)
    sel_tree = None if sel is None else _as_selection(sel)
    pre = property_c(a_r, n, star=False, sel=sel_tree, budget=budget)
    if not pre.holds:
        raise ConstructError(
            f"order {n} is not established for this formula ({pre.status}"
            f"{': ' + pre.detail if pre.detail else ''})")
    sym_map: dict[str, str] = {}
    f_sk = outer_skolemize(a_r, record=sym_map)
    if sel_tree is None:
        ch = champ(f_sk, n, budget=budget)
        sel_tree = _full_selection(a_r, ch.terms)
    st = _CopyState(used=set(all_names(a_r)) | set(sym_map.values()),
                    sym_map=sym_map, named=True)
    q = _copy_pass(a_r, sel_tree, 1, (), {}, [], st)
    axiom, _, removal = _execute_stages(q, st.plan, n)
    merged, merge_steps = _merge_chains(q, st.copies)
    restored, rename_steps = _final_renames(merged, st.original)
    if restored != a_r:
        raise ConstructError("internal: the merged form does not restore the "
                             "source formula")
    steps = tuple(reversed(removal)) + tuple(merge_steps) + tuple(rename_steps)
    d = Derivation("heijenoort", axiom, steps, a_r)
    report = check_derivation(d)
    if not report.ok:
        raise ConstructError(
            f"internal: constructed derivation rejected at step "
            f"{report.step_index}: {report.error}: {report.error_message}")
    if not report.axiom_tautology:
        raise ConstructError("internal: the axiom is not a tautology")
    return d


def construct_fv_derivation(a: Formula, n: int, sel=None,
                            registry: SkolemRegistry | None = None,
                            budget: int = DEFAULT_BUDGET):
    """Free-variable variant: returns (derivation, B, sigma) where B is the
    quantifier-free opening line over placeholder variables and sigma sends
    each placeholder to its chosen witness, with every witness below the
    order in height.

    Quantifiers are processed outside-in, and a removable quantifier is
    duplicated only after everything above it is gone; each registry scope
    is therefore keyed exactly as the Skolemization pass keyed it, so the
    opening line carries the same symbols as the starred form and the
    witness substitution recovers the chosen sub-expansion."""
    a_r = rectify(a)
    if registry is None:
        registry = SkolemRegistry()
    sel_tree = None if sel is None else _as_selection(sel)
    pre = property_c(a_r, n, star=True, sel=sel_tree, budget=budget,
                     registry=registry)
    if not pre.holds:
        raise ConstructError(
            f"order {n} (starred) is not established for this formula "
            f"({pre.status}{': ' + pre.detail if pre.detail else ''})")
    if sel_tree is None:
        ch = champ(pre.skolemized, n, budget=budget)
        sel_tree = _full_selection(a_r, ch.terms)
    avoid = set(collect_signature(a_r).functions)
    used = set(all_names(a_r))
    claimed: set[str] = set()
    source: dict[str, str] = {}  # copy binder -> binder it is a variant of
    sigma: dict[str, Term] = {}
    down: list[RuleStep] = []    # recorded top-down, replayed in reverse

    def claim(v: str, first: bool) -> str:
        name = v if first and v not in claimed else fresh_name(v, used)
        used.add(name)
        claimed.add(name)
        return name

    def alpha_copy(g: Formula, ren: dict[str, Term]) -> Formula:
        match g:
            case Atom(p, args):
                return Atom(p, tuple(substitute_term(t, ren) for t in args))
            case Not(sub):
                return Not(alpha_copy(sub, ren))
            case And(l, r):
                return And(alpha_copy(l, ren), alpha_copy(r, ren))
            case Or(l, r):
                return Or(alpha_copy(l, ren), alpha_copy(r, ren))
            case Forall(v, bd) | Exists(v, bd):
                make = Forall if isinstance(g, Forall) else Exists
                name = claim(v, first=False)
                source[name] = source.get(v, v)
                return make(name, alpha_copy(bd, ren | {v: Var(name)}))
        raise ConstructError("unreachable formula shape")

    def strip(g: Formula, s: Selection, sign: int,
              path: tuple[int, ...]) -> Formula:
        match g:
            case Atom(p, _):
                if not isinstance(s, SelLeaf):
                    raise ConstructError(
                        f"selection shape mismatch: choices given for the "
                        f"atom {p}")
                return g
            case Not(sub):
                if isinstance(s, SelLeaf):
                    inner = LEAF
                elif isinstance(s, SelNot):
                    inner = s.sub
                else:
                    raise ConstructError(
                        "selection shape mismatch under a negation")
                return Not(strip(sub, inner, -sign, path + (0,)))
            case And(l, r) | Or(l, r):
                junction = And if isinstance(g, And) else Or
                want = SelAnd if isinstance(g, And) else SelOr
                if isinstance(s, SelLeaf):
                    sl, sr = LEAF, LEAF
                elif isinstance(s, want):
                    sl, sr = s.left, s.right
                else:
                    raise ConstructError(
                        "selection shape mismatch at a junction")
                return junction(strip(l, sl, sign, path + (0,)),
                                strip(r, sr, sign, path + (1,)))
            case Forall(v, bd) | Exists(v, bd):
                kind = "forall" if isinstance(g, Forall) else "exists"
                src = source.get(v, v)
                if not _is_gamma(kind, sign):
                    gs = free_gamma_vars(g)
                    key = canonical_key(g, [GammaVar(x) for x in gs])
                    sym = registry.bind(key, src, len(gs), avoid)
                    down.append(RuleStep(DELTAPP, path=path, quant=kind,
                                         var=v, scope=bd))
                    repl = App(sym, True, tuple(GammaVar(x) for x in gs))
                    return strip(substitute(bd, {v: repl}), s, sign, path)
                if isinstance(s, SelLeaf):
                    raise ConstructError(
                        f"the selection chooses no witness terms for {kind} {v}")
                if not isinstance(s, SelQuant) or s.kind != kind or s.var != src:
                    raise ConstructError(
                        f"selection shape mismatch at {kind} {v}")
                if len(set(s.terms)) != len(s.terms):
                    raise ConstructError(
                        f"the witness terms chosen for {v} must be pairwise "
                        f"distinct")
                if len(s.branches) != len(s.terms):
                    raise ConstructError(
                        f"need one selection branch per witness term for {v}")
                k = len(s.terms)
                claim(v, first=True)
                copies = [g] + [alpha_copy(g, {}) for _ in range(k - 1)]
                for depth in range(k - 1):
                    down.append(RuleStep(GAMMA_SIMP, path=path + (0,) * depth,
                                         keep="left"))
                parts = []
                for j, (copy, t, br) in enumerate(zip(copies, s.terms,
                                                      s.branches)):
                    cpath = path + _chain_offset(j, k)
                    down.append(RuleStep(RESTRICTED_GAMMA, path=cpath,
                                         quant=kind, var=copy.var,
                                         scope=copy.body,
                                         term=GammaVar(copy.var)))
                    sigma["?" + copy.var] = t
                    parts.append(strip(
                        substitute(copy.body, {copy.var: GammaVar(copy.var)}),
                        br, sign, cpath))
                junction = And if sign < 0 else Or
                return reduce(junction, parts)
        raise ConstructError("unreachable formula shape")

    b = strip(a_r, sel_tree, 1, ())
    d = Derivation("free-variable", b, tuple(reversed(down)), a_r)
    report = check_derivation(d, registry)
    if not report.ok:
        raise ConstructError(
            f"internal: constructed free-variable derivation rejected at step "
            f"{report.step_index}: {report.error}: {report.error_message}")
    return d, b, sigma


# ---------------------------------------------------------------------------
# order bounds

@dataclass(frozen=True)
class OrderBound:
    value: int
    witnesses: tuple[Term, ...]


def derivation_order_bound(d: Derivation) -> OrderBound:
    """One plus the summed heights of all witness terms: an order at which
    the expansion property must hold for the end formula."""
    report = check_derivation(d)
    if not report.ok:
        raise ConstructError(
            f"the derivation is not accepted: {report.error}: "
            f"{report.error_message}")
    if d.mode != "heijenoort":
        raise ConstructError(
            f"order bounds read off single-premise derivations in heijenoort "
            f"mode, not {d.mode}")
    if not report.axiom_tautology:
        raise ConstructError("the axiom is not a sentential tautology")
    witnesses = tuple(report.witnesses)
    return OrderBound(1 + sum(term_height(t) for t in witnesses), witnesses)


def goedel_dreben_bound(n: int, r: int, big_n: int) -> int:
    """Repaired order transfer across one rule of passage: from order n
    over a signature of maximal arity r and big_n domain terms to order
    n * (big_n**r + 1) ** n."""
    if n < 1 or big_n < 1:
        raise ConstructError("the order and the domain size must be at least 1")
    if r < 0:
        raise ConstructError("the maximal arity cannot be negative")
    return n * (big_n ** r + 1) ** n


# ---------------------------------------------------------------------------
# demos

def demo_false_lemma(n_max: int = 6, budget: int = DEFAULT_BUDGET) -> dict:
    """Both counterexamples to order invariance under the rules of passage,
    with every order recomputed: moving a quantifier across a disjunction
    shifts the least workable order, in one direction of height counting or
    in both."""
    drinker = parse_formula("exists a. (~(exists b. p(b)) | p(a))")
    drinker_moved = apply_passage(drinker, (), 6, "antiprenex")
    two = parse_formula("(~(exists b. p(b)) | (exists a. q(a))) | "
                        "((exists x. p(x)) & ~(exists y. q(y)))")
    two_moved = apply_passage(two, (0,), 6, "prenex")
    cases = []
    for label, before, after, direction in (
            ("quantified-disjunct", drinker, drinker_moved, "antiprenex"),
            ("two-disjunct", two, two_moved, "prenex")):
        orders = {}
        for mode_label, hh in (("standard", False), ("herbrand", True)):
            o_before = min_order(before, n_max=n_max, herbrand_heights=hh,
                                 budget=budget)
            o_after = min_order(after, n_max=n_max, herbrand_heights=hh,
                                budget=budget)
            orders[mode_label] = {"before": o_before, "after": o_after,
                                  "preserved": o_before == o_after}
        cases.append({
            "label": label,
            "passage": {"equation": 6, "direction": direction},
            "before": print_formula(before),
            "after": print_formula(after),
            "orders": orders,
        })
    return {
        "cases": cases,
        "order_invariant_standard": all(c["orders"]["standard"]["preserved"]
                                        for c in cases),
        "order_invariant_herbrand": all(c["orders"]["herbrand"]["preserved"]
                                        for c in cases),
    }


UPPER_BOUND_TEXT = (
    "((forall x. forall y. exists m. (x < m & y < m)) & "
    "(forall c. forall b. forall a. ((a < b & b < c) -> a < c))) -> "
    "(forall u. forall v. forall w. exists z. (u < z & v < z & w < z))")

UPPER_BOUND_SELECTION = (
    "(or (not (and (forall x (sk_v sk_u)"
    " (forall y (sk_w) _)"
    " (forall y (sk_m(sk_v,sk_w)) _))"
    " (forall c (sk_m(sk_u,sk_m(sk_v,sk_w)))"
    " (forall b (sk_m(sk_v,sk_w))"
    " (forall a (sk_v sk_w) _)))))"
    " (exists z (sk_m(sk_u,sk_m(sk_v,sk_w))) _))")

DOCUMENTED_DOMAIN_SIZE = 156


def demo_upper_bound(budget: int = DEFAULT_BUDGET) -> dict:
    """The three-element-upper-bound theorem end to end: domain size and
    leaf arithmetic, the selected sub-expansion and its tautology check,
    both constructed derivations rerun through the checker, and the order
    bound read back off the result."""
    a = parse_formula(UPPER_BOUND_TEXT)
    a_r = rectify(a)
    f_sk = outer_skolemize(a_r)
    ch = champ(f_sk, 4, budget=budget)
    n_terms = len(ch.terms)
    sel = parse_selection(UPPER_BOUND_SELECTION)
    sel_ok, _ = selection_within(sel, ch)
    j = build_sub_expansion(f_sk, sel)
    res = property_c(a, 4, star=False, sel=sel, budget=budget)
    full_nodes = expansion_node_count(f_sk, n_terms)

    d = construct_derivation(a, 4, sel, budget=budget)
    report = check_derivation(d)
    counts: dict[str, int] = {}
    for s in d.steps:
        counts[s.tag] = counts.get(s.tag, 0) + 1
    bound = derivation_order_bound(d)

    registry = SkolemRegistry()
    fv_d, b, sigma = construct_fv_derivation(a, 4, sel, registry, budget=budget)
    fv_report = check_derivation(fv_d, registry)
    f_star = deltapp_skolemize(a_r, registry)
    b_instantiated = substitute(b, sigma)
    sub_star = build_sub_expansion(f_star, sel)
    reused = len(fv_report.deltapp_symbols) - len(set(fv_report.deltapp_symbols))

    return {
        "formula": print_formula(a),
        "domain": {
            "order": 4,
            "computed_size": n_terms,
            "documented_size": DOCUMENTED_DOMAIN_SIZE,
            "leaf_count_at_computed_size": expansion_leaf_count(f_sk, n_terms),
            "leaf_count_at_documented_size": expansion_leaf_count(
                f_sk, DOCUMENTED_DOMAIN_SIZE),
            "full_expansion_nodes": full_nodes,
            "full_expansion_within_guard": full_nodes <= budget,
        },
        "sub_expansion": {
            "selection_within_domain": sel_ok,
            "tautology": is_tautology(j),
            "property_holds_at_4": res.holds,
        },
        "derivation": {
            "steps": len(d.steps),
            "step_counts": dict(sorted(counts.items())),
            "accepted": report.ok,
            "axiom_tautology": report.axiom_tautology,
            "axiom_matches_sub_expansion": _same_print(d.axiom, j),
            "order_bound": bound.value,
        },
        "free_variable": {
            "accepted": fv_report.ok,
            "gamma_vars": len(free_gamma_vars(b)),
            "sigma": {k: print_term(t) for k, t in sorted(sigma.items())},
            "instantiation_matches_sub_expansion": _same_print(
                b_instantiated, sub_star),
            "skolem_symbols_reused": reused,
        },
    }


def _same_print(f: Formula, g: Formula) -> bool:
    return print_formula(f) == print_formula(g)
