"""Sites: finite categories with declared covers and a saturated topology.

A cover is a finite family of arrows into a common object.  From declared
covers, ``generate_topology`` computes the smallest system of sieves that
contains them and is closed under the maximal sieve, pullback along every
arrow, and the transitivity rule; the closure runs over the full (finite)
sieve lattice, so no axioms are assumed of the declared covers themselves.

Internally the sheaf theory is sieve-based: a presheaf is a sheaf when for
every covering sieve the restriction map from values to matching families
is a bijection.  A cover-form check (compatible families over the declared
covers, compatibility quantified over spans) is implemented independently;
the two routes agree by construction of the saturation and the test suite
holds them to that.

Sheafification is the plus construction applied exactly twice.  Because a
finite topology is closed under intersection of covering sieves, every
object has a minimal covering sieve and matching-family classes are
canonically labeled by their restriction to it; a naive common-refinement
comparison is kept in the test suite as an oracle.

The same file hosts the epi-family machinery: the strict epimorphic family
check against the targets of a computational-category handle, universality
by base change, the canonical pretopology of a finite category, continuity
of a handle-valued functor, and subcanonicity via its two equivalent
criteria.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence

from .errors import (
    ConsistencyError,
    FactorizationError,
    ResourceBudgetError,
    StructureError,
)
from .fincat import (
    ColimitData,
    ComputationalCategory,
    FinCatHandle,
    FinCategory,
    HandleDiagram,
    HandleFunctor,
    LimitData,
    ValidationReport,
)
from .presheaf import (
    Presheaf,
    PresheafCategory,
    PresheafMorphism,
    compose_presheaf_morphisms,
    is_presheaf_iso,
    short_key,
    yoneda_embed,
    yoneda_on_mor,
)

# ---------------------------------------------------------------------------
# sieves


@dataclass(frozen=True)
class Sieve:
    """A set of arrows into a common target, closed under precomposition."""

    target: str
    arrows: frozenset[str]

    def sorted_arrows(self) -> tuple[str, ...]:
        return tuple(sorted(self.arrows))

    def key(self) -> tuple[int, tuple[str, ...]]:
        return (len(self.arrows), self.sorted_arrows())


def sieve_generated(C: FinCategory, X: str, family: Iterable[str]) -> Sieve:
    members: set[str] = set()
    for f in family:
        if C.tgt(f) != X:
            raise StructureError(f"sieve_generated: {f} does not target {X}")
        for g in C.morphisms:
            if g.tgt == C.src(f):
                members.add(C.compose(f, g.name))
    return Sieve(X, frozenset(members))


def maximal_sieve(C: FinCategory, X: str) -> Sieve:
    return Sieve(X, frozenset(C.arrows_into(X)))


def pullback_sieve(C: FinCategory, S: Sieve, f: str) -> Sieve:
    """Arrows g into src(f) with f.g in S; f must target S.target."""
    if C.tgt(f) != S.target:
        raise StructureError(f"pullback_sieve: {f} does not target {S.target}")
    Y = C.src(f)
    return Sieve(
        Y, frozenset(g for g in C.arrows_into(Y) if C.compose(f, g) in S.arrows)
    )


def is_sieve_closed(C: FinCategory, S: Sieve) -> bool:
    for f in S.arrows:
        for g in C.morphisms:
            if g.tgt == C.src(f) and C.compose(f, g.name) not in S.arrows:
                return False
    return True


def enumerate_sieves(C: FinCategory, X: str, *, max_generators: int = 16) -> tuple[Sieve, ...]:
    """The full sieve lattice on X: all unions of principal sieves."""
    principals = sorted(
        {sieve_generated(C, X, [f]).arrows for f in C.arrows_into(X)},
        key=sorted,
    )
    if len(principals) > max_generators:
        raise ResourceBudgetError("enumerate_sieves", 2 ** len(principals), 2 ** max_generators)
    seen: set[frozenset[str]] = set()
    for r in range(len(principals) + 1):
        for combo in itertools.combinations(principals, r):
            u = frozenset().union(*combo) if combo else frozenset()
            seen.add(u)
    return tuple(Sieve(X, arrows) for arrows in sorted(seen, key=lambda a: (len(a), sorted(a))))


# ---------------------------------------------------------------------------
# sites


@dataclass(frozen=True)
class Site:
    """A base category, declared covers, and the saturated topology.

    ``topology`` maps each object to the covering sieves in deterministic
    order; ``minimal`` holds the intersection of the covering sieves of
    each object, which the saturation guarantees is itself covering.
    """

    base: FinCategory
    covers: Mapping[str, tuple[tuple[str, ...], ...]]
    topology: Mapping[str, tuple[Sieve, ...]]
    minimal: Mapping[str, Sieve]
    name: str = field(default="", compare=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def covering(self, X: str) -> tuple[Sieve, ...]:
        return self.topology[X]

    def is_covering(self, S: Sieve) -> bool:
        return S in self.topology[S.target]


def generate_topology(
    C: FinCategory,
    covers: Mapping[str, Sequence[Sequence[str]]],
    name: str = "",
) -> Site:
    """Saturate declared covers into a topology over the full sieve lattice.

    Closure operations, iterated to a fixpoint: the maximal sieve covers;
    pullbacks of covering sieves cover; and a sieve covers if some covering
    sieve pulls it back to a covering sieve along each of its arrows.
    """
    norm: dict[str, tuple[tuple[str, ...], ...]] = {}
    for X, fams in covers.items():
        if X not in C.objects:
            raise StructureError(f"covers declared for unknown object {X}")
        out = []
        for fam in fams:
            fam_t = tuple(sorted(set(fam)))
            for f in fam_t:
                if not C.has_mor(f):
                    raise StructureError(f"cover of {X} uses unknown arrow {f}")
                if C.tgt(f) != X:
                    raise StructureError(f"cover arrow {f} does not target {X}")
            out.append(fam_t)
        norm[X] = tuple(out)
    lattice = {X: enumerate_sieves(C, X) for X in C.objects}
    J: dict[str, set[Sieve]] = {X: {maximal_sieve(C, X)} for X in C.objects}
    for X, fams in norm.items():
        for fam in fams:
            J[X].add(sieve_generated(C, X, fam))
    changed = True
    while changed:
        changed = False
        for X in C.objects:
            for S in list(J[X]):
                for f in C.arrows_into(X):
                    P = pullback_sieve(C, S, f)
                    Y = C.src(f)
                    if P not in J[Y]:
                        J[Y].add(P)
                        changed = True
        for X in C.objects:
            for R in lattice[X]:
                if R in J[X]:
                    continue
                for S in list(J[X]):
                    if all(
                        pullback_sieve(C, R, f) in J[C.src(f)] for f in S.arrows
                    ):
                        J[X].add(R)
                        changed = True
                        break
    topology = {X: tuple(sorted(J[X], key=Sieve.key)) for X in C.objects}
    minimal: dict[str, Sieve] = {}
    for X in C.objects:
        inter = frozenset(C.arrows_into(X))
        for S in topology[X]:
            inter &= S.arrows
        m = Sieve(X, inter)
        if m not in J[X]:
            raise ConsistencyError(
                f"saturation of site {name or C.name}: intersection of covering "
                f"sieves on {X} is not covering; closure is broken"
            )
        minimal[X] = m
    return Site(C, norm, topology, minimal, name or f"site({C.name})")


def validate_site(site: Site) -> ValidationReport:
    """Re-check the topology axioms on the stored sieve system."""
    rep = ValidationReport(subject=f"site {site.name}")
    C = site.base
    for X in C.objects:
        sieves = set(site.topology[X])
        if maximal_sieve(C, X) not in sieves:
            rep.add("maximal", (X,), f"maximal sieve on {X} is not covering")
        for S in sieves:
            if not is_sieve_closed(C, S):
                rep.add("closure", (X,), f"a stored sieve on {X} is not closed")
            for f in C.arrows_into(X):
                if pullback_sieve(C, S, f) not in set(site.topology[C.src(f)]):
                    rep.add("stability", (X, f), f"pullback along {f} leaves the topology")
        for S in sieves:
            for T in sieves:
                if Sieve(X, S.arrows & T.arrows) not in sieves:
                    rep.add("intersection", (X,), "covering sieves not closed under meet")
    for X in C.objects:
        for R in enumerate_sieves(C, X):
            if R in set(site.topology[X]):
                continue
            for S in site.topology[X]:
                if all(pullback_sieve(C, R, f) in set(site.topology[C.src(f)]) for f in S.arrows):
                    rep.add("transitivity", (X,), "a locally-covering sieve is missing")
                    break
    return rep


# ---------------------------------------------------------------------------
# matching families


def _sieve_structure(site: Site, S: Sieve) -> tuple[tuple[str, ...], list[tuple[int, str, int]]]:
    """Arrow order and constraint triples (position of f, g, position of f.g)."""
    key = ("sieve-structure", S)
    if key in site._cache:
        return site._cache[key]
    C = site.base
    arrows = S.sorted_arrows()
    pos = {f: i for i, f in enumerate(arrows)}
    triples: list[tuple[int, str, int]] = []
    for f in arrows:
        for g in C.non_identities():
            if C.tgt(g) == C.src(f):
                triples.append((pos[f], g, pos[C.compose(f, g)]))
    site._cache[key] = (arrows, triples)
    return arrows, triples


def matching_families(site: Site, S: Sieve, F: Presheaf) -> list[tuple[str, ...]]:
    """All matching families for S in F, as value tuples in arrow order.

    A family assigns to each arrow f in S an element of F(src f) such that
    restricting along any g lands on the assignment of f.g.
    """
    C = site.base
    arrows, triples = _sieve_structure(site, S)
    by_pos: dict[int, list[tuple[int, str, int]]] = {i: [] for i in range(len(arrows))}
    for f_pos, g, fg_pos in triples:
        by_pos[max(f_pos, fg_pos)].append((f_pos, g, fg_pos))
    out: list[tuple[str, ...]] = []
    assign: list[Optional[str]] = [None] * len(arrows)

    def extend(i: int) -> None:
        if i == len(arrows):
            out.append(tuple(assign))  # type: ignore[arg-type]
            return
        f = arrows[i]
        for e in F.values[C.src(f)]:
            assign[i] = e
            good = True
            for f_pos, g, fg_pos in by_pos[i]:
                if F.actions[g][assign[f_pos]] != assign[fg_pos]:
                    good = False
                    break
            if good:
                extend(i + 1)
        assign[i] = None

    extend(0)
    return out


def restriction_family(site: Site, S: Sieve, F: Presheaf, x: str) -> tuple[str, ...]:
    """The family obtained by restricting one element along every arrow of S."""
    arrows, _ = _sieve_structure(site, S)
    return tuple(F.actions[f][x] for f in arrows)


# ---------------------------------------------------------------------------
# sheaf checks


@dataclass
class SheafReport:
    ok: bool
    witness: Optional[dict]
    checked: int

    def to_dict(self) -> dict:
        return {"ok": self.ok, "witness": self.witness, "checked": self.checked}


def is_sheaf(F: Presheaf, site: Site) -> SheafReport:
    """Sieve-form sheaf condition over the saturated topology.

    The maximal sieve is skipped: it contains the identity, and a matching
    family is then freely and uniquely determined by its value there.
    """
    C = site.base
    checked = 0
    for X in sorted(C.objects):
        mx = maximal_sieve(C, X)
        for S in site.topology[X]:
            if S == mx:
                continue
            checked += 1
            families = matching_families(site, S, F)
            family_set = set(families)
            if len(family_set) != len(families):
                raise ConsistencyError("matching family enumeration repeated a family")
            seen: dict[tuple[str, ...], str] = {}
            for x in F.values[X]:
                fam = restriction_family(site, S, F, x)
                if fam in seen:
                    return SheafReport(
                        False,
                        {
                            "object": X,
                            "sieve": list(S.sorted_arrows()),
                            "kind": "not-separated",
                            "elements": [seen[fam], x],
                        },
                        checked,
                    )
                if fam not in family_set:
                    raise ConsistencyError("restriction of an element is not matching")
                seen[fam] = x
            if len(seen) != len(family_set):
                missing = sorted(family_set - set(seen))[0]
                return SheafReport(
                    False,
                    {
                        "object": X,
                        "sieve": list(S.sorted_arrows()),
                        "kind": "no-amalgamation",
                        "family": list(missing),
                    },
                    checked,
                )
    return SheafReport(True, None, checked)


def _cover_spans(site: Site, X: str, fam: tuple[str, ...]) -> list[tuple[int, int, str, str]]:
    """Spans (i, j, g, h) with fam[i].g == fam[j].h, up to symmetry."""
    key = ("cover-spans", X, fam)
    if key in site._cache:
        return site._cache[key]
    C = site.base
    spans: list[tuple[int, int, str, str]] = []
    for i, fi in enumerate(fam):
        for j in range(i, len(fam)):
            fj = fam[j]
            for W in C.objects:
                for g in C.hom(W, C.src(fi)):
                    for h in C.hom(W, C.src(fj)):
                        if C.compose(fi, g) == C.compose(fj, h):
                            spans.append((i, j, g, h))
    site._cache[key] = spans
    return spans


def is_sheaf_coverform(F: Presheaf, site: Site) -> SheafReport:
    """Cover-form sheaf condition over the declared covers.

    A compatible family picks one element over each cover member, agreeing
    on every span between two members; the condition demands exactly one
    common extension.  Agrees with the sieve form by saturation.
    """
    C = site.base
    checked = 0
    for X in sorted(site.covers):
        for fam in site.covers[X]:
            checked += 1
            spans = _cover_spans(site, X, fam)
            srcs = [C.src(f) for f in fam]
            compatible: list[tuple[str, ...]] = []
            assign: list[Optional[str]] = [None] * len(fam)

            def extend(i: int) -> None:
                if i == len(fam):
                    compatible.append(tuple(assign))  # type: ignore[arg-type]
                    return
                for e in F.values[srcs[i]]:
                    assign[i] = e
                    if all(
                        F.actions[g][assign[a]] == F.actions[h][assign[b]]
                        for a, b, g, h in spans
                        if a <= i and b <= i
                    ):
                        extend(i + 1)
                assign[i] = None

            extend(0)
            for tup in compatible:
                hits = [
                    x
                    for x in F.values[X]
                    if all(F.actions[f][x] == tup[i] for i, f in enumerate(fam))
                ]
                if len(hits) != 1:
                    return SheafReport(
                        False,
                        {
                            "object": X,
                            "cover": list(fam),
                            "kind": "no-amalgamation" if not hits else "not-unique",
                            "family": list(tup),
                            "amalgamations": hits,
                        },
                        checked,
                    )
    return SheafReport(True, None, checked)


# ---------------------------------------------------------------------------
# plus construction and sheafification


@dataclass
class PlusResult:
    """One application of the plus construction.

    Classes at X are matching families over the minimal covering sieve.
    A class hit by the canonical map keeps the label of its first
    preimage, so sheaf inputs (and any input over a trivial topology)
    reproduce their own labels; unhit classes get fresh p0, p1, ...
    ``decode`` recovers the family tuple behind a label, ``encode``
    inverts it.
    """

    presheaf: Presheaf
    unit: PresheafMorphism
    decode: Mapping[str, Mapping[str, tuple[str, ...]]]
    encode: Mapping[str, Mapping[tuple[str, ...], str]]


def plus_construction(F: Presheaf, site: Site) -> PlusResult:
    C = site.base
    values: dict[str, tuple[str, ...]] = {}
    decode: dict[str, dict[str, tuple[str, ...]]] = {}
    encode: dict[str, dict[tuple[str, ...], str]] = {}
    for X in C.objects:
        fams = sorted(matching_families(site, site.minimal[X], F))
        preimage: dict[tuple[str, ...], str] = {}
        for x in F.values[X]:
            fam = restriction_family(site, site.minimal[X], F, x)
            preimage.setdefault(fam, x)
        used = set(preimage.values())
        labels = []
        fresh = 0
        for fam in fams:
            if fam in preimage:
                labels.append(preimage[fam])
            else:
                while f"p{fresh}" in used:
                    fresh += 1
                labels.append(f"p{fresh}")
                used.add(f"p{fresh}")
        values[X] = tuple(sorted(labels))
        decode[X] = dict(zip(labels, fams))
        encode[X] = dict(zip(fams, labels))
    actions: dict[str, dict[str, str]] = {}
    for m in C.morphisms:
        W, X = m.src, m.tgt
        w_arrows, _ = _sieve_structure(site, site.minimal[W])
        x_arrows, _ = _sieve_structure(site, site.minimal[X])
        x_pos = {f: i for i, f in enumerate(x_arrows)}
        act: dict[str, str] = {}
        for label in values[X]:
            fam = decode[X][label]
            # restrict along m: the arrow g below sits in the pullback of
            # the minimal sieve on X, so m.g indexes into fam
            restricted = tuple(fam[x_pos[C.compose(m.name, g)]] for g in w_arrows)
            act[label] = encode[W][restricted]
        actions[m.name] = act
    plus = Presheaf(C, values, actions, f"{F.name}+" if F.name else "+")
    unit_comps = {
        X: {
            x: encode[X][restriction_family(site, site.minimal[X], F, x)]
            for x in F.values[X]
        }
        for X in C.objects
    }
    unit = PresheafMorphism(F, plus, unit_comps, "to-plus")
    return PlusResult(plus, unit, decode, encode)


def plus_on_morphism(site: Site, pf: PlusResult, pg: PlusResult, t: PresheafMorphism) -> PresheafMorphism:
    """Functorial action of one plus step on a presheaf morphism."""
    C = site.base
    comps: dict[str, dict[str, str]] = {}
    for X in C.objects:
        arrows, _ = _sieve_structure(site, site.minimal[X])
        comp: dict[str, str] = {}
        for label in pf.presheaf.values[X]:
            fam = pf.decode[X][label]
            mapped = tuple(
                t.components[C.src(f)][fam[i]] for i, f in enumerate(arrows)
            )
            comp[label] = pg.encode[X][mapped]
        comps[X] = comp
    return PresheafMorphism(pf.presheaf, pg.presheaf, comps)


@dataclass
class SheafificationResult:
    """Two plus steps and the composite unit."""

    sheaf: Presheaf
    unit: PresheafMorphism
    stage1: PlusResult
    stage2: PlusResult


def sheafify(F: Presheaf, site: Site) -> SheafificationResult:
    p1 = plus_construction(F, site)
    p2 = plus_construction(p1.presheaf, site)
    sheaf = Presheaf(
        p2.presheaf.base, p2.presheaf.values, p2.presheaf.actions,
        f"a({F.name})" if F.name else "a(F)",
    )
    unit = compose_presheaf_morphisms(
        PresheafMorphism(p1.presheaf, sheaf, p2.unit.components), p1.unit
    )
    return SheafificationResult(sheaf, unit, p1, p2)


def sheafify_morphism(
    site: Site, rf: SheafificationResult, rg: SheafificationResult, t: PresheafMorphism
) -> PresheafMorphism:
    t1 = plus_on_morphism(site, rf.stage1, rg.stage1, t)
    t2 = plus_on_morphism(site, rf.stage2, rg.stage2, t1)
    return PresheafMorphism(rf.sheaf, rg.sheaf, t2.components)


def _plus_factor(site: Site, pr: PlusResult, T: Presheaf, t: PresheafMorphism) -> PresheafMorphism:
    """Extend t: F -> T through F-plus when T is a sheaf.

    Each class is a matching family over the minimal sieve; pushing it into
    T gives a matching family there, whose unique amalgamation is the value.
    """
    C = site.base
    comps: dict[str, dict[str, str]] = {}
    for X in C.objects:
        arrows, _ = _sieve_structure(site, site.minimal[X])
        comp: dict[str, str] = {}
        for label in pr.presheaf.values[X]:
            fam = pr.decode[X][label]
            pushed = tuple(t.components[C.src(f)][fam[i]] for i, f in enumerate(arrows))
            hits = [
                x
                for x in T.values[X]
                if restriction_family(site, site.minimal[X], T, x) == pushed
            ]
            if len(hits) != 1:
                raise FactorizationError(
                    f"plus factoring through a non-sheaf target at {X}: "
                    f"{len(hits)} amalgamations"
                )
            comp[label] = hits[0]
        comps[X] = comp
    return PresheafMorphism(pr.presheaf, T, comps)


def factor_through_unit(
    site: Site, res: SheafificationResult, T: Presheaf, t: PresheafMorphism
) -> PresheafMorphism:
    """The unique u with u . unit = t, for T a sheaf and t: F -> T."""
    u1 = _plus_factor(site, res.stage1, T, t)
    u2 = _plus_factor(site, res.stage2, T, u1)
    return PresheafMorphism(res.sheaf, T, u2.components)


# ---------------------------------------------------------------------------
# sheafified representables


class EpsilonFunctor:
    """Object-by-object sheafification of the representables, with caching."""

    def __init__(self, site: Site) -> None:
        self.site = site
        self._obj: dict[str, SheafificationResult] = {}
        self._mor: dict[str, PresheafMorphism] = {}

    def on_object(self, X: str) -> SheafificationResult:
        if X not in self._obj:
            res = sheafify(yoneda_embed(self.site.base, X), self.site)
            sheaf = Presheaf(
                res.sheaf.base, res.sheaf.values, res.sheaf.actions, f"e_{X}"
            )
            self._obj[X] = SheafificationResult(
                sheaf,
                PresheafMorphism(res.unit.dom, sheaf, res.unit.components, res.unit.name),
                res.stage1,
                res.stage2,
            )
        return self._obj[X]

    def on_morphism(self, f: str) -> PresheafMorphism:
        if f not in self._mor:
            C = self.site.base
            rf = self.on_object(C.src(f))
            rg = self.on_object(C.tgt(f))
            t = sheafify_morphism(self.site, rf, rg, yoneda_on_mor(C, f))
            self._mor[f] = PresheafMorphism(rf.sheaf, rg.sheaf, t.components, f"e[{f}]")
        return self._mor[f]


def epsilon(site: Site, X: str) -> Presheaf:
    """The sheafified representable of X."""
    return _epsilon_functor(site).on_object(X).sheaf


def epsilon_result(site: Site, X: str) -> SheafificationResult:
    """Sheafified representable together with its unit and stages."""
    return _epsilon_functor(site).on_object(X)


def epsilon_on_mor(site: Site, f: str) -> PresheafMorphism:
    return _epsilon_functor(site).on_morphism(f)


def _epsilon_functor(site: Site) -> EpsilonFunctor:
    if "epsilon" not in site._cache:
        site._cache["epsilon"] = EpsilonFunctor(site)
    return site._cache["epsilon"]


def epsilon_handle_functor(site: Site, cod: "SheafCategory") -> HandleFunctor:
    """Epsilon packaged as a handle-valued functor for functor-level checks."""
    C = site.base
    return HandleFunctor(
        "epsilon",
        C,
        cod,
        {X: epsilon(site, X) for X in C.objects},
        {m: epsilon_on_mor(site, m) for m in C.non_identities()},
    )


# ---------------------------------------------------------------------------
# strict epimorphic families


@dataclass
class StrictEpiReport:
    ok: bool
    witness: Optional[dict]
    targets_checked: int
    families_checked: int

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "witness": self.witness,
            "targets_checked": self.targets_checked,
            "families_checked": self.families_checked,
        }


def is_strict_epi_family(
    Z: ComputationalCategory,
    family: Sequence[Any],
    *,
    target: Any = None,
) -> StrictEpiReport:
    """Decide whether a family with common target is strictly epimorphic.

    For every enumerated object Y and every family of maps out of the
    sources that agrees on all probe-relations, there must be exactly one
    map out of the target restricting to it.  ``target`` is only needed
    for the empty family, where it cannot be read off the members.
    """
    if family:
        target = Z.target(family[0])
        for m in family[1:]:
            if Z.obj_key(Z.target(m)) != Z.obj_key(target):
                raise StructureError("is_strict_epi_family: mixed targets")
    elif target is None:
        raise StructureError("is_strict_epi_family: empty family needs an explicit target")
    sources = [Z.source(m) for m in family]
    # probe relations: pairs of generalized elements the family identifies
    relations: list[tuple[int, Any, int, Any]] = []
    for W in Z.probe_objects():
        elems = [(i, x) for i, src in enumerate(sources) for x in Z.hom(W, src)]
        for a in range(len(elems)):
            i, x = elems[a]
            li_x = Z.compose(family[i], x)
            for b in range(a, len(elems)):
                j, z = elems[b]
                if Z.equal_mor(li_x, Z.compose(family[j], z)):
                    relations.append((i, x, j, z))
    targets_checked = 0
    families_checked = 0
    for Y in Z.objects():
        targets_checked += 1
        pools = [Z.hom(src, Y) for src in sources]
        hom_xy = Z.hom(target, Y)
        assign: list[Any] = [None] * len(family)

        def compatible_upto(i: int) -> bool:
            for a, x, b, z in relations:
                if a <= i and b <= i:
                    if not Z.equal_mor(
                        Z.compose(assign[a], x), Z.compose(assign[b], z)
                    ):
                        return False
            return True

        found_bad: list[dict] = []

        def extend(i: int) -> bool:
            nonlocal families_checked
            if i == len(family):
                families_checked += 1
                hits = [
                    w
                    for w in hom_xy
                    if all(
                        Z.equal_mor(Z.compose(w, family[k]), assign[k])
                        for k in range(len(family))
                    )
                ]
                if len(hits) != 1:
                    found_bad.append(
                        {
                            "target": Z.obj_key(Y),
                            "family": [Z.mor_key(a) for a in assign],
                            "factorings": len(hits),
                        }
                    )
                    return True
                return False
            for cand in pools[i]:
                assign[i] = cand
                if compatible_upto(i) and extend(i + 1):
                    return True
            assign[i] = None
            return False

        if extend(0):
            return StrictEpiReport(False, found_bad[0], targets_checked, families_checked)
    return StrictEpiReport(True, None, targets_checked, families_checked)


@dataclass
class UniversalStrictEpiReport:
    ok: bool
    witness: Optional[dict]
    gaps: list[dict]
    base_changes: int

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "witness": self.witness,
            "gaps": self.gaps,
            "base_changes": self.base_changes,
        }


def is_universal_strict_epi(
    C: FinCategory, family: Sequence[str], *, target: Optional[str] = None
) -> UniversalStrictEpiReport:
    """Strict epi after every base change that exists in C.

    For each arrow g into the common target the family is pulled back
    member-by-member; if some pullback square does not exist the base
    change is recorded as a gap and skipped.  The identity base change
    covers the plain check.  ``target`` is only needed when the family is
    empty.
    """
    from .fincat import cospan_category

    if family:
        X = C.tgt(family[0])
    elif target is None:
        raise StructureError("is_universal_strict_epi: empty family needs an explicit target")
    else:
        X = target
    if target is not None and family and C.tgt(family[0]) != target:
        raise StructureError("is_universal_strict_epi: family does not match target")
    for f in family:
        if C.tgt(f) != X:
            raise StructureError(f"is_universal_strict_epi: {f} does not target {X}")
    handle = FinCatHandle(C)
    cospan = cospan_category()
    gaps: list[dict] = []
    witness: Optional[dict] = None
    base_changes = 0
    for g in C.arrows_into(X):
        Y = C.src(g)
        pulled: list[str] = []
        missing = False
        for f in family:
            lim = handle.try_limit(
                HandleDiagram(cospan, {"l": Y, "m": X, "r": C.src(f)}, {"lm": g, "rm": f})
            )
            if lim is None:
                gaps.append({"base_change": g, "member": f})
                missing = True
                break
            pulled.append(lim.legs["l"])
        if missing:
            continue
        base_changes += 1
        if witness is None:
            rep = is_strict_epi_family(handle, pulled, target=Y)
            if not rep.ok:
                witness = {
                    "base_change": g,
                    "pulled_family": pulled,
                    "failure": rep.witness,
                }
    return UniversalStrictEpiReport(witness is None, witness, gaps, base_changes)


def canonical_pretopology(
    C: FinCategory, *, max_family_size: Optional[int] = None, max_arrows: int = 12
) -> dict[str, tuple[tuple[str, ...], ...]]:
    """All universal strict epimorphic families, up to sieve redundancy.

    Families are subsets of the arrows into each object; two families
    generating the same sieve are redundant and only the smallest survives.
    """
    out: dict[str, tuple[tuple[str, ...], ...]] = {}
    for X in sorted(C.objects):
        arrows = C.arrows_into(X)
        if len(arrows) > max_arrows:
            raise ResourceBudgetError("canonical_pretopology", 2 ** len(arrows), 2 ** max_arrows)
        cap = len(arrows) if max_family_size is None else max_family_size
        by_sieve: dict[frozenset[str], tuple[str, ...]] = {}
        for r in range(cap + 1):
            for fam in itertools.combinations(arrows, r):
                rep = is_universal_strict_epi(C, fam, target=X)
                if not rep.ok:
                    continue
                sieve = sieve_generated(C, X, fam).arrows
                prev = by_sieve.get(sieve)
                if prev is None or (len(fam), fam) < (len(prev), prev):
                    by_sieve[sieve] = fam
        out[X] = tuple(sorted(by_sieve.values(), key=lambda f: (len(f), f)))
    return out


# ---------------------------------------------------------------------------
# continuity and subcanonicity


@dataclass
class ContinuityReport:
    ok: bool
    failures: list[dict]
    covers_checked: int

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "failures": self.failures,
            "covers_checked": self.covers_checked,
        }


def is_continuous(p: HandleFunctor, site: Site) -> ContinuityReport:
    """Does p send every declared cover to a strict epimorphic family?"""
    if p.dom != site.base:
        raise StructureError("is_continuous: functor domain is not the site base")
    failures: list[dict] = []
    checked = 0
    for X in sorted(site.covers):
        for fam in site.covers[X]:
            checked += 1
            images = [p.on_mor(f) for f in fam]
            rep = is_strict_epi_family(p.cod, images, target=p.obj_map[X])
            if not rep.ok:
                failures.append(
                    {"object": X, "cover": list(fam), "witness": rep.witness}
                )
    return ContinuityReport(not failures, failures, checked)


@dataclass
class SubcanonicalReport:
    value: bool
    covers_strict_epi: list[dict]
    representable_sheaves: list[dict]

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "covers_strict_epi": self.covers_strict_epi,
            "representable_sheaves": self.representable_sheaves,
        }


def is_subcanonical(site: Site) -> SubcanonicalReport:
    """Two equivalent criteria, both computed, compared, and reported.

    (1) every declared cover is a strict epimorphic family in the base;
    (2) every representable passes the sheaf check.
    A mismatch would mean the saturation or the epi check is broken, so it
    raises rather than picking a side.
    """
    C = site.base
    handle = FinCatHandle(C)
    via_covers: list[dict] = []
    ok1 = True
    for X in sorted(site.covers):
        for fam in site.covers[X]:
            rep = is_strict_epi_family(handle, list(fam), target=X)
            via_covers.append({"object": X, "cover": list(fam), "ok": rep.ok})
            ok1 = ok1 and rep.ok
    via_reps: list[dict] = []
    ok2 = True
    for X in sorted(C.objects):
        rep = is_sheaf(yoneda_embed(C, X), site)
        via_reps.append({"object": X, "ok": rep.ok})
        ok2 = ok2 and rep.ok
    if ok1 != ok2:
        raise ConsistencyError(
            f"subcanonicity criteria disagree on {site.name}: "
            f"covers-strict-epi={ok1} representables-sheaves={ok2}"
        )
    return SubcanonicalReport(ok1, via_covers, via_reps)


# ---------------------------------------------------------------------------
# the sheaf category handle


class SheafCategory(ComputationalCategory):
    """Sheaves on a site, enumerated by filtering bounded presheaves.

    Limits are computed pointwise (a limit of sheaves is a sheaf); colimits
    are presheaf colimits followed by sheafification, with the mediating
    morphism factored through the unit.  Probes are the sheafified
    representables, a separating family by the unit's universal property.
    """

    def __init__(
        self,
        site: Site,
        bound: int = 2,
        *,
        max_objects: int = 200_000,
        hom_budget: int = 2_000_000,
        name: str = "",
    ) -> None:
        self.site = site
        self.inner = PresheafCategory(
            site.base, bound, max_objects=max_objects, hom_budget=hom_budget
        )
        self.bound = bound
        self.name = name or f"Sh({site.name})<={bound}"
        self._objects: Optional[list[Presheaf]] = None

    def objects(self) -> list[Presheaf]:
        if self._objects is None:
            self._objects = [
                P for P in self.inner.objects() if is_sheaf(P, self.site).ok
            ]
        return self._objects

    def probe_objects(self) -> list[Presheaf]:
        eps = _epsilon_functor(self.site)
        return [eps.on_object(X).sheaf for X in sorted(self.site.base.objects)]

    def hom(self, a: Presheaf, b: Presheaf) -> list[PresheafMorphism]:
        return self.inner.hom(a, b)

    def identity(self, a: Presheaf) -> PresheafMorphism:
        return self.inner.identity(a)

    def compose(self, g: PresheafMorphism, f: PresheafMorphism) -> PresheafMorphism:
        return compose_presheaf_morphisms(g, f)

    def source(self, m: PresheafMorphism) -> Presheaf:
        return m.dom

    def target(self, m: PresheafMorphism) -> Presheaf:
        return m.cod

    def obj_key(self, a: Presheaf) -> str:
        return short_key(a)

    def mor_key(self, m: PresheafMorphism) -> str:
        return self.inner.mor_key(m)

    def equal_mor(self, f: PresheafMorphism, g: PresheafMorphism) -> bool:
        return f.components == g.components

    def limit(self, diagram: HandleDiagram) -> LimitData:
        data = self.inner.limit(diagram)
        rep = is_sheaf(data.apex, self.site)
        if not rep.ok:
            raise ConsistencyError("limit of sheaves failed the sheaf check")
        return data

    def colimit(self, diagram: HandleDiagram) -> ColimitData:
        pre = self.inner.colimit(diagram)
        res = sheafify(pre.apex, self.site)
        legs = {
            j: compose_presheaf_morphisms(res.unit, leg) for j, leg in pre.legs.items()
        }

        def factor(apex2: Presheaf, legs2: Mapping[str, PresheafMorphism]) -> PresheafMorphism:
            t = pre.factor(apex2, legs2)
            return factor_through_unit(self.site, res, apex2, t)

        return ColimitData(res.sheaf, legs, factor)

    def is_iso(self, m: PresheafMorphism) -> bool:
        return is_presheaf_iso(m)

    def find_iso(self, a: Presheaf, b: Presheaf) -> Optional[PresheafMorphism]:
        return self.inner.find_iso(a, b)


def sheaf_category(site: Site, bound: int = 2, **kw) -> SheafCategory:
    return SheafCategory(site, bound, **kw)


def sheafification_limit_comparison(site: Site, diagram: HandleDiagram) -> PresheafMorphism:
    """The mediating map a(lim D) -> lim a(D) for a nonempty presheaf diagram.

    Sheafifying the limit cone gives a cone over the sheafified diagram;
    the map is its factoring through the pointwise limit of sheaves.
    Left exactness of sheafification says it is an isomorphism.
    """
    from .presheaf import presheaf_limit

    pre = presheaf_limit(diagram)
    node_res = {j: sheafify(P, site) for j, P in diagram.obs.items()}
    sheaf_diagram = HandleDiagram(
        diagram.index,
        {j: node_res[j].sheaf for j in diagram.obs},
        {
            m: sheafify_morphism(
                site,
                node_res[diagram.index.src(m)],
                node_res[diagram.index.tgt(m)],
                diagram.mors[m],
            )
            for m in diagram.mors
        },
    )
    post = presheaf_limit(sheaf_diagram)
    apex_res = sheafify(pre.apex, site)
    legs = {
        j: compose_presheaf_morphisms(
            node_res[j].unit,
            PresheafMorphism(pre.apex, diagram.obs[j], pre.legs[j].components),
        )
        for j in diagram.obs
    }
    lifted = {
        j: factor_through_unit(site, apex_res, node_res[j].sheaf, legs[j])
        for j in diagram.obs
    }
    return post.factor(apex_res.sheaf, lifted)


def topology_as_dict(site: Site) -> dict:
    """Plain-data view of a site for report and export paths."""
    return {
        "name": site.name,
        "base": site.base.name,
        "covers": {X: [list(f) for f in fams] for X, fams in sorted(site.covers.items())},
        "topology": {
            X: [list(S.sorted_arrows()) for S in site.topology[X]]
            for X in sorted(site.base.objects)
        },
        "minimal": {
            X: list(site.minimal[X].sorted_arrows()) for X in sorted(site.base.objects)
        },
    }
