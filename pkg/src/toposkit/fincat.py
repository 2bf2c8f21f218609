"""Finite categories presented by explicit composition tables.

A category here is nominal data: object names, morphism names with source
and target, a chosen identity morphism per object, and a total composition
table on composable pairs.  Everything downstream (presheaves, sites, Kan
extensions) reduces to exact finite computations over these tables, so this
module also fixes the conventions the rest of the package relies on:

* ``compose(g, f)`` means "g after f" and is defined iff src(g) == tgt(f);
* all enumerations iterate in sorted name order, so results are
  deterministic functions of the input data;
* validators report law violations with witnesses instead of raising.

The second half of the module defines the computational-category handle
interface: a uniform way to treat a finite category, a presheaf category,
or a sheaf category as "a category whose objects and homs can be listed and
whose (co)limits can be computed", which is what the extension and flatness
machinery is written against.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence

from .errors import FactorizationError, StructureError

# Hard size caps for user-supplied categories.  Internal constructions
# (categories of elements, for instance) may be larger; validators take
# explicit None to lift the caps in those cases.
MAX_OBJECTS = 6
MAX_NON_IDENTITY = 24

Obj = Any
Mor = Any


# ---------------------------------------------------------------------------
# validation reports


@dataclass(frozen=True)
class Violation:
    """One broken law, with the names that witness the breakage."""

    law: str
    witness: tuple
    detail: str

    def to_dict(self) -> dict:
        return {"law": self.law, "witness": list(self.witness), "detail": self.detail}


@dataclass
class ValidationReport:
    """Outcome of a validator: empty violation list means the laws hold."""

    subject: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, law: str, witness: tuple, detail: str) -> None:
        self.violations.append(Violation(law, witness, detail))

    def raise_if_failed(self) -> None:
        if not self.ok:
            first = self.violations[0]
            raise StructureError(
                f"{self.subject}: {len(self.violations)} violation(s); "
                f"first: [{first.law}] {first.detail}"
            )

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "violations": [v.to_dict() for v in self.violations],
        }


# ---------------------------------------------------------------------------
# categories


@dataclass(frozen=True)
class Morphism:
    name: str
    src: str
    tgt: str


@dataclass(frozen=True)
class FinCategory:
    """A finite category as explicit tables.

    ``composition`` maps every composable pair (g, f) with src(g) == tgt(f)
    to the name of g after f, identities included.  Use ``make_category`` to
    build instances without spelling out the identity rows.
    """

    name: str
    objects: tuple[str, ...]
    morphisms: tuple[Morphism, ...]
    identity: Mapping[str, str]
    composition: Mapping[tuple[str, str], str]
    _by_name: dict = field(init=False, repr=False, compare=False, default_factory=dict)
    _hom: dict = field(init=False, repr=False, compare=False, default_factory=dict)
    _non_ids: tuple = field(init=False, repr=False, compare=False, default=())
    # scratch for derived structures other modules key on this instance
    _derived: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        by_name: dict[str, Morphism] = {}
        hom: dict[tuple[str, str], list[str]] = {}
        for m in self.morphisms:
            by_name[m.name] = m
            hom.setdefault((m.src, m.tgt), []).append(m.name)
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(
            self, "_hom", {k: tuple(sorted(v)) for k, v in hom.items()}
        )
        object.__setattr__(
            self,
            "_non_ids",
            tuple(
                m.name
                for m in self.morphisms
                if self.identity.get(m.src) != m.name
            ),
        )

    # -- lookups ------------------------------------------------------------

    def mor(self, name: str) -> Morphism:
        return self._by_name[name]

    def has_mor(self, name: str) -> bool:
        return name in self._by_name

    def src(self, name: str) -> str:
        return self._by_name[name].src

    def tgt(self, name: str) -> str:
        return self._by_name[name].tgt

    def hom(self, x: str, y: str) -> tuple[str, ...]:
        return self._hom.get((x, y), ())

    def id_of(self, x: str) -> str:
        return self.identity[x]

    def is_identity(self, name: str) -> bool:
        m = self._by_name[name]
        return self.identity.get(m.src) == name

    def compose(self, g: str, f: str) -> str:
        """g after f; raises KeyError on non-composable pairs."""
        return self.composition[(g, f)]

    def non_identities(self) -> tuple[str, ...]:
        return self._non_ids

    def arrows_into(self, x: str) -> tuple[str, ...]:
        return tuple(sorted(m.name for m in self.morphisms if m.tgt == x))

    def arrows_from(self, x: str) -> tuple[str, ...]:
        return tuple(sorted(m.name for m in self.morphisms if m.src == x))

    def composable_pairs(self) -> Iterator[tuple[str, str]]:
        for g in self.morphisms:
            for f in self.morphisms:
                if g.src == f.tgt:
                    yield (g.name, f.name)


def make_category(
    name: str,
    objects: Sequence[str],
    morphisms: Sequence[tuple[str, str, str]] = (),
    compose: Mapping[tuple[str, str], str] | None = None,
) -> FinCategory:
    """Assemble a category from non-identity data.

    ``morphisms`` lists (name, src, tgt) for non-identity arrows; identities
    are added as ``id_<object>`` and the composition table is completed with
    the identity rows.  ``compose`` must cover exactly the composable pairs
    of non-identity arrows.
    """
    compose = dict(compose or {})
    objects = tuple(objects)
    idmap = {x: f"id_{x}" for x in objects}
    mors = [Morphism(idmap[x], x, x) for x in objects]
    for mname, s, t in morphisms:
        if mname in idmap.values():
            raise StructureError(f"{name}: morphism name {mname!r} collides with an identity")
        if s not in objects or t not in objects:
            raise StructureError(f"{name}: morphism {mname!r} has unknown endpoint")
        mors.append(Morphism(mname, s, t))
    table: dict[tuple[str, str], str] = {}
    for g in mors:
        for f in mors:
            if g.src != f.tgt:
                continue
            key = (g.name, f.name)
            if f.name == idmap[f.src]:
                table[key] = g.name
            elif g.name == idmap[g.src]:
                table[key] = f.name
            elif key in compose:
                table[key] = compose[key]
            else:
                raise StructureError(
                    f"{name}: composition table is missing ({g.name}, {f.name})"
                )
    extra = set(compose) - set(table)
    if extra:
        raise StructureError(f"{name}: composition entries for non-composable pairs {sorted(extra)}")
    return FinCategory(name, objects, tuple(mors), idmap, table)


def poset_category(name: str, objects: Sequence[str], leq: Sequence[tuple[str, str]]) -> FinCategory:
    """Thin category of a finite preorder.

    ``leq`` lists the related pairs (a, b) with a <= b; reflexive pairs are
    implied, transitive closure is taken.  The arrow for a < b is named
    ``a.b``.
    """
    objs = tuple(objects)
    rel = {(a, b) for a, b in leq}
    rel |= {(x, x) for x in objs}
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    mors = [(f"{a}.{b}", a, b) for a, b in sorted(rel) if a != b]
    compose: dict[tuple[str, str], str] = {}
    for gname, gs, gt in mors:
        for fname, fs, ft in mors:
            if gs == ft:
                compose[(gname, fname)] = f"{fs}.{gt}"
    return make_category(name, objs, mors, compose)


def terminal_category(name: str = "unit") -> FinCategory:
    return make_category(name, ("*",))


def discrete_category(name: str, objects: Sequence[str]) -> FinCategory:
    return make_category(name, objects)


def parallel_pair_category() -> FinCategory:
    """Index shape for equalizers: two objects, two parallel arrows."""
    return make_category("pair", ("a", "b"), [("u", "a", "b"), ("v", "a", "b")], {})


def cospan_category() -> FinCategory:
    """Index shape for pullbacks: l -> m <- r."""
    return make_category("cospan", ("l", "m", "r"), [("lm", "l", "m"), ("rm", "r", "m")], {})


def span_category() -> FinCategory:
    """Index shape for pushouts: l <- m -> r."""
    return make_category("span", ("l", "m", "r"), [("ml", "m", "l"), ("mr", "m", "r")], {})


def validate_category(
    C: FinCategory,
    *,
    max_objects: Optional[int] = MAX_OBJECTS,
    max_non_identity: Optional[int] = MAX_NON_IDENTITY,
) -> ValidationReport:
    """Check the category laws and size caps, reporting every violation.

    Works on arbitrary FinCategory data, malformed or not; nothing raises.
    """
    rep = ValidationReport(subject=f"category {C.name}")
    names = [m.name for m in C.morphisms]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        rep.add("unique-names", tuple(dup), f"duplicate morphism names {dup}")
    if len(set(C.objects)) != len(C.objects):
        rep.add("unique-names", C.objects, "duplicate object names")
    known = set(names)
    for m in C.morphisms:
        if m.src not in C.objects or m.tgt not in C.objects:
            rep.add("endpoints", (m.name,), f"{m.name}: endpoint not an object")
    for x in C.objects:
        i = C.identity.get(x)
        if i is None or i not in known:
            rep.add("identity-missing", (x,), f"object {x} has no identity morphism")
        else:
            m = C.mor(i)
            if m.src != x or m.tgt != x:
                rep.add("identity-endpoints", (x, i), f"identity of {x} is not an endomorphism")
    for k in C.identity:
        if k not in C.objects:
            rep.add("identity-extra", (k,), f"identity assigned to unknown object {k}")
    # totality and typing of the composition table
    for g, f in C.composable_pairs():
        key = (g, f)
        h = C.composition.get(key)
        if h is None:
            rep.add("compose-total", key, f"no entry for ({g}, {f})")
            continue
        if h not in known:
            rep.add("compose-typing", key + (h,), f"({g}, {f}) maps to unknown {h}")
            continue
        if C.src(h) != C.src(f) or C.tgt(h) != C.tgt(g):
            rep.add("compose-typing", key + (h,), f"({g}, {f}) = {h} has wrong endpoints")
    for (g, f) in C.composition:
        if g not in known or f not in known or C.src(g) != C.tgt(f):
            rep.add("compose-extra", (g, f), f"table entry ({g}, {f}) is not a composable pair")
    if not rep.ok:
        return rep
    # identity and associativity laws need a well-typed table
    for m in C.morphisms:
        if C.compose(m.name, C.id_of(m.src)) != m.name:
            rep.add("unit-right", (m.name,), f"{m.name} . id != {m.name}")
        if C.compose(C.id_of(m.tgt), m.name) != m.name:
            rep.add("unit-left", (m.name,), f"id . {m.name} != {m.name}")
    for h in C.morphisms:
        for g in C.morphisms:
            if g.src != h.tgt:
                continue
            for f in C.morphisms:
                if h.src != f.tgt:
                    continue
                left = C.compose(C.compose(g.name, h.name), f.name)
                right = C.compose(g.name, C.compose(h.name, f.name))
                if left != right:
                    rep.add(
                        "associativity",
                        (g.name, h.name, f.name),
                        f"(g.h).f = {left} but g.(h.f) = {right}",
                    )
    if max_objects is not None and len(C.objects) > max_objects:
        rep.add(
            "size-bound",
            (len(C.objects),),
            f"{len(C.objects)} objects exceeds the cap of {max_objects}",
        )
    if max_non_identity is not None:
        n = len(C.morphisms) - len(C.objects)
        if n > max_non_identity:
            rep.add(
                "size-bound",
                (n,),
                f"{n} non-identity morphisms exceeds the cap of {max_non_identity}",
            )
    return rep


def opposite(C: FinCategory) -> FinCategory:
    """Reverse all arrows.  Involutive on the nose: opposite(opposite(C)) == C."""
    name = C.name[: -len("^op")] if C.name.endswith("^op") else C.name + "^op"
    mors = tuple(Morphism(m.name, m.tgt, m.src) for m in C.morphisms)
    comp = {(f, g): h for (g, f), h in C.composition.items()}
    return FinCategory(name, C.objects, mors, dict(C.identity), comp)


# ---------------------------------------------------------------------------
# functors and natural transformations


@dataclass(frozen=True)
class FinFunctor:
    name: str
    dom: FinCategory
    cod: FinCategory
    obj_map: Mapping[str, str]
    mor_map: Mapping[str, str]

    def on_obj(self, x: str) -> str:
        return self.obj_map[x]

    def on_mor(self, m: str) -> str:
        return self.mor_map[m]


def identity_functor(C: FinCategory) -> FinFunctor:
    return FinFunctor(
        f"1_{C.name}", C, C,
        {x: x for x in C.objects},
        {m.name: m.name for m in C.morphisms},
    )


def compose_functors(G: FinFunctor, F: FinFunctor) -> FinFunctor:
    if G.dom is not F.cod and G.dom != F.cod:
        raise StructureError(f"cannot compose {G.name} after {F.name}: middle category differs")
    return FinFunctor(
        f"{G.name}.{F.name}", F.dom, G.cod,
        {x: G.obj_map[F.obj_map[x]] for x in F.dom.objects},
        {m.name: G.mor_map[F.mor_map[m.name]] for m in F.dom.morphisms},
    )


def validate_functor(F: FinFunctor) -> ValidationReport:
    rep = ValidationReport(subject=f"functor {F.name}")
    for x in F.dom.objects:
        fx = F.obj_map.get(x)
        if fx is None or fx not in F.cod.objects:
            rep.add("object-map", (x,), f"no codomain object for {x}")
    for m in F.dom.morphisms:
        fm = F.mor_map.get(m.name)
        if fm is None or not F.cod.has_mor(fm):
            rep.add("morphism-map", (m.name,), f"no codomain morphism for {m.name}")
            continue
        if F.cod.src(fm) != F.obj_map.get(m.src) or F.cod.tgt(fm) != F.obj_map.get(m.tgt):
            rep.add("endpoints", (m.name, fm), f"F({m.name}) = {fm} has wrong endpoints")
    if not rep.ok:
        return rep
    for x in F.dom.objects:
        if F.mor_map[F.dom.id_of(x)] != F.cod.id_of(F.obj_map[x]):
            rep.add("identity", (x,), f"F(id_{x}) is not the identity of F({x})")
    for g, f in F.dom.composable_pairs():
        lhs = F.mor_map[F.dom.compose(g, f)]
        rhs = F.cod.compose(F.mor_map[g], F.mor_map[f])
        if lhs != rhs:
            rep.add("composition", (g, f), f"F({g}.{f}) = {lhs} != F({g}).F({f}) = {rhs}")
    return rep


@dataclass(frozen=True)
class NatTransf:
    name: str
    dom: FinFunctor
    cod: FinFunctor
    components: Mapping[str, str]


def validate_nat_transf(a: NatTransf) -> ValidationReport:
    rep = ValidationReport(subject=f"transformation {a.name}")
    F, G = a.dom, a.cod
    if F.dom != G.dom or F.cod != G.cod:
        rep.add("frame", (F.name, G.name), "source and target functors are not parallel")
        return rep
    C = F.cod
    for x in F.dom.objects:
        cx = a.components.get(x)
        if cx is None or not C.has_mor(cx):
            rep.add("component-missing", (x,), f"no component at {x}")
            continue
        if C.src(cx) != F.obj_map[x] or C.tgt(cx) != G.obj_map[x]:
            rep.add("component-endpoints", (x, cx), f"component at {x} has wrong endpoints")
    if not rep.ok:
        return rep
    for m in F.dom.morphisms:
        x, y = m.src, m.tgt
        lhs = C.compose(a.components[y], F.mor_map[m.name])
        rhs = C.compose(G.mor_map[m.name], a.components[x])
        if lhs != rhs:
            rep.add("naturality", (m.name,), f"square at {m.name} does not commute")
    return rep


def enumerate_nat_transfs(F: FinFunctor, G: FinFunctor) -> tuple[NatTransf, ...]:
    """All natural transformations F => G, in lexicographic component order.

    Backtracking over objects in sorted order; a naturality square is
    checked as soon as both of its components are chosen.
    """
    if F.dom != G.dom or F.cod != G.cod:
        raise StructureError("enumerate_nat_transfs: functors are not parallel")
    C = F.cod
    objs = sorted(F.dom.objects)
    pos = {x: i for i, x in enumerate(objs)}
    constraints: dict[int, list[str]] = {i: [] for i in range(len(objs))}
    for m in F.dom.non_identities():
        i = max(pos[F.dom.src(m)], pos[F.dom.tgt(m)])
        constraints[i].append(m)
    out: list[NatTransf] = []
    chosen: dict[str, str] = {}

    def ok_at(i: int) -> bool:
        for m in constraints[i]:
            x, y = F.dom.src(m), F.dom.tgt(m)
            if C.compose(chosen[y], F.mor_map[m]) != C.compose(G.mor_map[m], chosen[x]):
                return False
        return True

    def extend(i: int) -> None:
        if i == len(objs):
            out.append(
                NatTransf(f"{F.name}=>{G.name}#{len(out)}", F, G, dict(chosen))
            )
            return
        x = objs[i]
        for c in C.hom(F.obj_map[x], G.obj_map[x]):
            chosen[x] = c
            if ok_at(i):
                extend(i + 1)
        chosen.pop(x, None)

    extend(0)
    return tuple(out)


def is_fully_faithful(F: FinFunctor) -> ValidationReport:
    """Check that every hom map of F is a bijection, with witnesses."""
    rep = ValidationReport(subject=f"functor {F.name} fully faithful")
    for x in F.dom.objects:
        for y in F.dom.objects:
            image: dict[str, str] = {}
            for f in F.dom.hom(x, y):
                ff = F.mor_map[f]
                if ff in image:
                    rep.add(
                        "faithful", (x, y, image[ff], f),
                        f"{image[ff]} and {f} in hom({x}, {y}) both map to {ff}",
                    )
                image[ff] = f
            for g in F.cod.hom(F.obj_map[x], F.obj_map[y]):
                if g not in image:
                    rep.add("full", (x, y, g), f"{g} is not hit from hom({x}, {y})")
    return rep


# ---------------------------------------------------------------------------
# cones and universal cone search


@dataclass(frozen=True)
class Cone:
    diagram: FinFunctor
    apex: str
    legs: Mapping[str, str]


@dataclass(frozen=True)
class Cocone:
    diagram: FinFunctor
    apex: str
    legs: Mapping[str, str]


def enumerate_cones(D: FinFunctor) -> tuple[Cone, ...]:
    """All cones over D, sorted by (apex, legs) lexicographically."""
    C = D.cod
    J = D.dom
    jobjs = sorted(J.objects)
    pos = {j: i for i, j in enumerate(jobjs)}
    constraints: dict[int, list[str]] = {i: [] for i in range(len(jobjs))}
    for m in J.non_identities():
        i = max(pos[J.src(m)], pos[J.tgt(m)])
        constraints[i].append(m)
    out: list[Cone] = []
    for apex in sorted(C.objects):
        legs: dict[str, str] = {}

        def ok_at(i: int) -> bool:
            for m in constraints[i]:
                j, k = J.src(m), J.tgt(m)
                if C.compose(D.mor_map[m], legs[j]) != legs[k]:
                    return False
            return True

        def extend(i: int, apex: str = apex) -> None:
            if i == len(jobjs):
                out.append(Cone(D, apex, dict(legs)))
                return
            j = jobjs[i]
            for leg in C.hom(apex, D.obj_map[j]):
                legs[j] = leg
                if ok_at(i):
                    extend(i + 1)
            legs.pop(j, None)

        extend(0)
    return tuple(out)


def universal_cone_search(D: FinFunctor) -> Optional[Cone]:
    """Limit cone of D, or None.

    Candidates are scanned in sorted (apex, legs) order and the first
    universal one is returned, so the chosen cone is the lexicographically
    smallest among the (mutually isomorphic) universal cones.
    """
    C = D.cod
    cones = enumerate_cones(D)
    jobjs = sorted(D.dom.objects)
    for cand in cones:
        universal = True
        for other in cones:
            n = 0
            for f in C.hom(other.apex, cand.apex):
                if all(C.compose(cand.legs[j], f) == other.legs[j] for j in jobjs):
                    n += 1
                    if n > 1:
                        break
            if n != 1:
                universal = False
                break
        if universal:
            return cand
    return None


def _dual_diagram(D: FinFunctor) -> FinFunctor:
    return FinFunctor(
        D.name + "^op", opposite(D.dom), opposite(D.cod),
        dict(D.obj_map), dict(D.mor_map),
    )


def universal_cocone_search(D: FinFunctor) -> Optional[Cocone]:
    """Colimit cocone of D, by running the limit search in the dual."""
    cone = universal_cone_search(_dual_diagram(D))
    if cone is None:
        return None
    return Cocone(D, cone.apex, dict(cone.legs))


def is_cofiltered(C: FinCategory) -> ValidationReport:
    """Nonempty, every object pair admits a span into it, and every
    parallel pair admits an incoming equalizing arrow."""
    rep = ValidationReport(subject=f"category {C.name} cofiltered")
    if not C.objects:
        rep.add("nonempty", (), "category has no objects")
        return rep
    for x in C.objects:
        for y in C.objects:
            if not any(
                C.hom(w, x) and C.hom(w, y) for w in C.objects
            ):
                rep.add("span", (x, y), f"no object maps to both {x} and {y}")
    for x in C.objects:
        for y in C.objects:
            arrows = C.hom(x, y)
            for i, f in enumerate(arrows):
                for g in arrows[i + 1:]:
                    if not any(
                        C.compose(f, e) == C.compose(g, e)
                        for w in C.objects
                        for e in C.hom(w, x)
                    ):
                        rep.add(
                            "equalizing-arrow", (f, g),
                            f"parallel pair {f}, {g} is never equalized from the left",
                        )
    return rep


# ---------------------------------------------------------------------------
# computational-category handles


@dataclass(frozen=True)
class HandleDiagram:
    """A diagram in a handle: index category plus value assignments.

    ``mors`` covers the non-identity morphisms of the index; identities
    resolve to identity morphisms of the handle.
    """

    index: FinCategory
    obs: Mapping[str, Obj]
    mors: Mapping[str, Mor]

    def mor_value(self, ops: "ComputationalCategory", m: str) -> Mor:
        if self.index.is_identity(m):
            return ops.identity(self.obs[self.index.src(m)])
        return self.mors[m]


@dataclass
class LimitData:
    apex: Obj
    legs: dict[str, Mor]
    factor: Callable[[Obj, Mapping[str, Mor]], Mor]


@dataclass
class ColimitData:
    apex: Obj
    legs: dict[str, Mor]
    factor: Callable[[Obj, Mapping[str, Mor]], Mor]


class ComputationalCategory(ABC):
    """A category whose objects and homs can be enumerated on demand.

    Enumerations are bounded and deterministic; implementations raise
    ResourceBudgetError rather than truncate.  ``probe_objects`` returns a
    family sufficient for testing equality of generalized elements (a
    separating family); by default that is every enumerated object.
    """

    name: str = "handle"

    @abstractmethod
    def objects(self) -> list[Obj]: ...

    @abstractmethod
    def hom(self, a: Obj, b: Obj) -> list[Mor]: ...

    @abstractmethod
    def identity(self, a: Obj) -> Mor: ...

    @abstractmethod
    def compose(self, g: Mor, f: Mor) -> Mor: ...

    @abstractmethod
    def source(self, m: Mor) -> Obj: ...

    @abstractmethod
    def target(self, m: Mor) -> Obj: ...

    @abstractmethod
    def obj_key(self, a: Obj) -> str: ...

    @abstractmethod
    def mor_key(self, m: Mor) -> str: ...

    @abstractmethod
    def limit(self, diagram: HandleDiagram) -> LimitData: ...

    @abstractmethod
    def colimit(self, diagram: HandleDiagram) -> ColimitData: ...

    def probe_objects(self) -> list[Obj]:
        return self.objects()

    def equal_mor(self, f: Mor, g: Mor) -> bool:
        return f == g

    def try_limit(self, diagram: HandleDiagram) -> Optional[LimitData]:
        try:
            return self.limit(diagram)
        except FactorizationError:
            return None

    def is_iso(self, m: Mor) -> bool:
        a, b = self.source(m), self.target(m)
        for g in self.hom(b, a):
            if self.equal_mor(self.compose(g, m), self.identity(a)) and self.equal_mor(
                self.compose(m, g), self.identity(b)
            ):
                return True
        return False

    def find_iso(self, a: Obj, b: Obj) -> Optional[Mor]:
        for m in self.hom(a, b):
            if self.is_iso(m):
                return m
        return None

    def terminal(self) -> Obj:
        empty = make_category("empty", ())
        return self.limit(HandleDiagram(empty, {}, {})).apex

    def initial(self) -> Obj:
        empty = make_category("empty", ())
        return self.colimit(HandleDiagram(empty, {}, {})).apex


class FinCatHandle(ComputationalCategory):
    """A finite category viewed through the handle interface."""

    def __init__(self, C: FinCategory) -> None:
        self.C = C
        self.name = C.name

    def objects(self) -> list[str]:
        return sorted(self.C.objects)

    def hom(self, a: str, b: str) -> list[str]:
        return list(self.C.hom(a, b))

    def identity(self, a: str) -> str:
        return self.C.id_of(a)

    def compose(self, g: str, f: str) -> str:
        return self.C.compose(g, f)

    def source(self, m: str) -> str:
        return self.C.src(m)

    def target(self, m: str) -> str:
        return self.C.tgt(m)

    def obj_key(self, a: str) -> str:
        return a

    def mor_key(self, m: str) -> str:
        return m

    def _diagram_functor(self, diagram: HandleDiagram) -> FinFunctor:
        mor_map = dict(diagram.mors)
        for x in diagram.index.objects:
            mor_map[diagram.index.id_of(x)] = self.C.id_of(diagram.obs[x])
        return FinFunctor("diagram", diagram.index, self.C, dict(diagram.obs), mor_map)

    def limit(self, diagram: HandleDiagram) -> LimitData:
        cone = universal_cone_search(self._diagram_functor(diagram))
        if cone is None:
            raise FactorizationError(f"{self.name}: diagram has no limit")
        legs = dict(cone.legs)

        def factor(apex2: str, legs2: Mapping[str, str]) -> str:
            hits = [
                f
                for f in self.C.hom(apex2, cone.apex)
                if all(self.C.compose(legs[j], f) == legs2[j] for j in legs)
            ]
            if len(hits) != 1:
                raise FactorizationError(
                    f"{self.name}: expected one mediating morphism, found {len(hits)}"
                )
            return hits[0]

        return LimitData(cone.apex, legs, factor)

    def colimit(self, diagram: HandleDiagram) -> ColimitData:
        cocone = universal_cocone_search(self._diagram_functor(diagram))
        if cocone is None:
            raise FactorizationError(f"{self.name}: diagram has no colimit")
        legs = dict(cocone.legs)

        def factor(apex2: str, legs2: Mapping[str, str]) -> str:
            hits = [
                f
                for f in self.C.hom(cocone.apex, apex2)
                if all(self.C.compose(f, legs[j]) == legs2[j] for j in legs)
            ]
            if len(hits) != 1:
                raise FactorizationError(
                    f"{self.name}: expected one mediating morphism, found {len(hits)}"
                )
            return hits[0]

        return ColimitData(cocone.apex, legs, factor)


@dataclass(frozen=True)
class HandleFunctor:
    """A functor from a finite category into a handle."""

    name: str
    dom: FinCategory
    cod: ComputationalCategory
    obj_map: Mapping[str, Obj]
    mor_map: Mapping[str, Mor]

    def on_obj(self, x: str) -> Obj:
        return self.obj_map[x]

    def on_mor(self, m: str) -> Mor:
        if self.dom.is_identity(m):
            return self.cod.identity(self.obj_map[self.dom.src(m)])
        return self.mor_map[m]


def validate_handle_functor(p: HandleFunctor) -> ValidationReport:
    rep = ValidationReport(subject=f"functor {p.name} into {p.cod.name}")
    Z = p.cod
    for x in p.dom.objects:
        if x not in p.obj_map:
            rep.add("object-map", (x,), f"no value for object {x}")
    for m in p.dom.non_identities():
        if m not in p.mor_map:
            rep.add("morphism-map", (m,), f"no value for morphism {m}")
    if not rep.ok:
        return rep
    for m in p.dom.non_identities():
        pm = p.mor_map[m]
        if Z.obj_key(Z.source(pm)) != Z.obj_key(p.obj_map[p.dom.src(m)]):
            rep.add("endpoints", (m,), f"value of {m} has wrong source")
        if Z.obj_key(Z.target(pm)) != Z.obj_key(p.obj_map[p.dom.tgt(m)]):
            rep.add("endpoints", (m,), f"value of {m} has wrong target")
    if not rep.ok:
        return rep
    for g, f in p.dom.composable_pairs():
        lhs = p.on_mor(p.dom.compose(g, f))
        rhs = Z.compose(p.on_mor(g), p.on_mor(f))
        if not Z.equal_mor(lhs, rhs):
            rep.add("composition", (g, f), f"value of {g}.{f} differs from composite")
    return rep


def is_handle_fully_faithful(p: HandleFunctor) -> ValidationReport:
    """Faithfulness and fullness of a handle-valued functor, hom by hom."""
    rep = ValidationReport(subject=f"functor {p.name} into {p.cod.name}")
    Z = p.cod
    for x in p.dom.objects:
        for y in p.dom.objects:
            dom_hom = p.dom.hom(x, y)
            images = [p.on_mor(m) for m in dom_hom]
            for i in range(len(images)):
                for j in range(i + 1, len(images)):
                    if Z.equal_mor(images[i], images[j]):
                        rep.add(
                            "faithful",
                            (dom_hom[i], dom_hom[j]),
                            f"{dom_hom[i]} and {dom_hom[j]} collapse",
                        )
            cod_hom = Z.hom(p.obj_map[x], p.obj_map[y])
            for w in cod_hom:
                if not any(Z.equal_mor(w, im) for im in images):
                    rep.add("full", (x, y), f"a map {x}->{y} downstairs has no preimage")
    return rep
