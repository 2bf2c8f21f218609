"""Presheaves on a finite category, as explicit value and action tables.

A presheaf F assigns to each object a finite set of string labels and to
each morphism f: X -> Y a function F(f): F(Y) -> F(X); composites act in
reversed order, F(g.f) = F(f) after F(g).  The module provides:

* validation, morphism enumeration, and isomorphism search;
* the representable embedding (one presheaf per object, one morphism per
  arrow) together with the two directions of the evaluation bijection
  between morphisms out of a representable and elements of the target;
* the category of elements of a presheaf with its projection and the
  canonical representable cocone over it;
* pointwise limits and colimits with constructive mediating morphisms,
  quotients taken by union-find with smallest-member class labels;
* the density check: the canonical map from the colimit of representables
  over the category of elements back to the presheaf, verified invertible;
* a bounded presheaf-category handle implementing the computational
  category interface, and finite sets as the special case of presheaves
  on the one-object, one-morphism category.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

from .errors import FactorizationError, ResourceBudgetError, StructureError
from .fincat import (
    ColimitData,
    ComputationalCategory,
    FinCategory,
    FinFunctor,
    HandleDiagram,
    HandleFunctor,
    LimitData,
    Morphism,
    ValidationReport,
    make_category,
    terminal_category,
)

# ---------------------------------------------------------------------------
# presheaves and their morphisms


@dataclass(frozen=True)
class Presheaf:
    """Value sets indexed by objects, actions indexed by morphisms.

    ``actions[f]`` maps each element of values[tgt f] to an element of
    values[src f]; the table covers every morphism, identities included.
    """

    base: FinCategory
    values: Mapping[str, tuple[str, ...]]
    actions: Mapping[str, Mapping[str, str]]
    name: str = field(default="", compare=False)

    def at(self, x: str) -> tuple[str, ...]:
        return self.values[x]

    def act(self, f: str, e: str) -> str:
        return self.actions[f][e]

    def total_size(self) -> int:
        return sum(len(v) for v in self.values.values())


def make_presheaf(
    base: FinCategory,
    values: Mapping[str, Sequence[str]],
    actions: Mapping[str, Mapping[str, str]] | None = None,
    name: str = "",
) -> Presheaf:
    """Sort value tuples and fill in the identity actions."""
    vals = {x: tuple(sorted(values.get(x, ()))) for x in base.objects}
    acts: dict[str, dict[str, str]] = {}
    for m in base.morphisms:
        if base.is_identity(m.name):
            acts[m.name] = {e: e for e in vals[m.src]}
        else:
            acts[m.name] = dict((actions or {}).get(m.name, {}))
    return Presheaf(base, vals, acts, name)


def validate_presheaf(F: Presheaf) -> ValidationReport:
    rep = ValidationReport(subject=f"presheaf {F.name or '<unnamed>'}")
    C = F.base
    for x in C.objects:
        if x not in F.values:
            rep.add("values-missing", (x,), f"no value set at {x}")
            continue
        vs = F.values[x]
        if len(set(vs)) != len(vs):
            rep.add("labels-unique", (x,), f"duplicate labels at {x}")
    for k in F.values:
        if k not in C.objects:
            rep.add("values-extra", (k,), f"value set at unknown object {k}")
    if not rep.ok:
        return rep
    for m in C.morphisms:
        act = F.actions.get(m.name)
        if act is None:
            rep.add("action-missing", (m.name,), f"no action for {m.name}")
            continue
        dom, cod = set(F.values[m.tgt]), set(F.values[m.src])
        if set(act) != dom:
            rep.add("action-total", (m.name,), f"action of {m.name} not defined on exactly F({m.tgt})")
            continue
        if not set(act.values()) <= cod:
            rep.add("action-typing", (m.name,), f"action of {m.name} leaves F({m.src})")
    if not rep.ok:
        return rep
    for x in C.objects:
        i = C.id_of(x)
        if any(F.actions[i][e] != e for e in F.values[x]):
            rep.add("identity-action", (x,), f"action of id_{x} is not the identity")
    for g, f in C.composable_pairs():
        c = C.compose(g, f)
        gm = C.mor(g)
        for e in F.values[gm.tgt]:
            if F.actions[c][e] != F.actions[f][F.actions[g][e]]:
                rep.add(
                    "contravariance", (g, f, e),
                    f"F({g}.{f})({e}) differs from F({f})(F({g})({e}))",
                )
    return rep


@dataclass(frozen=True)
class PresheafMorphism:
    """A natural family of functions dom(X) -> cod(X)."""

    dom: Presheaf
    cod: Presheaf
    components: Mapping[str, Mapping[str, str]]
    name: str = field(default="", compare=False)

    def apply(self, x: str, e: str) -> str:
        return self.components[x][e]


def validate_presheaf_morphism(t: PresheafMorphism) -> ValidationReport:
    rep = ValidationReport(subject=f"presheaf morphism {t.name or '<unnamed>'}")
    if t.dom.base != t.cod.base:
        rep.add("frame", (), "domain and codomain live on different base categories")
        return rep
    C = t.dom.base
    for x in C.objects:
        comp = t.components.get(x)
        if comp is None:
            rep.add("component-missing", (x,), f"no component at {x}")
            continue
        if set(comp) != set(t.dom.values[x]):
            rep.add("component-total", (x,), f"component at {x} not defined on exactly dom({x})")
            continue
        if not set(comp.values()) <= set(t.cod.values[x]):
            rep.add("component-typing", (x,), f"component at {x} leaves cod({x})")
    if not rep.ok:
        return rep
    for m in C.non_identities():
        x, y = C.src(m), C.tgt(m)
        for e in t.dom.values[y]:
            if t.components[x][t.dom.act(m, e)] != t.cod.act(m, t.components[y][e]):
                rep.add("naturality", (m, e), f"square at {m} fails on {e}")
    return rep


def presheaf_identity(F: Presheaf) -> PresheafMorphism:
    return PresheafMorphism(
        F, F, {x: {e: e for e in F.values[x]} for x in F.base.objects}, f"1_{F.name}"
    )


def compose_presheaf_morphisms(g: PresheafMorphism, f: PresheafMorphism) -> PresheafMorphism:
    if f.cod != g.dom:
        raise StructureError("compose_presheaf_morphisms: middle presheaf differs")
    return PresheafMorphism(
        f.dom, g.cod,
        {
            x: {e: g.components[x][f.components[x][e]] for e in f.dom.values[x]}
            for x in f.dom.base.objects
        },
    )


def is_presheaf_iso(t: PresheafMorphism) -> bool:
    for x in t.dom.base.objects:
        comp = t.components[x]
        if len(set(comp.values())) != len(comp) or len(comp) != len(t.cod.values[x]):
            return False
    return True


def invert_presheaf_iso(t: PresheafMorphism) -> PresheafMorphism:
    if not is_presheaf_iso(t):
        raise StructureError("invert_presheaf_iso: morphism is not invertible")
    return PresheafMorphism(
        t.cod, t.dom,
        {x: {v: k for k, v in t.components[x].items()} for x in t.dom.base.objects},
    )


def enumerate_presheaf_morphisms(
    F: Presheaf, G: Presheaf, *, budget: Optional[int] = None
) -> tuple[PresheafMorphism, ...]:
    """All natural families F -> G by backtracking over objects.

    The worst-case candidate count is the product over objects of
    |G(X)| ** |F(X)|; if a budget is given and the product exceeds it the
    search refuses up front rather than truncating.
    """
    if F.base != G.base:
        raise StructureError("enumerate_presheaf_morphisms: different base categories")
    C = F.base
    objs = sorted(C.objects)
    if budget is not None:
        total = 1
        for x in objs:
            total *= max(1, len(G.values[x])) ** len(F.values[x])
            if total > budget:
                raise ResourceBudgetError("enumerate_presheaf_morphisms", total, budget)
    pos = {x: i for i, x in enumerate(objs)}
    constraints: dict[int, list[str]] = {i: [] for i in range(len(objs))}
    for m in C.non_identities():
        i = max(pos[C.src(m)], pos[C.tgt(m)])
        constraints[i].append(m)
    out: list[PresheafMorphism] = []
    chosen: dict[str, dict[str, str]] = {}

    def ok_at(i: int) -> bool:
        for m in constraints[i]:
            x, y = C.src(m), C.tgt(m)
            cx, cy = chosen[x], chosen[y]
            for e in F.values[y]:
                if cx[F.actions[m][e]] != G.actions[m][cy[e]]:
                    return False
        return True

    def extend(i: int) -> None:
        if i == len(objs):
            out.append(PresheafMorphism(F, G, {x: dict(c) for x, c in chosen.items()}))
            return
        x = objs[i]
        dom_elems = F.values[x]
        for combo in itertools.product(G.values[x], repeat=len(dom_elems)):
            chosen[x] = dict(zip(dom_elems, combo))
            if ok_at(i):
                extend(i + 1)
        chosen.pop(x, None)

    extend(0)
    return tuple(out)


def find_presheaf_iso(F: Presheaf, G: Presheaf) -> Optional[PresheafMorphism]:
    """First natural isomorphism F -> G in lexicographic order, or None."""
    if F.base != G.base:
        return None
    C = F.base
    objs = sorted(C.objects)
    if any(len(F.values[x]) != len(G.values[x]) for x in objs):
        return None
    pos = {x: i for i, x in enumerate(objs)}
    constraints: dict[int, list[str]] = {i: [] for i in range(len(objs))}
    for m in C.non_identities():
        i = max(pos[C.src(m)], pos[C.tgt(m)])
        constraints[i].append(m)
    chosen: dict[str, dict[str, str]] = {}

    def ok_at(i: int) -> bool:
        for m in constraints[i]:
            x, y = C.src(m), C.tgt(m)
            cx, cy = chosen[x], chosen[y]
            for e in F.values[y]:
                if cx[F.actions[m][e]] != G.actions[m][cy[e]]:
                    return False
        return True

    def extend(i: int) -> Optional[PresheafMorphism]:
        if i == len(objs):
            return PresheafMorphism(F, G, {x: dict(c) for x, c in chosen.items()})
        x = objs[i]
        for perm in itertools.permutations(G.values[x]):
            chosen[x] = dict(zip(F.values[x], perm))
            if ok_at(i):
                found = extend(i + 1)
                if found is not None:
                    return found
        chosen.pop(x, None)
        return None

    return extend(0)


def presheaf_key(F: Presheaf) -> str:
    """Canonical content string; names do not contribute."""
    vs = ";".join(f"{x}:{','.join(F.values[x])}" for x in sorted(F.values))
    acts = ";".join(
        f"{m}:{','.join(f'{e}>{F.actions[m][e]}' for e in sorted(F.actions[m]))}"
        for m in sorted(F.actions)
    )
    return f"{F.base.name}|{vs}|{acts}"


def short_key(F: Presheaf) -> str:
    if F.name:
        return F.name
    digest = hashlib.sha256(presheaf_key(F).encode()).hexdigest()[:10]
    return f"P#{digest}"


# ---------------------------------------------------------------------------
# representables


def yoneda_embed(C: FinCategory, X: str) -> Presheaf:
    """The presheaf of arrows into X; elements are the arrow names."""
    # requested in every enumeration loop; immutable, so share per base
    hit = C._derived.get(("repr", X))
    if hit is not None:
        return hit
    values = {Y: tuple(sorted(C.hom(Y, X))) for Y in C.objects}
    actions: dict[str, dict[str, str]] = {}
    for m in C.morphisms:
        actions[m.name] = {g: C.compose(g, m.name) for g in values[m.tgt]}
    F = Presheaf(C, values, actions, f"h_{X}")
    C._derived[("repr", X)] = F
    return F


def yoneda_on_mor(C: FinCategory, u: str) -> PresheafMorphism:
    """Postcomposition with u, as a morphism of representables."""
    hx = yoneda_embed(C, C.src(u))
    hy = yoneda_embed(C, C.tgt(u))
    comps = {
        Y: {g: C.compose(u, g) for g in hx.values[Y]} for Y in C.objects
    }
    return PresheafMorphism(hx, hy, comps, f"h[{u}]")


def yoneda_forward(C: FinCategory, X: str, t: PresheafMorphism) -> str:
    """Evaluate a morphism out of the representable of X at the identity."""
    return t.components[X][C.id_of(X)]


def yoneda_backward(C: FinCategory, X: str, F: Presheaf, elem: str) -> PresheafMorphism:
    """The morphism out of the representable of X classified by an element.

    Component at Y sends g: Y -> X to the action of g on the element.
    """
    hx = yoneda_embed(C, X)
    comps = {Y: {g: F.actions[g][elem] for g in hx.values[Y]} for Y in C.objects}
    return PresheafMorphism(hx, F, comps, f"<{elem}@{X}>")


def representing_object(F: Presheaf) -> Optional[str]:
    for X in sorted(F.base.objects):
        if find_presheaf_iso(yoneda_embed(F.base, X), F) is not None:
            return X
    return None


# ---------------------------------------------------------------------------
# category of elements


@dataclass(frozen=True)
class ElementsCategory:
    """The category of elements of a presheaf.

    Objects are ``elem@obj`` pairs; an arrow from (x, X) to (y, Y) is a base
    arrow f: X -> Y whose action sends y back to x, named ``f|y``.
    ``diamond`` sends each pair to the representable of its base object;
    ``lam`` is the canonical cocone from those representables back to F.
    """

    presheaf: Presheaf
    gamma: FinCategory
    projection: FinFunctor
    obj_elem: Mapping[str, tuple[str, str]]
    diamond: HandleFunctor
    lam: Mapping[str, PresheafMorphism]


def element_node(elem: str, obj: str) -> str:
    return f"{elem}@{obj}"


def category_of_elements(F: Presheaf, handle: Optional["PresheafCategory"] = None) -> ElementsCategory:
    C = F.base
    nodes: list[str] = []
    obj_elem: dict[str, tuple[str, str]] = {}
    for X in C.objects:
        for e in F.values[X]:
            n = element_node(e, X)
            nodes.append(n)
            obj_elem[n] = (e, X)
    arrows: list[tuple[str, str, str]] = []
    arrow_data: dict[str, tuple[str, str]] = {}
    for f in C.non_identities():
        X, Y = C.src(f), C.tgt(f)
        for y in F.values[Y]:
            name = f"{f}|{y}"
            arrows.append((name, element_node(F.actions[f][y], X), element_node(y, Y)))
            arrow_data[name] = (f, y)
    compose: dict[tuple[str, str], str] = {}
    for gname, (g, y2) in arrow_data.items():
        for fname, (f, y1) in arrow_data.items():
            # g-arrow after f-arrow: target pair of f-arrow is source pair of g-arrow
            if C.src(g) != C.tgt(f) or F.actions[g][y2] != y1:
                continue
            c = C.compose(g, f)
            if C.is_identity(c):
                src_node = element_node(F.actions[f][y1], C.src(f))
                compose[(gname, fname)] = f"id_{src_node}"
            else:
                compose[(gname, fname)] = f"{c}|{y2}"
    gamma = make_category(f"el({F.name or 'F'})", nodes, arrows, compose)
    proj_obj = {n: obj_elem[n][1] for n in nodes}
    proj_mor = {f"id_{n}": C.id_of(obj_elem[n][1]) for n in nodes}
    for name, (f, _) in arrow_data.items():
        proj_mor[name] = f
    projection = FinFunctor(f"proj({F.name or 'F'})", gamma, C, proj_obj, proj_mor)
    if handle is None:
        bound = max(
            [len(v) for v in F.values.values()]
            + [len(C.hom(a, b)) for a in C.objects for b in C.objects]
            + [1]
        )
        handle = PresheafCategory(C, bound=bound)
    diamond = HandleFunctor(
        f"rep({F.name or 'F'})", gamma, handle,
        {n: yoneda_embed(C, obj_elem[n][1]) for n in nodes},
        {name: yoneda_on_mor(C, f) for name, (f, _) in arrow_data.items()},
    )
    lam = {
        n: yoneda_backward(C, obj_elem[n][1], F, obj_elem[n][0]) for n in nodes
    }
    return ElementsCategory(F, gamma, projection, obj_elem, diamond, lam)


# ---------------------------------------------------------------------------
# union-find


class UnionFind:
    """Disjoint sets over strings with path compression."""

    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def add(self, x: str) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def classes(self) -> dict[str, list[str]]:
        """Members grouped under the smallest member as canonical label."""
        groups: dict[str, list[str]] = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return {min(members): sorted(members) for members in groups.values()}


# ---------------------------------------------------------------------------
# pointwise limits and colimits


def _diagram_presheaves(diagram: HandleDiagram) -> dict[str, Presheaf]:
    return {j: diagram.obs[j] for j in diagram.index.objects}


def presheaf_colimit(diagram: HandleDiagram) -> ColimitData:
    """Pointwise colimit: disjoint union quotiented by the arrow actions.

    Class labels are the smallest member strings ``j:e``; legs send each
    element to its class, and the mediating morphism out of the apex is
    read off class representatives (checked for cocone consistency).
    """
    J = diagram.index
    obs = _diagram_presheaves(diagram)
    base = next(iter(obs.values())).base if obs else None
    if base is None:
        raise StructureError("presheaf_colimit: empty diagram needs an explicit base; use the handle")
    # union-find per base object
    class_of: dict[str, dict[tuple[str, str], str]] = {}
    members_of: dict[str, dict[str, list[tuple[str, str]]]] = {}
    values: dict[str, tuple[str, ...]] = {}
    for A in base.objects:
        uf = UnionFind()
        decode: dict[str, tuple[str, str]] = {}
        for j in sorted(obs):
            for e in obs[j].values[A]:
                key = f"{j}:{e}"
                uf.add(key)
                decode[key] = (j, e)
        for m in J.non_identities():
            j, k = J.src(m), J.tgt(m)
            t = diagram.mors[m]
            for e in obs[j].values[A]:
                uf.union(f"{j}:{e}", f"{k}:{t.components[A][e]}")
        groups = uf.classes()
        values[A] = tuple(sorted(groups))
        cls: dict[tuple[str, str], str] = {}
        mems: dict[str, list[tuple[str, str]]] = {}
        for label, members in groups.items():
            mems[label] = [decode[m] for m in members]
            for m in members:
                cls[decode[m]] = label
        class_of[A] = cls
        members_of[A] = mems
    actions: dict[str, dict[str, str]] = {}
    for m in base.morphisms:
        X, Y = m.src, m.tgt
        act: dict[str, str] = {}
        for label in values[Y]:
            j, e = members_of[Y][label][0]
            act[label] = class_of[X][(j, obs[j].actions[m.name][e])]
        actions[m.name] = act
    apex = Presheaf(base, values, actions, "colim")
    legs = {
        j: PresheafMorphism(
            obs[j], apex,
            {A: {e: class_of[A][(j, e)] for e in obs[j].values[A]} for A in base.objects},
        )
        for j in sorted(obs)
    }

    def factor(apex2: Presheaf, legs2: Mapping[str, PresheafMorphism]) -> PresheafMorphism:
        comps: dict[str, dict[str, str]] = {}
        for A in base.objects:
            comp: dict[str, str] = {}
            for label in values[A]:
                images = {legs2[j].components[A][e] for j, e in members_of[A][label]}
                if len(images) != 1:
                    raise FactorizationError(
                        f"colimit factoring: cocone legs disagree on class {label} at {A}"
                    )
                comp[label] = images.pop()
            comps[A] = comp
        return PresheafMorphism(apex, apex2, comps)

    return ColimitData(apex, legs, factor)


def presheaf_limit(diagram: HandleDiagram) -> LimitData:
    """Pointwise limit: compatible tuples, labeled by their coordinates."""
    J = diagram.index
    obs = _diagram_presheaves(diagram)
    base = next(iter(obs.values())).base if obs else None
    if base is None:
        raise StructureError("presheaf_limit: empty diagram needs an explicit base; use the handle")
    jobjs = sorted(obs)
    constraints: list[tuple[str, str, str]] = [
        (m, J.src(m), J.tgt(m)) for m in J.non_identities()
    ]
    tuples: dict[str, list[dict[str, str]]] = {}
    for A in base.objects:
        found: list[dict[str, str]] = []
        assign: dict[str, str] = {}

        def ok() -> bool:
            for m, j, k in constraints:
                if j in assign and k in assign:
                    if diagram.mors[m].components[A][assign[j]] != assign[k]:
                        return False
            return True

        def extend(i: int) -> None:
            if i == len(jobjs):
                found.append(dict(assign))
                return
            j = jobjs[i]
            for e in obs[j].values[A]:
                assign[j] = e
                if ok():
                    extend(i + 1)
            assign.pop(j, None)

        extend(0)
        tuples[A] = found

    def label_of(t: Mapping[str, str]) -> str:
        return "(" + ",".join(f"{j}={t[j]}" for j in jobjs) + ")"

    values = {A: tuple(sorted(label_of(t) for t in tuples[A])) for A in base.objects}
    decode = {
        A: {label_of(t): t for t in tuples[A]} for A in base.objects
    }
    actions: dict[str, dict[str, str]] = {}
    for m in base.morphisms:
        X, Y = m.src, m.tgt
        act = {}
        for label in values[Y]:
            t = decode[Y][label]
            act[label] = label_of({j: obs[j].actions[m.name][t[j]] for j in jobjs})
        actions[m.name] = act
    apex = Presheaf(base, values, actions, "lim")
    legs = {
        j: PresheafMorphism(
            apex, obs[j],
            {A: {label: decode[A][label][j] for label in values[A]} for A in base.objects},
        )
        for j in jobjs
    }

    def factor(apex2: Presheaf, legs2: Mapping[str, PresheafMorphism]) -> PresheafMorphism:
        comps: dict[str, dict[str, str]] = {}
        for A in base.objects:
            comp = {}
            for e in apex2.values[A]:
                t = {j: legs2[j].components[A][e] for j in jobjs}
                lab = label_of(t)
                if lab not in decode[A]:
                    raise FactorizationError(
                        f"limit factoring: cone legs give an incompatible tuple at {A}"
                    )
                comp[e] = lab
            comps[A] = comp
        return PresheafMorphism(apex2, apex, comps)

    return LimitData(apex, legs, factor)


# ---------------------------------------------------------------------------
# density


@dataclass
class DensityReport:
    ok: bool
    comparison: Optional[PresheafMorphism]
    detail: str

    def to_dict(self) -> dict:
        return {"ok": self.ok, "detail": self.detail}


def density_check(F: Presheaf) -> DensityReport:
    """Rebuild F as the colimit of representables over its elements.

    Computes the colimit of the representable-valued diagram on the
    category of elements, factors the canonical cocone through it, and
    checks the mediating morphism is an isomorphism.
    """
    els = category_of_elements(F)
    diagram = HandleDiagram(
        els.gamma,
        dict(els.diamond.obj_map),
        dict(els.diamond.mor_map),
    )
    if not els.obj_elem:
        # empty presheaf: colimit over the empty diagram is empty pointwise
        empty = make_presheaf(F.base, {x: () for x in F.base.objects}, name="colim")
        ok = all(len(F.values[x]) == 0 for x in F.base.objects)
        comp = PresheafMorphism(empty, F, {x: {} for x in F.base.objects})
        return DensityReport(ok, comp if ok else None, "empty elements category")
    colim = presheaf_colimit(diagram)
    comparison = colim.factor(F, els.lam)
    if not is_presheaf_iso(comparison):
        return DensityReport(False, comparison, "comparison is not invertible")
    rep = validate_presheaf_morphism(comparison)
    if not rep.ok:
        return DensityReport(False, comparison, "comparison is not natural")
    return DensityReport(True, comparison, "comparison is a natural bijection")


# ---------------------------------------------------------------------------
# bounded enumeration of presheaves


def enumerate_presheaves(
    C: FinCategory, bound: int, *, max_count: Optional[int] = None
) -> list[Presheaf]:
    """Every presheaf with value sets of size <= bound, canonically labeled.

    Value labels are e0, e1, ... per object.  Actions are chosen by
    backtracking over integer tuples; a composite whose two factors are
    already assigned is derived instead of searched, and the remaining
    composition constraints are checked pointwise with early exit.  Raises
    rather than truncates when max_count is exceeded.
    """
    objs = sorted(C.objects)
    mors = sorted(C.non_identities())
    pos = {m: i for i, m in enumerate(mors)}
    triples: list[tuple[str, str, str]] = []
    for g, f in C.composable_pairs():
        c = C.compose(g, f)
        if not (C.is_identity(g) and C.is_identity(f)):
            triples.append((g, f, c))
    # derivation: first factorization of mors[i] by two earlier non-identities
    derive: dict[int, tuple[str, str]] = {}
    for i, m in enumerate(mors):
        for g, f, c in triples:
            if c == m and g in pos and f in pos and pos[g] < i and pos[f] < i:
                derive[i] = (g, f)
                break
    checks: dict[int, list[tuple[str, str, str]]] = {i: [] for i in range(len(mors))}
    for g, f, c in triples:
        idx = [pos[m] for m in (g, f, c) if m in pos]
        i = max(idx) if idx else None
        if i is not None and derive.get(i) != (g, f):
            checks[i].append((g, f, c))

    results: list[Presheaf] = []
    src_of = {m: C.src(m) for m in mors}
    tgt_of = {m: C.tgt(m) for m in mors}
    ids = {x: C.id_of(x) for x in objs}

    for sizes in itertools.product(range(bound + 1), repeat=len(objs)):
        size = dict(zip(objs, sizes))
        if any(size[tgt_of[m]] > 0 and size[src_of[m]] == 0 for m in mors):
            continue
        acts: dict[str, tuple[int, ...]] = {
            ids[x]: tuple(range(size[x])) for x in objs
        }

        def passes(i: int) -> bool:
            for g, f, c in checks[i]:
                ga, fa, ca = acts[g], acts[f], acts[c]
                for e in range(len(ga)):
                    if ca[e] != fa[ga[e]]:
                        return False
            return True

        def emit() -> None:
            if max_count is not None and len(results) >= max_count:
                raise ResourceBudgetError("enumerate_presheaves", len(results) + 1, max_count)
            values = {x: tuple(f"e{k}" for k in range(size[x])) for x in objs}
            actions = {
                m: {f"e{k}": f"e{t[k]}" for k in range(len(t))}
                for m, t in acts.items()
            }
            results.append(Presheaf(C, values, actions))

        def extend(i: int) -> None:
            if i == len(mors):
                emit()
                return
            m = mors[i]
            n_dom = size[tgt_of[m]]
            n_cod = size[src_of[m]]
            if i in derive:
                g, f = derive[i]
                ga, fa = acts[g], acts[f]
                acts[m] = tuple(fa[ga[e]] for e in range(n_dom))
                if passes(i):
                    extend(i + 1)
                del acts[m]
                return
            for combo in itertools.product(range(n_cod), repeat=n_dom):
                acts[m] = combo
                if passes(i):
                    extend(i + 1)
            acts.pop(m, None)

        extend(0)
    return results


# ---------------------------------------------------------------------------
# the presheaf category handle


class PresheafCategory(ComputationalCategory):
    """Presheaves on a fixed base with value sets of size <= bound.

    Enumeration of objects and homs is exact within the declared bounds;
    exceeding ``max_objects`` or ``hom_budget`` raises ResourceBudgetError.
    Probe objects are the representables: a separating family, since
    morphisms are determined pointwise by their values on elements and
    every element is classified by a map out of a representable.
    """

    def __init__(
        self,
        base: FinCategory,
        bound: int = 2,
        *,
        max_objects: int = 200_000,
        hom_budget: int = 2_000_000,
        name: str = "",
    ) -> None:
        self.base = base
        self.bound = bound
        self.max_objects = max_objects
        self.hom_budget = hom_budget
        self.name = name or f"PSh({base.name})<= {bound}".replace(" ", "")
        self._objects: Optional[list[Presheaf]] = None
        self._hom_memo: dict[tuple[str, str], tuple[PresheafMorphism, ...]] = {}

    def objects(self) -> list[Presheaf]:
        if self._objects is None:
            self._objects = enumerate_presheaves(
                self.base, self.bound, max_count=self.max_objects
            )
        return self._objects

    def probe_objects(self) -> list[Presheaf]:
        return [yoneda_embed(self.base, X) for X in sorted(self.base.objects)]

    def hom(self, a: Presheaf, b: Presheaf) -> list[PresheafMorphism]:
        # names feed mor_key, so same-content objects must not share a slot
        k = (a.name, presheaf_key(a), b.name, presheaf_key(b))
        if k not in self._hom_memo:
            self._hom_memo[k] = enumerate_presheaf_morphisms(a, b, budget=self.hom_budget)
        return list(self._hom_memo[k])

    def identity(self, a: Presheaf) -> PresheafMorphism:
        return presheaf_identity(a)

    def compose(self, g: PresheafMorphism, f: PresheafMorphism) -> PresheafMorphism:
        return compose_presheaf_morphisms(g, f)

    def source(self, m: PresheafMorphism) -> Presheaf:
        return m.dom

    def target(self, m: PresheafMorphism) -> Presheaf:
        return m.cod

    def obj_key(self, a: Presheaf) -> str:
        return short_key(a)

    def mor_key(self, m: PresheafMorphism) -> str:
        comps = ";".join(
            f"{x}:{','.join(f'{e}>{m.components[x][e]}' for e in sorted(m.components[x]))}"
            for x in sorted(m.components)
        )
        return f"{short_key(m.dom)}->{short_key(m.cod)}[{comps}]"

    def equal_mor(self, f: PresheafMorphism, g: PresheafMorphism) -> bool:
        return f.components == g.components

    def limit(self, diagram: HandleDiagram) -> LimitData:
        if not diagram.index.objects:
            apex = constant_presheaf(self.base, ["()"], name="1")
            return LimitData(
                apex, {}, lambda a2, l2: PresheafMorphism(
                    a2, apex,
                    {x: {e: "()" for e in a2.values[x]} for x in self.base.objects},
                ),
            )
        return presheaf_limit(diagram)

    def colimit(self, diagram: HandleDiagram) -> ColimitData:
        if not diagram.index.objects:
            apex = constant_presheaf(self.base, [], name="0")
            return ColimitData(
                apex, {}, lambda a2, l2: PresheafMorphism(
                    apex, a2, {x: {} for x in self.base.objects},
                ),
            )
        return presheaf_colimit(diagram)

    def is_iso(self, m: PresheafMorphism) -> bool:
        return is_presheaf_iso(m)

    def find_iso(self, a: Presheaf, b: Presheaf) -> Optional[PresheafMorphism]:
        return find_presheaf_iso(a, b)


def presheaf_category(C: FinCategory, bound: int = 2, **kw) -> PresheafCategory:
    return PresheafCategory(C, bound, **kw)


# ---------------------------------------------------------------------------
# finite sets as presheaves on the point


def finset_category(bound: int = 3, **kw) -> PresheafCategory:
    return PresheafCategory(terminal_category(), bound, name=f"FinSet<={bound}", **kw)


def finset_obj(labels: Sequence[str], name: str = "") -> Presheaf:
    return make_presheaf(terminal_category(), {"*": tuple(labels)}, name=name)


def finset_map(dom: Presheaf, cod: Presheaf, mapping: Mapping[str, str]) -> PresheafMorphism:
    return PresheafMorphism(dom, cod, {"*": dict(mapping)})


def finset_value(P: Presheaf) -> tuple[str, ...]:
    return P.values["*"]


def constant_presheaf(C: FinCategory, labels: Sequence[str], name: str = "") -> Presheaf:
    vals = {x: tuple(sorted(labels)) for x in C.objects}
    acts = {m.name: {e: e for e in vals[m.tgt]} for m in C.morphisms}
    return Presheaf(C, vals, acts, name)
