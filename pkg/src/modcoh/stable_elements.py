"""Cohomology of a finite group as stable elements in its Sylow 2-subgroup.

A group ``G`` with Sylow subgroup ``S`` is represented by the image ring
``R_G ⊆ H•(S)``: a presentation whose generators carry their images as
cocycles of ``S``, and, per degree, the subspace ``R_G^k ⊆ H^k(S)``.  For
``H ≤ G`` of odd index, ``R_G`` is cut out of ``R_H`` by one condition per
double coset ``HgH``: for ``K = H^g ∩ H`` the maps ``k -> k`` and
``k -> g k g^-1`` from ``K`` to ``H`` must induce the same map on
cohomology.  Both maps are compared after restriction to a Sylow subgroup
``T`` of ``K`` (restriction to a Sylow subgroup is injective), conjugated
into ``S`` by a correcting element of ``H``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import permgroup as pg
from .gf2 import BitMatrix, IntEchelon, SubspaceBasis, intersect_subspaces, nullspace_basis, solve_linear, vec_to_int
from .graded_ring import (
    GradedPolynomial,
    GroebnerData,
    ParameterSystem,
    PresentationBuilder,
    RingPresentation,
    dickson_invariants,
    filter_regular_test,
    regular_sequence_test,
)
from .permgroup import Permutation, PermutationGroup
from .resolution import (
    Cocycle,
    CohomologyRing,
    Homomorphism,
    InducedMap,
    MinimalResolution,
    omega_center,
    ring_presentation_pgroup,
)

log = logging.getLogger(__name__)

ALL_RULES = frozenset("abcde")


class StableElementsError(RuntimeError):
    pass


def _mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# caches


class ResolutionCache:
    """One canonical group object and resolution per subgroup (as a point set)."""

    def __init__(self, max_order: int = 256):
        self.max_order = max_order
        self._groups: dict[bytes, tuple[PermutationGroup, MinimalResolution]] = {}
        self._maps: dict[tuple, InducedMap] = {}

    def get(self, group: PermutationGroup, degree: int) -> tuple[PermutationGroup, MinimalResolution]:
        key = group.canonical_key()
        hit = self._groups.get(key)
        if hit is None:
            hit = (group, MinimalResolution(group, 0, max_order=self.max_order))
            self._groups[key] = hit
        hit[1].extend(degree)
        return hit

    def induced(self, psi: Homomorphism, rp: MinimalResolution, rq: MinimalResolution) -> InducedMap:
        key = (psi.source.canonical_key(), psi.target.canonical_key(),
               tuple(p.key() for p in psi.images))
        hit = self._maps.get(key)
        if hit is None:
            hit = InducedMap(psi, rp, rq)
            self._maps[key] = hit
        return hit


# ---------------------------------------------------------------------------
# represented cohomology


@dataclass
class RepresentedCohomology:
    """``R_G ⊆ H•(S)`` through degree ``degree``."""

    group: PermutationGroup
    sylow: PermutationGroup
    sylow_ring: CohomologyRing
    presentation: RingPresentation
    images: list  # Cocycles of the Sylow subgroup, one per generator
    spaces: list  # SubspaceBasis of H^k(S) per degree
    degree: int
    cache: ResolutionCache
    journal: list = field(default_factory=list)

    def dims(self) -> list[int]:
        return [s.dim for s in self.spaces]

    def basis(self, k: int) -> np.ndarray:
        return self.spaces[k].vectors()

    def coordinates(self, k: int, vec: np.ndarray) -> np.ndarray:
        """Coordinates of ``vec`` in the basis of ``R^k``."""
        b = self.basis(k)
        if b.shape[0] == 0:
            if np.any(vec):
                raise StableElementsError("vector outside the represented ring")
            return np.zeros(0, dtype=np.uint8)
        x = solve_linear(BitMatrix.from_dense(b.T), np.asarray(vec, dtype=np.uint8))
        if x is None:
            raise StableElementsError("vector outside the represented ring")
        return x

    def contains(self, k: int, vec: np.ndarray) -> bool:
        return self.spaces[k].contains(np.asarray(vec, dtype=np.uint8))

    def multiply(self, x: Cocycle, y: Cocycle) -> Cocycle:
        return self.sylow_ring.cup(x, y)

    def express(self, vec: np.ndarray, k: int) -> GradedPolynomial:
        """``vec ∈ R^k`` as a polynomial in the ring generators."""
        return express_in_presentation(self.presentation, self.images, self.sylow_ring, vec, k)


def _monomial_image(images: Sequence[Cocycle], ring: CohomologyRing, m, memo: dict) -> np.ndarray:
    m = tuple(m)
    if m in memo:
        return memo[m]
    if sum(m) == 0:
        out = np.array([1], dtype=np.uint8)
    else:
        i = max(j for j in range(len(m)) if m[j])
        q = m[:i] + (m[i] - 1,) + m[i + 1:]
        inner = _monomial_image(images, ring, q, memo)
        qdeg = sum(e * images[j].degree for j, e in enumerate(q))
        mm = ring.multiplication_matrix(images[i], qdeg)
        out = _mat_mul(mm, inner.reshape(-1, 1)).ravel()
    memo[m] = out
    return out


def express_in_presentation(pres: RingPresentation, images: Sequence[Cocycle], ring: CohomologyRing,
                            vec: np.ndarray, k: int) -> GradedPolynomial:
    """Write a degree-k class as a combination of standard monomials of ``pres``."""
    if k == 0:
        return GradedPolynomial(frozenset([(0,) * pres.nvars]) if np.any(vec) else frozenset(), 0)
    std = GroebnerData(pres, k).std[k] if pres.nvars else []
    memo: dict = {}
    cols = [_monomial_image(images, ring, m, memo) for m in std]
    if not cols:
        if np.any(vec):
            raise StableElementsError("class not in the subring generated by the presentation")
        return GradedPolynomial(frozenset(), k)
    mat = np.array(cols, dtype=np.uint8).T
    x = solve_linear(BitMatrix.from_dense(mat), np.asarray(vec, dtype=np.uint8))
    if x is None:
        raise StableElementsError("class not in the subring generated by the presentation")
    return GradedPolynomial(frozenset(std[i] for i in np.flatnonzero(x)), k)


def evaluate_polynomial(p: GradedPolynomial, images: Sequence[Cocycle], ring: CohomologyRing) -> np.ndarray:
    memo: dict = {}
    out = None
    for m in p.terms:
        v = _monomial_image(images, ring, m, memo)
        out = v.copy() if out is None else out ^ v
    if out is None:
        ring.res.extend(p.degree)
        return np.zeros(ring.res.ranks[p.degree], dtype=np.uint8)
    return out


def _kind_function(sylow: PermutationGroup, ring: CohomologyRing, cache: ResolutionCache, degree: int):
    z = omega_center(sylow)
    zc, rz = cache.get(z, degree)
    f = cache.induced(Homomorphism.inclusion(zc, sylow), rz, ring.res)

    def kind_of(vec, k):
        return "c" if np.any(f.apply(Cocycle.from_vector(k, vec)).vector()) else "b"

    return kind_of


def _builder_for(sylow: PermutationGroup, ring: CohomologyRing, cache: ResolutionCache, degree: int):
    gens: list[Cocycle] = []

    def multiply(vec, i, k):
        m = ring.multiplication_matrix(gens[i], k)
        return _mat_mul(m, vec.reshape(-1, 1)).ravel()

    return PresentationBuilder(multiply, _kind_function(sylow, ring, cache, degree)), gens


def represent_pgroup(sylow: PermutationGroup, degree: int, cache: ResolutionCache | None = None,
                     group: PermutationGroup | None = None) -> RepresentedCohomology:
    """The full ``H•(S)`` as a represented ring (``G = S``, ``f`` the identity)."""
    cache = cache or ResolutionCache()
    sylow, res = cache.get(sylow, degree)
    ring = CohomologyRing(res)
    builder, gens = _builder_for(sylow, ring, cache, degree)
    spaces = [SubspaceBasis.full(1)]
    for k in range(1, degree + 1):
        full = SubspaceBasis.full(res.ranks[k])
        extend_presentation(builder, gens, k, full)
        spaces.append(full)
    return RepresentedCohomology(group or sylow, sylow, ring, builder.presentation(), list(gens), spaces, degree,
                                 cache, [f"H({_name(sylow)}) through degree {degree}: dims {[s.dim for s in spaces]}"])


def represent_cohomology(group: PermutationGroup, sylow: PermutationGroup, presentation: RingPresentation,
                         images: Sequence[Cocycle], degree: int,
                         cache: ResolutionCache | None = None) -> RepresentedCohomology:
    """Wrap a presentation whose generators carry images in ``H•(S)``."""
    if len(images) != presentation.nvars:
        raise ValueError("one image per generator required")
    for g, c in zip(presentation.generators, images):
        if g.degree != c.degree:
            raise ValueError(f"generator {g.label} has degree {g.degree} but its image has degree {c.degree}")
    if not sylow.is_subgroup_of(group):
        raise ValueError("sylow is not a subgroup of the group")
    if (group.order() // sylow.order()) % 2 == 0:
        raise ValueError("subgroup index must be odd")
    cache = cache or ResolutionCache()
    sylow, res = cache.get(sylow, degree)
    ring = CohomologyRing(res)
    spaces = [SubspaceBasis.full(1)]
    for k in range(1, degree + 1):
        std = GroebnerData(presentation, k).std[k] if presentation.nvars else []
        memo: dict = {}
        vecs = [_monomial_image(images, ring, m, memo) for m in std]
        if vecs:
            spaces.append(SubspaceBasis.span(BitMatrix.from_dense(np.array(vecs, dtype=np.uint8))))
        else:
            spaces.append(SubspaceBasis.zero(res.ranks[k]))
    return RepresentedCohomology(group, sylow, ring, presentation, list(images), spaces, degree, cache)


def _name(g: PermutationGroup) -> str:
    return f"order {g.order()}"


# ---------------------------------------------------------------------------
# towers


@dataclass
class TowerSpec:
    groups: list  # S = G_0 <= G_1 <= ... <= G_n = G
    names: list = field(default_factory=list)

    def __post_init__(self):
        if not self.groups:
            raise ValueError("empty tower")
        if not self.names:
            self.names = [f"G{i}" for i in range(len(self.groups))]
        if not self.groups[0].is_two_group():
            raise ValueError("the bottom of the tower must be a 2-group")
        for i, (a, b) in enumerate(zip(self.groups, self.groups[1:])):
            if not a.is_subgroup_of(b):
                raise ValueError(f"layer {i} is not contained in layer {i + 1}")
            if (b.order() // a.order()) % 2 == 0:
                raise ValueError(f"layer {i} has even index in layer {i + 1}")

    @property
    def indices(self) -> list[int]:
        return [b.order() // a.order() for a, b in zip(self.groups, self.groups[1:])]

    @classmethod
    def from_file(cls, path: str | Path) -> "TowerSpec":
        """Tower file: one group-file name per line, bottom first, relative to the tower file."""
        path = Path(path)
        names = [ln.strip() for ln in path.read_text().splitlines()]
        names = [n for n in names if n and not n.startswith("#")]
        groups = [pg.read_group_file(path.parent / n) for n in names]
        return cls(groups, names)

    @classmethod
    def sylow_tower(cls, group: PermutationGroup, seed: int = 0) -> "TowerSpec":
        s = pg.sylow_2(group, seed=seed)
        return cls([s, group], ["sylow", "group"]) if s.order() != group.order() else cls([group], ["group"])


# ---------------------------------------------------------------------------
# stability conditions


@dataclass
class StabilityCondition:
    representative: Permutation
    intersection: PermutationGroup
    sylow: PermutationGroup | None
    status: str = "active"  # "active" or "discarded"
    reason: str | None = None
    witness: Permutation | None = None
    sylow_type: tuple | None = None
    maps: tuple | None = None  # (psi1, psi2) homomorphisms T -> S
    matrices: dict = field(default_factory=dict)  # degree -> (M1, M2) on R_H coordinates
    key: tuple | None = None

    @property
    def active(self) -> bool:
        return self.status == "active"

    def discard(self, rule: str, note: str = "") -> None:
        self.status = "discarded"
        self.reason = rule + (f": {note}" if note else "")


def conjugate_group(h: PermutationGroup, g: Permutation) -> PermutationGroup:
    """``h^g = g^-1 h g``."""
    return PermutationGroup([x.conj(g) for x in h.gens], h.degree, order=h.order())


def intersection_with_conjugate(g_group: PermutationGroup, h: PermutationGroup, g: Permutation, *,
                                centralized: Permutation | None = None) -> PermutationGroup:
    """``H^g ∩ H``; when ``H = C_G(z)`` this is ``C_H(z^g)``."""
    if centralized is not None:
        return pg.centralizer_of_element(h, centralized.conj(g))
    return pg.subgroup_intersection(g_group, conjugate_group(h, g), h)


def _elementary_rank(t: PermutationGroup) -> int | None:
    if not t.is_abelian():
        return None
    if any(x.order() > 2 for x in t.gens):
        return None
    return int(round(math.log2(t.order())))


def group_type(t: PermutationGroup) -> tuple:
    """(order, abelian invariants or None) for journal entries."""
    if t.order() == 1:
        return (1, ())
    if t.is_abelian():
        tab = pg.FiniteGroupTable(t)
        return (t.order(), tuple(pg.abelian_invariants_from_orders(tab.orders.tolist())))
    return (t.order(), None)


def direct_factor_witness(g_group: PermutationGroup, t: PermutationGroup, candidates: Sequence[Permutation] = (),
                          *, enumerate_limit: int = 200_000) -> Permutation | None:
    """An involution centralizing ``t`` outside ``t`` (so ``t × <w> <= G``), if one is found."""
    def good(w: Permutation) -> bool:
        return (w.order() == 2 and not t.contains(w) and g_group.contains(w)
                and all(w * s == s * w for s in t.gens))

    for w in candidates:
        if good(w):
            return w
    if g_group.order() > enumerate_limit * 50:
        return None
    try:
        c = pg.centralizer_of_subgroup(g_group, t) if t.gens else g_group
    except (pg.ScaleError, RuntimeError):
        return None
    if c.order() > enumerate_limit:
        return None
    for w in c.elements():
        if good(w):
            return w
    return None


def _conjugate_into(h: PermutationGroup, p: PermutationGroup, s: PermutationGroup) -> Permutation:
    """Some ``x`` in ``h`` with ``p^x <= s``."""
    if all(s.contains(q) for q in p.gens):
        return h.identity()
    orb = pg.subgroup_orbit(h, p, limit=2_000_000)
    gens = p.gens
    for i in range(len(orb)):
        x = orb.transversal(i)
        if all(s.contains(q.conj(x)) for q in gens):
            return x
    raise StableElementsError("no conjugate of the 2-subgroup lies in the Sylow subgroup")


@dataclass
class ConditionList:
    conditions: list
    double_coset_count: int
    journal: list

    def active(self) -> list[StabilityCondition]:
        return [c for c in self.conditions if c.active]

    def discarded(self, rule: str | None = None) -> list[StabilityCondition]:
        return [c for c in self.conditions if not c.active and (rule is None or c.reason.startswith(rule))]


def list_stability_conditions(h: PermutationGroup, g_group: PermutationGroup, *, rules=ALL_RULES,
                              rule_c: str = "general", centralized: Permutation | None = None,
                              elementary_rank_bound: int | None = None, max_index: int = 1_000_000,
                              seed: int = 0) -> ConditionList:
    """Stability conditions of ``H ≤ G`` with the group-theoretic rules (a)-(c) applied.

    ``rule_c="general"`` discards whenever an involution outside ``T``
    centralizes ``T``; ``rule_c="elementary"`` only when ``T`` is elementary
    abelian of rank below ``elementary_rank_bound`` (a witness is still
    exhibited).  The bound should be the smallest rank of a maximal
    elementary abelian subgroup of ``G``; by default the smallest such rank
    inside a Sylow subgroup of ``H`` is used, which never exceeds it.  With ``centralized=z``
    and ``H = C_G(z)`` the double cosets are found as ``H``-orbits on the
    class of ``z`` and the intersections as centralizers.
    """
    rules = frozenset(rules)
    if not h.is_subgroup_of(g_group):
        raise ValueError("H is not a subgroup of G")
    index = g_group.order() // h.order()
    if index % 2 == 0:
        raise ValueError("H must have odd index in G")
    journal: list[str] = []
    if index == 1:
        return ConditionList([], 1, ["H = G: no conditions"])
    if centralized is not None:
        dc, _ = pg.double_cosets_by_conjugation(g_group, centralized, centralizer=h, seed=seed)
    else:
        dc = pg.double_cosets(g_group, h, max_index=max_index)
    journal.append(f"{len(dc)} double cosets (index {index})")
    if rule_c not in ("general", "elementary"):
        raise ValueError(f"unknown rule_c mode {rule_c!r}")
    min_rank = elementary_rank_bound
    if "c" in rules and rule_c == "elementary" and min_rank is None:
        s = pg.sylow_2(h, seed=seed)
        min_rank = min(c.rank for c in pg.maximal_elementary_abelians(s))
    conds = []
    for rep in dc.representatives:
        trivial = h.contains(rep)
        if trivial and "a" in rules:
            journal.append("trivial double coset discarded (a)")
            continue
        k = intersection_with_conjugate(g_group, h, rep, centralized=centralized)
        t = pg.sylow_2(k, seed=seed) if k.order() > 1 else PermutationGroup([], h.degree)
        cond = StabilityCondition(rep, k, t, sylow_type=group_type(t))
        conds.append(cond)
        if trivial:
            continue
        if "b" in rules and t.order() == 1:
            cond.discard("b", f"|H^g ∩ H| = {k.order()} is odd")
            continue
        if "c" in rules:
            cands = []
            if centralized is not None:
                cands = [centralized, centralized.conj(rep)]
            if rule_c == "elementary":
                r = _elementary_rank(t)
                if r is None or r >= min_rank:
                    continue
            w = direct_factor_witness(g_group, t, cands)
            if w is not None:
                cond.witness = w
                cond.discard("c", f"T of type {cond.sylow_type} has a direct factor of order 2")
    for c in conds:
        journal.append(f"double coset |H^g ∩ H| = {c.intersection.order()}, T {c.sylow_type}: "
                       f"{c.status}{'' if c.active else ' (' + c.reason + ')'}")
    return ConditionList(conds, len(dc), journal)


# ---------------------------------------------------------------------------
# maps and stable subspaces


def _condition_maps(cond: StabilityCondition, h: PermutationGroup, sylow: PermutationGroup,
                    cache: ResolutionCache, degree: int):
    """Homomorphisms ``T -> S`` for the two maps, corrected into the Sylow subgroup."""
    t, rt = cache.get(cond.sylow, degree)
    g = cond.representative
    ginv = ~g
    phi1 = [x for x in t.gens]
    phi2 = [g * x * ginv for x in t.gens]
    maps = []
    for imgs in (phi1, phi2):
        p = PermutationGroup(imgs, h.degree)
        x = _conjugate_into(h, p, sylow)
        maps.append(Homomorphism(t, sylow, [q.conj(x) for q in imgs]))
    return t, rt, maps


def stability_maps(cond: StabilityCondition, rep: RepresentedCohomology, h: PermutationGroup, degree: int, *,
                   method: str = "recursive", kernel_ring: "RepresentedCohomology | None" = None) -> dict:
    """Per-degree matrices of the two maps ``R_H^k -> H^k(H^g ∩ H)``.

    ``method="sylow"`` compares in ``H•(T)``; ``method="recursive"`` first
    builds ``H•(H^g ∩ H)`` as stable elements over ``T`` and writes both
    images in its basis.  The equalizers agree; the recursive form is the
    smaller linear algebra.
    """
    cache = rep.cache
    if cond.sylow.order() == 1:
        # a group of odd order has no cohomology in positive degrees
        cond.matrices = {k: (np.zeros((0, rep.spaces[k].dim), np.uint8),) * 2 for k in range(1, degree + 1)}
        return cond.matrices
    t, rt, (psi1, psi2) = _condition_maps(cond, h, rep.sylow, cache, degree)
    cond.maps = (psi1, psi2)
    f1 = cache.induced(psi1, rt, rep.sylow_ring.res)
    f2 = cache.induced(psi2, rt, rep.sylow_ring.res)
    target = None
    if method == "recursive" and cond.intersection.order() != t.order():
        target = kernel_ring or stable_ring_over_sylow(cond.intersection, t, degree, cache=cache, method="sylow")
    out = {}
    for k in range(1, degree + 1):
        b = rep.basis(k)
        a1 = _mat_mul(f1.matrix(k), b.T) if b.shape[0] else np.zeros((rt.ranks[k], 0), np.uint8)
        a2 = _mat_mul(f2.matrix(k), b.T) if b.shape[0] else np.zeros((rt.ranks[k], 0), np.uint8)
        if target is not None:
            a1 = _coords_columns(target, k, a1)
            a2 = _coords_columns(target, k, a2)
        out[k] = (a1, a2)
    cond.matrices = out
    return out


def _coords_columns(target: RepresentedCohomology, k: int, cols: np.ndarray) -> np.ndarray:
    d = target.spaces[k].dim
    out = np.zeros((d, cols.shape[1]), dtype=np.uint8)
    for j in range(cols.shape[1]):
        out[:, j] = target.coordinates(k, cols[:, j])
    return out


def generator_images(cond: StabilityCondition, rep: RepresentedCohomology) -> tuple[bytes, bytes]:
    """Images of the ring generators of ``R_H`` under both maps, as canonical bytes."""
    cache = rep.cache
    t, rt = cache.get(cond.sylow, rep.degree)
    psi1, psi2 = cond.maps
    f1 = cache.induced(psi1, rt, rep.sylow_ring.res)
    f2 = cache.induced(psi2, rt, rep.sylow_ring.res)
    a = b"".join(np.packbits(f1.apply(c).vector()).tobytes() + b"|" for c in rep.images)
    b = b"".join(np.packbits(f2.apply(c).vector()).tobytes() + b"|" for c in rep.images)
    return a, b


def apply_cohomological_rules(conds: Sequence[StabilityCondition], rep: RepresentedCohomology,
                              h: PermutationGroup, rules=ALL_RULES) -> list[str]:
    """Rules (d) equal generator images and (e) repeated map pairs."""
    rules = frozenset(rules)
    journal = []
    seen: dict[tuple, int] = {}
    for i, c in enumerate(conds):
        if not c.active or c.sylow.order() == 1:
            continue
        if c.maps is None:
            t, rt, maps = _condition_maps(c, h, rep.sylow, rep.cache, rep.degree)
            c.maps = tuple(maps)
        a, b = generator_images(c, rep)
        if "d" in rules and a == b:
            c.discard("d", "every generator has the same image under both maps")
            journal.append(f"condition {i} discarded (d)")
            continue
        key = (c.sylow.canonical_key(), frozenset([a, b]))
        c.key = key
        if "e" in rules and key in seen:
            c.discard("e", f"same pair of maps as condition {seen[key]}")
            journal.append(f"condition {i} discarded (e)")
            continue
        seen[key] = i
    return journal


def stable_subspace(conds: Sequence[StabilityCondition], rep: RepresentedCohomology, k: int) -> SubspaceBasis:
    """Elements of ``R_H^k`` satisfying every active condition, as a subspace of ``H^k(S)``."""
    dim = rep.spaces[k].dim
    b = rep.basis(k)
    rows = [np.zeros((0, dim), dtype=np.uint8)]
    for c in conds:
        if not c.active:
            continue
        a1, a2 = c.matrices[k]
        rows.append(a1 ^ a2)
    stacked = np.vstack(rows)
    if dim == 0:
        return SubspaceBasis.zero(b.shape[1] if b.ndim == 2 and b.shape[1] else rep.sylow_ring.res.ranks[k])
    coords = nullspace_basis(BitMatrix.from_dense(stacked)) if stacked.shape[0] else SubspaceBasis.full(dim)
    cv = coords.vectors()
    vecs = _mat_mul(cv, b) if cv.shape[0] else np.zeros((0, b.shape[1]), dtype=np.uint8)
    if vecs.shape[0] == 0:
        return SubspaceBasis.zero(b.shape[1])
    return SubspaceBasis.span(BitMatrix.from_dense(vecs))


def extend_presentation(builder: PresentationBuilder, images: list, k: int, stable: SubspaceBasis) -> tuple[int, int]:
    """Advance ``τ_{k-1}`` to ``τ_k`` inside the degree-k stable subspace.

    Returns (new generators, new relations); ``images`` receives the new
    generators' cocycles.
    """
    before = len(builder.gens)
    out = builder.step(k, stable)
    images.extend(Cocycle.from_vector(k, g.image) for g in builder.gens[before:])
    return out


# ---------------------------------------------------------------------------
# layers and towers


@dataclass
class LayerReport:
    group_order: int
    index: int
    double_cosets: int
    conditions: list
    dims: list
    journal: list


def stable_layer(rep_h: RepresentedCohomology, h: PermutationGroup, g_group: PermutationGroup, *,
                 rules=ALL_RULES, rule_c: str = "general", method: str = "recursive",
                 centralized: Permutation | None = None, elementary_rank_bound: int | None = None,
                 seed: int = 0) -> tuple[RepresentedCohomology, LayerReport]:
    """``R_G`` from ``R_H`` for ``H ≤ G`` of odd index, degree by degree."""
    degree = rep_h.degree
    cl = list_stability_conditions(h, g_group, rules=rules, rule_c=rule_c, centralized=centralized,
                                   elementary_rank_bound=elementary_rank_bound, seed=seed)
    journal = list(cl.journal)
    conds = cl.conditions
    journal += apply_cohomological_rules(conds, rep_h, h, rules)
    kernel_rings: dict[bytes, RepresentedCohomology] = {}
    for c in conds:
        if not c.active:
            continue
        kr = None
        if method == "recursive" and c.intersection.order() != c.sylow.order():
            key = c.intersection.canonical_key()
            kr = kernel_rings.get(key)
            if kr is None:
                t, _ = rep_h.cache.get(c.sylow, degree)
                kr = stable_ring_over_sylow(c.intersection, t, degree, cache=rep_h.cache, method="sylow")
                kernel_rings[key] = kr
        stability_maps(c, rep_h, h, degree, method=method, kernel_ring=kr)
    ring = rep_h.sylow_ring
    builder, gens = _builder_for(rep_h.sylow, ring, rep_h.cache, degree)
    spaces = [SubspaceBasis.full(1)]
    for k in range(1, degree + 1):
        st = stable_subspace(conds, rep_h, k)
        extend_presentation(builder, gens, k, st)
        spaces.append(st)
    journal += builder.log
    active = sum(1 for c in conds if c.active)
    journal.append(f"{active} active conditions; dims {[s.dim for s in spaces]}")
    rep = RepresentedCohomology(g_group, rep_h.sylow, ring, builder.presentation(), list(gens), spaces, degree,
                                rep_h.cache, journal)
    report = LayerReport(g_group.order(), g_group.order() // h.order(), cl.double_coset_count, conds,
                         rep.dims(), journal)
    return rep, report


def stable_ring_over_sylow(group: PermutationGroup, sylow: PermutationGroup, degree: int, *,
                           cache: ResolutionCache | None = None, rules=ALL_RULES, rule_c: str = "general",
                           method: str = "sylow") -> RepresentedCohomology:
    """One-layer computation ``S ≤ G``."""
    cache = cache or ResolutionCache()
    base = represent_pgroup(sylow, degree, cache)
    if group.order() == sylow.order():
        base.group = group
        return base
    rep, _ = stable_layer(base, base.sylow, group, rules=rules, rule_c=rule_c, method=method)
    return rep


def compute_stable_ring(tower: TowerSpec, degree: int, *, rules=ALL_RULES, rule_c: str = "general",
                        method: str = "recursive", completion: Callable | None = None,
                        cache: ResolutionCache | None = None) -> tuple[list, list]:
    """Represented rings for every layer of the tower, through ``degree``.

    ``completion(rep)`` may return a verdict object with a ``verdict``
    attribute; a final layer that is not certified complete raises.
    """
    cache = cache or ResolutionCache()
    reps = [represent_pgroup(tower.groups[0], degree, cache)]
    reports: list[LayerReport] = []
    for h, g in zip(tower.groups, tower.groups[1:]):
        rep, report = stable_layer(reps[-1], reps[-1].group if reps[-1].group is not None else h, g, rules=rules,
                                   rule_c=rule_c, method=method)
        reps.append(rep)
        reports.append(report)
    if completion is not None:
        verdict = completion(reps[-1])
        reps[-1].journal.append(f"completion: {verdict}")
        if getattr(verdict, "verdict", "complete") != "complete":
            raise StableElementsError(f"completion not certified through degree {degree}: {verdict}")
    return reps, reports


# ---------------------------------------------------------------------------
# reference computation


def brute_force_stable_spaces(group: PermutationGroup, sylow: PermutationGroup, degree: int,
                              cache: ResolutionCache | None = None) -> list[SubspaceBasis]:
    """Stable subspaces of ``H•(S)`` over every ``g ∈ G``, no discards, no towers.

    Each ``g`` gives ``K = S^g ∩ S`` (a 2-group, its own Sylow subgroup) and
    the maps ``k -> k`` and ``k -> g k g^-1`` into ``S``.
    """
    cache = cache or ResolutionCache()
    sylow, rs = cache.get(sylow, degree)
    spaces: list[list[SubspaceBasis]] = [[] for _ in range(degree + 1)]
    for g in group.elements():
        k = pg.subgroup_intersection(group, conjugate_group(sylow, g), sylow)
        if k.order() == 1:
            continue
        kc, rk = cache.get(k, degree)
        ginv = ~g
        f1 = InducedMap(Homomorphism(kc, sylow, list(kc.gens)), rk, rs)
        f2 = InducedMap(Homomorphism(kc, sylow, [g * x * ginv for x in kc.gens]), rk, rs)
        for n in range(1, degree + 1):
            spaces[n].append(nullspace_basis(BitMatrix.from_dense(f1.matrix(n) ^ f2.matrix(n))))
    out = [SubspaceBasis.full(1)]
    for n in range(1, degree + 1):
        out.append(intersect_subspaces(spaces[n], ambient_dim=rs.ranks[n]))
    return out


# ---------------------------------------------------------------------------
# induced maps between represented rings


@dataclass
class InducedRingMap:
    source: RepresentedCohomology
    target: RepresentedCohomology
    corrector: Permutation
    homomorphism: Homomorphism  # between the Sylow subgroups
    matrices: list  # per degree, dim R_source^k x dim R_target^k

    def apply(self, k: int, coords: np.ndarray) -> np.ndarray:
        return _mat_mul(self.matrices[k], np.asarray(coords, dtype=np.uint8).reshape(-1, 1)).ravel()


def induced_ring_map(phi: Homomorphism, src: RepresentedCohomology, tgt: RepresentedCohomology) -> InducedRingMap:
    """``φ*: R_tgt -> R_src`` for ``φ: G_src -> G_tgt``, corrected so ``φ(S_src)`` lands in ``S_tgt``."""
    s1 = src.sylow
    imgs = [phi(x) for x in s1.gens]
    x = _conjugate_into(tgt.group, PermutationGroup(imgs, tgt.group.degree), tgt.sylow)
    psi = Homomorphism(s1, tgt.sylow, [q.conj(x) for q in imgs])
    f = src.cache.induced(psi, src.sylow_ring.res, tgt.sylow_ring.res)
    mats = []
    for k in range(min(src.degree, tgt.degree) + 1):
        b = tgt.basis(k)
        d_src = src.spaces[k].dim
        m = np.zeros((d_src, b.shape[0]), dtype=np.uint8)
        for j in range(b.shape[0]):
            v = _mat_mul(f.matrix(k), b[j].reshape(-1, 1)).ravel()
            m[:, j] = src.coordinates(k, v)
        mats.append(m)
    return InducedRingMap(src, tgt, x, psi, mats)


# ---------------------------------------------------------------------------
# detection and parameters


def restriction_matrices(rep: RepresentedCohomology, sub: PermutationGroup) -> list[np.ndarray]:
    """Restriction ``R^k -> H^k(sub)`` on the basis of ``R^k``; ``sub`` is conjugated into ``S`` if needed."""
    x = _conjugate_into(rep.group, sub, rep.sylow)
    sub_c = conjugate_group(sub, x) if not x.is_identity() else sub
    sub_c, rsub = rep.cache.get(sub_c, rep.degree)
    f = rep.cache.induced(Homomorphism.inclusion(sub_c, rep.sylow), rsub, rep.sylow_ring.res)
    out = []
    for k in range(rep.degree + 1):
        b = rep.basis(k)
        out.append(_mat_mul(f.matrix(k), b.T) if b.shape[0] else np.zeros((rsub.ranks[k], 0), np.uint8))
    return out


def detection_check(rep: RepresentedCohomology, subgroups: Sequence[PermutationGroup], d: int) -> bool:
    """Whether joint restriction to ``subgroups`` is injective on ``R^k`` for ``k <= d``."""
    mats = [restriction_matrices(rep, s) for s in subgroups]
    for k in range(min(d, rep.degree) + 1):
        dim = rep.spaces[k].dim
        if dim == 0:
            continue
        stacked = np.vstack([m[k] for m in mats]) if mats else np.zeros((0, dim), np.uint8)
        if stacked.shape[0] == 0 or nullspace_basis(BitMatrix.from_dense(stacked)).dim:
            return False
    return True


@dataclass
class _PolyTarget:
    """Restriction from ``R`` into a polynomial ring ``H•(E)`` with its presentation."""

    subgroup: PermutationGroup
    rank: int
    presentation: RingPresentation
    images: list
    ring: CohomologyRing
    restriction: list

    def restrict(self, rep: RepresentedCohomology, vec: np.ndarray, k: int) -> GradedPolynomial:
        coords = rep.coordinates(k, vec)
        img = _mat_mul(self.restriction[k], coords.reshape(-1, 1)).ravel()
        return express_in_presentation(self.presentation, self.images, self.ring, img, k)


def _poly_target(rep: RepresentedCohomology, e: PermutationGroup) -> _PolyTarget:
    mats = restriction_matrices(rep, e)
    e_c, re = rep.cache.get(e, rep.degree)
    pres = _presentation_on(re, rep.degree)
    rank = int(round(math.log2(e.order())))
    return _PolyTarget(e_c, rank, pres.presentation, pres.images, pres.ring, mats)


def _presentation_on(res: MinimalResolution, degree: int):
    from .resolution import PGroupPresentation

    ring = CohomologyRing(res)
    builder = PresentationBuilder(lambda vec, i, k: _mat_mul(ring.multiplication_matrix(gens[i], k),
                                                             vec.reshape(-1, 1)).ravel())
    gens: list[Cocycle] = []
    for k in range(1, degree + 1):
        before = len(builder.gens)
        builder.step(k, SubspaceBasis.full(res.ranks[k]))
        gens.extend(Cocycle.from_vector(k, g.image) for g in builder.gens[before:])
    return PGroupPresentation(builder.presentation(), gens, ring, builder.log)


@dataclass
class StableParameters:
    system: ParameterSystem
    vectors: list  # (degree, vector in H^k(S))
    dickson: list  # lifted Dickson invariants (degree, vector) or empty
    method: str
    journal: list


def _candidate_vectors(space: SubspaceBasis, cap: int = 4096):
    basis = space.vectors()
    m = basis.shape[0]
    if m == 0:
        return
    if 2 ** m - 1 <= cap:
        for bits in range(1, 2 ** m):
            coeffs = [(bits >> i) & 1 for i in range(m)]
            v = np.zeros(basis.shape[1], dtype=np.uint8)
            for c, b in zip(coeffs, basis):
                if c:
                    v ^= b
            yield v
    else:
        for b in basis:
            yield b.copy()
        for a, b in itertools.combinations(basis, 2):
            yield a ^ b


def _is_partial_sop(target: _PolyTarget, polys: list[GradedPolynomial]) -> bool:
    """Whether ``polys`` is part of a system of parameters of the polynomial ring ``H•(E)``."""
    if any(p.is_zero() for p in polys):
        return False
    use = polys[: target.rank]
    window = sum(p.degree for p in use) + 2 * max([p.degree for p in use] + [1])
    res = regular_sequence_test(target.presentation, use, window)
    return res.verified_prefix == len(use)


def _is_full_sop(target: _PolyTarget, polys: list[GradedPolynomial]) -> bool:
    window = sum(p.degree for p in polys) + 2 * max([p.degree for p in polys] + [1])
    pres = target.presentation.with_relations([p for p in polys if not p.is_zero()])
    dims = GroebnerData(pres, window).dims()
    gmax = max(p.degree for p in polys)
    return not any(dims[window - gmax + 1:])


def lift_dickson(rep: RepresentedCohomology, targets: Sequence[_PolyTarget], r: int) -> list:
    """Classes restricting to the rank-``r`` Dickson invariants on every target of rank ``r``."""
    out = []
    for inv in dickson_invariants(r):
        k = inv.degree
        if k > rep.degree or rep.spaces[k].dim == 0:
            return out
        rows, rhs = [], []
        for t in targets:
            if t.rank != r:
                continue
            # Dickson invariants are GL-invariant, so any basis of H^1(E) works
            mapped = _dickson_on(t, inv)
            rows.append(t.restriction[k])
            rhs.append(mapped)
        a = np.vstack(rows)
        x = solve_linear(BitMatrix.from_dense(a), np.concatenate(rhs))
        if x is None:
            return out
        out.append((k, _mat_mul(x.reshape(1, -1), rep.basis(k)).ravel()))
    return out


def _dickson_on(t: _PolyTarget, inv: GradedPolynomial) -> np.ndarray:
    deg1 = [i for i, g in enumerate(t.presentation.generators) if g.degree == 1]
    nv = t.presentation.nvars
    terms = []
    for m in inv.terms:
        e = [0] * nv
        for j, a in zip(deg1, m):
            e[j] = a
        terms.append(tuple(e))
    return evaluate_polynomial(GradedPolynomial(frozenset(terms), inv.degree), t.images, t.ring)


def construct_parameters(rep: RepresentedCohomology, d: int, *, filter_window: int | None = None) -> StableParameters:
    """Homogeneous parameters for ``R`` of degree at most ``d``.

    1. lift the Dickson invariants to ``R`` when every maximal elementary
       abelian subgroup has the full rank;
    2. take classes restricting to parameters of the centre: the first lifted
       Dickson invariants if they do, else a smallest-degree search;
    3-4. extend by stable classes, smallest degree first, keeping the
       restriction to every maximal elementary abelian subgroup a partial
       system of parameters there;
    5. try to replace each element by a proper factor (factorization).
    The result is checked with ``filter_regular_test`` on the presentation.
    """
    journal: list[str] = []
    s = rep.sylow
    maximal = pg.maximal_elementary_abelians(s)
    r = max(c.rank for c in maximal)
    targets = [_poly_target(rep, c.subgroup) for c in maximal]
    z = omega_center(s)
    zt = _poly_target(rep, z)
    zrank = zt.rank
    dickson = []
    if all(t.rank == r for t in targets):
        dickson = lift_dickson(rep, targets, r)
        journal.append(f"Dickson lifts in degrees {[k for k, _ in dickson]}")
    else:
        journal.append("maximal elementary abelians of different ranks: no Dickson lift attempted")
    chosen: list[tuple[int, np.ndarray]] = []
    if len(dickson) == r and _is_partial_sop(zt, [zt.restrict(rep, v, k) for k, v in dickson[:zrank]]):
        chosen = list(dickson[:zrank])
        journal.append("centre parameters taken from the Dickson lifts")
    else:
        chosen = _search(rep, [zt], zrank, d, [])
        journal.append(f"centre parameters found in degrees {[k for k, _ in chosen]}")
    if len(chosen) < zrank:
        raise StableElementsError(f"no parameters for the centre through degree {d}")
    if len(dickson) == r and chosen == list(dickson[:zrank]):
        rest = dickson[zrank:]
        if all(_is_partial_sop(t, [t.restrict(rep, v, k) for k, v in chosen + rest]) for t in targets):
            chosen = chosen + rest
    if len(chosen) < r:
        chosen = _search(rep, targets, r, d, chosen)
    if len(chosen) < r:
        raise StableElementsError(f"no system of parameters through degree {d}; raise the degree")
    for t in targets:
        if not _is_full_sop(t, [t.restrict(rep, v, k) for k, v in chosen]):
            raise StableElementsError("restriction to a maximal elementary abelian subgroup is not finite")
    method = "dickson" if chosen == dickson[:r] else "search"
    if method != "dickson" or zrank < r:
        chosen, note = _lower_degrees(rep, targets, chosen)
        journal += note
    polys = [rep.express(v, k) for k, v in chosen]
    system = ParameterSystem(polys, stable=True)
    window = filter_window if filter_window is not None else rep.degree
    fr = filter_regular_test(rep.presentation, polys, window)
    system.filter_degree_type = fr.degree_type
    system.filter_regular = fr.conclusive or None
    journal.append(f"parameters in degrees {[k for k, _ in chosen]}, filter degree type {fr.degree_type} "
                   f"({fr.status} through degree {window})")
    return StableParameters(system, chosen, dickson, method, journal)


def _search(rep: RepresentedCohomology, targets: Sequence[_PolyTarget], r: int, d: int,
            start: list) -> list:
    chosen = list(start)
    for k in range(1, min(d, rep.degree) + 1):
        if len(chosen) >= r:
            break
        progress = True
        while progress and len(chosen) < r:
            progress = False
            for v in _candidate_vectors(rep.spaces[k]):
                trial = chosen + [(k, v)]
                if all(_is_partial_sop(t, [t.restrict(rep, w, kk) for kk, w in trial]) for t in targets):
                    chosen = trial
                    progress = True
                    break
    return chosen


def _lower_degrees(rep: RepresentedCohomology, targets: Sequence[_PolyTarget], chosen: list):
    """Replace parameters by proper factors while the system stays a system of parameters."""
    notes = []
    out = list(chosen)
    for i, (k, v) in enumerate(out):
        replaced = False
        for e in range(1, k):
            if replaced:
                break
            for a in _candidate_vectors(rep.spaces[e], cap=255):
                mult = _multiplication_into(rep, a, e, k - e)
                if mult is None or solve_linear(BitMatrix.from_dense(mult), v) is None:
                    continue
                trial = out[:i] + [(e, a)] + out[i + 1:]
                if all(_is_full_sop(t, [t.restrict(rep, w, kk) for kk, w in trial]) for t in targets):
                    notes.append(f"degree {k} parameter replaced by a degree {e} factor")
                    out = trial
                    replaced = True
                    break
    if not notes:
        notes.append("no degree-lowering factorization found")
    return out, notes


def _multiplication_into(rep: RepresentedCohomology, a: np.ndarray, e: int, rest: int) -> np.ndarray | None:
    """Matrix of ``y -> a*y`` from ``R^rest`` into ``H^{e+rest}(S)`` (columns)."""
    b = rep.basis(rest)
    if b.shape[0] == 0:
        return None
    m = rep.sylow_ring.multiplication_matrix(Cocycle.from_vector(e, a), rest)
    return _mat_mul(m, b.T)


def sylow_filter_regular(rep: RepresentedCohomology, params: StableParameters, window: int | None = None):
    """Filter-regularity of the parameters on ``H•(S)`` (which then passes to ``R``)."""
    full = represent_pgroup(rep.sylow, rep.degree, rep.cache)
    polys = [full.express(v, k) for k, v in params.vectors]
    return filter_regular_test(full.presentation, polys, window if window is not None else rep.degree)
