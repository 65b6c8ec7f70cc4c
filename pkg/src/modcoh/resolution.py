"""Minimal free resolutions of F2 over F2[P] for a 2-group P.

A free module of rank ``b`` is stored through the regular representation as
a ``(b, |P|)`` 0/1 array: entry ``[i, g]`` is the coefficient of ``g * e_i``.
Group elements are indexed in the fixed BSGS word order of the group, so all
matrices are deterministic.  Cohomology in degree ``n`` is ``F2^{b_n}``
(minimality makes every cochain differential zero), and a class is its vector
of values on the free generators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gf2 import BitMatrix, IntEchelon, RowSpaceSolver, nullspace_basis, row_reduce
from .permgroup import FiniteGroupTable, GroupError, Permutation, PermutationGroup, ScaleError

log = logging.getLogger(__name__)


class ResolutionError(ValueError):
    """Bad input to a resolution computation."""


@dataclass(frozen=True)
class Cocycle:
    """A cohomology class: values on the free generators in its degree."""

    degree: int
    coords: tuple[int, ...]

    @classmethod
    def from_vector(cls, degree: int, vec) -> "Cocycle":
        return cls(degree, tuple(int(v) & 1 for v in np.asarray(vec).reshape(-1)))

    def vector(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.uint8)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __add__(self, other: "Cocycle") -> "Cocycle":
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        return Cocycle(self.degree, tuple(a ^ b for a, b in zip(self.coords, other.coords)))


class GroupAlgebra:
    """Regular-representation data for a small 2-group."""

    def __init__(self, group: PermutationGroup, max_order: int = 256):
        if not group.is_two_group():
            raise ResolutionError("group algebra data is only built for 2-groups")
        if group.order() > max_order:
            raise ScaleError(f"group of order {group.order()} beyond the desk-scale bound {max_order}")
        self.group = group
        self.table = FiniteGroupTable(group)
        self.n = self.table.n
        self.mult = self.table.mult
        self.identity = self.table.identity
        self.gen_idx = [self.table.idx(g) for g in group.gens]
        # conjugates of the generators: (c - 1) for these span the radical action
        conj = set()
        for s in self.gen_idx:
            for h in range(self.n):
                conj.add(self.table.conj(s, h))
        self.radical_elems = sorted(conj - {self.identity})

    def act(self, h: int, v: np.ndarray) -> np.ndarray:
        """Left multiplication by element ``h`` on a ``(b, n)`` block vector."""
        out = np.empty_like(v)
        out[:, self.mult[h]] = v
        return out


def _act_many(mult_target: np.ndarray, v: np.ndarray, elems: np.ndarray) -> np.ndarray:
    """Stack of ``e * v`` for ``e`` in ``elems`` (indices in the target group)."""
    b, n = v.shape
    out = np.zeros((len(elems), b, n), dtype=np.uint8)
    for k, e in enumerate(elems):
        out[k][:, mult_target[e]] = v
    return out


class MinimalResolution:
    """Minimal resolution ``... -> F_1 -> F_0 -> F2`` over F2[P], extended on demand."""

    def __init__(self, group: PermutationGroup, max_degree: int = 0, *, max_order: int = 256):
        self.alg = GroupAlgebra(group, max_order=max_order)
        self.group = group
        self.ranks: list[int] = [1]
        # images[k][j] = d_k(e_j) in F_{k-1}, shape (b_{k-1}, n); degree 0 maps to F2
        self.images: list[np.ndarray] = [np.zeros((1, 1, self.alg.n), dtype=np.uint8)]
        self._dense: dict[int, np.ndarray] = {}
        self._solvers: dict[int, RowSpaceSolver] = {}
        self.extend(max_degree)

    @property
    def max_degree(self) -> int:
        return len(self.ranks) - 1

    @property
    def order(self) -> int:
        return self.alg.n

    # -- construction ------------------------------------------------------
    def differential_matrix(self, k: int) -> np.ndarray:
        """Dense F2 matrix of ``d_k: F_k -> F_{k-1}`` (columns index ``(j, g)``)."""
        if k < 1:
            raise ValueError("differentials start in degree 1")
        m = self._dense.get(k)
        if m is None:
            n = self.alg.n
            imgs = self.images[k]
            b = imgs.shape[0]
            cols = np.zeros((b, n, self.ranks[k - 1] * n), dtype=np.uint8)
            for j in range(b):
                stack = _act_many(self.alg.mult, imgs[j], np.arange(n))
                cols[j] = stack.reshape(n, -1)
            m = cols.reshape(b * n, -1).T.copy()
            self._dense[k] = m
        return m

    def _kernel(self, k: int) -> np.ndarray:
        """F2-basis of ``ker(d_k)`` (``k = 0``: augmentation), rows of length ``b_k * n``."""
        n = self.alg.n
        if k == 0:
            rows = np.zeros((n - 1, n), dtype=np.uint8)
            rows[:, 0] = 1
            for i in range(1, n):
                rows[i - 1, i] = 1
            return rows
        return nullspace_basis(BitMatrix.from_dense(self.differential_matrix(k))).vectors()

    def _radical(self, basis: np.ndarray, b: int) -> np.ndarray:
        """Rows spanning ``I * K`` for the submodule ``K`` spanned by ``basis``."""
        n = self.alg.n
        blocks = basis.reshape(-1, b, n)
        parts = []
        for c in self.alg.radical_elems:
            moved = np.empty_like(blocks)
            moved[:, :, self.alg.mult[c]] = blocks
            parts.append((moved ^ blocks).reshape(len(basis), -1))
        return np.concatenate(parts, axis=0)

    def extend(self, degree: int) -> None:
        n = self.alg.n
        while self.max_degree < degree:
            k = self.max_degree
            b = self.ranks[k]
            kern = self._kernel(k)
            if len(kern) == 0:
                new = np.zeros((0, b, n), dtype=np.uint8)
            else:
                rad = self._radical(kern, b)
                ech = IntEchelon()
                for row in BitMatrix.from_dense(rad).to_ints():
                    ech.add(row)
                chosen = []
                kmat = BitMatrix.from_dense(kern)
                for row_int, row in zip(kmat.to_ints(), kern):
                    if ech.add(row_int):
                        chosen.append(row.reshape(b, n))
                new = np.array(chosen, dtype=np.uint8).reshape(-1, b, n)
            self.ranks.append(len(new))
            self.images.append(new)
            log.debug("resolution of order %d: b_%d = %d", n, k + 1, len(new))

    # -- checks ------------------------------------------------------------
    def check(self) -> None:
        """Assert ``d o d = 0`` and minimality in every built degree."""
        for k in range(2, self.max_degree + 1):
            prod = (self.differential_matrix(k - 1).astype(np.int64) @ self.differential_matrix(k)) & 1
            if prod.any():
                raise AssertionError(f"d_{k - 1} d_{k} != 0")
        for k in range(1, self.max_degree + 1):
            imgs = self.images[k]
            if imgs.size and (imgs.sum(axis=2) & 1).any():
                raise AssertionError(f"d_{k} not minimal")
        aug = self.images[1].sum(axis=2) & 1 if self.max_degree >= 1 else None
        if aug is not None and aug.any():
            raise AssertionError("d_1 does not land in the augmentation ideal")

    # -- lifting ---------------------------------------------------------------
    def solver(self, k: int) -> RowSpaceSolver:
        """Solver for ``d_k(y) = target`` over the columns of ``d_k``."""
        s = self._solvers.get(k)
        if s is None:
            m = self.differential_matrix(k)
            s = RowSpaceSolver(BitMatrix.from_dense(m.T).to_ints())
            self._solvers[k] = s
        return s

    def preimage(self, k: int, target: np.ndarray) -> np.ndarray:
        """Some ``y`` in ``F_k`` with ``d_k(y) = target``; ``target`` has shape ``(b_{k-1}, n)``."""
        n = self.alg.n
        t = BitMatrix.from_dense(target.reshape(1, -1)).row_int(0)
        combo = self.solver(k).solve(t)
        if combo is None:
            raise ResolutionError(f"no preimage under d_{k}: target not a cycle")
        y = np.zeros(self.ranks[k] * n, dtype=np.uint8)
        bits = combo
        i = 0
        while bits:
            if bits & 1:
                y[i] = 1
            bits >>= 1
            i += 1
        return y.reshape(self.ranks[k], n)

    def cohomology_dims(self, degree: int) -> list[int]:
        self.extend(degree)
        return self.ranks[: degree + 1]


@dataclass
class ChainLift:
    """Equivariant chain map ``X_k: F_{shift+k}(src) -> F_k(tgt)`` over an element map.

    ``elem_map[g]`` is the target-group element index of source element ``g``.
    ``maps[k][j]`` is ``X_k(e_j)`` with shape ``(b_k(tgt), n_tgt)``.
    """

    source: MinimalResolution
    target: MinimalResolution
    elem_map: np.ndarray
    shift: int
    maps: list = field(default_factory=list)

    def _apply_matrix(self, k: int) -> np.ndarray:
        """Dense matrix of ``X_k`` as an F2-linear map (rows: source coordinates)."""
        src_n = self.source.alg.n
        xs = self.maps[k]
        out = np.zeros((len(xs), src_n) + xs.shape[1:], dtype=np.uint8)
        for j in range(len(xs)):
            out[j] = _act_many(self.target.alg.mult, xs[j], self.elem_map[np.arange(src_n)])
        return out.reshape(len(xs) * src_n, -1)

    def extend(self, k_max: int) -> None:
        src, tgt = self.source, self.target
        src.extend(self.shift + k_max)
        tgt.extend(k_max)
        while len(self.maps) <= k_max:
            k = len(self.maps)
            if k == 0:
                raise ResolutionError("chain lift needs its degree-0 component")
            xm = self._apply_matrix(k - 1)
            dsrc = src.images[self.shift + k]  # (b, b_prev, n_src)
            out = np.zeros((len(dsrc), tgt.ranks[k], tgt.alg.n), dtype=np.uint8)
            for j in range(len(dsrc)):
                target = (dsrc[j].reshape(-1).astype(np.int64) @ xm) & 1
                out[j] = tgt.preimage(k, target.astype(np.uint8).reshape(tgt.ranks[k - 1], tgt.alg.n))
            self.maps.append(out)

    def evaluation_matrix(self, k: int) -> np.ndarray:
        """Matrix ``M`` with ``M[j, i]`` = augmentation of block ``i`` of ``X_k(e_j)``."""
        self.extend(k)
        return (self.maps[k].sum(axis=2) & 1).astype(np.uint8)


class CohomologyRing:
    """Cup products and induced maps on top of a :class:`MinimalResolution`."""

    def __init__(self, res: MinimalResolution):
        self.res = res
        self._lifts: dict[Cocycle, ChainLift] = {}
        self._id_map = np.arange(res.alg.n)

    def dim(self, k: int) -> int:
        self.res.extend(k)
        return self.res.ranks[k]

    def basis(self, k: int) -> list[Cocycle]:
        d = self.dim(k)
        return [Cocycle(k, tuple(int(i == j) for i in range(d))) for j in range(d)]

    def one(self) -> Cocycle:
        return Cocycle(0, (1,))

    def lift(self, x: Cocycle) -> ChainLift:
        lift = self._lifts.get(x)
        if lift is None:
            res = self.res
            res.extend(x.degree)
            if len(x.coords) != res.ranks[x.degree]:
                raise ResolutionError("cocycle length does not match the rank")
            x0 = np.zeros((res.ranks[x.degree], 1, res.alg.n), dtype=np.uint8)
            x0[:, 0, res.alg.identity] = x.vector()
            lift = ChainLift(res, res, self._id_map, x.degree, [x0])
            self._lifts[x] = lift
        return lift

    def multiplication_matrix(self, x: Cocycle, n: int) -> np.ndarray:
        """Matrix of ``y -> x * y`` from ``H^n`` to ``H^{n + deg x}``."""
        return self.lift(x).evaluation_matrix(n)

    def cup(self, x: Cocycle, y: Cocycle, max_degree: int | None = None) -> Cocycle:
        if max_degree is not None and x.degree + y.degree > max_degree:
            raise ResolutionError("product degree exceeds the resolution bound")
        m = self.multiplication_matrix(x, y.degree)
        return Cocycle.from_vector(x.degree + y.degree, (m.astype(np.int64) @ y.vector()) & 1)


def cup_product(r: MinimalResolution, x: Cocycle, y: Cocycle) -> Cocycle:
    """``x * y``; requires ``deg x + deg y <= r.max_degree``."""
    if x.degree + y.degree > r.max_degree:
        raise ResolutionError("degree overflow: extend the resolution first")
    return _ring_for(r).cup(x, y)


_RINGS: dict[int, CohomologyRing] = {}


def _ring_for(r: MinimalResolution) -> CohomologyRing:
    ring = _RINGS.get(id(r))
    if ring is None or ring.res is not r:
        ring = CohomologyRing(r)
        _RINGS[id(r)] = ring
    return ring


# ---------------------------------------------------------------------------
# homomorphisms and induced maps


class Homomorphism:
    """A homomorphism of permutation groups given on generators of the source."""

    def __init__(self, source: PermutationGroup, target: PermutationGroup, images: Sequence[Permutation]):
        if len(images) != len(source.gens):
            raise GroupError("need one image per source generator")
        self.source = source
        self.target = target
        self.images = list(images)
        for im in self.images:
            if not target.contains(im):
                raise GroupError("generator image outside the target group")

    @classmethod
    def by_conjugation(cls, source: PermutationGroup, target: PermutationGroup, g: Permutation) -> "Homomorphism":
        """``s -> g^-1 s g``."""
        return cls(source, target, [s.conj(g) for s in source.gens])

    @classmethod
    def inclusion(cls, source: PermutationGroup, target: PermutationGroup) -> "Homomorphism":
        return cls(source, target, list(source.gens))

    def __call__(self, x: Permutation) -> Permutation:
        return self.element_map_perm()[x.key()]

    def element_map_perm(self) -> dict:
        cache = getattr(self, "_perm_map", None)
        if cache is not None:
            return cache
        ident_s = self.source.identity()
        ident_t = self.target.identity()
        out = {ident_s.key(): ident_t}
        queue = [ident_s]
        for x in queue:
            fx = out[x.key()]
            for s, im in zip(self.source.gens, self.images):
                y = x * s
                fy = fx * im
                prev = out.get(y.key())
                if prev is None:
                    out[y.key()] = fy
                    queue.append(y)
                elif prev != fy:
                    raise GroupError("generator images do not define a homomorphism")
        self._perm_map = out
        return out

    def index_map(self, src_alg: GroupAlgebra, tgt_alg: GroupAlgebra) -> np.ndarray:
        """Element-index map between the two group algebras."""
        perm = self.element_map_perm()
        out = np.empty(src_alg.n, dtype=np.int64)
        for i in range(src_alg.n):
            img = perm[src_alg.table.perm(i).key()]
            out[i] = tgt_alg.table.idx(img)
        return out

    def compose(self, other: "Homomorphism") -> "Homomorphism":
        """``other o self`` (apply self first)."""
        return Homomorphism(self.source, other.target, [other(im) for im in self.images])


def induced_map(psi: Homomorphism, rp: MinimalResolution, rq: MinimalResolution, n: int) -> list[np.ndarray]:
    """Matrices of ``psi^*: H^k(Q) -> H^k(P)`` for ``k = 0..n``.

    ``result[k]`` has shape ``(b_k(P), b_k(Q))`` and acts on column vectors.
    """
    return InducedMap(psi, rp, rq).matrices(n)


class InducedMap:
    """Cached chain lift of a homomorphism ``P -> Q`` between resolved 2-groups."""

    def __init__(self, psi: Homomorphism, rp: MinimalResolution, rq: MinimalResolution):
        if not (psi.source.same_group(rp.group) and psi.target.same_group(rq.group)):
            raise ResolutionError("homomorphism does not match the resolved groups")
        emap = psi.index_map(rp.alg, rq.alg)
        x0 = np.zeros((1, 1, rq.alg.n), dtype=np.uint8)
        x0[0, 0, rq.alg.identity] = 1
        self.lift = ChainLift(rp, rq, emap, 0, [x0])
        self.psi = psi

    def matrix(self, k: int) -> np.ndarray:
        return self.lift.evaluation_matrix(k)

    def matrices(self, n: int) -> list[np.ndarray]:
        return [self.matrix(k) for k in range(n + 1)]

    def apply(self, y: Cocycle) -> Cocycle:
        m = self.matrix(y.degree)
        return Cocycle.from_vector(y.degree, (m.astype(np.int64) @ y.vector()) & 1)


def minimal_resolution(p: PermutationGroup, n: int, *, max_order: int = 256) -> MinimalResolution:
    if not p.is_two_group():
        raise ResolutionError("minimal_resolution expects a 2-group")
    res = MinimalResolution(p, n, max_order=max_order)
    res.check()
    return res


def omega_center(p: PermutationGroup) -> PermutationGroup:
    """Elements of order at most 2 in the centre of ``p``."""
    tab = FiniteGroupTable(p)
    invols = [tab.perm(i) for i in tab.center() if tab.orders[i] == 2]
    return PermutationGroup(invols, p.degree)


@dataclass
class PGroupPresentation:
    presentation: "RingPresentation"
    images: list  # generator images as cocycles
    ring: CohomologyRing
    log: list = field(default_factory=list)


def ring_presentation_pgroup(p: PermutationGroup, n: int, *, max_order: int = 256) -> PGroupPresentation:
    """Minimal generators and relations of ``H•(P)`` through degree ``n``.

    A generator is labelled ``c`` when its restriction to the elementary
    abelian part of the centre is nonzero (hence non-nilpotent), else ``b``.
    """
    from .graded_ring import PresentationBuilder
    from .gf2 import SubspaceBasis

    res = minimal_resolution(p, n, max_order=max_order)
    ring = CohomologyRing(res)
    z = omega_center(p)
    rz = MinimalResolution(z, n, max_order=max_order)
    res_to_center = InducedMap(Homomorphism.inclusion(z, p), rz, res)
    gens: list[Cocycle] = []

    def multiply(vec, i, k):
        m = ring.multiplication_matrix(gens[i], k)
        return (m.astype(np.int64) @ vec.astype(np.int64)) & 1

    def kind_of(vec, k):
        return "c" if res_to_center.apply(Cocycle.from_vector(k, vec)).coords.count(1) else "b"

    builder = PresentationBuilder(multiply, kind_of)
    for k in range(1, n + 1):
        before = len(builder.gens)
        builder.step(k, SubspaceBasis.full(res.ranks[k]))
        for g in builder.gens[before:]:
            gens.append(Cocycle.from_vector(k, g.image))
    return PGroupPresentation(builder.presentation(), gens, ring, builder.log)
