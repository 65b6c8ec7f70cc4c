"""Permutation groups: Schreier-Sims, orbits, Sylow 2-subgroups, double cosets.

Permutations act on the right, GAP style: ``i^(p*q) = (i^p)^q``.  A group
element is stored as a numpy image table, so products and conjugates of many
elements at once are plain fancy indexing.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)


class GroupError(ValueError):
    """Bad input to a group computation (degree mismatch, non-membership...)."""


class ScaleError(RuntimeError):
    """A computation would exceed its configured size budget."""


def _dtype(degree: int):
    return np.uint16 if degree < 65536 else np.uint32


def digest(arr: np.ndarray) -> bytes:
    return hashlib.blake2b(np.ascontiguousarray(arr).tobytes(), digest_size=16).digest()


_WEIGHTS: dict[int, np.ndarray] = {}


def _weights(degree: int) -> np.ndarray:
    w = _WEIGHTS.get(degree)
    if w is None:
        rng = np.random.default_rng(0x5EED + degree)
        w = rng.integers(0, np.iinfo(np.int64).max, size=(degree, 2), dtype=np.uint64)
        w.setflags(write=False)
        _WEIGHTS[degree] = w
    return w


def row_hashes(rows: np.ndarray) -> np.ndarray:
    """Two independent 64-bit linear hashes per image table (last axis)."""
    return rows.astype(np.uint64) @ _weights(rows.shape[-1])


def _void_list(h: np.ndarray) -> list:
    h = np.ascontiguousarray(h)
    return h.view(np.dtype((np.void, h.shape[-1] * h.itemsize))).reshape(-1).tolist()


def element_keys(rows: np.ndarray) -> list[bytes]:
    """Hash keys for a batch of image tables, shape ``(m, degree)``."""
    return _void_list(row_hashes(rows))


def element_key(arr: np.ndarray) -> bytes:
    return element_keys(arr.reshape(1, -1))[0]


def set_keys(batch: np.ndarray) -> list[bytes]:
    """Order-independent keys for a batch of element sets, shape ``(m, k, degree)``."""
    h = np.sort(row_hashes(batch), axis=1)
    return _void_list(h.reshape(h.shape[0], -1))


class Permutation:
    """A bijection of ``{0, ..., degree-1}`` stored as its image table."""

    __slots__ = ("arr", "_key")

    def __init__(self, images):
        arr = np.asarray(images)
        if arr.ndim != 1:
            raise GroupError("image table must be 1-D")
        arr = arr.astype(_dtype(arr.size), copy=True)
        if arr.size and not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise GroupError("not a permutation")
        arr.setflags(write=False)
        self.arr = arr
        self._key = None

    @classmethod
    def _raw(cls, arr: np.ndarray) -> "Permutation":
        p = cls.__new__(cls)
        arr.setflags(write=False)
        p.arr = arr
        p._key = None
        return p

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls._raw(np.arange(degree, dtype=_dtype(degree)))

    @classmethod
    def from_cycles(cls, cycles: Sequence[Sequence[int]], degree: int) -> "Permutation":
        arr = np.arange(degree, dtype=np.int64)
        seen = set()
        for cyc in cycles:
            for a in cyc:
                if not 0 <= a < degree:
                    raise GroupError(f"point {a} outside 0..{degree - 1}")
                if a in seen:
                    raise GroupError(f"point {a} appears twice")
                seen.add(a)
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                arr[a] = b
        return cls(arr)

    @classmethod
    def parse(cls, text: str, degree: int) -> "Permutation":
        """Parse disjoint-cycle notation such as ``(0 1 2)(3 4)``; ``()`` is the identity."""
        text = text.strip()
        if not re.fullmatch(r"(\s*\([\d\s,]*\)\s*)*", text):
            raise GroupError(f"cannot parse permutation {text!r}")
        cycles = []
        for body in re.findall(r"\(([^)]*)\)", text):
            pts = [int(x) for x in re.split(r"[\s,]+", body.strip()) if x]
            if len(pts) > 1:
                cycles.append(pts)
        return cls.from_cycles(cycles, degree)

    @property
    def degree(self) -> int:
        return self.arr.size

    def key(self) -> bytes:
        if self._key is None:
            self._key = self.arr.tobytes()
        return self._key

    def __mul__(self, other: "Permutation") -> "Permutation":
        return Permutation._raw(other.arr[self.arr])

    def __invert__(self) -> "Permutation":
        inv = np.empty_like(self.arr)
        inv[self.arr] = np.arange(self.arr.size, dtype=self.arr.dtype)
        return Permutation._raw(inv)

    def inverse(self) -> "Permutation":
        return ~self

    def __pow__(self, n: int) -> "Permutation":
        if n < 0:
            return (~self) ** (-n)
        result = Permutation.identity(self.degree)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self, g: "Permutation") -> "Permutation":
        """``g^-1 * self * g``."""
        return (~g) * self * g

    def __call__(self, i: int) -> int:
        return int(self.arr[i])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def is_identity(self) -> bool:
        return bool(np.all(self.arr == np.arange(self.arr.size)))

    def cycles(self) -> list[list[int]]:
        seen = np.zeros(self.degree, dtype=bool)
        out = []
        for i in range(self.degree):
            if seen[i]:
                continue
            cyc = [i]
            seen[i] = True
            j = int(self.arr[i])
            while j != i:
                cyc.append(j)
                seen[j] = True
                j = int(self.arr[j])
            if len(cyc) > 1:
                out.append(cyc)
        return out

    def order(self) -> int:
        out = 1
        for c in self.cycles():
            out = out * len(c) // math.gcd(out, len(c))
        return out

    def fixed_points(self) -> int:
        return int(np.count_nonzero(self.arr == np.arange(self.degree)))

    def cycle_type(self) -> tuple[int, ...]:
        lens = sorted((len(c) for c in self.cycles()), reverse=True)
        return tuple(lens)

    def __str__(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc)

    def __repr__(self) -> str:
        return f"Permutation({self})"


def two_part(n: int) -> int:
    return n & -n


# ---------------------------------------------------------------------------
# stabilizer chains


@dataclass
class _Level:
    base_point: int
    gens: list  # list[Permutation] fixing earlier base points
    reps: dict = field(default_factory=dict)  # orbit point -> coset rep u, base^u = point
    inv_reps: dict = field(default_factory=dict)

    def rebuild(self, degree: int):
        b = self.base_point
        ident = Permutation.identity(degree)
        reps = {b: ident}
        queue = [b]
        for p in queue:
            u = reps[p]
            for s in self.gens:
                q = int(s.arr[p])
                if q not in reps:
                    reps[q] = u * s
                    queue.append(q)
        self.reps = reps
        self.inv_reps = {p: ~u for p, u in reps.items()}


class PermutationGroup:
    """A permutation group with a lazily computed base and strong generating set."""

    def __init__(self, gens: Sequence[Permutation], degree: int | None = None, *, order: int | None = None):
        gens = list(gens)
        if degree is None:
            if not gens:
                raise GroupError("degree required for a group without generators")
            degree = gens[0].degree
        if any(g.degree != degree for g in gens):
            raise GroupError("generators have different degrees")
        self.degree = degree
        self.gens = [g for g in gens if not g.is_identity()]
        self._levels: list[_Level] | None = None
        self._known_order = order
        self._elements = None

    # -- construction --------------------------------------------------
    @classmethod
    def trivial(cls, degree: int) -> "PermutationGroup":
        return cls([], degree)

    def identity(self) -> Permutation:
        return Permutation.identity(self.degree)

    def __repr__(self) -> str:
        return f"<PermutationGroup degree={self.degree} ngens={len(self.gens)}>"

    # -- Schreier-Sims -----------------------------------------------------
    def _sift(self, h: Permutation, start: int = 0):
        levels = self._levels
        for i in range(start, len(levels)):
            lv = levels[i]
            p = int(h.arr[lv.base_point])
            inv = lv.inv_reps.get(p)
            if inv is None:
                return h, i
            h = h * inv
        return h, len(levels)

    def _add_strong(self, h: Permutation, upto: int):
        """Add a non-sifting residue ``h`` (which fixes base points < upto)."""
        levels = self._levels
        if upto == len(levels):
            moved = int(np.flatnonzero(h.arr != np.arange(self.degree))[0])
            levels.append(_Level(moved, []))
        for j in range(upto + 1):
            # h fixes base points of levels < upto, so it belongs to levels 0..upto
            levels[j].gens.append(h)
        for j in range(upto + 1):
            levels[j].rebuild(self.degree)

    def _schreier_sims(self, rng_seed: int = 12345):
        self._levels = []
        if not self.gens:
            return
        for g in self.gens:
            h, i = self._sift(g)
            if not h.is_identity():
                self._add_strong(h, i)
        rng = np.random.default_rng(rng_seed)
        # randomized phase: product replacement
        pr = [g for g in self.gens] * max(1, 10 // len(self.gens) + 1)
        acc = self.identity()
        for _ in range(50):
            i, j = rng.choice(len(pr), 2, replace=False) if len(pr) > 1 else (0, 0)
            pr[i] = pr[i] * pr[j]
            acc = acc * pr[i]
        misses = 0
        while misses < 25:
            i, j = rng.choice(len(pr), 2, replace=False)
            pr[i] = pr[i] * pr[j]
            acc = acc * pr[i]
            h, lvl = self._sift(acc)
            if h.is_identity():
                misses += 1
            else:
                misses = 0
                self._add_strong(h, lvl)
            if self._known_order is not None and self._order_from_levels() == self._known_order:
                break
        if self._known_order is not None and self._order_from_levels() == self._known_order:
            return
        # deterministic verification: every Schreier generator must sift
        changed = True
        while changed:
            changed = False
            for i in range(len(self._levels) - 1, -1, -1):
                lv = self._levels[i]
                for p, u in list(lv.reps.items()):
                    for s in list(lv.gens):
                        q = int(s.arr[p])
                        sg = u * s * lv.inv_reps[q]
                        if sg.is_identity():
                            continue
                        h, lvl = self._sift(sg, i + 1)
                        if not h.is_identity():
                            self._add_strong(h, lvl)
                            changed = True
                            break
                    if changed:
                        break
                if changed:
                    break

    def _order_from_levels(self) -> int:
        return math.prod(len(lv.reps) for lv in self._levels)

    def _chain(self) -> list[_Level]:
        if self._levels is None:
            self._schreier_sims()
        return self._levels

    def base(self) -> list[int]:
        return [lv.base_point for lv in self._chain()]

    def strong_generators(self) -> list[Permutation]:
        seen = {}
        for lv in self._chain():
            for g in lv.gens:
                seen[g.key()] = g
        return list(seen.values())

    def basic_orbit_lengths(self) -> list[int]:
        return [len(lv.reps) for lv in self._chain()]

    def order(self) -> int:
        self._chain()
        return self._order_from_levels()

    def __len__(self) -> int:
        return self.order()

    def contains(self, g: Permutation) -> bool:
        if g.degree != self.degree:
            return False
        self._chain()
        h, _ = self._sift(g)
        return h.is_identity()

    __contains__ = contains

    def is_subgroup_of(self, other: "PermutationGroup") -> bool:
        return all(other.contains(g) for g in self.gens)

    def random_element(self, rng: np.random.Generator) -> Permutation:
        g = self.identity()
        for lv in reversed(self._chain()):
            pts = list(lv.reps)
            g = g * lv.reps[pts[int(rng.integers(len(pts)))]]
        return g

    def elements(self, limit: int = 2_000_000) -> list[Permutation]:
        """All elements in BSGS word order (deterministic)."""
        if self._elements is not None:
            return self._elements
        n = self.order()
        if n > limit:
            raise ScaleError(f"group of order {n} too large to enumerate")
        arrs = self.element_array()
        self._elements = [Permutation._raw(a) for a in arrs]
        return self._elements

    def element_array(self) -> np.ndarray:
        """Elements as an ``(order, degree)`` array, same order as :meth:`elements`."""
        levels = self._chain()
        cur = np.arange(self.degree, dtype=_dtype(self.degree)).reshape(1, -1)
        # element = u_k * ... * u_0 ; build from the deepest level outwards
        for lv in reversed(levels):
            reps = [lv.reps[p].arr for p in sorted(lv.reps)]
            rep_arr = np.stack(reps)
            # (a * u)[i] = u[a[i]]
            cur = np.stack([u[cur] for u in rep_arr], axis=1).reshape(-1, self.degree)
        return cur

    # -- generic helpers -------------------------------------------------
    def subgroup(self, gens: Iterable[Permutation]) -> "PermutationGroup":
        return PermutationGroup(list(gens), self.degree)

    def is_abelian(self) -> bool:
        return all(a * b == b * a for a, b in itertools.combinations(self.gens, 2))

    def orbit(self, point: int) -> list[int]:
        seen = {point}
        queue = [point]
        for p in queue:
            for g in self.gens:
                q = int(g.arr[p])
                if q not in seen:
                    seen.add(q)
                    queue.append(q)
        return queue

    def is_two_group(self) -> bool:
        n = self.order()
        return n & (n - 1) == 0

    def same_group(self, other: "PermutationGroup") -> bool:
        return self.order() == other.order() and self.is_subgroup_of(other)

    def element_keys(self) -> frozenset:
        return frozenset(digest(r) for r in self.element_array())

    def canonical_key(self) -> bytes:
        """Digest of the sorted element table; equal iff the subgroups coincide."""
        arr = self.element_array()
        order = np.lexsort(arr.T[::-1])
        return digest(arr[order])


def read_group_file(path: str | Path) -> PermutationGroup:
    """Read ``degree N`` followed by one generator per line in cycle notation."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("degree"):
        raise GroupError(f"{path}: first line must be 'degree N'")
    try:
        degree = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise GroupError(f"{path}: bad degree line {lines[0]!r}") from exc
    gens = [Permutation.parse(ln, degree) for ln in lines[1:]]
    return PermutationGroup(gens, degree)


def format_group(group: PermutationGroup, comments: Sequence[str] = ()) -> str:
    out = [f"# {c}" for c in comments]
    out.append(f"degree {group.degree}")
    out.extend(str(g) for g in group.gens)
    return "\n".join(out) + "\n"


def write_group_file(path: str | Path, group: PermutationGroup, comments: Sequence[str] = ()) -> None:
    Path(path).write_text(format_group(group, comments))


def build_group(gens: Sequence[Permutation], degree: int | None = None) -> PermutationGroup:
    g = PermutationGroup(gens, degree)
    g.order()
    return g


# ---------------------------------------------------------------------------
# orbits of group elements / subgroups under conjugation


def _conj_rows(rows: np.ndarray, g: Permutation, ginv: Permutation) -> np.ndarray:
    """Conjugate every row ``x`` to ``g^-1 x g``."""
    return g.arr[rows[:, ginv.arr]]


@dataclass
class Orbit:
    """An orbit with a Schreier tree; points are identified by digest keys."""

    keys: dict
    parent: np.ndarray
    via: np.ndarray
    gens: list

    def __len__(self) -> int:
        return len(self.keys)

    def transversal(self, index: int) -> Permutation:
        """An element mapping the root to orbit point ``index``."""
        path = []
        while index != 0:
            path.append(int(self.via[index]))
            index = int(self.parent[index])
        degree = self.gens[0].degree
        g = Permutation.identity(degree)
        for gi in reversed(path):
            g = g * self.gens[gi]
        return g


def _orbit_bfs(gens: Sequence[Permutation], root, act_batch, keys_fn, limit: int | None) -> Orbit:
    """Breadth-first orbit. ``act_batch(objs, g)`` acts on a stacked batch and
    ``keys_fn`` hashes a stacked batch."""
    gens = list(gens)
    keys = {keys_fn(root[None, ...])[0]: 0}
    parent = [0]
    via = [-1]
    frontier = root[None, ...]
    frontier_idx = [0]
    while len(frontier_idx):
        new_objs = []
        new_idx = []
        for gi, g in enumerate(gens):
            imgs = act_batch(frontier, g)
            for row, src, k in zip(imgs, frontier_idx, keys_fn(imgs)):
                if k not in keys:
                    idx = len(parent)
                    keys[k] = idx
                    parent.append(src)
                    via.append(gi)
                    new_objs.append(row)
                    new_idx.append(idx)
                    if limit is not None and len(keys) > limit:
                        raise ScaleError(f"orbit exceeds limit {limit}")
        frontier = np.stack(new_objs) if new_objs else frontier[:0]
        frontier_idx = new_idx
    return Orbit(keys, np.array(parent, dtype=np.int64), np.array(via, dtype=np.int64), gens)


def conjugacy_orbit(group: PermutationGroup, x: Permutation, limit: int | None = None) -> Orbit:
    """Orbit of ``x`` under conjugation by ``group`` (points ``x^g``)."""
    gens = group.gens or [group.identity()]
    invs = {g.key(): ~g for g in gens}

    def act(rows, g):
        return _conj_rows(rows, g, invs[g.key()])

    return _orbit_bfs(gens, x.arr.copy(), act, element_keys, limit)


def _subgroup_key(rows: np.ndarray) -> bytes:
    return set_keys(rows[None])[0]


def subgroup_orbit(group: PermutationGroup, sub: PermutationGroup, limit: int | None = None) -> Orbit:
    """Orbit of the subgroup ``sub`` under conjugation; keys are element-set digests."""
    gens = group.gens or [group.identity()]
    invs = {g.key(): ~g for g in gens}
    elems = sub.element_array()

    def act(batch, g):
        ginv = invs[g.key()]
        return g.arr[batch[:, :, ginv.arr]]

    return _orbit_bfs(gens, elems, act, set_keys, limit)


def stabilizer_from_orbit(group: PermutationGroup, orbit: Orbit, locate: Callable[[Permutation], int],
                          seed: int = 0, max_tries: int = 100_000) -> PermutationGroup:
    """Stabilizer of the orbit root via random Schreier generators.

    ``locate(g)`` returns the orbit index of root^g.  Runs until the
    stabilizer reaches ``|group| / |orbit|``, so the result is exact.
    """
    target = group.order() // len(orbit)
    rng = np.random.default_rng(seed)
    stab_gens: list[Permutation] = []
    stab = PermutationGroup([], group.degree)
    tries = 0
    while stab.order() < target:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("stabilizer search did not converge")
        g = group.random_element(rng)
        t = orbit.transversal(locate(g))
        s = g * ~t
        if s.is_identity() or stab.contains(s):
            continue
        stab_gens.append(s)
        stab = PermutationGroup(stab_gens, group.degree)
    if stab.order() != target:
        raise RuntimeError("stabilizer order overshoot; orbit inconsistent")
    return stab


def _smallest_prime(n: int) -> int:
    p = 2
    while n % p:
        p += 1
    return p


def centralizer_of_element(g: PermutationGroup, x: Permutation, *, limit: int | None = 5_000_000,
                           seed: int = 0) -> PermutationGroup:
    """``C_g(x)`` by orbit-stabilizer; ``x`` may lie outside ``g``.

    For ``x`` of composite order, ``C(x) <= C(x^k)`` for the prime-order power
    ``x^k``, so the orbit of ``x`` is enumerated inside that smaller group.
    """
    if x.degree != g.degree:
        raise GroupError("element and group act on different point sets")
    if x.is_identity():
        return g
    m = x.order()
    p = _smallest_prime(m)
    if p != m:
        g = centralizer_of_element(g, x ** (m // p), limit=limit, seed=seed)
    if all(x * s == s * x for s in g.gens):
        return g
    orb = conjugacy_orbit(g, x, limit)

    def locate(h: Permutation) -> int:
        return orb.keys[element_key(x.conj(h).arr)]

    return stabilizer_from_orbit(g, orb, locate, seed=seed)


def centralizer_of_subgroup(g: PermutationGroup, h: PermutationGroup, **kw) -> PermutationGroup:
    c = g
    for t in h.gens:
        c = centralizer_of_element(c, t, **kw)
    return c


@dataclass(frozen=True)
class ElementClassReport:
    element_order: int
    class_size: int
    centralizer_order: int


def classify_element(g: PermutationGroup, x: Permutation, *, limit: int | None = 5_000_000,
                     seed: int = 0) -> ElementClassReport:
    """Order, class size and centralizer order; class size is ``|g| / |C_g(x)|``."""
    c = centralizer_of_element(g, x, limit=limit, seed=seed)
    n = g.order()
    if n % c.order():
        raise RuntimeError("centralizer order does not divide the group order")
    return ElementClassReport(x.order(), n // c.order(), c.order())


def normalizer(g: PermutationGroup, h: PermutationGroup, *, limit: int | None = 2_000_000,
               seed: int = 0) -> PermutationGroup:
    """``N_g(h)`` as the stabilizer of ``h`` under conjugation."""
    if not h.is_subgroup_of(g):
        raise GroupError("not a subgroup")
    if all(g.contains(s) and h.contains(s.conj(t)) for s in h.gens for t in g.gens):
        return g
    orb = subgroup_orbit(g, h, limit)
    elems = h.element_array()

    def locate(t: Permutation) -> int:
        tinv = ~t
        return orb.keys[_subgroup_key(t.arr[elems[:, tinv.arr]])]

    return stabilizer_from_orbit(g, orb, locate, seed=seed)


def two_part_element(x: Permutation) -> Permutation:
    """The 2-power-order part of ``x``."""
    n = x.order()
    odd = n // two_part(n)
    # x^(odd * k) with k inverse of odd mod 2-part gives the 2-part
    m = two_part(n)
    k = pow(odd, -1, m) if m > 1 else 0
    return x ** (odd * k) if m > 1 else Permutation.identity(x.degree)


def sylow_2(g: PermutationGroup, *, seed: int = 0, orbit_limit: int = 400_000,
            small: int = 200_000) -> PermutationGroup:
    """A Sylow 2-subgroup of ``g``.

    While the ambient group is large it is replaced by the centralizer of a
    non-central involution whenever that keeps the full 2-part (some
    involution is central in a Sylow subgroup, so this always succeeds
    eventually).  In the small ambient a 2-subgroup is grown by adjoining
    2-elements of its normalizer until the order is right.
    """
    target = two_part(g.order())
    rng = np.random.default_rng(seed)
    degree = g.degree
    if target == 1:
        return PermutationGroup([], degree)
    ambient = g
    while ambient.order() > small and ambient.order() > target:
        moved = False
        for _ in range(60):
            y = two_part_element(ambient.random_element(rng))
            if y.is_identity():
                continue
            z = y ** (y.order() // 2)
            if all(z * s == s * z for s in ambient.gens):
                continue
            try:
                c = centralizer_of_element(ambient, z, limit=orbit_limit, seed=int(rng.integers(1 << 30)))
            except ScaleError:
                continue
            if two_part(c.order()) == target:
                ambient = c
                moved = True
                log.debug("sylow descent: ambient order %d", c.order())
                break
        if not moved:
            break
    p_gens: list[Permutation] = []
    P = PermutationGroup([], degree)
    N = ambient
    while P.order() < target:
        if p_gens:
            N = normalizer(ambient, P, limit=orbit_limit, seed=int(rng.integers(1 << 30)))
            if two_part(N.order()) == target and N.order() < ambient.order():
                ambient = N
        for _ in range(10_000):
            y = two_part_element(N.random_element(rng))
            if not y.is_identity() and not P.contains(y):
                break
        else:
            raise RuntimeError("could not extend the 2-subgroup")
        p_gens.append(y)
        P = PermutationGroup(p_gens, degree)
        if P.order() & (P.order() - 1):
            raise RuntimeError("climb produced a non-2-group")
        log.debug("sylow climb: |P| = %d", P.order())
    return PermutationGroup(_prune_gens(P), degree)


def _prune_gens(group: PermutationGroup) -> list[Permutation]:
    """Drop redundant generators (keeps the group)."""
    kept: list[Permutation] = []
    cur = PermutationGroup([], group.degree)
    for s in group.strong_generators() if len(group.gens) > 12 else group.gens:
        if not cur.contains(s):
            kept.append(s)
            cur = PermutationGroup(kept, group.degree)
    if cur.order() != group.order():
        kept = list(group.gens)
    return kept


# ---------------------------------------------------------------------------
# small-group structure (element enumeration)


class FiniteGroupTable:
    """Cayley-table view of a small permutation group."""

    def __init__(self, group: PermutationGroup):
        self.group = group
        self.arr = group.element_array()
        self.n = self.arr.shape[0]
        self.index = {r.tobytes(): i for i, r in enumerate(self.arr)}
        ident = np.arange(group.degree, dtype=self.arr.dtype).tobytes()
        self.identity = self.index[ident]
        # mult[i, j] = index of e_i * e_j ; (a*b)[x] = b[a[x]]
        mult = np.empty((self.n, self.n), dtype=np.int32)
        for j in range(self.n):
            prod = self.arr[j][self.arr]
            mult[:, j] = [self.index[r.tobytes()] for r in prod]
        self.mult = mult
        self.inv = np.empty(self.n, dtype=np.int32)
        for i in range(self.n):
            self.inv[i] = int(np.flatnonzero(mult[i] == self.identity)[0])
        self.orders = np.array([self._order(i) for i in range(self.n)])

    def _order(self, i: int) -> int:
        k, j = 1, i
        while j != self.identity:
            j = self.mult[j, i]
            k += 1
        return k

    def perm(self, i: int) -> Permutation:
        return Permutation._raw(self.arr[i].copy())

    def idx(self, p: Permutation) -> int:
        return self.index[p.arr.astype(self.arr.dtype).tobytes()]

    def conj(self, i: int, g: int) -> int:
        return int(self.mult[self.mult[self.inv[g], i], g])

    def closure(self, idxs: Iterable[int]) -> frozenset:
        elems = {self.identity}
        frontier = [self.identity]
        gens = list(set(idxs))
        while frontier:
            nxt = []
            for a in frontier:
                for b in gens:
                    c = int(self.mult[a, b])
                    if c not in elems:
                        elems.add(c)
                        nxt.append(c)
            frontier = nxt
        return frozenset(elems)

    def subgroup(self, idxs: Iterable[int]) -> PermutationGroup:
        idxs = [i for i in idxs if i != self.identity]
        return PermutationGroup([self.perm(i) for i in idxs], self.group.degree)

    def center(self) -> list[int]:
        gens = [self.idx(g) for g in self.group.gens]
        return [i for i in range(self.n) if all(self.mult[i, g] == self.mult[g, i] for g in gens)]


def abelian_invariants_from_orders(orders: Sequence[int]) -> list[int]:
    """Cyclic factor orders of an abelian 2-group from its element orders."""
    n = len(orders)
    if n & (n - 1):
        raise GroupError("not a 2-group")
    counts = []
    k = 0
    while True:
        omega = sum(1 for o in orders if (1 << k) % o == 0)
        counts.append(int(round(math.log2(omega))))
        if omega == n:
            break
        k += 1
    # counts[k] = sum_i min(k, e_i); number of factors with e_i >= k is counts[k]-counts[k-1]
    ge = [counts[k] - counts[k - 1] for k in range(1, len(counts))]
    factors = []
    for k in range(len(ge)):
        exact = ge[k] - (ge[k + 1] if k + 1 < len(ge) else 0)
        factors.extend([1 << (k + 1)] * exact)
    return sorted(factors, reverse=True)


@dataclass
class CentralSeriesReport:
    center: PermutationGroup
    second_center: PermutationGroup
    center_type: list[int] | None
    second_center_type: list[int] | None


def central_series(s: PermutationGroup) -> CentralSeriesReport:
    """``Z(S)`` and ``Z_2(S)`` with cyclic decompositions when abelian."""
    if not s.is_two_group():
        raise GroupError("central_series expects a 2-group")
    tab = FiniteGroupTable(s)
    gens = [tab.idx(g) for g in s.gens]
    z = set(tab.center())
    z2 = []
    for i in range(tab.n):
        ok = True
        for g in gens:
            comm = tab.mult[tab.mult[tab.inv[i], tab.inv[g]], tab.mult[i, g]]
            if int(comm) not in z:
                ok = False
                break
        if ok:
            z2.append(i)
    zg = tab.subgroup(z)
    z2g = tab.subgroup(z2)

    def typ(idxs):
        sub = sorted(idxs)
        if all(tab.mult[a, b] == tab.mult[b, a] for a in sub for b in sub):
            return abelian_invariants_from_orders([int(tab.orders[i]) for i in sub])
        return None

    return CentralSeriesReport(zg, z2g, typ(z), typ(z2))


@dataclass
class DoubleCosetDecomposition:
    group: PermutationGroup
    subgroup: PermutationGroup
    representatives: list[Permutation]
    sizes: list[int]

    def __len__(self) -> int:
        return len(self.representatives)


def _coset_key(h_arr: np.ndarray, x: Permutation) -> bytes:
    return _subgroup_key(x.arr[h_arr])  # the set of h*x


def double_cosets(g: PermutationGroup, h: PermutationGroup, *, max_index: int = 1_000_000) -> DoubleCosetDecomposition:
    """``H\\G/H`` by enumerating H-orbits on the right cosets of H."""
    if not h.is_subgroup_of(g):
        raise GroupError("not a subgroup")
    index = g.order() // h.order()
    if index > max_index:
        raise ScaleError(f"index {index} too large; use double_cosets_by_conjugation")
    h_arr = h.element_array()
    ident = g.identity()
    keys = {_coset_key(h_arr, ident): 0}
    reps = [ident]
    for x in reps:
        for s in g.gens:
            y = x * s
            k = _coset_key(h_arr, y)
            if k not in keys:
                keys[k] = len(reps)
                reps.append(y)
    if len(reps) != index:
        raise RuntimeError("coset enumeration inconsistent with orders")
    parent = list(range(len(reps)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, x in enumerate(reps):
        for t in h.gens:
            j = keys[_coset_key(h_arr, x * t)]
            ra, rb = find(i), find(j)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    classes: dict[int, list[int]] = {}
    for i in range(len(reps)):
        classes.setdefault(find(i), []).append(i)
    roots = sorted(classes)
    return DoubleCosetDecomposition(g, h, [reps[r] for r in roots],
                                    [len(classes[r]) * h.order() for r in roots])


def double_cosets_by_conjugation(g: PermutationGroup, z: Permutation, *, limit: int | None = 3_000_000,
                                 centralizer: PermutationGroup | None = None,
                                 seed: int = 0) -> tuple[DoubleCosetDecomposition, Orbit]:
    """Double cosets of ``H = C_G(z)`` as H-orbits on the conjugacy class of ``z``."""
    orb = conjugacy_orbit(g, z, limit)
    if centralizer is None:
        def locate(t):
            return orb.keys[element_key(z.conj(t).arr)]
        centralizer = stabilizer_from_orbit(g, orb, locate, seed=seed)
    H = centralizer
    if H.order() * len(orb) != g.order():
        raise RuntimeError("orbit length and centralizer order disagree")
    n = len(orb)
    # materialise the class as rows, then union-find over H-generators
    rows = np.empty((n, g.degree), dtype=z.arr.dtype)
    rows[0] = z.arr
    # parents precede children in BFS numbering, so a forward pass fills every row
    invs = {s.key(): ~s for s in orb.gens}
    for i in range(1, n):
        p = int(orb.parent[i])
        s = orb.gens[int(orb.via[i])]
        rows[i] = s.arr[rows[p][invs[s.key()].arr]]
    parent = np.arange(n)

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for t in H.gens:
        tinv = ~t
        imgs = t.arr[rows[:, tinv.arr]]
        img_keys = element_keys(imgs)
        for i in range(n):
            j = orb.keys[img_keys[i]]
            ra, rb = find(i), find(j)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots: dict[int, int] = {}
    for i in range(n):
        r = find(i)
        roots[r] = roots.get(r, 0) + 1
    reps = [orb.transversal(r) for r in sorted(roots)]
    sizes = [roots[r] * H.order() for r in sorted(roots)]
    return DoubleCosetDecomposition(g, H, reps, sizes), orb


def subgroup_intersection(g: PermutationGroup, a: PermutationGroup, b: PermutationGroup,
                          *, limit: int = 2_000_000) -> PermutationGroup:
    """``a ∩ b`` by enumerating the smaller factor."""
    if a.order() > b.order():
        a, b = b, a
    if a.order() > limit:
        raise ScaleError("intersection too large to enumerate")
    gens: list[Permutation] = []
    cur = PermutationGroup([], g.degree)
    for x in a.elements():
        if b.contains(x) and not cur.contains(x):
            gens.append(x)
            cur = PermutationGroup(gens, g.degree)
    return cur


@dataclass
class ElementaryAbelianClass:
    subgroup: PermutationGroup
    rank: int
    fusion_class: int
    signature: tuple


def _element_signature(p: Permutation) -> tuple:
    return (p.order(), p.cycle_type())


def maximal_elementary_abelians(s: PermutationGroup, ambient: PermutationGroup | None = None, *,
                                fusion_orbit_limit: int = 0) -> list[ElementaryAbelianClass]:
    """Maximal elementary abelian subgroups of ``s`` up to ``s``-conjugacy.

    Classes are fused by an ambient-conjugacy invariant (the multiset of
    element cycle types); when ``fusion_orbit_limit`` allows, same-invariant
    classes are tested for genuine ambient conjugacy by orbit enumeration.
    """
    tab = FiniteGroupTable(s)
    invol = [i for i in range(tab.n) if tab.orders[i] == 2]
    commute = {i: {j for j in invol if tab.mult[i, j] == tab.mult[j, i]} for i in invol}
    found: set[frozenset] = set()
    maximal: list[frozenset] = []
    stack = [tab.closure([i]) for i in invol]
    seen: set[frozenset] = set(stack)
    while stack:
        E = stack.pop()
        members = [i for i in E if i != tab.identity]
        cands = set.intersection(*(commute[i] for i in members)) - E
        if not cands:
            if E not in found:
                found.add(E)
                maximal.append(E)
            continue
        for j in cands:
            F = tab.closure(list(E) + [j])
            if F not in seen:
                seen.add(F)
                stack.append(F)
    # s-conjugacy classes
    gens = [tab.idx(g) for g in s.gens]
    classes: list[list[frozenset]] = []
    assigned: set[frozenset] = set()
    for E in sorted(maximal, key=lambda e: sorted(e)):
        if E in assigned:
            continue
        orbit = [E]
        assigned.add(E)
        for F in orbit:
            for g in gens:
                Fg = frozenset(tab.conj(i, g) for i in F)
                if Fg not in assigned:
                    assigned.add(Fg)
                    orbit.append(Fg)
        classes.append(orbit)
    out = []
    sigs: dict[tuple, int] = {}
    reps = []
    for orbit in classes:
        E = orbit[0]
        sub = tab.subgroup(E)
        rank = int(round(math.log2(len(E))))
        sig = tuple(sorted(_element_signature(tab.perm(i)) for i in E))
        reps.append((sub, rank, sig))
    amb = ambient if ambient is not None else s
    fusion_ids: list[int] = []
    for k, (sub, rank, sig) in enumerate(reps):
        fid = None
        for j in range(k):
            if reps[j][2] != sig:
                continue
            if fusion_orbit_limit and _conjugate_subgroups(amb, reps[j][0], sub, fusion_orbit_limit):
                fid = fusion_ids[j]
                break
            if not fusion_orbit_limit:
                fid = fusion_ids[j]
                break
        if fid is None:
            fid = max(fusion_ids, default=-1) + 1
        fusion_ids.append(fid)
        out.append(ElementaryAbelianClass(sub, rank, fid, sig))
    return out


def _conjugate_subgroups(g: PermutationGroup, a: PermutationGroup, b: PermutationGroup, limit: int) -> bool:
    if a.order() != b.order():
        return False
    try:
        orb = subgroup_orbit(g, a, limit)
    except ScaleError:
        return False
    return _subgroup_key(b.element_array()) in orb.keys


def conjugating_element(g: PermutationGroup, a: PermutationGroup, b: PermutationGroup,
                        limit: int = 1_000_000) -> Permutation | None:
    """Some ``t`` in ``g`` with ``a^t = b`` (as sets), by orbit search."""
    orb = subgroup_orbit(g, a, limit)
    idx = orb.keys.get(_subgroup_key(b.element_array()))
    return None if idx is None else orb.transversal(idx)


def symmetric_group(n: int) -> PermutationGroup:
    gens = [Permutation.from_cycles([[0, 1]], n)]
    if n > 2:
        gens.append(Permutation.from_cycles([list(range(n))], n))
    return PermutationGroup(gens, n)


def alternating_group(n: int) -> PermutationGroup:
    gens = [Permutation.from_cycles([[i, i + 1, i + 2]], n) for i in range(n - 2)]
    return PermutationGroup(gens, n)


def cyclic_group(n: int) -> PermutationGroup:
    return PermutationGroup([Permutation.from_cycles([list(range(n))], n)], n)


def dihedral_group(n: int) -> PermutationGroup:
    """Dihedral group of order ``2n`` acting on an n-gon."""
    rot = Permutation.from_cycles([list(range(n))], n)
    refl = Permutation([(-i) % n for i in range(n)])
    return PermutationGroup([rot, refl], n)


def quaternion_group() -> PermutationGroup:
    """Q8 in its regular representation on 8 points."""
    # elements: 1,i,j,k,-1,-i,-j,-k -> 0..7 ; right multiplication by i and j
    table = {
        "1": 0, "i": 1, "j": 2, "k": 3, "-1": 4, "-i": 5, "-j": 6, "-k": 7,
    }
    names = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"]
    mul = {("1", x): x for x in "1ijk"}
    base = {
        ("i", "i"): "-1", ("i", "j"): "k", ("i", "k"): "-j",
        ("j", "i"): "-k", ("j", "j"): "-1", ("j", "k"): "i",
        ("k", "i"): "j", ("k", "j"): "-i", ("k", "k"): "-1",
    }

    def times(a: str, b: str) -> str:
        sa = a.startswith("-")
        ua = a.lstrip("-")
        res = b if ua == "1" else base[(ua, b)]
        if sa:
            res = res[1:] if res.startswith("-") else "-" + res
        return res

    gens = []
    for g in ("i", "j"):
        gens.append(Permutation([table[times(nm, g)] for nm in names]))
    return PermutationGroup(gens, 8)


def direct_product(a: PermutationGroup, b: PermutationGroup) -> PermutationGroup:
    n, m = a.degree, b.degree
    gens = []
    for g in a.gens:
        gens.append(Permutation(np.concatenate([g.arr.astype(np.int64), np.arange(n, n + m)])))
    for g in b.gens:
        gens.append(Permutation(np.concatenate([np.arange(n), g.arr.astype(np.int64) + n])))
    return PermutationGroup(gens, n + m)
