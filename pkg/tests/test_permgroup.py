from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modcoh import permgroup as pg
from modcoh.permgroup import Permutation, PermutationGroup

FIX = Path(pg.__file__).parent / "fixtures"


def brute_closure(gens: list[Permutation]) -> set[tuple]:
    """All products of generators, by naive breadth-first multiplication."""
    n = gens[0].degree
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = tuple(int(g.arr[i]) for i in a)  # apply a then g
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return seen


def perm(*cycles, n):
    return Permutation.from_cycles(cycles, n)


def test_permutation_basics():
    a = perm((0, 1), n=3)
    b = perm((1, 2), n=3)
    # right action: a*b applies a first
    assert (a * b)(0) == b(a(0)) == 2
    assert (a * ~a).is_identity()
    assert a.order() == 2 and (a * b).order() == 3
    assert a.conj(b) == ~b * a * b
    assert Permutation.parse("(0,1)(2,3)", 5).cycle_type() == (2, 2)
    assert Permutation.parse("()", 4).is_identity()
    with pytest.raises(ValueError):
        Permutation([0, 0, 1])


@pytest.mark.parametrize("make,order", [
    (lambda: pg.symmetric_group(3), 6),
    (lambda: pg.symmetric_group(4), 24),
    (lambda: pg.alternating_group(4), 12),
    (lambda: pg.alternating_group(5), 60),
    (lambda: pg.dihedral_group(4), 8),
    (lambda: pg.quaternion_group(), 8),
    (lambda: pg.cyclic_group(4), 4),
    (lambda: pg.direct_product(pg.cyclic_group(2), pg.cyclic_group(2)), 4),
    (lambda: PermutationGroup([], 5), 1),
])
def test_orders_against_closure(make, order):
    g = make()
    assert g.order() == order
    if g.gens:
        assert len(brute_closure(g.gens)) == order
    assert len(g.elements()) == order


def test_membership():
    s4 = pg.symmetric_group(4)
    a4 = pg.alternating_group(4)
    assert a4.is_subgroup_of(s4)
    assert not a4.contains(perm((0, 1), n=4))
    assert s4.contains(perm((0, 1, 2, 3), n=4))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.permutations(range(6)), min_size=1, max_size=3))
def test_schreier_sims_matches_closure(imgs):
    gens = [Permutation(list(p)) for p in imgs]
    g = PermutationGroup(gens, 6)
    closure = brute_closure(gens)
    assert g.order() == len(closure)
    for t in itertools.islice(itertools.permutations(range(6)), 0, 720, 37):
        assert g.contains(Permutation(list(t))) == (tuple(t) in closure)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.permutations(range(5)), min_size=1, max_size=2), st.permutations(range(5)))
def test_orbit_stabilizer(imgs, x_img):
    g = PermutationGroup([Permutation(list(p)) for p in imgs], 5)
    x = Permutation(list(x_img))
    elems = g.elements()
    brute_class = {x.conj(t).key() for t in elems}
    orb = pg.conjugacy_orbit(g, x)
    assert len(orb) == len(brute_class)
    for i in range(len(orb)):
        t = orb.transversal(i)
        assert g.contains(t)
    if g.contains(x):
        c = pg.centralizer_of_element(g, x)
        brute_c = [t for t in elems if t * x == x * t]
        assert c.order() == len(brute_c) and c.order() * len(orb) == g.order()


def test_sylow_small_groups():
    for g in [pg.symmetric_group(4), pg.alternating_group(5), pg.symmetric_group(6), pg.dihedral_group(6)]:
        s = pg.sylow_2(g)
        assert s.order() == pg.two_part(g.order()) and s.is_subgroup_of(g) and s.is_two_group()
    assert pg.sylow_2(pg.symmetric_group(3)).order() == 2


def test_normalizer_and_centralizer():
    s4 = pg.symmetric_group(4)
    v4 = PermutationGroup([perm((0, 1), (2, 3), n=4), perm((0, 2), (1, 3), n=4)], 4)
    assert pg.normalizer(s4, v4).order() == 24
    d8 = pg.sylow_2(s4)
    assert pg.normalizer(s4, d8).order() == 8
    c = pg.centralizer_of_subgroup(s4, v4)
    assert c.order() == 4


def test_central_series():
    d8 = pg.dihedral_group(4)
    rep = pg.central_series(d8)
    assert rep.center.order() == 2 and rep.second_center.order() == 8
    q8 = pg.quaternion_group()
    assert pg.central_series(q8).center_type == [2]
    v4 = pg.direct_product(pg.cyclic_group(2), pg.cyclic_group(2))
    assert pg.central_series(v4).center_type == [2, 2]
    c4 = pg.cyclic_group(4)
    assert pg.central_series(c4).center_type == [4]


def brute_double_cosets(g: PermutationGroup, h: PermutationGroup) -> list[int]:
    elems = g.elements()
    hs = h.elements()
    seen: set[bytes] = set()
    sizes = []
    for x in elems:
        if x.key() in seen:
            continue
        dc = {(a * x * b).key() for a in hs for b in hs}
        seen |= dc
        sizes.append(len(dc))
    return sorted(sizes)


@pytest.mark.parametrize("g,h", [
    (pg.symmetric_group(3), PermutationGroup([perm((0, 1), n=3)], 3)),
    (pg.symmetric_group(4), None),
    (pg.alternating_group(5), None),
    (pg.symmetric_group(4), PermutationGroup([perm((0, 1, 2), n=4), perm((0, 1), n=4)], 4)),
])
def test_double_cosets_against_brute_force(g, h):
    if h is None:
        h = pg.sylow_2(g)
    dc = pg.double_cosets(g, h)
    assert sum(dc.sizes) == g.order()
    assert sorted(dc.sizes) == brute_double_cosets(g, h)
    for r in dc.representatives:
        assert g.contains(r)


def test_double_cosets_of_centralizer_by_conjugation():
    g = pg.symmetric_group(5)
    z = perm((0, 1), n=5)
    dc, orb = pg.double_cosets_by_conjugation(g, z)
    direct = pg.double_cosets(g, pg.centralizer_of_element(g, z))
    assert len(orb) == 10
    assert sorted(dc.sizes) == sorted(direct.sizes)


def test_intersection():
    s4 = pg.symmetric_group(4)
    a4 = pg.alternating_group(4)
    d8 = pg.sylow_2(s4)
    i = pg.subgroup_intersection(s4, a4, d8)
    assert i.order() == 4
    brute = [x for x in a4.elements() if d8.contains(x)]
    assert len(brute) == 4


def test_maximal_elementary_abelians():
    d8 = pg.dihedral_group(4)
    classes = pg.maximal_elementary_abelians(d8)
    assert sorted(c.rank for c in classes) == [2, 2]
    # in S4 the two Klein subgroups of D8 are not conjugate (one is normal)
    s4 = pg.symmetric_group(4)
    d8s4 = pg.sylow_2(s4)
    classes = pg.maximal_elementary_abelians(d8s4, s4, fusion_orbit_limit=1000)
    assert len({c.fusion_class for c in classes}) == 2
    q8 = pg.quaternion_group()
    assert [c.rank for c in pg.maximal_elementary_abelians(q8)] == [1]
    e8 = pg.direct_product(pg.direct_product(pg.cyclic_group(2), pg.cyclic_group(2)), pg.cyclic_group(2))
    assert [c.rank for c in pg.maximal_elementary_abelians(e8)] == [3]


def test_group_file_round_trip(tmp_path):
    g = pg.alternating_group(5)
    p = tmp_path / "a5.txt"
    pg.write_group_file(p, g, ["A5"])
    h = pg.read_group_file(p)
    assert h.order() == 60 and h.same_group(g)
    bad = tmp_path / "bad.txt"
    bad.write_text("(0,1)\n")
    with pytest.raises(pg.GroupError):
        pg.read_group_file(bad)


def test_scale_guard():
    with pytest.raises(pg.ScaleError):
        pg.double_cosets(pg.symmetric_group(9), PermutationGroup([], 9), max_index=1000)


def test_co3_generators_order():
    g = pg.read_group_file(FIX / "co3_gens.txt")
    assert g.order() == 495_766_656_000 == 2**10 * 3**7 * 5**3 * 7 * 11 * 23


@pytest.mark.slow
def test_co3_tower_fixtures():
    g = pg.read_group_file(FIX / "co3_gens.txt")
    names = [ln for ln in (FIX / "co3_tower.txt").read_text().splitlines() if ln and not ln.startswith("#")]
    layers = [pg.read_group_file(FIX / n) for n in names]
    orders = [h.order() for h in layers]
    assert orders == [1024, 3072, 46080, 2903040, 495_766_656_000]
    for a, b in zip(layers, layers[1:]):
        assert a.is_subgroup_of(b)
    assert [b // a for a, b in zip(orders, orders[1:])] == [3, 15, 63, 170775]
    counts = [len(pg.double_cosets(b, a)) for a, b in zip(layers[:3], layers[1:4])]
    assert counts == [2, 3, 3]
    s = layers[0]
    z = pg.central_series(s).center.gens[0]
    assert pg.centralizer_of_element(g, z).same_group(layers[3])
