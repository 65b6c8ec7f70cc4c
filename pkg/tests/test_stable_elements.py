from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from modcoh import permgroup as pg
from modcoh import stable_elements as se
from modcoh.graded_ring import dickson_invariants, depth_bounds, regular_sequence_test
from modcoh.permgroup import PermutationGroup
from modcoh.resolution import Cocycle, Homomorphism, omega_center
from oracles import nullspace, rank

GROUPS = Path(pg.__file__).parent / "fixtures" / "groups"
FIX = Path(pg.__file__).parent / "fixtures"
TOP = 12


@lru_cache(maxsize=None)
def tower(name: str) -> se.TowerSpec:
    return se.TowerSpec.from_file(GROUPS / f"{name}.tower")


@lru_cache(maxsize=None)
def stable(name: str, degree: int = TOP, rules: str = "abcde", method: str = "recursive"):
    return se.compute_stable_ring(tower(name), degree, rules=rules, method=method)


def top(name: str, **kw) -> se.RepresentedCohomology:
    return stable(name, **kw)[0][-1]


def test_s3_is_one_dimensional_everywhere():
    rep = top("s3")
    assert rep.dims() == [1] * (TOP + 1)
    census = rep.presentation.census()
    assert census["generator_degrees"] == [1] and census["relations"] == 0


@pytest.mark.parametrize("name", ["s4", "a4"])
def test_matches_brute_force_over_all_elements(name):
    rep = top(name)
    brute = se.brute_force_stable_spaces(tower(name).groups[-1], rep.sylow, TOP, rep.cache)
    assert [b.dim for b in brute] == rep.dims()
    for k in range(TOP + 1):
        assert brute[k] == rep.spaces[k]


@pytest.mark.parametrize("name", ["s3", "s4", "a4", "s3xs3", "d12", "a5", "gl32", "s4xc2"])
def test_discard_rules_are_sound(name):
    degree = TOP if name != "s4xc2" else 8
    with_rules = top(name, degree=degree)
    without = top(name, degree=degree, rules="", method="sylow")
    for k in range(degree + 1):
        assert with_rules.spaces[k] == without.spaces[k]


@pytest.mark.parametrize("name", ["s4", "a5", "gl32", "s3xs3"])
def test_recursive_and_sylow_methods_agree(name):
    a = top(name, method="recursive")
    b = top(name, method="sylow")
    assert all(x == y for x, y in zip(a.spaces, b.spaces))


@pytest.mark.parametrize("name", ["s3xs3", "d12", "a5", "gl32"])
def test_towers_against_brute_force(name):
    rep = top(name, degree=8)
    brute = se.brute_force_stable_spaces(tower(name).groups[-1], rep.sylow, 8, rep.cache)
    assert all(x == y for x, y in zip(brute, rep.spaces))


def test_rules_fire_on_expected_groups():
    reports = stable("s3xs3")[1]
    reasons = sorted(c.reason[0] for c in reports[0].conditions if not c.active)
    assert reasons == ["b", "c", "c"]
    assert stable("s3")[1][0].conditions[0].reason.startswith("b")
    # a5 over a4: the nontrivial double coset meets A4 in a group of order 3
    assert [c.reason[0] for c in stable("a5")[1][1].conditions] == ["b"]


def test_centralizing_element_gives_equal_maps():
    g = pg.cyclic_group(6)
    s = pg.sylow_2(g)
    base = se.represent_pgroup(s, 6)
    cl = se.list_stability_conditions(base.group, g, rules="ab")
    # C6 = C2 x C3: the order-3 part centralizes H, H^g ∩ H = H
    assert len(cl.conditions) == 2 and all(c.active for c in cl.conditions)
    se.apply_cohomological_rules(cl.conditions, base, base.group, rules="d")
    assert all(c.reason.startswith("d") for c in cl.conditions)


def test_h_equals_g_has_no_conditions():
    s4 = pg.symmetric_group(4)
    assert se.list_stability_conditions(s4, s4).conditions == []


def test_stable_ring_closed_under_products():
    rep = top("s4")
    for a, b in [(1, 1), (1, 2), (2, 3), (3, 3), (2, 5)]:
        for x in rep.basis(a):
            for y in rep.basis(b):
                prod = rep.multiply(Cocycle.from_vector(a, x), Cocycle.from_vector(b, y))
                assert rep.contains(a + b, prod.vector())


def test_condition_depends_only_on_double_coset():
    t = tower("s4")
    h, g = t.groups[0], t.groups[1]
    base = se.represent_pgroup(h, 6)
    cl = se.list_stability_conditions(base.group, g, rules="a")
    (cond,) = cl.conditions
    rng = np.random.default_rng(0)
    other = h.random_element(rng) * cond.representative * h.random_element(rng)
    k = se.intersection_with_conjugate(g, base.group, other)
    alt = se.StabilityCondition(other, k, pg.sylow_2(k))
    for c in (cond, alt):
        se.stability_maps(c, base, base.group, 6, method="sylow")
    for n in range(1, 7):
        assert se.stable_subspace([cond], base, n) == se.stable_subspace([alt], base, n)


def test_repeated_groups_in_tower_change_nothing():
    t = tower("a4")
    doubled = se.TowerSpec([t.groups[0], t.groups[0], t.groups[1], t.groups[1]])
    reps, _ = se.compute_stable_ring(doubled, 10)
    assert reps[-1].dims() == top("a4").dims()[:11]
    assert reps[1].dims() == reps[0].dims()


def test_tower_validation(tmp_path):
    s4 = pg.symmetric_group(4)
    with pytest.raises(ValueError):
        se.TowerSpec([pg.alternating_group(4), s4])  # bottom not a 2-group
    c2 = PermutationGroup([pg.Permutation.from_cycles([(0, 1)], 4)], 4)
    with pytest.raises(ValueError):
        se.TowerSpec([c2, s4])  # even index
    assert tower("gl32").indices == [3, 7]


def invariant_dims(top_degree: int) -> list[int]:
    """Invariants of x -> y, y -> x + y on F2[x, y], by direct linear algebra."""
    out = []
    for k in range(top_degree + 1):
        monos = [(a, k - a) for a in range(k + 1)]
        idx = {m: i for i, m in enumerate(monos)}
        act = np.zeros((k + 1, k + 1), dtype=np.uint8)
        for j, (a, b) in enumerate(monos):
            # y^a (x + y)^b expanded mod 2
            for i in range(b + 1):
                if (b & i) == i:  # binomial(b, i) odd
                    act[idx[(i, a + b - i)], j] ^= 1
        fixed = nullspace((act ^ np.eye(k + 1, dtype=np.uint8)))
        out.append(fixed.shape[0])
    return out


def test_a4_is_ring_of_invariants():
    rep = top("a4")
    assert rep.dims() == invariant_dims(TOP)
    census = rep.presentation.census()
    assert census["generator_degrees"] == [2, 3, 3] and census["relation_degrees"] == [6]


def test_s4_first_relation():
    rep = top("s4")
    census = rep.presentation.census()
    assert census["generator_degrees"] == [1, 2, 3] and census["relation_degrees"] == [4]
    degree_four = [line for line in rep.journal if line.startswith("degree 4")]
    assert degree_four and "0 new generators" in degree_four[0] and "1 new relation" in degree_four[0]


def test_represent_cohomology_checks_degrees():
    base = se.represent_pgroup(pg.dihedral_group(4), 4)
    bad = list(base.images)
    bad[0] = Cocycle.from_vector(2, base.sylow_ring.basis(2)[0].vector())
    with pytest.raises(ValueError):
        se.represent_cohomology(base.group, base.sylow, base.presentation, bad, 4)
    again = se.represent_cohomology(base.group, base.sylow, base.presentation, base.images, 4)
    assert again.dims() == base.dims()


def test_induced_maps():
    rep = top("s4", degree=8)
    g = rep.group
    ident = se.induced_ring_map(Homomorphism.inclusion(g, g), rep, rep)
    for k, m in enumerate(ident.matrices):
        assert np.array_equal(m, np.eye(rep.spaces[k].dim, dtype=np.uint8))
    for x in g.gens:
        inner = se.induced_ring_map(Homomorphism.by_conjugation(g, g, x), rep, rep)
        for k, m in enumerate(inner.matrices):
            assert np.array_equal(m, np.eye(rep.spaces[k].dim, dtype=np.uint8))
    d8 = se.represent_pgroup(rep.sylow, 8, rep.cache)
    res = se.induced_ring_map(Homomorphism.inclusion(rep.sylow, g), d8, rep)
    for k, m in enumerate(res.matrices):
        # restriction to the Sylow subgroup is injective, with image R_{S4}
        assert rank(m) == rep.spaces[k].dim


def test_induced_map_needs_a_corrector():
    # a conjugate Sylow subgroup of S4 is moved back into the chosen one
    rep = top("s4", degree=6)
    g = rep.group
    norm = pg.normalizer(g, rep.sylow)
    x = next(t for t in g.elements() if not norm.contains(t))
    other = se.conjugate_group(rep.sylow, x)
    src = se.represent_pgroup(other, 6, rep.cache)
    m = se.induced_ring_map(Homomorphism.inclusion(other, g), src, rep)
    assert not m.corrector.is_identity()
    assert all(rank(a) == rep.spaces[k].dim for k, a in enumerate(m.matrices))


def test_detection():
    s4 = top("s4", degree=10)
    maximal = [c.subgroup for c in pg.maximal_elementary_abelians(s4.sylow)]
    assert len(maximal) == 2
    assert se.detection_check(s4, maximal, 10)
    assert not se.detection_check(s4, maximal[:1], 10)
    a4 = top("a4")
    assert se.detection_check(a4, [a4.sylow], TOP)


def test_elementary_abelian_gives_dickson_invariants():
    for r in (2, 3):
        e = pg.cyclic_group(2)
        for _ in range(r - 1):
            e = pg.direct_product(e, pg.cyclic_group(2))
        rep = se.represent_pgroup(e, 2 ** r)
        params = se.construct_parameters(rep, 2 ** r)
        assert params.method == "dickson"
        assert [p.terms for p in params.system.elements] == [p.terms for p in dickson_invariants(r)]


def test_d8_parameters_are_regular():
    rep = se.represent_pgroup(pg.dihedral_group(4), 10)
    params = se.construct_parameters(rep, 10)
    assert sorted(params.system.degrees) in ([1, 2], [2, 2])
    assert regular_sequence_test(rep.presentation, params.system.elements, 10).regular


@pytest.mark.parametrize("name", ["s4", "a4", "gl32", "s3xs3"])
def test_parameters_inherit_filter_regularity_from_sylow(name):
    rep = top(name, degree=10)
    params = se.construct_parameters(rep, 10)
    assert params.system.stable
    sylow_level = se.sylow_filter_regular(rep, params)
    assert sylow_level.conclusive and params.system.filter_regular
    assert sylow_level.degree_type == params.system.filter_degree_type


@pytest.mark.parametrize("name", ["s4", "a4", "gl32"])
def test_depth_bounds_consistent(name):
    rep = top(name, degree=10)
    params = se.construct_parameters(rep, 10)
    zrank = int(np.log2(omega_center(rep.sylow).order()))
    duflot, verified = depth_bounds(rep.presentation, params.system, zrank, 10)
    # these rings are Cohen-Macaulay: the whole parameter system is regular
    assert duflot <= verified == len(params.system.elements)


@pytest.mark.slow
def test_co3_stability_conditions():
    names = [ln for ln in (FIX / "co3_tower.txt").read_text().splitlines() if ln and not ln.startswith("#")]
    layers = [pg.read_group_file(FIX / n) for n in names]
    z = pg.central_series(layers[0]).center.gens[0]
    counts = []
    for i, (h, g) in enumerate(zip(layers[:3], layers[1:4])):
        counts.append(len(se.list_stability_conditions(h, g).conditions))
    h, g = layers[3], layers[4]
    general = se.list_stability_conditions(h, g, centralized=z)
    counts.append(len(general.conditions))
    assert counts == [1, 2, 2, 6]
    assert len(general.discarded("c")) == 5
    elementary = se.list_stability_conditions(h, g, centralized=z, rule_c="elementary", elementary_rank_bound=4)
    dropped = sorted(c.sylow_type for c in elementary.discarded("c"))
    assert dropped == [(4, (2, 2))] * 3 + [(8, (2, 2, 2))]
    survivors = sorted(c.intersection.order() for c in elementary.active())
    assert survivors == [96, 4608]
