"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
from __future__ import annotations

import json
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from modcoh import permgroup as pg
from modcoh import stable_elements as se
from modcoh.graded_ring import (
    GroebnerData,
    HilbertData,
    RingPresentation,
    closed_form_match,
    depth_bounds,
    dickson_invariants,
    general_linear_group,
    hilbert_coefficients,
    read_presentation,
    regular_sequence_test,
    substitute_linear,
)
from modcoh.resolution import minimal_resolution, omega_center, ring_presentation_pgroup
from oracles import cohomology_dims_greedy

FIX = Path(pg.__file__).parent / "fixtures"
GROUPS = FIX / "groups"


@pytest.fixture
def report(capsys):
    """Print a single PASS/FAIL line for a criterion, outside output capture."""
    def emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return emit


def expand(numerator: list[int], dens: list[int], top: int) -> list[int]:
    """Power series of numerator / prod(1 - t^d), by repeated prefix sums."""
    a = [0] * (top + 1)
    for i, c in enumerate(numerator[:top + 1]):
        a[i] = c
    for d in dens:
        for n in range(d, top + 1):
            a[n] += a[n - d]
    return a


@lru_cache(maxsize=None)
def co3_series():
    pres = read_presentation(FIX / "co3_presentation.txt")
    gb = GroebnerData(pres, 46)
    return pres, gb, hilbert_coefficients(gb, 45).coefficients


def test_criterion_1_co3_presentation_hilbert_series(report):
    t0 = time.time()
    pres, gb, coeffs = co3_series()
    expected = json.loads((FIX / "co3_expected_series.json").read_text())
    census = pres.census()
    ok_census = (census["generators"] == 16 and census["relations"] == 71
                 and min(census["generator_degrees"]) == 3 and max(census["generator_degrees"]) == 15
                 and census["max_relation_degree"] == 33
                 and all(len({sum(d * e for d, e in zip(pres.degrees, m)) for m in r.terms}) == 1
                         for r in pres.relations))
    target = expand(expected["numerator"], [8, 12, 14, 15], 45)
    ok_series = coeffs == target and gb.dims()[:46] == target
    report(1, ok_census and ok_series,
           f"16 generators in degrees 3..15, 71 homogeneous relations up to degree 33; "
           f"a_0..a_45 match the closed form exactly ({time.time() - t0:.1f}s)")


def test_criterion_2_numerator_is_palindromic(report):
    _, _, coeffs = co3_series()
    expected = json.loads((FIX / "co3_expected_series.json").read_text())
    cf = closed_form_match(HilbertData(coeffs), [8, 12, 14, 15], 45)
    num = cf.numerator + [0] * (46 - len(cf.numerator))
    nonzero = [c for c in num if c != 0]
    ok = (cf.palindromic and num == num[::-1] and len(num) == 46 and num[45] != 0
          and nonzero == expected["nonzero_coefficients"] and len(nonzero) == 42)
    report(2, ok, "recovered degree-45 numerator is palindromic with the 42 printed nonzero coefficients")


def _v4():
    return pg.direct_product(pg.cyclic_group(2), pg.cyclic_group(2))


def test_criterion_3_pgroup_suite(report):
    top = 12
    cases = {
        "C2": (pg.cyclic_group(2), [1] * 13, ([1], [])),
        "C4": (pg.cyclic_group(4), [1] * 13, ([1, 2], [2])),
        "C2xC2": (_v4(), [n + 1 for n in range(13)], ([1, 1], [])),
        "D8": (pg.dihedral_group(4), [n + 1 for n in range(13)], ([1, 1, 2], [2])),
        "Q8": (pg.quaternion_group(), [[1, 2, 2, 1][n % 4] for n in range(13)], ([1, 1, 4], [2, 3])),
    }
    bad = []
    for name, (g, dims, census) in cases.items():
        computed = minimal_resolution(g, top).cohomology_dims(top)
        oracle = cohomology_dims_greedy([p.arr for p in g.gens], top)
        pres = ring_presentation_pgroup(g, top).presentation
        known = read_presentation(FIX / "pgroups" / f"{name.lower()}.txt")
        c, kc = pres.census(), known.census()
        if not (computed == oracle == dims
                and GroebnerData(pres, top).dims() == GroebnerData(known, top).dims() == dims
                and (c["generator_degrees"], c["relation_degrees"]) == census
                and (kc["generator_degrees"], kc["relation_degrees"]) == census):
            bad.append(name)
    report(3, not bad, "C2, C4, C2xC2, D8, Q8 dimensions to degree 12 agree with the kernel-dimension "
                       f"oracle and the fixture presentations{'; failing: ' + ', '.join(bad) if bad else ''}")


@lru_cache(maxsize=None)
def tower(name: str) -> se.TowerSpec:
    return se.TowerSpec.from_file(GROUPS / f"{name}.tower")


def test_criterion_4_stable_elements_suite(report):
    s3 = se.compute_stable_ring(tower("s3"), 12)[0][-1]
    ok = s3.dims() == [1] * 13
    for name in ("s4", "a4"):
        t = tower(name)
        g = t.groups[-1]
        rep = se.stable_ring_over_sylow(g, t.groups[0], 12)
        # oracle: equalizers over every double coset with every discard rule disabled
        conds = se.list_stability_conditions(t.groups[0], g, rules=frozenset())
        off = se.stable_ring_over_sylow(g, t.groups[0], 12, cache=rep.cache, rules="")
        brute = off.spaces
        ok = ok and len(conds.active()) == conds.double_coset_count
        # and a second route over every element of G
        every = se.brute_force_stable_spaces(g, rep.sylow, 12, rep.cache)
        ok = ok and all(a == b for a, b in zip(every, rep.spaces))
        ok = ok and all(b == s for b, s in zip(brute, rep.spaces)) and [b.dim for b in brute] == rep.dims()
    report(4, ok, "H(S3) is 1-dimensional to degree 12; H(S4), H(A4) over their Sylows match the "
                  "all-double-coset brute-force oracle with rules disabled")


SOUNDNESS = ["s3", "s4", "a4", "s3xs3", "d12", "a5", "gl32", "s4xc2"]


def test_criterion_5_discard_rules_sound(report):
    bad = []
    for name in SOUNDNESS:
        on, _ = se.compute_stable_ring(tower(name), 12, rules="abcde")
        off, _ = se.compute_stable_ring(tower(name), 12, rules="", method="sylow")
        if not all(a == b for a, b in zip(on[-1].spaces, off[-1].spaces)):
            bad.append(name)
    report(5, not bad, f"rules (a)-(e) on vs off give equal stable subspaces to degree 12 for "
                       f"{', '.join(SOUNDNESS)}{'; failing: ' + ', '.join(bad) if bad else ''}")


def test_criterion_6_parameter_machinery(report):
    pres = RingPresentation.from_text("gen x 1 b\ngen y 1 b\ngen w 2 c\nx*y\n")
    x, y, w = (pres.variable(v) for v in "xyw")
    good = regular_sequence_test(pres, [x + y, w], 12)
    bad = regular_sequence_test(pres, [x, w], 12)
    ok = good.regular and bad.status == "not-regular" and bad.failure_index == 0 and bad.failure_degree == 2
    for r in (1, 2, 3):
        inv = dickson_invariants(r)
        ok = ok and all(substitute_linear(p, m).terms == p.terms for m in general_linear_group(r) for p in inv)
    ok = ok and [p.degree for p in dickson_invariants(4)] == [8, 12, 14, 15]
    report(6, ok, "(x+y, w) regular on F2[x,y,w]/(xy), (x, w) fails in degree 2; Dickson invariants "
                  "GL-invariant for r <= 3; r = 4 degrees 8, 12, 14, 15")


@pytest.mark.slow
def test_criterion_7_co3_group_theory(report):
    t0 = time.time()
    g = pg.read_group_file(FIX / "co3_gens.txt")
    s = pg.sylow_2(g, seed=0)
    cs = pg.central_series(s)
    cents = {}
    for x in cs.second_center.elements():
        if x.order() == 4:
            key = pg.PermutationGroup([x], g.degree).canonical_key()
            if key not in cents:
                cents[key] = pg.classify_element(g, x).centralizer_order
    z = omega_center(s).gens[0]
    h = pg.read_group_file(FIX / "co3_g3.txt")
    dc, orbit = pg.double_cosets_by_conjugation(g, z, centralizer=h)
    ok = (g.order() == 495_766_656_000 and s.order() == 2 ** 10 and s.is_subgroup_of(g)
          and cs.center_type == [2] and cs.second_center_type == [4, 2]
          and sorted(cents.values()) == [1536, 23040]
          and h.order() == g.order() // 170_775 and all(h.contains(p) for p in h.gens)
          and len(orbit) == 170_775 and len(dc) == 7 and sum(dc.sizes) == g.order()
          and sorted(sz // h.order() for sz in dc.sizes) == [1, 630, 1920, 8960, 30240, 48384, 80640])
    report(7, ok, f"|Co3| = 495766656000, |S| = 2^10, Z(S) = C2, Z2(S) = C4xC2, 4A/4B centralizers "
                  f"23040/1536, 2A class of length 170775 with 7 C(z)-orbits ({time.time() - t0:.1f}s)")


NOT_REPRODUCED = (
    "The end-to-end stable-elements computation of the Co3 cohomology ring (resolution of the Sylow "
    "subgroup of order 2^10 to degree 33 and beyond, depth-4 certification of the computed ring, and "
    "nilradical/detection statements for Co3) is not reproducible at desk scale and is not attempted; "
    "it is replaced by criteria 1-7 together with detection and depth checks on small groups."
)


def test_criterion_8_scope_statement_and_small_checks(report):
    readme = (Path(__file__).resolve().parents[1] / "README.md").read_text()
    ok = "not reproducible at desk scale" in readme
    s4 = se.compute_stable_ring(tower("s4"), 10)[0][-1]
    maximal = [c.subgroup for c in pg.maximal_elementary_abelians(s4.sylow)]
    ok = ok and se.detection_check(s4, maximal, 10) and not se.detection_check(s4, maximal[:1], 10)
    a4 = se.compute_stable_ring(tower("a4"), 10)[0][-1]
    ok = ok and se.detection_check(a4, [a4.sylow], 10)
    for rep in (s4, a4):
        params = se.construct_parameters(rep, 10)
        zrank = int(np.log2(omega_center(rep.sylow).order()))
        duflot, verified = depth_bounds(rep.presentation, params.system, zrank, 10)
        ok = ok and duflot <= verified <= len(params.system.elements)
    report(8, ok, NOT_REPRODUCED)
