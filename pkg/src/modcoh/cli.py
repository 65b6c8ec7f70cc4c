"""Command-line entry point: ``modcoh <command> ...``.

Commands
    pgroup        cohomology ring of a 2-group from its minimal resolution
    stable        stable-elements computation up a subgroup tower
    verify        Hilbert series, closed form and parameter checks for a presentation
    groupinfo     order, Sylow subgroup, centre and second centre
    doublecosets  double coset decomposition with a discard-rule preview

Exit codes: 0 success, 1 bad input, 2 inconclusive, 3 mismatch.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

from . import permgroup as pg
from .graded_ring import (
    GradedPolynomial,
    GroebnerData,
    HilbertData,
    InsufficientTruncation,
    PresentationError,
    RingPresentation,
    WindowTooShort,
    closed_form_match,
    completion_test,
    filter_regular_test,
    hilbert_coefficients,
    monomials_of_degree,
    read_presentation,
    regular_sequence_test,
)

log = logging.getLogger("modcoh")

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE, EXIT_MISMATCH = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# output helpers


def _emit(args, payload: dict, lines: Sequence[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=1, sort_keys=True, default=str))
    else:
        print("\n".join(lines))


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _plot_series(path: Path, series: dict, title: str, ylabel: str, *, kind: str = "line", logy: bool = False) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for label, ys in series.items():
        xs = list(range(len(ys)))
        if kind == "bar":
            ax.bar(xs, ys, label=label, alpha=0.8)
        else:
            ax.plot(xs, ys, marker="o", ms=3, label=label)
    ax.set_xlabel("degree")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if logy:
        ax.set_yscale("log")
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _report_dir(args) -> Path | None:
    if not getattr(args, "report_dir", None):
        return None
    d = Path(args.report_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _read_group(path: str) -> pg.PermutationGroup:
    p = Path(path)
    if not p.exists():
        raise CliError(f"{path}: no such file")
    try:
        return pg.read_group_file(p)
    except (pg.GroupError, ValueError) as exc:
        raise CliError(f"{path}: {exc}") from exc


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


# ---------------------------------------------------------------------------
# commands


def cmd_pgroup(args) -> int:
    from .resolution import ResolutionError, ring_presentation_pgroup

    g = _read_group(args.group)
    if not g.is_two_group():
        raise CliError(f"{args.group}: group of order {g.order()} is not a 2-group")
    try:
        pres = ring_presentation_pgroup(g, args.degree, max_order=args.max_order)
    except ResolutionError as exc:
        raise CliError(str(exc)) from exc
    dims = pres.ring.res.cohomology_dims(args.degree)
    p = pres.presentation
    p.truncation = args.degree
    comments = [f"cohomology of a group of order {g.order()} through degree {args.degree}"]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "presentation.txt").write_text(p.to_text(comments))
        (out / "presentation.json").write_text(p.to_json())
    rd = _report_dir(args)
    if rd:
        _write_csv(rd / "dimensions.csv", ["degree", "dimension"], list(enumerate(dims)))
        _plot_series(rd / "dimensions.png", {"dim H^n": dims}, f"order {g.order()}", "dimension", kind="bar")
    census = p.census()
    payload = {"order": g.order(), "degree": args.degree, "dimensions": dims, "census": census,
               "presentation": json.loads(p.to_json())}
    lines = [f"order {g.order()}, degree {args.degree}",
             f"dimensions {' '.join(map(str, dims))}",
             f"{census['generators']} generators (degrees {census['generator_degrees']}), "
             f"{census['relations']} relations (degrees {census['relation_degrees']})",
             p.to_text().rstrip()]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_stable(args) -> int:
    from . import stable_elements as se

    try:
        tower = se.TowerSpec.from_file(args.tower)
    except (ValueError, pg.GroupError, FileNotFoundError) as exc:
        raise CliError(f"{args.tower}: {exc}") from exc
    n = args.max_degree
    t0 = time.time()
    reps, reports = se.compute_stable_ring(tower, n, rules=args.rules, rule_c=args.rule_c, method=args.method)
    top = reps[-1]
    verdict = None
    params = None
    status = EXIT_OK
    try:
        params = se.construct_parameters(top, n)
        verdict = completion_test(top.presentation, params.system, n)
    except se.StableElementsError as exc:
        top.journal.append(f"parameters: {exc}")
    if verdict is None or verdict.verdict != "complete":
        status = EXIT_INCONCLUSIVE
    layers = []
    for i, rep in enumerate(reps):
        name = tower.names[i]
        c = rep.presentation.census()
        layers.append({"name": name, "order": rep.group.order(), "dimensions": rep.dims(), "census": c})
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
        for i, rep in enumerate(reps):
            stem = f"layer{i}"
            rep.presentation.truncation = n
            (out / f"{stem}.txt").write_text(rep.presentation.to_text([f"{tower.names[i]}, order {rep.group.order()}"]))
            (out / f"{stem}.json").write_text(rep.presentation.to_json())
        journal = []
        for i, rep in enumerate(reps):
            journal.append(f"== layer {i}: {tower.names[i]} (order {rep.group.order()})")
            journal.extend(rep.journal)
        (out / "journal.txt").write_text("\n".join(journal) + "\n")
    rd = _report_dir(args)
    if rd:
        _write_csv(rd / "dimensions.csv", ["degree"] + [f"layer{i}" for i in range(len(reps))],
                   [[k] + [r.dims()[k] for r in reps] for k in range(n + 1)])
        rows = []
        for li, rep_ in enumerate(reports, start=1):
            for c in rep_.conditions:
                rows.append([li, c.intersection.order(), c.sylow.order(), c.status, c.reason or ""])
        _write_csv(rd / "conditions.csv", ["layer", "intersection_order", "sylow_order", "status", "reason"], rows)
        _plot_series(rd / "dimensions.png", {f"layer {i} ({tower.names[i]})": r.dims() for i, r in enumerate(reps)},
                     "stable subspace dimensions", "dimension")
    payload = {
        "tower": [g.order() for g in tower.groups], "max_degree": n, "layers": layers,
        "conditions": [[{"intersection_order": c.intersection.order(), "status": c.status, "reason": c.reason}
                        for c in r.conditions] for r in reports],
        "parameters": params.system.degrees if params else None,
        "completion": vars(verdict) if verdict else None,
        "seconds": round(time.time() - t0, 2),
    }
    lines = [f"tower orders {' < '.join(str(g.order()) for g in tower.groups)}"]
    for i, (layer, rep) in enumerate(zip(layers, reps)):
        c = layer["census"]
        lines.append(f"layer {i} {layer['name']}: dims {' '.join(map(str, layer['dimensions']))}; "
                     f"generators {c['generator_degrees']}, relations {c['relation_degrees']}")
    for li, r in enumerate(reports, start=1):
        for c in r.conditions:
            lines.append(f"  layer {li} condition |H^g ∩ H| = {c.intersection.order()}: {c.status}"
                         + (f" ({c.reason})" if c.reason else ""))
    if params:
        lines.append(f"parameters in degrees {params.system.degrees}")
    lines.append(f"completion: {verdict.verdict + ' (' + verdict.reason + ')' if verdict else 'not determined'}")
    _emit(args, payload, lines)
    return status


def _search_parameters(pres: RingPresentation, degrees: Sequence[int], d: int) -> list[GradedPolynomial]:
    """Greedy search for a regular sequence of the requested degrees.

    Candidates are single monomials, then sums of two monomials.
    """
    chosen: list[GradedPolynomial] = []
    for e in degrees:
        monos = monomials_of_degree(pres.degrees, e)
        cands = [frozenset([m]) for m in monos] + [frozenset(p) for p in itertools.combinations(monos, 2)]
        found = None
        for terms in cands:
            cand = GradedPolynomial(terms, e)
            if regular_sequence_test(pres, chosen + [cand], d).verified_prefix == len(chosen) + 1:
                found = cand
                break
        if found is None:
            break
        chosen.append(found)
    return chosen


def cmd_verify(args) -> int:
    try:
        pres = read_presentation(args.presentation)
    except (PresentationError, FileNotFoundError, json.JSONDecodeError) as exc:
        raise CliError(f"{args.presentation}: {exc}") from exc
    expected = None
    if args.expected:
        expected = json.loads(Path(args.expected).read_text())
    dens = [int(x) for x in args.params.split(",")] if args.params else (
        expected["denominator_degrees"] if expected else [])
    numerator_degree = expected.get("numerator_degree") if expected else None
    d = args.degree if args.degree is not None else (numerator_degree if numerator_degree is not None else 30)
    t0 = time.time()
    gb = GroebnerData(pres, d)
    status = EXIT_OK
    notes: list[str] = []
    try:
        h = hilbert_coefficients(gb, d)
    except InsufficientTruncation as exc:
        raise CliError(str(exc), EXIT_INCONCLUSIVE) from exc
    counts = gb.dims()
    if counts != h.coefficients:
        notes.append("standard monomial counts disagree with the Hilbert recursion")
        status = EXIT_MISMATCH
    cf = None
    if dens:
        try:
            cf = closed_form_match(HilbertData(h.coefficients), dens, numerator_degree)
        except WindowTooShort as exc:
            notes.append(f"closed form: {exc}")
            status = max(status, EXIT_INCONCLUSIVE)
    if pres.truncation is not None and d > pres.truncation:
        notes.append(f"presentation truncated at degree {pres.truncation}; coefficients above it are not certified")
        status = max(status, EXIT_INCONCLUSIVE)
    mismatch = []
    if expected is not None and cf is not None:
        exp_num = expected["numerator"]
        if cf.numerator + [0] * (len(exp_num) - len(cf.numerator)) != exp_num:
            mismatch.append("numerator")
        if cf.nonzero_coefficients() != expected["nonzero_coefficients"]:
            mismatch.append("nonzero coefficients")
        if not cf.palindromic:
            mismatch.append("palindrome")
    if mismatch:
        status = EXIT_MISMATCH
    param_report = None
    polys: list[GradedPolynomial] = []
    if args.param_poly:
        polys = [pres.parse_polynomial(t) for t in args.param_poly]
    elif args.search and dens:
        polys = _search_parameters(pres, dens, d)
        if len(polys) < len(dens):
            notes.append("parameter search did not find a full regular sequence among monomials")
    if polys:
        reg = regular_sequence_test(pres, polys, d)
        fr = filter_regular_test(pres, polys, d)
        param_report = {"parameters": [pres.format_polynomial(p) for p in polys],
                        "regular": reg.status, "verified_prefix": reg.verified_prefix,
                        "failure_degree": reg.failure_degree,
                        "filter_degree_type": fr.degree_type, "filter_status": fr.status}
        comp = completion_test(pres, polys, max(pres.max_relation_degree(), 1))
        param_report["completion"] = vars(comp)
    rd = _report_dir(args)
    if rd:
        _write_csv(rd / "hilbert.csv", ["degree", "coefficient", "standard_monomials"],
                   [[k, h.coefficients[k], counts[k]] for k in range(d + 1)])
        _plot_series(rd / "hilbert.png", {"a_k": h.coefficients}, "Hilbert coefficients", "dimension")
        if cf is not None:
            _write_csv(rd / "numerator.csv", ["degree", "coefficient"], list(enumerate(cf.numerator)))
            _plot_series(rd / "numerator.png", {"numerator": cf.numerator}, "closed-form numerator", "coefficient",
                         kind="bar")
    census = pres.census()
    payload = {"census": census, "degree": d, "hilbert": h.coefficients,
               "closed_form": None if cf is None else {"numerator": cf.numerator, "palindromic": cf.palindromic,
                                                       "denominator_degrees": cf.denominator_degrees,
                                                       "nonzero_coefficients": cf.nonzero_coefficients()},
               "expected_mismatch": mismatch, "parameters": param_report, "notes": notes,
               "status": {EXIT_OK: "ok", EXIT_INCONCLUSIVE: "inconclusive", EXIT_MISMATCH: "mismatch"}[status],
               "seconds": round(time.time() - t0, 2)}
    lines = [f"{census['generators']} generators (degrees {census['generator_degrees']}), "
             f"{census['relations']} relations, max relation degree {census['max_relation_degree']}",
             f"Hilbert coefficients a_0..a_{d}: {' '.join(map(str, h.coefficients))}"]
    if cf is not None:
        lines.append(f"numerator over {'*'.join(f'(1-t^{e})' for e in dens)}: {' '.join(map(str, cf.numerator))}")
        lines.append(f"palindromic: {cf.palindromic}; nonzero coefficients: {len(cf.nonzero_coefficients())}")
    if expected is not None:
        lines.append("expected series: " + ("match" if not mismatch else "MISMATCH in " + ", ".join(mismatch)))
    if param_report:
        lines.append(f"parameters {param_report['parameters']}: {param_report['regular']}, "
                     f"filter degree type {param_report['filter_degree_type']} ({param_report['filter_status']})")
    lines.extend(notes)
    lines.append(f"status: {payload['status']}")
    _emit(args, payload, lines)
    return status


def _central_involution(s: pg.PermutationGroup) -> pg.Permutation:
    from .resolution import omega_center

    z = omega_center(s)
    if z.order() != 2:
        raise CliError(f"the centre of the Sylow subgroup has 2-rank {z.order().bit_length() - 1}, not 1")
    return z.gens[0]


def cmd_groupinfo(args) -> int:
    g = _read_group(args.group)
    t0 = time.time()
    s = _read_group(args.sylow) if args.sylow else pg.sylow_2(g, seed=args.seed)
    if not s.is_subgroup_of(g) or s.order() != pg.two_part(g.order()):
        raise CliError("the given subgroup is not a Sylow 2-subgroup", EXIT_MISMATCH)
    cs = pg.central_series(s) if s.order() > 1 else None
    payload = {"order": g.order(), "sylow_order": s.order(), "degree": g.degree,
               "center_type": cs.center_type if cs else [], "second_center_type": cs.second_center_type if cs else []}
    lines = [f"order {g.order()}", f"Sylow 2-subgroup order {s.order()}"]
    if cs:
        lines.append(f"Z(S) type {cs.center_type}, Z2(S) type {cs.second_center_type}")
    rows = []
    if args.classes and cs:
        cyclic: dict[bytes, dict] = {}
        for x in cs.second_center.elements():
            if x.order() != 4:
                continue
            key = pg.PermutationGroup([x], g.degree).canonical_key()
            if key in cyclic:
                continue
            rep = pg.classify_element(g, x, seed=args.seed)
            cyclic[key] = {"generator": str(x), "centralizer_order": rep.centralizer_order,
                           "class_size": rep.class_size}
            rows.append([str(x), 4, rep.centralizer_order, rep.class_size])
        payload["order4_cyclic_subgroups_of_Z2"] = list(cyclic.values())
        sizes = sorted({v["centralizer_order"] for v in cyclic.values()})
        lines.append(f"cyclic subgroups of order 4 in Z2(S): {len(cyclic)}, centralizer orders "
                     + ", ".join(f"{c} (x{sum(v['centralizer_order'] == c for v in cyclic.values())})"
                                 for c in sizes))
    rd = _report_dir(args)
    if rd:
        orders: dict[int, int] = {}
        for x in s.elements():
            orders[x.order()] = orders.get(x.order(), 0) + 1
        _write_csv(rd / "sylow_element_orders.csv", ["element_order", "count"], sorted(orders.items()))
        if rows:
            _write_csv(rd / "z2_order4.csv", ["generator", "order", "centralizer_order", "class_size"], rows)
        plt = _figure()
        fig, ax = plt.subplots(figsize=(5, 3))
        ks = sorted(orders)
        ax.bar([str(k) for k in ks], [orders[k] for k in ks])
        ax.set_xlabel("element order")
        ax.set_ylabel("count in Sylow subgroup")
        fig.tight_layout()
        fig.savefig(rd / "sylow_element_orders.png", dpi=110)
        plt.close(fig)
    payload["seconds"] = round(time.time() - t0, 2)
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_doublecosets(args) -> int:
    from . import stable_elements as se

    g = _read_group(args.group)
    h = _read_group(args.subgroup) if args.subgroup else g
    if not h.is_subgroup_of(g):
        raise CliError("subgroup is not contained in the group")
    z = None
    if args.centralized:
        z = pg.Permutation.parse(args.centralized, g.degree)
    elif args.central_of:
        z = _central_involution(_read_group(args.central_of))
    t0 = time.time()
    if z is not None:
        dc, orbit = pg.double_cosets_by_conjugation(g, z, centralizer=h, seed=args.seed)
    else:
        try:
            dc = pg.double_cosets(g, h, max_index=args.max_index)
        except pg.ScaleError as exc:
            raise CliError(f"{exc} (give --central-of or --centralized)") from exc
    payload = {"group_order": g.order(), "subgroup_order": h.order(), "index": g.order() // h.order(),
               "count": len(dc), "sizes": dc.sizes}
    lines = [f"|G| = {g.order()}, |H| = {h.order()}, index {g.order() // h.order()}",
             f"{len(dc)} double cosets, sizes / |H|: {[s // h.order() for s in dc.sizes]}"]
    preview = None
    if args.preview and h.order() != g.order() and (g.order() // h.order()) % 2 == 1:
        cl = se.list_stability_conditions(h, g, rules="abc", rule_c=args.rule_c, centralized=z,
                                          elementary_rank_bound=args.rank_bound, max_index=args.max_index,
                                          seed=args.seed)
        preview = [{"intersection_order": c.intersection.order(), "sylow_type": c.sylow_type,
                    "status": c.status, "reason": c.reason} for c in cl.conditions]
        payload["preview"] = preview
        for c in cl.conditions:
            lines.append(f"  |H^g ∩ H| = {c.intersection.order()}, Sylow {c.sylow_type}: {c.status}"
                         + (f" ({c.reason})" if c.reason else ""))
    rd = _report_dir(args)
    if rd:
        _write_csv(rd / "double_cosets.csv", ["index", "size", "size_over_H"],
                   [[i, s, s // h.order()] for i, s in enumerate(dc.sizes)])
        plt = _figure()
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.bar(range(len(dc.sizes)), [s // h.order() for s in dc.sizes])
        ax.set_yscale("log")
        ax.set_xlabel("double coset")
        ax.set_ylabel("|HgH| / |H|")
        fig.tight_layout()
        fig.savefig(rd / "double_cosets.png", dpi=110)
        plt.close(fig)
    payload["seconds"] = round(time.time() - t0, 2)
    _emit(args, payload, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modcoh", description="Mod-2 cohomology of finite groups")
    ap.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--report-dir", help="write CSV tables and PNG figures here")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized group algorithms")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pgroup", parents=[common], help="cohomology ring of a 2-group")
    p.add_argument("group")
    p.add_argument("--degree", type=_positive, default=10)
    p.add_argument("--out", help="directory for presentation.txt and presentation.json")
    p.add_argument("--max-order", type=_positive, default=256)
    p.set_defaults(func=cmd_pgroup)

    p = sub.add_parser("stable", parents=[common], help="stable elements up a tower")
    p.add_argument("tower")
    p.add_argument("--max-degree", type=_positive, default=10)
    p.add_argument("--out", help="directory for per-layer presentations and the journal")
    p.add_argument("--rules", default="abcde", help="discard rules to apply (subset of abcde)")
    p.add_argument("--rule-c", choices=["general", "elementary"], default="general")
    p.add_argument("--method", choices=["recursive", "sylow"], default="recursive")
    p.set_defaults(func=cmd_stable)

    p = sub.add_parser("verify", parents=[common], help="verify a ring presentation")
    p.add_argument("presentation")
    p.add_argument("--params", help="comma-separated parameter degrees (closed-form denominator)")
    p.add_argument("--degree", type=_positive, help="Hilbert series window 0..D")
    p.add_argument("--expected", help="JSON file with the expected numerator")
    p.add_argument("--param-poly", action="append", help="explicit parameter (repeatable)")
    p.add_argument("--search", action="store_true", help="search monomials of the --params degrees for parameters")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("groupinfo", parents=[common], help="group order, Sylow subgroup and centres")
    p.add_argument("group")
    p.add_argument("--sylow", help="group file of a known Sylow 2-subgroup")
    p.add_argument("--classes", action="store_true", help="classify order-4 elements of Z2(S)")
    p.set_defaults(func=cmd_groupinfo)

    p = sub.add_parser("doublecosets", parents=[common], help="double cosets H\\G/H")
    p.add_argument("group")
    p.add_argument("--subgroup", help="group file of H (default H = G)")
    p.add_argument("--centralized", help="H = C_G(z) for this permutation z: use conjugation orbits")
    p.add_argument("--central-of", help="H = C_G(z) for the central involution z of this 2-group")
    p.add_argument("--preview", action="store_true", help="apply discard rules (a)-(c)")
    p.add_argument("--rule-c", choices=["general", "elementary"], default="general")
    p.add_argument("--rank-bound", type=_positive, help="rank bound for --rule-c elementary")
    p.add_argument("--max-index", type=_positive, default=1_000_000)
    p.set_defaults(func=cmd_doublecosets)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"modcoh: {exc}", file=sys.stderr)
        return exc.code
    except (PresentationError, pg.GroupError, pg.ScaleError) as exc:
        print(f"modcoh: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
