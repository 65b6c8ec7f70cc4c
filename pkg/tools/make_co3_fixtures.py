"""Regenerate the Co3 subgroup fixtures from ``co3_gens.txt``.

Writes a Sylow 2-subgroup S and the tower S < G1 < G2 < G3 < Co3 with
G3 = C(z) for the central involution z of S, G2 = N_G3(U) for the cyclic
subgroup U of Z2(S) generated by a 4A element, and G1 = N_G3(Z2(S)).
Every layer is recomputed here, so the files are only a cache.

    python3 tools/make_co3_fixtures.py [--seed 0]
"""

from __future__ import annotations

import argparse
import logging
import time
from pathlib import Path

from modcoh import permgroup as pg

FIX = Path(__file__).resolve().parents[1] / "src" / "modcoh" / "fixtures"


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(relativeCreated)8d ms  %(message)s")
    log = logging.getLogger("co3")

    G = pg.read_group_file(FIX / "co3_gens.txt")
    log.info("|G| = %d", G.order())
    t = time.time()
    S = pg.sylow_2(G, seed=args.seed)
    log.info("|S| = %d (%.1fs)", S.order(), time.time() - t)
    cs = pg.central_series(S)
    z = cs.center.gens[0]
    log.info("Z(S) %s, Z2(S) %s", cs.center_type, cs.second_center_type)

    four = [x for x in cs.second_center.elements() if x.order() == 4]
    reports = {x: pg.classify_element(G, x) for x in four}
    x4a = min((x for x in four if reports[x].centralizer_order == 23040), key=lambda p: p.key())
    U = pg.PermutationGroup([x4a], G.degree)

    G3 = pg.centralizer_of_element(G, z, seed=args.seed)
    G2 = pg.normalizer(G3, U, seed=args.seed)
    G1 = pg.normalizer(G3, cs.second_center, seed=args.seed)
    for name, h in [("G1", G1), ("G2", G2), ("G3", G3)]:
        log.info("|%s| = %d", name, h.order())
    assert S.is_subgroup_of(G1) and G1.is_subgroup_of(G2) and G2.is_subgroup_of(G3)

    note = f"derived from co3_gens.txt by tools/make_co3_fixtures.py (seed {args.seed})"
    pg.write_group_file(FIX / "co3_sylow.txt", S, [f"Sylow 2-subgroup of Co3, order {S.order()}", note])
    pg.write_group_file(FIX / "co3_g1.txt", G1, [f"G1 = N(Z2(S)) in Co3, order {G1.order()}", note])
    pg.write_group_file(FIX / "co3_g2.txt", G2, [f"G2 = N(U), U cyclic of order 4 generated by a 4A element, "
                                                  f"order {G2.order()}", note])
    pg.write_group_file(FIX / "co3_g3.txt", G3, [f"G3 = C(z) for the central involution z of S, order {G3.order()}",
                                                  note])
    (FIX / "co3_tower.txt").write_text(
        "# S < G1 < G2 < G3 < Co3 with indices 3, 15, 63, 170775\n"
        "co3_sylow.txt\nco3_g1.txt\nco3_g2.txt\nco3_g3.txt\nco3_gens.txt\n"
    )


if __name__ == "__main__":
    main()
