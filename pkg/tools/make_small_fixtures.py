"""Write the small test groups and their towers under ``fixtures/groups``.

Each tower file lists group files bottom first; the bottom is a Sylow
2-subgroup found with seed 0.

    python3 tools/make_small_fixtures.py
"""

from __future__ import annotations

from pathlib import Path

from modcoh import permgroup as pg
from modcoh.permgroup import Permutation, PermutationGroup

OUT = Path(__file__).resolve().parents[1] / "src" / "modcoh" / "fixtures" / "groups"


def gl32() -> PermutationGroup:
    """GL(3,2) on the 7 nonzero vectors of F_2^3 (vector v is point v-1)."""
    def perm_of(cols):
        imgs = []
        for v in range(1, 8):
            w = 0
            for bit in range(3):
                if (v >> bit) & 1:
                    w ^= cols[bit]
            imgs.append(w - 1)
        return Permutation(imgs)

    transvection = perm_of([0b001, 0b011, 0b100])
    # multiplication by a root of x^3 + x + 1
    singer = perm_of([0b010, 0b100, 0b011])
    return PermutationGroup([transvection, singer], 7)


def point_stabilizer(g: PermutationGroup, point: int) -> PermutationGroup:
    return PermutationGroup([x for x in g.elements() if x(point) == point], g.degree)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    s3, s4, a4, a5 = pg.symmetric_group(3), pg.symmetric_group(4), pg.alternating_group(4), pg.alternating_group(5)
    gl = gl32()
    assert gl.order() == 168
    s4_in_gl = point_stabilizer(gl, 0)
    assert s4_in_gl.order() == 24
    a4_in_a5 = point_stabilizer(a5, 4)
    groups = {
        "s3": s3, "s4": s4, "a4": a4, "a5": a5, "gl32": gl, "gl32_s4": s4_in_gl, "a5_a4": a4_in_a5,
        "s3xs3": pg.direct_product(s3, s3), "s4xc2": pg.direct_product(s4, pg.cyclic_group(2)),
        "d12": pg.dihedral_group(6),
    }
    towers = {
        "s3": ["s3"], "s4": ["s4"], "a4": ["a4"], "s3xs3": ["s3xs3"], "s4xc2": ["s4xc2"], "d12": ["d12"],
        "a5": ["a5_a4", "a5"], "gl32": ["gl32_s4", "gl32"],
    }
    for name, g in groups.items():
        pg.write_group_file(OUT / f"{name}.txt", g, [f"{name}, order {g.order()}"])
    for name, layers in towers.items():
        s = pg.sylow_2(groups[layers[0]], seed=0)
        pg.write_group_file(OUT / f"{name}_sylow.txt", s, [f"Sylow 2-subgroup of {name}, order {s.order()}"])
        files = [f"{name}_sylow.txt"] + [f"{n}.txt" for n in layers]
        orders = " < ".join(str(groups[n].order()) for n in layers)
        (OUT / f"{name}.tower").write_text(f"# {s.order()} < {orders}\n" + "\n".join(files) + "\n")
        print(name, s.order(), orders)


if __name__ == "__main__":
    main()
