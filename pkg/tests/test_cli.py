from __future__ import annotations

import json
from pathlib import Path

import pytest

from modcoh import cli
from modcoh.graded_ring import RingPresentation, read_presentation

FIX = Path(cli.__file__).parent / "fixtures"
GROUPS = FIX / "groups"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def write_group(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_pgroup_c2(capsys, tmp_path):
    c2 = write_group(tmp_path, "c2.txt", "degree 2\n(0,1)\n")
    code, data = run_json(capsys, "pgroup", c2, "--degree", 6)
    assert code == 0
    assert data["dimensions"] == [1] * 7
    assert data["census"]["generators"] == 1 and data["census"]["relations"] == 0


def test_pgroup_d8_files_round_trip(capsys, tmp_path):
    code, data = run_json(capsys, "pgroup", GROUPS / "s4_sylow.txt", "--degree", 10, "--out", tmp_path / "o",
                          "--report-dir", tmp_path / "r")
    assert code == 0
    assert data["dimensions"] == [n + 1 for n in range(11)]
    assert data["census"]["generator_degrees"] == [1, 1, 2] and data["census"]["relations"] == 1
    text = read_presentation(tmp_path / "o" / "presentation.txt")
    js = read_presentation(tmp_path / "o" / "presentation.json")
    assert text.same_as(js)
    assert RingPresentation.from_text(text.to_text()).same_as(text)
    assert (tmp_path / "r" / "dimensions.csv").read_text().splitlines()[1] == "0,1"
    assert (tmp_path / "r" / "dimensions.png").stat().st_size > 0


def test_pgroup_q8(capsys, tmp_path):
    q8 = write_group(tmp_path, "q8.txt", "degree 8\n(0,1,2,3)(4,5,6,7)\n(0,4,2,6)(1,7,3,5)\n")
    code, data = run_json(capsys, "pgroup", q8, "--degree", 12)
    assert code == 0
    assert data["dimensions"] == [[1, 2, 2, 1][n % 4] for n in range(13)]


def test_pgroup_rejects_non_two_group(capsys):
    code, _, err = run(capsys, "pgroup", GROUPS / "s3.txt", "--degree", 3)
    assert code == 1 and "not a 2-group" in err


def test_bad_group_file(capsys, tmp_path):
    bad = write_group(tmp_path, "bad.txt", "(0,1)\n")
    code, _, err = run(capsys, "groupinfo", bad)
    assert code == 1 and "degree" in err
    code, _, _ = run(capsys, "groupinfo", tmp_path / "missing.txt")
    assert code == 1


@pytest.mark.parametrize("name,dims", [
    ("s3", [1] * 9),
    ("s4", [1, 1, 2, 3, 3, 4, 5, 5, 6]),
    ("a4", [1, 0, 1, 2, 1, 2, 3, 2, 3]),
])
def test_stable_towers(capsys, tmp_path, name, dims):
    out = tmp_path / "o"
    code, data = run_json(capsys, "stable", GROUPS / f"{name}.tower", "--max-degree", 8, "--out", out,
                          "--report-dir", tmp_path / "r")
    assert code == 0
    assert data["layers"][-1]["dimensions"] == dims
    assert data["completion"]["verdict"] == "complete"
    top = read_presentation(out / f"layer{len(data['layers']) - 1}.txt")
    assert top.same_as(read_presentation(out / f"layer{len(data['layers']) - 1}.json"))
    assert "layer" in (out / "journal.txt").read_text()
    for f in ("dimensions.csv", "conditions.csv", "dimensions.png"):
        assert (tmp_path / "r" / f).exists()


def test_stable_journal_is_deterministic(capsys, tmp_path):
    for d in ("a", "b"):
        run(capsys, "stable", GROUPS / "gl32.tower", "--max-degree", 6, "--out", tmp_path / d)
    assert (tmp_path / "a" / "journal.txt").read_text() == (tmp_path / "b" / "journal.txt").read_text()


def test_verify_co3(capsys, tmp_path):
    code, data = run_json(capsys, "verify", FIX / "co3_presentation.txt", "--params", "8,12,14,15",
                          "--expected", FIX / "co3_expected_series.json", "--report-dir", tmp_path)
    assert code == 0 and data["status"] == "ok"
    assert data["census"]["generators"] == 16 and data["census"]["relations"] == 71
    assert data["census"]["max_relation_degree"] == 33
    assert data["closed_form"]["palindromic"] and data["expected_mismatch"] == []
    for f in ("hilbert.csv", "hilbert.png", "numerator.csv", "numerator.png"):
        assert (tmp_path / f).exists()


def test_verify_mismatch_exit_code(capsys, tmp_path):
    exp = json.loads((FIX / "co3_expected_series.json").read_text())
    exp["numerator"][3] += 1
    exp["nonzero_coefficients"][1] += 1
    p = tmp_path / "wrong.json"
    p.write_text(json.dumps(exp))
    code, data = run_json(capsys, "verify", FIX / "co3_presentation.txt", "--expected", p)
    assert code == 3 and data["status"] == "mismatch"


def test_verify_inconclusive_exit_code(capsys, tmp_path):
    # closed form requested but the window is too short to see the numerator stop
    code, data = run_json(capsys, "verify", FIX / "pgroups" / "d8.txt", "--params", "1,2", "--degree", 2)
    assert code == 2 and data["status"] == "inconclusive"
    # a truncated presentation cannot certify coefficients above its truncation
    t = tmp_path / "t.txt"
    t.write_text("truncation 4\n" + (FIX / "pgroups" / "d8.txt").read_text())
    code, _ = run_json(capsys, "verify", t, "--degree", 8)
    assert code == 2


def test_verify_d8_and_polynomial(capsys, tmp_path):
    code, data = run_json(capsys, "verify", FIX / "pgroups" / "d8.txt", "--params", "1,1", "--degree", 12)
    assert code == 0 and data["closed_form"]["numerator"] == [1]
    code, data = run_json(capsys, "verify", FIX / "pgroups" / "d8.txt", "--params", "1,2", "--degree", 12,
                          "--search")
    assert data["parameters"]["regular"] == "regular"
    poly = write_group(tmp_path, "poly.txt", "gen x 1 c\ngen y 3 c\n")
    code, data = run_json(capsys, "verify", poly, "--params", "1,3", "--degree", 12,
                          "--param-poly", "x", "--param-poly", "y")
    assert code == 0 and data["closed_form"]["numerator"] == [1]
    assert data["parameters"]["regular"] == "regular"


def test_verify_parse_failure(capsys, tmp_path):
    bad = write_group(tmp_path, "bad.txt", "gen x 1 b\nx + q\n")
    code, _, err = run(capsys, "verify", bad)
    assert code == 1 and "unknown generator" in err


def test_groupinfo_s4(capsys, tmp_path):
    code, data = run_json(capsys, "groupinfo", GROUPS / "s4.txt", "--report-dir", tmp_path)
    assert code == 0 and data["order"] == 24 and data["sylow_order"] == 8
    assert (tmp_path / "sylow_element_orders.png").exists()


def test_groupinfo_co3_sylow(capsys):
    code, data = run_json(capsys, "groupinfo", FIX / "co3_gens.txt", "--sylow", FIX / "co3_sylow.txt", "--classes")
    assert code == 0
    assert data["order"] == 495_766_656_000 and data["sylow_order"] == 1024
    assert data["center_type"] == [2] and data["second_center_type"] == [4, 2]
    cents = sorted(c["centralizer_order"] for c in data["order4_cyclic_subgroups_of_Z2"])
    assert cents == [1536, 23040]


def test_doublecosets_small(capsys, tmp_path):
    code, data = run_json(capsys, "doublecosets", GROUPS / "s4.txt", "--subgroup", GROUPS / "s4_sylow.txt",
                          "--preview", "--report-dir", tmp_path)
    assert code == 0 and sum(data["sizes"]) == 24 and data["count"] == 2
    assert [p["status"] for p in data["preview"]] == ["active"]
    assert (tmp_path / "double_cosets.csv").exists() and (tmp_path / "double_cosets.png").exists()
    code, data = run_json(capsys, "doublecosets", GROUPS / "s4.txt")
    assert data["count"] == 1


@pytest.mark.slow
def test_doublecosets_co3_top_layer(capsys):
    code, data = run_json(capsys, "doublecosets", FIX / "co3_gens.txt", "--subgroup", FIX / "co3_g3.txt",
                          "--central-of", FIX / "co3_sylow.txt")
    assert code == 0 and data["count"] == 7 and data["index"] == 170775
    assert sorted(s // 2903040 for s in data["sizes"]) == [1, 630, 1920, 8960, 30240, 48384, 80640]
