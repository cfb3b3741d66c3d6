import json
import subprocess
import sys

import pytest

from conftest import ALGEBRA_DIR, GF3, QQ
from zpdalg.algebra import direct_product, mat, mat_over, tri, trunc
from zpdalg.cli import (
    EXIT_FAILS,
    EXIT_INVALID,
    EXIT_LIMIT,
    EXIT_OK,
    AlgebraLoadError,
    algebra_from_dict,
    build,
    dump_algebra,
    load_algebra,
    main,
)
from zpdalg.exactlinalg import GF2


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def algebra_file(name):
    return str(ALGEBRA_DIR / f"{name}.json")


@pytest.mark.parametrize(
    "name,code",
    [
        ("mat2_gf2", EXIT_OK),
        ("mat2_gf3", EXIT_OK),
        ("tri2_gf2", EXIT_OK),
        ("gf2_cubed", EXIT_OK),
        ("trunc2_gf2", EXIT_FAILS),
        ("mat2_trunc2_gf2", EXIT_FAILS),
        ("gf4_over_gf2", EXIT_FAILS),
    ],
)
def test_check_exit_codes(capsys, name, code):
    got, out, _ = run(capsys, "check", algebra_file(name), "--property", "2zpd")
    assert got == code
    verdict = json.loads(out)["certificates"]["2zpd"]["verdict"]
    assert verdict == {EXIT_OK: "holds", EXIT_FAILS: "fails"}[code]


def test_check_prints_witness(capsys):
    _, out, _ = run(capsys, "check", algebra_file("trunc2_gf2"), "--property", "2zpd")
    cert = json.loads(out)["certificates"]["2zpd"]
    assert cert["witness_form"] == [[0, 1], [0, 0]]
    assert cert["witness_tensor_terms"] == "1(x)u + u(x)1"


def test_rational_sampling_never_fails(capsys):
    for seed in ("0", "7"):
        code, out, _ = run(capsys, "check", algebra_file("mat2_rational"), "--property", "2zpd", "--strategy", "mc", "--seed", seed)
        assert code in (EXIT_OK, EXIT_LIMIT)
        assert json.loads(out)["strategy"]["seed"] == int(seed)
    code, out, _ = run(capsys, "check", algebra_file("dual_numbers_rational"), "--property", "2zpd")
    assert code == EXIT_LIMIT
    assert json.loads(out)["certificates"]["2zpd"]["verdict"] == "inconclusive"


def test_cap_exceeded(capsys):
    code, _, err = run(capsys, "check", algebra_file("mat3_gf2"), "--cap", "100")
    assert code == EXIT_LIMIT
    assert "required cap: 512" in err


def test_exhaustive_over_rationals_refused(capsys):
    code, _, err = run(capsys, "spans", algebra_file("mat2_rational"), "--strategy", "exhaustive")
    assert code == EXIT_LIMIT and "finite field" in err


def test_validate(capsys, tmp_path):
    assert run(capsys, "validate", algebra_file("tri3_gf2"))[0] == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"field": {"gf": 2}, "dim": 2, "unit": [1, 0],
                               "table": [[[0, 1], [0, 0]], [[0, 0], [0, 0]]]}))
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == EXIT_INVALID
    assert "unit law" in out


def test_malformed_json_reports_location(capsys, tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text('{"field": {"gf": 2},\n "spec": mat(2)}')
    code, _, err = run(capsys, "check", str(bad))
    assert code == EXIT_INVALID
    assert "line 2" in err


def test_bad_builder_reports_column(capsys, tmp_path):
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({"field": {"gf": 2}, "spec": "mat_over(2,trnc(2))"}))
    code, _, err = run(capsys, "spans", str(bad))
    assert code == EXIT_INVALID and "column 12" in err


def test_missing_file(capsys):
    assert run(capsys, "validate", "no/such/file.json")[0] == EXIT_INVALID


def test_name_resolution(monkeypatch, capsys):
    monkeypatch.chdir(ALGEBRA_DIR.parent)
    assert run(capsys, "check", "mat2_gf2", "--property", "2zpd")[0] == EXIT_OK


def test_spans_command(capsys):
    code, out, _ = run(capsys, "spans", algebra_file("trunc2_gf2"))
    spans = json.loads(out)["spans"]
    assert code == EXIT_OK
    assert (spans["zero_pair_span"], spans["ker_mu"], spans["square_zero_span"]) == (1, 2, 1)


def test_derivations_and_separability_commands(capsys):
    code, out, _ = run(capsys, "derivations", algebra_file("tri2_gf2"), "--dual")
    d = json.loads(out)["derivations"]
    assert code == EXIT_OK and d["h1"] == 0 and d["all_dual_inner"]
    assert run(capsys, "separability", algebra_file("mat2_gf3"))[0] == EXIT_OK
    code, out, _ = run(capsys, "separability", algebra_file("trunc2_gf2"))
    assert code == EXIT_FAILS and not json.loads(out)["separability"]["separable"]


def test_witness_command(capsys):
    code, out, _ = run(capsys, "witness", algebra_file("trunc2_gf2"))
    w = json.loads(out)["witness"]
    assert code == EXIT_FAILS and w["route"] == "functional"
    assert "outside the span of square-zero elements" in w["escaping_derivation"]["description"]
    code, out, _ = run(capsys, "witness", algebra_file("mat2_gf2"))
    assert code == EXIT_OK and json.loads(out)["witness"]["route"] is None


def test_report_is_reproducible(capsys, tmp_path):
    paths = [tmp_path / "r1.json", tmp_path / "r2.json"]
    for p in paths:
        assert run(capsys, "report", algebra_file("mat2_rational"), "--out", str(p), "--seed", "3")[0] == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    report = json.loads(paths[0].read_text())
    assert report["seed"] == 3 and "timing_seconds" not in report
    assert set(report["certificates"]) == {"zpd", "zlpd", "2zpd"}
    timed = tmp_path / "t.json"
    run(capsys, "report", algebra_file("tri2_gf2"), "--out", str(timed), "--timing")
    assert "timing_seconds" in json.loads(timed.read_text())


@pytest.mark.parametrize(
    "a",
    [mat(2, GF2), tri(3, GF3), trunc(3, QQ), direct_product(mat(1, GF2), trunc(2, GF2)), mat_over(2, trunc(2, GF2))],
    ids=str,
)
def test_round_trip(a):
    b = algebra_from_dict(json.loads(dump_algebra(a)))
    assert b.same_structure(a) and b.labels == a.labels


def test_builder_grammar():
    assert build("mat_over(2,trunc(2))", GF2).same_structure(mat_over(2, trunc(2, GF2)))
    assert build(" prod( mat(1) , tri(2) ) ", GF2).dim == 4
    assert build("tensor_trunc(mat(2),3)", GF2).dim == 12
    for bad in ("mat(", "mat(2))", "mat(x)", "trunc(1)", ""):
        with pytest.raises(AlgebraLoadError):
            build(bad, GF2)


def test_explicit_table_is_validated():
    with pytest.raises(AlgebraLoadError) as err:
        algebra_from_dict({"field": {"gf": 2}, "dim": 1, "unit": [1], "table": [[[0]]]})
    assert "(0" in str(err.value) or "e0" in str(err.value)
    a = load_algebra(algebra_file("dual_numbers_rational"))
    assert a.same_structure(trunc(2, QQ))


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "zpdalg", "check", algebra_file("trunc2_gf2"), "--property", "zpd"],
        capture_output=True, text=True,
    )
    assert proc.returncode == EXIT_FAILS
    assert json.loads(proc.stdout)["certificates"]["zpd"]["verdict"] == "fails"
