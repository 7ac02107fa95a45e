import json
import subprocess
import sys
from pathlib import Path

import pytest

from bellctx.catalogue import pr_box
from bellctx.cli import main, run
from bellctx.core import BellScenario, PreparationEquivalence
from bellctx.quantum import realisation_to_obj, tsirelson_realisation
from bellctx.serialize import dump, dumps, load, to_obj

DATA = Path(__file__).resolve().parents[1] / "data"


def call(args, capsys):
    status = main([str(a) for a in args])
    out = capsys.readouterr().out
    return status, json.loads(out)


@pytest.fixture
def pr_file(tmp_path):
    path = tmp_path / "pr.json"
    dump(pr_box(), path)
    return path


def test_map_then_unmap_reproduces_the_file_bit_exactly(tmp_path, pr_file, capsys):
    mapped = tmp_path / "mapped.json"
    status, rep = call(["map", pr_file, "--output", mapped], capsys)
    assert status == 0 and rep["result"]["index_A"] == [2, 2]
    assert json.loads(mapped.read_text())["index_A"] == [2, 2]
    back = tmp_path / "back.json"
    status, rep = call(["unmap", mapped, "--output", back], capsys)
    assert status == 0
    assert back.read_bytes() == pr_file.read_bytes()


def test_unmap_accepts_an_explicit_index(tmp_path, pr_file, capsys):
    mapped = tmp_path / "mapped.json"
    call(["map", pr_file, "--output", mapped], capsys)
    status, rep = call(["unmap", mapped, "--index-A", "3,2"], capsys)
    assert status == 0 and rep["output"]["A"] == [3, 2]
    status, rep = call(["unmap", mapped, "--index-A", "1,1"], capsys)
    assert status == 1 and rep["error"]["type"] == "IndexTooSmall"


def test_check_nc_on_contextual_behaviour(capsys):
    status, rep = call(["check", "nc", DATA / "five-prep-scenario.json", "--behaviour", DATA / "five-prep-qc.json"],
                       capsys)
    assert status == 0
    assert rep["verdict"] == "non-member" and rep["violation"] == "1/40"
    assert rep["certificate"]["violation"] == "1/40"
    assert len(rep["violated_facets"]) == 1


def test_reports_are_reverifiable(tmp_path, capsys):
    status, rep = call(["check", "nc", DATA / "five-prep-qc.json", "--no-facets"], capsys)
    assert status == 0 and rep["result"]["facet_search"] == "disabled"
    report = tmp_path / "report.json"
    report.write_text(json.dumps(rep))
    status, check = call(["verify-cert", DATA / "five-prep-qc.json", report], capsys)
    assert status == 0 and check["verdict"] == "valid"
    rep["certificate"]["violation"] = "1/2"
    report.write_text(json.dumps(rep))
    status, check = call(["verify-cert", DATA / "five-prep-qc.json", report], capsys)
    assert status == 0 and check["verdict"] == "invalid"
    assert any("claimed violation" in d for d in check["result"]["defects"])


def test_check_local_and_ns(pr_file, capsys):
    status, rep = call(["check", "local", pr_file], capsys)
    assert status == 0 and rep["verdict"] == "non-member"
    assert rep["certificate"]["kind"] == "bell-inequality"
    status, rep = call(["check", "ns", pr_file], capsys)
    assert rep["verdict"] == "no-signalling" and rep["residuals"]["no_signalling"] == "0"


def test_batch_checks_with_workers(tmp_path, pr_file, capsys):
    noisy = tmp_path / "blend.json"
    call(["blend", pr_file, "--n", "2", "--output", noisy], capsys)
    status, rep = call(["check", "local", pr_file, noisy, "--jobs", "2"], capsys)
    assert status == 0
    assert [r["verdict"] for r in rep["result"]["batch"]] == ["non-member", "member"]
    _, serial = call(["check", "local", pr_file, noisy], capsys)
    assert serial["result"] == rep["result"]


def test_reports_are_deterministic(pr_file, capsys):
    _, first = call(["check", "local", pr_file], capsys)
    _, second = call(["check", "local", pr_file], capsys)
    assert first["report_digest"] == second["report_digest"]
    assert first["input_digest"] == second["input_digest"]
    assert set(first) >= {"command", "tool_version", "input_digest", "verdict", "certificate", "report_digest",
                          "timing"}


def test_local_facets_of_chsh_scenario(tmp_path, capsys):
    path = tmp_path / "chsh.json"
    dump(BellScenario((2, 2), (2, 2)), path)
    status, rep = call(["facets", path], capsys)
    assert status == 0
    assert rep["result"]["facet_count"] == 24 and rep["result"]["positivity_facets"] == 16
    status, rep = call(["vertices", path], capsys)
    assert rep["result"]["vertex_count"] == 16


def test_facets_self_check_and_split(capsys):
    status, rep = call(["facets", DATA / "five-prep-scenario.json", "--self-check"], capsys)
    assert status == 0
    res = rep["result"]
    assert (res["facet_count"], res["positivity_facets"], res["nontrivial_facets"]) == (60, 20, 40)


def test_exit_codes(tmp_path, pr_file, capsys):
    bad = tmp_path / "bad.json"
    obj = json.loads(pr_file.read_text())
    obj["table"]["1,1,1,1"] = "3/2"
    bad.write_text(json.dumps(obj))
    status, rep = call(["validate", bad], capsys)
    assert status == 1 and rep["error"]["type"] == "NormalisationError"
    assert rep["error"]["violations"]
    status, rep = call(["facets", DATA / "five-prep-scenario.json", "--budget", "3"], capsys)
    assert status == 2 and rep["verdict"] == "budget-exceeded"
    status, _ = call(["check", "local", tmp_path / "missing.json"], capsys)
    assert status == 1
    status, _ = call(["blend", pr_file, "--n", "x"], capsys)
    assert status == 1


def test_config_and_environment_budgets(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"budget": 3}))
    status, _ = call(["facets", DATA / "five-prep-scenario.json", "--config", cfg], capsys)
    assert status == 2
    monkeypatch.setenv("BELLCTX_BUDGET", "3")
    status, _ = call(["vertices", DATA / "five-prep-scenario.json"], capsys)
    assert status == 2


def test_reduce_and_embed(tmp_path, capsys):
    from bellctx.sampling import planted_ns
    import random

    p = planted_ns(BellScenario((2, 3, 2), (2, 2)), random.Random(2))
    src = tmp_path / "p.json"
    dump(p, src)
    reduced = tmp_path / "reduced.json"
    status, rep = call(["reduce", src, "--output", reduced], capsys)
    assert status == 0
    status, rep = call(["embed-bell", reduced], capsys)
    assert status == 0 and rep["output"] == to_obj(p)


def test_normal_form_and_embed_preps(tmp_path, capsys):
    eq = tmp_path / "eq.json"
    eq.write_text(dumps(PreparationEquivalence({"1": "1/2", "2": "1/2"}, {"1": "1/3", "3": "1/3", "4": "1/3"})))
    status, rep = call(["normal-form", eq], capsys)
    assert status == 0 and rep["output"]["lhs"] == {"1": "1/4", "2": "3/4"}
    status, rep = call(["embed-preps", DATA / "five-prep-scenario.json", "--behaviour", DATA / "five-prep-qc.json"],
                       capsys)
    assert status == 0
    split = tmp_path / "split.json"
    split.write_text(json.dumps(rep["output"]))
    status, rep = call(["check", "nc", split], capsys)
    assert status == 0 and rep["verdict"] == "member"


def test_ctxset_check(capsys):
    status, rep = call(["check", "ctxset", DATA / "five-prep-qc.json"], capsys)
    assert status == 0 and rep["verdict"] == "member" and rep["residuals"]["equivalences"] == ["0", "0"]


def test_quantum_commands(tmp_path, capsys):
    real = tmp_path / "t.json"
    real.write_text(json.dumps(realisation_to_obj(tsirelson_realisation())))
    asm = tmp_path / "asm.json"
    status, rep = call(["assemblage", real, "--output", asm], capsys)
    assert status == 0 and rep["residuals"]["averaging"] <= 1e-10
    status, rep = call(["hjw", asm, "--realisation", real], capsys)
    assert status == 0 and rep["verdict"] == "verified"
    assert rep["residuals"]["round_trip"] <= 1e-9
    status, rep = call(["snap", real], capsys)
    assert status == 0 and rep["verdict"] == "not-snapped"


def test_module_entry_point(pr_file):
    proc = subprocess.run([sys.executable, "-m", "bellctx", "check", "local", str(pr_file)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "non-member"
    assert "non-member" in proc.stderr


def test_run_returns_status_and_report(pr_file):
    status, report = run(["validate", str(pr_file)])
    assert status == 0 and report["command"] == "validate"
    assert load(pr_file) == pr_box()
