"""Command-line interface: exit codes, reports, reproducibility."""

import json

from psskit.cli import main


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def load_report(tmp_path, command):
    with open(tmp_path / f"{command}-report.json") as fh:
        return json.load(fh)


def test_verify_preset_pass(tmp_path):
    assert run(tmp_path, "verify", "--family", "t22-default",
               "--both-signs") == 0
    rep = load_report(tmp_path, "verify")
    assert rep["ok"] and rep["version"]
    assert rep["config"]["seed"] == 0
    assert all(r["zero"] for r in rep["result"]["runs"])


def test_verify_inline_params(tmp_path):
    assert run(tmp_path, "verify", "--kind", "t23", "--mu2", "0", "--mu3",
               "0", "--eta2", "1", "--eta3", "1", "--lam", "1") == 0


def test_verify_unknown_preset(tmp_path):
    assert run(tmp_path, "verify", "--family", "bogus") == 2


def test_verify_malformed_config_file(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("kind = [unclosed")
    assert run(tmp_path, "verify", "--config", str(bad)) == 2


def test_verify_unknown_config_keys(tmp_path):
    cfg = tmp_path / "fam.json"
    cfg.write_text(json.dumps({"kind": "T22", "volume": 11}))
    assert run(tmp_path, "verify", "--config", str(cfg)) == 2


def test_verify_config_file_toml(tmp_path):
    cfg = tmp_path / "fam.toml"
    cfg.write_text('kind = "T22"\nmu2 = "3/4"\neta2 = "1"\n'
                   'f = "opaque"\nphi1 = "opaque"\nsign = -1\n')
    assert run(tmp_path, "verify", "--config", str(cfg)) == 0
    rep = load_report(tmp_path, "verify")
    assert rep["result"]["runs"][0]["params"]["mu2"] == "3/4"


def test_verify_mutated_family_fails(tmp_path):
    # eta3 inconsistent with the closure is a config-level rejection
    assert run(tmp_path, "verify", "--kind", "t25i", "--lam", "1", "--theta",
               "1", "--nu", "1", "--sigma", "1", "--eta2", "1",
               "--eta3", "7") == 2


def test_lemma21(tmp_path):
    assert run(tmp_path, "lemma21", "--family", "t24-default") == 0
    rep = load_report(tmp_path, "lemma21")
    assert rep["result"]["all_passed"]
    assert rep["result"]["delta_solved"] == "1"


def test_lemma21_wrong_delta_fails(tmp_path):
    assert run(tmp_path, "lemma21", "--family", "t24-default",
               "--delta", "3") == 1


def test_match_ch(tmp_path):
    assert run(tmp_path, "match-ch") == 0
    rep = load_report(tmp_path, "match-ch")
    assert rep["result"]["expansion_residual"] == "0"
    assert rep["result"]["verified"]


def test_match_ch_no_match(tmp_path):
    assert run(tmp_path, "match-ch", "--target", "u3") == 1


def test_certify_single(tmp_path):
    assert run(tmp_path, "certify", "--kind", "t23", "--mu3", "0", "--eta2",
               "1", "--eta3", "1") == 0
    rep = load_report(tmp_path, "certify")
    assert rep["result"]["value"] == "1"


def test_certify_sweep_with_thread_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("PSSKIT_THREADS", "2")
    assert run(tmp_path, "certify", "--kind", "t25ii", "--count", "40") == 0
    rep = load_report(tmp_path, "certify")
    assert rep["result"]["nonzero"] == 40


def test_certify_bad_kind(tmp_path):
    assert run(tmp_path, "certify", "--kind", "t22") == 2


def test_immerse_closed_form(tmp_path):
    assert run(tmp_path, "immerse", "--case", "p35i", "--alpha", "2.5",
               "--beta", "1", "--eta2", "1") == 0
    rep = load_report(tmp_path, "immerse")
    assert rep["result"]["strip_e"] == [0.5, 2.0]
    csv = tmp_path / "immerse-p35i.csv"
    assert csv.read_text().splitlines()[0] == "xi,a,b,c,gauss_residual"


def test_immerse_ode_case(tmp_path):
    assert run(tmp_path, "immerse", "--case", "p35ii", "--mu2", "1",
               "--eta2", "1", "--beta", "0", "--b0", "2") == 0
    rep = load_report(tmp_path, "immerse")
    assert rep["result"]["relation_residual_max"] <= 1e-8


def test_immerse_bad_initial_data(tmp_path):
    assert run(tmp_path, "immerse", "--case", "p35ii", "--mu2", "1",
               "--beta", "0", "--b0", "0.5") == 2


def test_reconstruct_sg(tmp_path):
    assert run(tmp_path, "reconstruct", "--solution", "sg-kink", "--nx", "31",
               "--nt", "31", "--hx", "0.02") == 0
    rep = load_report(tmp_path, "reconstruct")
    assert rep["result"]["drift_max"] <= 1e-6
    assert -1.05 <= rep["result"]["median_interior_K"] <= -0.95
    assert (tmp_path / "surface.obj").exists()
    assert (tmp_path / "surface_diagnostics.csv").exists()


def test_report_reproducibility(tmp_path):
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["verify", "--family", "t22-default", "--out", str(d1)]) == 0
    assert main(["verify", "--family", "t22-default", "--out", str(d2)]) == 0
    a = json.load(open(d1 / "verify-report.json"))
    b = json.load(open(d2 / "verify-report.json"))
    a.pop("meta"), b.pop("meta")
    a["config"].pop("out"), b["config"].pop("out")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_rerun_from_embedded_config(tmp_path):
    d1 = tmp_path / "first"
    assert main(["verify", "--kind", "t22", "--mu2", "3/4", "--eta2", "2",
                 "--out", str(d1)]) == 0
    rep = load_report(d1, "verify")
    cfg = rep["result"]["runs"][0]["params"]
    cfg_file = tmp_path / "replay.json"
    cfg_file.write_text(json.dumps({
        "kind": cfg["kind"], "mu2": cfg["mu2"], "eta2": cfg["eta2"],
        "sign": cfg["sign"], "f": cfg.get("f_slot"),
        "phi1": cfg.get("phi1_slot")}))
    d2 = tmp_path / "second"
    assert main(["verify", "--config", str(cfg_file), "--out", str(d2)]) == 0
    a = load_report(d1, "verify")
    b = load_report(d2, "verify")
    assert a["result"] == b["result"]


def test_missing_family_source(tmp_path):
    assert run(tmp_path, "verify") == 2


def test_bad_tolerance_rejected(tmp_path):
    assert main(["verify", "--family", "t22-default", "--out", str(tmp_path),
                 "--rtol", "-1"]) == 2


def test_usage_error_exit_code():
    assert main(["frobnicate"]) == 2
