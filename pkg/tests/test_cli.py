import json

import pytest

from elastodn.cli import main


def read_summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text())


def test_factor_check_passes_and_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    code = main(["factor-check", "--out", str(out), "--seed", "11"])
    assert code == 0
    summary = read_summary(out)
    assert summary["pass"] is True
    assert summary["schema_version"] == 1
    keys = {c["key"] for c in summary["checks"]}
    assert "factor.max_rel_residual_closed" in keys
    csv_text = (out / "factor_check.csv").read_text().splitlines()
    assert csv_text[0].startswith("lam,mu,rho,xi")
    assert len(csv_text) == 1001


def test_reconstruct_constant_profile_file(tmp_path):
    prof = tmp_path / "profile.csv"
    prof.write_text("depth,lambda,mu,rho\n0.0,2.0,1.0,1.0\n0.5,2.0,1.0,1.0\n"
                    "1.0,2.0,1.0,1.0\n1.5,2.0,1.0,1.0\n")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"profile_path": str(prof), "n_draws": 50,
                               "orders": 1, "s_values": [0.5]}))
    out = tmp_path / "run"
    code = main(["reconstruct", "--config", str(cfg), "--out", str(out), "--seed", "1"])
    assert code == 0
    summary = read_summary(out)
    by_key = {c["key"]: c for c in summary["checks"]}
    assert by_key["reconstruct.max_roundtrip_rel_error"]["value"] <= 1e-10
    assert by_key["reconstruct.max_profile_abs_error"]["value"] <= 1e-6
    assert (out / "reconstruct_profile.csv").exists()


def test_empty_profile_is_config_error(tmp_path):
    prof = tmp_path / "empty.csv"
    prof.write_text("")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"profile_path": str(prof)}))
    code = main(["reconstruct", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2


def test_bad_config_json_is_config_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    code = main(["factor-check", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2


def test_determinism_same_seed_byte_identical(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_draws": 60}))
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["factor-check", "--config", str(cfg), "--out", str(out_a),
                 "--seed", "5"]) == 0
    assert main(["factor-check", "--config", str(cfg), "--out", str(out_b),
                 "--seed", "5", "--jobs", "2"]) == 0
    assert (out_a / "factor_check.csv").read_bytes() == (out_b / "factor_check.csv").read_bytes()
    assert (out_a / "summary.json").read_bytes() == (out_b / "summary.json").read_bytes()


def test_layer_strip_emits_per_step_rows(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_steps": 20, "ds": 0.002}))
    out = tmp_path / "run"
    assert main(["layer-strip", "--config", str(cfg), "--out", str(out)]) == 0
    rows = (out / "layer_strip.csv").read_text().splitlines()
    assert rows[0].startswith("s,point,lam_hat_11")
    assert len(rows) == 21


def test_reconstruct_h_grid_sweep(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"h_grid": [0.02, 0.01, 0.005], "n_draws": 20}))
    out = tmp_path / "run"
    assert main(["reconstruct", "--config", str(cfg), "--out", str(out)]) == 0
    summary = read_summary(out)
    keys = {c["key"] for c in summary["checks"]}
    assert "reconstruct.h_sweep_error_decreasing" in keys


def test_split_command(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_draws": 40}))
    out = tmp_path / "run"
    assert main(["split", "--config", str(cfg), "--out", str(out), "--seed", "2"]) == 0
    summary = read_summary(out)
    assert summary["fitted"]["decay_expected"] > 0


def test_bridge_command_dumps_traces_and_symbols(tmp_path):
    cfg = tmp_path / "cfg.json"
    # horizons long enough for the asymptotic decay regime of the slope fit
    cfg.write_text(json.dumps({"T_values": [2.0, 4.0], "h_grid": [0.05, 0.025]}))
    out = tmp_path / "run"
    assert main(["bridge", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "trace_T2.csv").exists()
    assert (out / "trace_T4.csv").exists()
    header = (out / "trace_T2.csv").read_text().splitlines()[0]
    assert header == "t,tract1_re,tract1_im,tract2_re,tract2_im,tract3_re,tract3_im"
    sym = json.loads((out / "dn_symbol.json").read_text())
    assert sym["schema_version"] == 1
    assert len(sym["points"][0]["lambda0"]) == 9
    summary = read_summary(out)
    assert "dn_symbol.json" in summary["artifacts"]
