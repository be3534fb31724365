import json

import pytest

from coagkit import cli


def write_config(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def base_config(out_dir, **overrides):
    cfg = {
        "kernel": {"family": "constant", "params": {"c": 2.0}},
        "grid": {"kind": "discrete", "n": 128},
        "init": {"family": "monodisperse", "params": {"size": 1.0}},
        "solver": {"scheme": "rk45", "rel_tol": 1e-9, "abs_tol": 1e-13,
                   "boundary": "conservative", "t_end": 1.0,
                   "snapshots": [0.5, 1.0]},
        "output": {"directory": str(out_dir), "formats": ["csv", "json"]},
    }
    cfg.update(overrides)
    return cfg


def test_simulate_artifacts_and_exit_zero(tmp_path):
    out = tmp_path / "out"
    path = write_config(tmp_path, "c.json", base_config(out))
    assert cli.cmd_simulate(path) == 0
    moments = (out / "moments.csv").read_text()
    assert moments.splitlines()[0] == "t,M0,M05,M1,M2,gel_mass"
    assert (out / "snapshots.csv").exists()
    run = json.loads((out / "run.json").read_text())
    assert run["config_sha256"] == cli.config_hash(json.loads(path.read_text()))
    assert run["step_log"]["flag"] is None


def test_simulate_missing_kernel_exits_2(tmp_path):
    cfg = base_config(tmp_path / "o")
    del cfg["kernel"]
    path = write_config(tmp_path, "bad.json", cfg)
    assert cli.cmd_simulate(path) == 2


def test_simulate_unknown_key_exits_2(tmp_path):
    cfg = base_config(tmp_path / "o")
    cfg["mystery"] = 1
    path = write_config(tmp_path, "bad.json", cfg)
    assert cli.cmd_simulate(path) == 2


def test_simulate_malformed_json_exits_2(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert cli.cmd_simulate(path) == 2


def test_simulate_determinism_byte_identical(tmp_path):
    path = write_config(tmp_path, "c.json", base_config(tmp_path / "ignored"))
    assert cli.cmd_simulate(path, out=str(tmp_path / "a")) == 0
    assert cli.cmd_simulate(path, out=str(tmp_path / "b")) == 0
    for name in ("moments.csv", "snapshots.csv"):
        assert (tmp_path / "a" / name).read_bytes() \
            == (tmp_path / "b" / name).read_bytes()


def test_validate_pass_and_tolerance_fail(tmp_path):
    cfg = base_config(tmp_path / "ok", **{
        "validate": {"sizes": 10,
                      "tolerances": {"distribution_rel": 1e-6, "m0_rel": 1e-6,
                                     "m1_rel": 1e-8, "m2_rel": 1e-3}},
    })
    cfg["grid"]["n"] = 256
    cfg["solver"]["rel_tol"] = 1e-10
    path = write_config(tmp_path, "v.json", cfg)
    assert cli.cmd_validate(path) == 0
    report = json.loads((tmp_path / "ok" / "validate.json").read_text())
    assert report["verdict"] == "pass"

    # deliberately coarse: a loose integrator cannot meet 1e-10
    coarse = base_config(tmp_path / "bad", **{
        "validate": {"tolerances": {"m0_rel": 1e-12, "distribution_rel": 1e-12}},
    })
    coarse["solver"]["rel_tol"] = 1e-4
    path2 = write_config(tmp_path, "v2.json", coarse)
    assert cli.cmd_validate(path2) == 1
    rep = json.loads((tmp_path / "bad" / "validate.json").read_text())
    assert any(c["verdict"] == "fail" for c in rep["checks"])


def test_validate_unsupported_family_exits_4(tmp_path):
    cfg = base_config(tmp_path / "o")
    cfg["kernel"] = {"family": "brownian"}
    path = write_config(tmp_path, "v.json", cfg)
    assert cli.cmd_validate(path) == 4


def test_compactness_synthetic_and_dlvp(tmp_path):
    cfg = base_config(tmp_path / "o", **{
        "compactness": {
            "source": "singular",
            "thresholds": [1, 2, 4, 8, 16, 64, 256, 1024],
            "eps": [2.0**-k for k in range(24, 10, -1)],
            "dlvp": {"terms": 6, "tail": "inverse", "inverse_coeff": 2,
                      "samples": 200},
        },
    })
    path = write_config(tmp_path, "c.json", cfg)
    assert cli.cmd_compactness(path) == 0
    rep = json.loads((tmp_path / "o" / "compactness.json").read_text())
    assert rep["dlvp"]["function"]["breakpoints"] == [1, 8, 32, 128, 512, 2048, 8192]
    assert rep["dlvp"]["checks"]["passed"]
    assert rep["eta"]["tails"] == sorted(rep["eta"]["tails"], reverse=True)


def test_compactness_concentrating_eta_one(tmp_path):
    cfg = base_config(tmp_path / "o", **{
        "compactness": {"source": "concentrating",
                         "thresholds": [1, 2, 4, 8, 16, 32]},
    })
    path = write_config(tmp_path, "c.json", cfg)
    assert cli.cmd_compactness(path) == 0
    rep = json.loads((tmp_path / "o" / "compactness.json").read_text())
    assert rep["eta"]["estimate"] == pytest.approx(1.0)


def test_compactness_constructive_failure_exits_5(tmp_path):
    cfg = base_config(tmp_path / "o", **{
        "compactness": {
            "source": "bounded",
            "dlvp": {"terms": 3, "tail": "table",
                      "tail_table": {"1": 1.0, "100": 1.0, "10000": 1.0}},
        },
    })
    path = write_config(tmp_path, "c.json", cfg)
    assert cli.cmd_compactness(path) == 5
    rep = json.loads((tmp_path / "o" / "compactness.json").read_text())
    assert rep["dlvp"]["first_unmet_index"] == 1


def test_gelation_command(tmp_path):
    cfg = base_config(tmp_path / "o", **{
        "kernel": {"family": "multiplicative"},
        "gelation": {"policy": "m2_extrapolation",
                      "xi": {"kind": "power_shifted", "lam": 2.0}},
    })
    cfg["grid"]["n"] = 1024
    cfg["solver"].update({"boundary": "absorbing", "t_end": 0.9,
                           "snapshots": [0.3, 0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9],
                           "rel_tol": 1e-8})
    path = write_config(tmp_path, "g.json", cfg)
    assert cli.cmd_gelation(path) == 0
    rep = json.loads((tmp_path / "o" / "gelation.json").read_text())
    assert 0.95 <= rep["t_gel_detected"] <= 1.05
    assert rep["functional"]["margin"] > 0


def test_simulate_diagnostics_rows(tmp_path):
    cfg = base_config(tmp_path / "o", **{
        "diagnostics": {"checks": [{"name": "phi_gronwall", "R": 10.0},
                                     {"name": "weak_form_identity",
                                      "theta": "identity"}]},
    })
    path = write_config(tmp_path, "d.json", cfg)
    assert cli.cmd_simulate(path) == 0
    rows = json.loads((tmp_path / "o" / "diagnostics.json").read_text())
    names = {r["check"] for r in rows}
    assert "phi_gronwall" in names and "weak_form_identity" in names
    csv = (tmp_path / "o" / "diagnostics.csv").read_text()
    assert csv.splitlines()[0] == "check,lhs,rhs,margin,verdict"


def test_sweep_isolated_outputs(tmp_path):
    cfg = base_config(tmp_path / "o")
    cfg["sweep"] = [{"grid.n": 32}, {"grid.n": 64}]
    path = write_config(tmp_path, "s.json", cfg)
    assert cli.cmd_simulate(path, jobs=2) == 0
    for i in (0, 1):
        assert (tmp_path / "o" / f"sweep_{i:03d}" / "moments.csv").exists()
    m32 = (tmp_path / "o" / "sweep_000" / "snapshots.csv").read_text()
    assert len(m32.splitlines()) == 1 + 3 * 32  # header + 3 snapshots x 32 cells


def test_main_entry_point(tmp_path, capsys):
    out = tmp_path / "out"
    path = write_config(tmp_path, "c.json", base_config(out))
    assert cli.main(["simulate", str(path)]) == 0
    assert cli.main(["validate", str(path), "--out", str(tmp_path / "v")]) == 0
