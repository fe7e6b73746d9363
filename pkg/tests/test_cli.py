import csv
import io
import json
import math
import shutil
import subprocess
import sys

import pytest

from xxzbethe import cli


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    text = out.read_text() if out.exists() else ""
    return code, text


def run_json(tmp_path, *argv):
    code, text = run(tmp_path, *argv)
    return code, json.loads(text) if text else None


def test_parse_eta_forms():
    assert cli.parse_eta("0.5pi") == math.pi / 2
    assert cli.parse_eta("pi/3") == pytest.approx(math.pi / 3)
    assert cli.parse_eta("0.4π") == pytest.approx(0.4 * math.pi)
    assert cli.parse_eta("1.2") == 1.2
    with pytest.raises(cli.InputError):
        cli.parse_eta("half")


def test_solve_xx_ground(tmp_path):
    code, d = run_json(tmp_path, "solve", "--L", "8", "--M", "4", "--eta", "0.5pi", "--ground")
    assert code == 0 and d["schema"] == 1
    assert d["R"] == 4 and all(r["line"] == "real" for r in d["roots"])
    assert d["residual"] < 1e-12 and d["counting_check"] < 1e-10


def test_solve_k1_counts(tmp_path):
    code, d = run_json(tmp_path, "solve", "--L", "8", "--M", "5", "--eta", "0.4pi", "--ground")
    # R = L/2 - k + 2 floor(1/2 + k eta / pi) = 3, C = 2
    assert code == 0 and d["k"] == 1 and d["R"] == 3 and d["C"] == 2


def test_solve_delta_and_numbers(tmp_path):
    code, d = run_json(tmp_path, "solve", "--L", "8", "--M", "3", "--delta", "0.5",
                       "--numbers=-1,0,2")
    assert code == 0 and d["eta"] == pytest.approx(math.pi / 3)
    assert d["numbers"] == ["-1", "0", "2"]


def test_ground_with_particles_and_holes(tmp_path):
    code, d = run_json(tmp_path, "solve", "--L", "8", "--M", "3", "--eta", "0.3pi", "--ground",
                       "--holes", "1", "--particles", "2")
    assert code == 0 and d["numbers"] == ["-1", "0", "2"]


@pytest.mark.parametrize("argv", [
    ["solve", "--L", "8", "--M", "4", "--eta", "0.3pi", "--numbers=-1,0,1,2"],
    ["solve", "--L", "8", "--M", "3", "--eta", "0.3pi", "--numbers=-5,0,1"],
    ["solve", "--L", "8", "--M", "3", "--eta", "0.5pi", "--numbers=-1,-1,0"],
    ["solve", "--L", "8", "--M", "3", "--eta", "zzz", "--ground"],
    ["solve", "--L", "8", "--M", "3", "--ground"],
    ["solve", "--L", "8", "--M", "3", "--eta", "0.3pi", "--ground", "--tol", "-1"],
    ["verify", "--L", "16", "--M", "8", "--eta", "0.3pi", "--ground"],
    ["frobnicate"],
])
def test_input_errors_exit_2(tmp_path, argv):
    assert cli.main([*argv, "--out", str(tmp_path / "x")] if argv != ["frobnicate"] else argv) == 2


def test_round_trip_seed_converges_in_two_iterations(tmp_path):
    base = ["--L", "8", "--M", "4", "--eta", "0.3pi", "--numbers=-3/2,-1/2,1/2,5/2"]
    code, first = run(tmp_path, "solve", *base, name="a.json")
    assert code == 0
    seed = tmp_path / "a.json"
    code, d = run_json(tmp_path, "solve", *base, "--seed", str(seed))
    assert code == 0 and d["converged"] and d["iterations"] <= 2
    assert [r["re"] for r in d["roots"]] == pytest.approx([r["re"] for r in json.loads(first)["roots"]],
                                                          abs=1e-12)


def test_round_trip_with_escaped_roots(tmp_path):
    base = ["--L", "8", "--M", "6", "--eta", "0.3pi", "--ground"]
    code, _ = run(tmp_path, "solve", *base, name="a.json")
    assert code == 0
    code, d = run_json(tmp_path, "solve", *base, "--seed", str(tmp_path / "a.json"))
    assert code == 0 and d["iterations"] <= 2 and len(d["escaped"]) == 4


def test_evolve_negative_k(tmp_path):
    csv_path = tmp_path / "trace.csv"
    code, d = run_json(tmp_path, "evolve", "--L", "12", "--M", "4", "--eta", "0.1pi",
                       "--numbers=-7/2,-1/2,1/2,7/2", "--steps", "80", "--csv", str(csv_path))
    assert code == 0
    assert [e["direction"] for e in d["events"]] == ["ShiftedToReal"] * 2
    assert d["counts"]["ok"] and d["final"]["R"] == 4
    rows = list(csv.DictReader(io.StringIO(csv_path.read_text())))
    assert list(rows[0]) == ["eta", "eta_over_pi", "roots", "R", "C", "energy"]


def test_evolve_first_point_and_geometric_grid(tmp_path):
    code, d = run_json(tmp_path, "evolve", "--L", "8", "--M", "4", "--eta", "0.05pi", "--ground",
                       "--first", "0.49pi", "--grid", "geometric", "--steps", "30")
    assert code == 0 and d["events"] == [] and d["counts"]["ok"]
    assert d["final"]["converged"]


def test_evolve_locked_pair_is_a_numerical_failure(tmp_path):
    code, d = run_json(tmp_path, "evolve", "--L", "8", "--M", "4", "--eta", "0.3pi",
                       "--numbers=-3/2,1/2,3/2,5/2", "--steps", "10")
    assert code == 1 and d["truncated"]


def test_dual_examples(tmp_path):
    code, d = run_json(tmp_path, "dual", "--L", "8", "--M", "3", "--eta", "pi/3", "--ground")
    assert code == 0 and d["dual_M"] == 5
    assert d["dual_numbers"] == ["-2", "-1", "0", "1", "2"]
    assert d["hole_map"]["4"] == "0"
    v = d["verification"]
    assert v["success"] and v["delta_e"] < 1e-10 and v["overlap"] > 1 - 1e-8
    code, d = run_json(tmp_path, "dual", "--L", "8", "--M", "2", "--eta", "0.5pi", "--ground",
                       "--no-verify")
    assert code == 0 and "verification" not in d and d["dual_M"] == 6


def test_verify_single_state(tmp_path):
    code, d = run_json(tmp_path, "verify", "--L", "8", "--M", "5", "--eta", "0.3pi", "--ground")
    assert code == 0 and d["overlap"] > 1 - 1e-8 and d["translation_error"] < 1e-10


def test_verify_xxx_null_state_exits_zero(tmp_path):
    code, d = run_json(tmp_path, "verify", "--L", "6", "--M", "4", "--ground", "--xxx")
    assert code == 0 and d["null_state"] and d["max_amplitude"] < 1e-10 * d["scale"]


def test_verify_xxx_reports_the_small_eta_limit(tmp_path):
    code, d = run_json(tmp_path, "verify", "--L", "8", "--M", "5", "--numbers=-3,-1,0,1,3", "--xxx",
                       "--xxx-eps", "1e-3")
    assert code == 0 and d["null_state"]
    lim = d["limit"]
    assert lim["eta"] == 1e-3 and lim["overlap"] > 0.999 and lim["holes_match"]
    assert lim["xxx_holes"] == ["-1", "1"]
    code, d = run_json(tmp_path, "verify", "--L", "6", "--M", "4", "--ground", "--xxx")
    assert code == 0 and "skipped" in d["limit"]


def test_verify_sweep_xx_census(tmp_path):
    code, d = run_json(tmp_path, "verify", "--L", "6", "--sweep", "--eta", "0.5pi")
    assert code == 0 and d["complete"] and d["max_delta_e"] < 1e-10
    assert [s["M"] for s in d["sectors"]] == list(range(7))


def test_verify_sweep_workers_deterministic(tmp_path):
    _, one = run(tmp_path, "verify", "--L", "6", "--M", "3", "--sweep", "--eta", "0.5pi", name="1.json")
    _, two = run(tmp_path, "verify", "--L", "6", "--sweep", "--eta", "0.5pi", "--workers", "2",
                 name="2.json")
    a, b = json.loads(one), json.loads(two)
    assert a["sectors"][0] == b["sectors"][3]


def test_dispersion_csv(tmp_path):
    code, text = run(tmp_path, "dispersion", "--L", "16", "--eta", "0.5pi", "--kind", "ph",
                     name="d.csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and list(rows[0]) == ["p", "eps_formula", "eps_ba", "L"]
    assert all(abs(float(r["eps_formula"]) - float(r["eps_ba"])) < 1e-10 for r in rows)


def test_config_file_and_flag_precedence(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[xxzbethe]\ntol = 1e-9\nsteps = 50\nmax_L = 10\n")
    args = cli.build_parser().parse_args(["solve", "--config", str(ini), "--steps", "70"])
    cfg = cli.load_config(args)
    assert cfg.tol == 1e-9 and cfg.steps == 70 and cfg.max_L == 10
    assert cfg.reseed_re == 10.0
    bad = tmp_path / "bad.ini"
    bad.write_text("[xxzbethe]\ncolour = blue\n")
    assert cli.main(["solve", "--config", str(bad), "--L", "8", "--M", "4", "--eta", "0.3pi",
                     "--ground"]) == 2
    # max_L from the file limits exact diagonalisation
    assert cli.main(["verify", "--config", str(ini), "--L", "12", "--M", "6", "--eta", "0.3pi",
                     "--ground", "--out", str(tmp_path / "v.json")]) == 2


def test_console_script_help():
    exe = shutil.which("xxzbethe")
    cmd = [exe] if exe else [sys.executable, "-m", "xxzbethe.cli"]
    res = subprocess.run([*cmd, "evolve", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "eta_over_pi" in res.stdout
    res = subprocess.run([*cmd, "solve", "--L", "8", "--M", "4", "--numbers=-1,0,1,2",
                          "--eta", "0.3pi"], capture_output=True, text=True)
    assert res.returncode == 2 and "input error" in res.stderr
