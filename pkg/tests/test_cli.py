import json
import math

import pytest

from hingedplate import mass_normalized_stripe, unit_weight, unweighted_first
from hingedplate.cli import (
    COMMANDS,
    ConfigError,
    RunConfig,
    bracket,
    fmt,
    main,
    parse_value,
)


def test_parse_value_numbers_and_strings():
    assert parse_value("0.5") == 0.5
    assert parse_value(" pi/150 ") == pytest.approx(math.pi / 150.0)
    assert parse_value("2*pi") == pytest.approx(2.0 * math.pi)
    assert parse_value("1e-3") == 1e-3
    assert parse_value("stripe") == "stripe"
    assert parse_value("0.0,0.3,0.5") == "0.0,0.3,0.5"


def test_fmt_twelve_significant_digits():
    assert fmt(0.9600093550736986) == "0.960009355074"
    assert fmt(True) == "true"
    assert fmt(False) == "false"
    assert fmt(7) == "7"
    assert fmt("x") == "x"


def test_run_config_file_and_overrides(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "# comment\n"
        "plate.ell = pi/150\n"
        "weight.beta = 1.5  # inline comment\n"
    )
    cfg = RunConfig(path=cfg_file, overrides=["weight.beta=20", "solver.m=2"])
    assert cfg.get("plate.ell") == pytest.approx(math.pi / 150.0)
    assert cfg.get("weight.beta") == 20.0  # override wins
    assert cfg.get("solver.m", kind=int) == 2
    assert cfg.get("missing", default=3.0) == 3.0


def test_run_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig(path=tmp_path / "absent.cfg")
    bad = tmp_path / "bad.cfg"
    bad.write_text("just a line without equals\n")
    with pytest.raises(ConfigError):
        RunConfig(path=bad)
    with pytest.raises(ConfigError):
        RunConfig(overrides=["no-equals-sign"])


def test_bracket_binding_logic(narrow_plate):
    mu = unweighted_first(1, narrow_plate).lam
    lo, hi, within, binding = bracket(mu, 1, unit_weight(narrow_plate.ell),
                                      narrow_plate)
    assert binding and within
    assert lo == pytest.approx((1.0 - 0.2 ** 2))
    w = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    lo, hi, _, binding = bracket(0.96, 1, w, narrow_plate)
    assert binding
    assert (lo, hi) == (1.0 / 1.5, 1.0)
    # beta so close to 1 that m^4/beta exceeds mu_{1,1}: not binding
    w = mass_normalized_stripe(0.9, 1.04, narrow_plate.ell)
    lo, _, _, binding = bracket(0.9600083, 1, w, narrow_plate)
    assert not binding
    assert lo > mu


def test_spectrum_command_outputs(tmp_path):
    out = tmp_path / "out"
    rc = main(["spectrum", "--out", str(out)])
    assert rc == 0
    for suffix in (".csv", ".json", ".png"):
        assert (out / f"spectrum{suffix}").exists()
    payload = json.loads((out / "spectrum.json").read_text())
    assert payload["passed"] is True
    assert payload["command"] == "spectrum"
    assert payload["summary"]["lambdas"][0] == pytest.approx(0.959999, rel=1e-4)


def test_csv_output_is_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["spectrum", "--out", str(out),
                     "--set", "weight.beta=20"]) == 0
        outs.append((out / "spectrum.csv").read_bytes())
    assert outs[0] == outs[1]


def test_mode_command(tmp_path):
    out = tmp_path / "out"
    rc = main(["mode", "--out", str(out), "--set", "weight.beta=20"])
    assert rc == 0
    payload = json.loads((out / "mode.json").read_text())
    assert abs(payload["summary"]["normalization"] - 1.0) < 1e-6


def test_config_errors_exit_2(tmp_path):
    out = str(tmp_path / "out")
    assert main(["spectrum", "--out", out, "--set", "plate.sigma=0.7"]) == 2
    assert main(["spectrum", "--out", out, "--set", "weight.kind=piecewise"]) == 2
    assert main(["spectrum", "--out", out, "--config",
                 str(tmp_path / "nope.cfg")]) == 2


def test_unknown_command_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_failures_produce_exit_1(tmp_path, monkeypatch):
    def failing(cfg, params, outdir):
        return {"detail": 0}, ["invariant violated"]

    monkeypatch.setitem(COMMANDS, "spectrum", failing)
    out = tmp_path / "out"
    assert main(["spectrum", "--out", str(out)]) == 1
    payload = json.loads((out / "spectrum.json").read_text())
    assert payload["passed"] is False
    assert payload["failures"] == ["invariant violated"]
