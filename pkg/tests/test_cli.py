import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maslovcount import cli
from maslovcount.cli import emit_config, format_complex, main, parse_complex, parse_config, parse_list
from maslovcount.errors import ContractViolation, IntegrationStall

GAP_WINDOW = ["--system", "schrodinger_gap", "--lambda1", "0.1282", "--lambda2", "0.1382"]


@pytest.mark.parametrize(
    "text, value",
    [("1+2i", 1 + 2j), ("-0.5-1.25i", -0.5 - 1.25j), ("3", 3), ("i", 1j), ("-i", -1j), ("2j", 2j), (" 1 - i ", 1 - 1j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(ContractViolation):
        parse_complex("one")
    with pytest.raises(ContractViolation):
        parse_complex("")


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
@settings(max_examples=100)
def test_complex_round_trip(z):
    assert parse_complex(format_complex(z)) == z


def test_parse_list_forms():
    assert parse_list("[1, 0]") == (1, 0)
    assert parse_list("0.5,0.25i") == (0.5, 0.25j)
    assert parse_list("[[1, 0]; [0, 1]]") == (1, 0, 0, 1)


CONFIG = """
[system]
name = hydrogen_radial
gamma = 4

[spectral]
lambda0 = 0+1i
lambda1 = -5
lambda2 = -0.375

[boundary]
endpoint = a
beta_a = 0.2952-1.4663i

[tolerances]
ode = 1e-11

[output]
seed = 3
"""


def test_config_round_trip_is_canonical():
    cfg = parse_config(CONFIG)
    assert cfg.system == "hydrogen_radial"
    assert cfg.params == {"gamma": "4"}
    assert cfg.lambda1 == -5.0
    assert cfg.seed == 3
    text = emit_config(cfg)
    assert parse_config(text) == cfg
    assert emit_config(parse_config(text)) == text


def test_config_rejects_unknown_keys():
    with pytest.raises(ContractViolation):
        parse_config("[spectral]\nlambda9 = 1\n")
    with pytest.raises(ContractViolation):
        parse_config("[colour]\nx = 1\n")


def test_emit_config_flag(capsys):
    assert main(["count", "--system", "schrodinger_gap", "--lambda1", "-0.2", "--emit-config"]) == 0
    out = capsys.readouterr().out
    assert "[system]\nname = schrodinger_gap" in out
    assert "lambda1 = -0.2" in out


def test_count_exit_zero_and_deterministic_csv(tmp_path, capsys):
    first, second = tmp_path / "one", tmp_path / "two"
    assert main(["count", *GAP_WINDOW, "--out", str(first)]) == 0
    assert main(["count", *GAP_WINDOW, "--out", str(second)]) == 0
    out = capsys.readouterr().out
    assert "count: 1" in out
    names = sorted(p.name for p in first.glob("*.csv"))
    assert "conjugate_points.csv" in names and "eigenphases.csv" in names
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_classify_hydrogen(tmp_path, capsys):
    assert main(["classify", "--system", "hydrogen_radial", "--endpoint", "a", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "limit-circle" in out
    assert (tmp_path / "classify.txt").exists()


def test_contract_violation_exit_two(capsys):
    assert main(["count", "--system", "schrodinger_gap", "--lambda1", "0.3", "--lambda2", "0.1"]) == 2
    assert capsys.readouterr().err.startswith("error: ContractViolation:")
    assert main(["classify", "--system", "nonesuch"]) == 2


def test_numerical_error_exit_three(monkeypatch, capsys):
    def stalled(cfg):
        raise IntegrationStall("step size underflow")

    monkeypatch.setitem(cli.HANDLERS, "count", stalled)
    assert main(["count", "--system", "schrodinger_gap"]) == 3
    assert "error: IntegrationStall: step size underflow" in capsys.readouterr().err


def test_validate_pass_and_fail(capsys):
    assert main(["validate", "--system", "schrodinger_gap"]) == 0
    args = ["validate", "--system", "custom_expression", "--param", "q=0", "--param", "w=0", "--param", "b=5"]
    assert main(args) == 1


def test_propagate_reports_small_drift(tmp_path, capsys):
    args = ["propagate", "--system", "hydrogen_radial", "--lambda0", "0.5+1i", "--xmax", "3", "--out", str(tmp_path)]
    assert main(args) == 0
    out = capsys.readouterr().out
    drift = float(next(line for line in out.splitlines() if "drift" in line).split(":")[-1])
    assert math.isfinite(drift) and drift <= 1e-8
    assert (tmp_path / "fundamental.csv").exists()
