import json
import math
from fractions import Fraction

import pytest

from pqfsynth.cli import (EXIT_INVALID, EXIT_OK, EXIT_VERIFICATION,
                          bench_target, fit_cost_model, main, parse_theta)
from pqfsynth.config import SynthConfig

CFG = SynthConfig()


def test_parse_theta_forms():
    assert parse_theta("pi/4") == (Fraction(1, 4), pytest.approx(math.pi / 4))
    assert parse_theta("3*pi/8")[0] == Fraction(3, 8)
    assert parse_theta("-pi/2")[0] == Fraction(-1, 2)
    frac, val = parse_theta("0.25")
    assert frac is None and val == 0.25


def test_parse_theta_rejects_garbage():
    with pytest.raises(Exception):
        parse_theta("two pi")


def test_synth_writes_valid_protocol(tmp_path):
    out = tmp_path / "p.json"
    rc = main(["synth", "--theta", "0.61", "--eps", "1e-8",
               "--basis", "t", "--rounds", "2", "--out", str(out)])
    assert rc == EXIT_OK
    data = json.loads(out.read_text())
    assert data["basis"] == "t"
    assert len(data["rounds"]) == 2
    assert data["expected_cost"] > 0


def test_synth_exact_angle_shortcircuits(tmp_path):
    out = tmp_path / "p.json"
    rc = main(["synth", "--theta", "pi/4", "--eps", "1e-10",
               "--basis", "t", "--out", str(out)])
    assert rc == EXIT_OK
    data = json.loads(out.read_text())
    assert data["rounds"] == []
    assert data["expected_cost"] == 1  # a bare T gate


def test_simulate_roundtrip(tmp_path):
    proto = tmp_path / "p.json"
    main(["synth", "--theta", "0.61", "--eps", "1e-8", "--basis", "v",
          "--rounds", "1", "--out", str(proto)])
    rep = tmp_path / "rep.json"
    rc = main(["simulate", "--protocol", str(proto), "--trials", "2000",
               "--seed", "3", "--out", str(rep)])
    assert rc == EXIT_OK
    r = json.loads(rep.read_text())
    assert r["trials"] == 2000
    assert r["max_distance"] <= 1e-8


def test_simulate_deterministic(tmp_path):
    proto = tmp_path / "p.json"
    main(["synth", "--theta", "0.3", "--eps", "1e-8", "--basis", "t",
          "--rounds", "1", "--out", str(proto)])
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        main(["simulate", "--protocol", str(proto), "--trials", "5000",
              "--seed", "11", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_simulate_rejects_tampered_protocol(tmp_path):
    proto = tmp_path / "p.json"
    main(["synth", "--theta", "0.61", "--eps", "1e-8", "--basis", "t",
          "--rounds", "1", "--out", str(proto)])
    data = json.loads(proto.read_text())
    data["rounds"][0]["circuit"] += " T"
    proto.write_text(json.dumps(data))
    rc = main(["simulate", "--protocol", str(proto), "--trials", "100"])
    assert rc == EXIT_VERIFICATION


def test_invalid_args_exit_code():
    assert main(["synth", "--theta", "nonsense"]) == EXIT_INVALID
    assert main(["synth", "--theta", "0.5", "--eps", "2.0"]) == EXIT_INVALID


def test_selftest_passes(capsys):
    assert main(["selftest"]) == EXIT_OK


def test_bench_csv(tmp_path):
    out = tmp_path / "bench.csv"
    rc = main(["bench", "--basis", "v", "--angles", "4",
               "--eps-list", "1e-6,1e-8,1e-10", "--seed", "1",
               "--out", str(out)])
    assert rc == EXIT_OK
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("#")
    assert "theta" in lines[1]
    data_lines = [l for l in lines[2:] if l and not l.startswith("#")]
    assert len(data_lines) == 12
    assert any(l.startswith("# fit") for l in lines)


def test_bench_target_row_shape():
    row = bench_target(0.47, 1e-8, "pi12", CFG)
    for key in ("theta", "eps", "expected_cost", "p_success", "L_r",
                "candidates_tried", "pslq_iterations", "abs_z",
                "round_cost", "fallback_cost"):
        assert key in row
    assert row["expected_cost"] > 0
    assert 0 < row["p_success"] <= 1


def test_fit_cost_model_recovers_coefficients():
    import random
    rng = random.Random(0)
    eps = [10.0 ** -p for p in range(6, 26, 2)]
    xs = [math.log2(1 / e) for e in eps]
    ys = [1.0 * x + 4.0 * math.log2(x) + 1.187 + rng.uniform(-.1, .1)
          for x in xs]
    a, c, d = fit_cost_model(eps, ys, 2.0)
    assert abs(a - 1.0) < 0.05
    assert abs(c - 4.0) < 0.5
