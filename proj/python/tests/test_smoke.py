import math
import os
import subprocess

import pytest

import trea


def test_encode_round_trip():
    x = trea.encode(0.375, trea.FXP4)
    assert x.raw == 3
    assert trea.decode(x) == 0.375
    with pytest.raises(trea.RangeError):
        trea.encode(1.0, trea.FXP4)


def test_msd_and_multiply():
    w = trea.encode(0.8125, trea.FXP8)
    d = trea.msd_decompose(w, 3)
    assert [t.shift for t in d.terms] == [1, 2, 4]
    assert d.residual_raw == 0
    x = trea.encode(0.5, trea.FXP8)
    p = trea.potq_multiply(x, w, 5)
    assert abs(trea.decode(p) - 0.40625) <= trea.error_bound(x, 5, 7)


def test_fxp4_bound_holds_exhaustively():
    pairs, violations = trea.check_error_bound(trea.FXP4, 3)
    assert pairs == 240
    assert violations == 0


def test_widths_and_cycles():
    assert trea.accumulator_width(4, 9) == 8
    assert trea.kernel_cycles(9, "fxp8") == 9
    assert trea.kernel_cycles(4, "fxp4_simd") == 1
    assert trea.retained_count(3, 3) == 4
    assert trea.piso_latency(0) == 0
    assert trea.piso_latency(10) == 19


def test_activations():
    f = trea.FxPFormat(12, 7)
    assert trea.af_tanh(trea.encode(0.0, f)).raw == 0
    assert trea.decode(trea.af_sigmoid(trea.encode(0.0, f))) == 0.5
    for v in (-3.0, -0.5, 0.25, 2.0):
        assert abs(trea.decode(trea.af_tanh(trea.encode(v, f))) - math.tanh(v)) < 2**-6


def test_metrics():
    assert trea.sfil(100000, 100e6) == pytest.approx(1e-3)
    assert trea.ecpi(1.0, 1e-3) == pytest.approx(1e-3)
    assert trea.nfpci(50, 100, 50, 100) == pytest.approx(trea.nfpci(100, 100, 100, 100) / 4)
    with pytest.raises(trea.DomainError):
        trea.sfil(10, 0.0)


def test_sweep_converges():
    rows = trea.error_sweep(trea.FXP8, 1, 7)
    errs = [r.max_error for r in rows]
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_gate():
    lines, failures = trea.run_check()
    assert failures == 0
    _, failures = trea.run_check(inject_fault=True)
    assert failures > 0


@pytest.mark.skipif("TREA_CLI" not in os.environ, reason="needs the trea executable")
def test_model_from_cli(tmp_path):
    cli = os.environ["TREA_CLI"]
    data = tmp_path / "data.json"
    model = tmp_path / "model.trea"
    subprocess.run([cli, "gen-data", "--out", str(data), "--seed", "3", "--n-train", "80", "--n-test", "20"],
                   check=True)
    subprocess.run([cli, "train", "--data", str(data), "--out", str(model), "--seed", "1", "--epochs", "1"], check=True)
    net = trea.load_model(str(model))
    assert net.layer_count == 3
    frame = [0.1] * net.input_size
    scores, cpfi = trea.simulate(net, frame)
    assert scores == trea.forward_quant(net, frame)
    assert cpfi == trea.cpfi(net)
