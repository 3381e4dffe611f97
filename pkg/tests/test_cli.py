import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hybridzeta import cli
from hybridzeta.errors import MissedZeroError
from hybridzeta.zeta_eval import load_zero_table


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def records(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def meta(text):
    return dict(ln[2:].split(": ", 1) for ln in text.splitlines() if ln.startswith("# "))


def test_rmt_det_pure(capsys):
    code, out, _ = run(["rmt", "--N", "2", "--k", "1", "--mode", "det"], capsys)
    assert code == 0
    rec = records(out)
    assert rec[0]["mode"] == "det" and float(rec[0]["value"]) == pytest.approx(3.0)


def test_rmt_all_mc_within_3_sigma(capsys):
    code, out, _ = run(["rmt", "--mode", "all", "--N", "8", "--k", "1", "--X", "100",
                        "--samples", "100000"], capsys)
    assert code == 0
    rec = {r["mode"]: r for r in records(out)}
    assert abs(float(rec["mc"]["value"]) - float(rec["det"]["value"])) < 3 * float(rec["mc"]["stderr"])
    assert {"mc/det", "mc/predict", "det/predict"} <= set(rec)


def test_rmt_same_seed_byte_identical(capsys):
    argv = ["rmt", "--N", "4", "--k", "0.5", "--X", "50", "--samples", "20000", "--seed", "9"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b
    _, c, _ = run(argv[:-1] + ["10"], capsys)
    assert c != a


def test_rmt_bad_k_exit_2(capsys):
    code, _, err = run(["rmt", "--k", "-0.6", "--mode", "det"], capsys)
    assert code == 2 and "k" in err


def test_products_examples(capsys):
    _, out, _ = run(["products", "--what", "barnes", "--k", "2"], capsys)
    assert float(records(out)[0]["value"]) == pytest.approx(1 / 12, rel=1e-10)
    _, out, _ = run(["products", "--what", "a", "--k", "1"], capsys)
    assert float(records(out)[0]["value"]) == pytest.approx(1.0, abs=1e-12)
    _, out, _ = run(["products", "--what", "a", "--k", "2"], capsys)
    assert float(records(out)[0]["value"]) == pytest.approx(0.607927, abs=1e-6)


def test_products_records_carry_reference(capsys):
    _, out, _ = run(["products", "--what", "mertens", "--what", "F", "--X", "100"], capsys)
    rec = records(out)
    assert [r["what"] for r in rec] == ["mertens", "mertens-ratio", "F"]
    assert all(r["reference"] for r in rec)


def test_products_domain_error(capsys):
    code, _, _ = run(["products", "--what", "barnes", "--k", "-1"], capsys)
    assert code == 2
    code, _, _ = run(["products", "--what", "a", "--sigma", "0.3"], capsys)
    assert code == 2


def test_zeros_first_three(capsys, tmp_path):
    code, out, _ = run(["zeros", "--from", "10", "--to", "30"], capsys)
    assert code == 0
    vals = [float(x) for x in out.splitlines() if not x.startswith("#")]
    assert vals == pytest.approx([14.134725141734, 21.022039638772, 25.010857580146], abs=1e-9)
    path = tmp_path / "z.txt"
    assert cli.main(["zeros", "--from", "10", "--to", "30", "--out", str(path)]) == 0
    table = load_zero_table(path)
    assert list(table.ordinates) == pytest.approx(vals, abs=1e-11)


def test_zeros_reversed_exit_2(capsys):
    code, _, _ = run(["zeros", "--from", "30", "--to", "10"], capsys)
    assert code == 2


def test_zeros_missed_exit_4(capsys, monkeypatch):
    import hybridzeta.zeta_eval as ze

    def boom(*a, **kw):
        raise MissedZeroError("short by one", window=(10, 30), found=2, expected=3)

    monkeypatch.setattr(ze, "find_zeros", boom)
    code, _, err = run(["zeros", "--from", "10", "--to", "30"], capsys)
    assert code == 4 and "missed" in err


def test_flag_error_exit_2(capsys):
    code, _, _ = run(["moments", "--grid-density", "lots"], capsys)
    assert code == 2
    code, _, _ = run(["nonsense"], capsys)
    assert code == 2


def test_moments_k0(capsys):
    code, out, _ = run(["moments", "--k", "0", "--T", "1000"], capsys)
    rec = records(out)[0]
    assert code == 0 and float(rec["value"]) == 1.0 and float(rec["ratio"]) == 1.0


def test_moments_zeta_prediction_field(capsys):
    from hybridzeta.moments import second_moment_target

    _, out, _ = run(["moments", "--k", "1", "--T", "2000", "--target", "zeta"], capsys)
    rec = records(out)[0]
    assert float(rec["prediction"]) == pytest.approx(second_moment_target(2000.0), rel=1e-11)


def test_moments_splitting_record(capsys):
    code, out, _ = run(["moments", "--k", "1", "--T", "1e4", "--X", "log", "--target", "splitting"],
                       capsys)
    rec = records(out)
    assert code == 0 and rec[0]["target"] == "splitting"
    assert 0.5 < float(rec[0]["ratio"]) < 1.5
    assert [r["target"] for r in rec[1:]] == ["zeta", "P", "zeta_over_P"]


def test_moments_k2_splitting_gated(capsys):
    code, _, err = run(["moments", "--k", "2", "--T", "1e4", "--X", "10", "--target", "splitting"],
                       capsys)
    assert code == 2 and "long-running" in err


def test_json_mirror(capsys):
    _, out, _ = run(["products", "--what", "barnes", "--k", "1", "--format", "json"], capsys)
    doc = json.loads(out)
    assert doc["meta"]["seed"] == cli.DEFAULT_SEED
    assert doc["records"][0]["value"] == pytest.approx(1.0)


def test_metadata_block(capsys):
    _, out, _ = run(["products", "--what", "barnes", "--k", "1"], capsys)
    m = meta(out)
    assert {"command", "seed", "version"} <= set(m)
    assert m["seed"] == str(cli.DEFAULT_SEED)


def test_config_file_overridden_by_flags(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# defaults\nk = 2\nwhat = barnes\n")
    _, out, _ = run(["products", "--config", str(conf)], capsys)
    assert float(records(out)[0]["value"]) == pytest.approx(1 / 12)
    _, out, _ = run(["products", "--config", str(conf), "--k", "1"], capsys)
    assert float(records(out)[0]["value"]) == pytest.approx(1.0)
    _, out, _ = run(["products", "--config", str(conf), "--what", "a"], capsys)
    assert [r["what"] for r in records(out)] == ["a"]
    conf.write_text("bogus = 1\n")
    code, _, _ = run(["products", "--config", str(conf)], capsys)
    assert code == 2


def test_threads_env(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli.parse(["rmt"]).threads == 3
    assert cli.parse(["rmt", "--threads", "2"]).threads == 2


def test_threads_do_not_change_output(capsys):
    argv = ["rmt", "--N", "3", "--k", "1", "--X", "50", "--samples", "30000", "--mode", "mc"]
    _, a, _ = run(argv + ["--threads", "1"], capsys)
    _, b, _ = run(argv + ["--threads", "3"], capsys)
    strip = lambda s: [ln for ln in s.splitlines() if not ln.startswith("# command")]
    assert strip(a) == strip(b)


def test_hybrid_missing_zero_file_exit_3(capsys, tmp_path):
    code, _, err = run(["hybrid", "--t0", "1000", "--zeros", str(tmp_path / "none.txt")], capsys)
    assert code == 3 and err


def test_hybrid_high_needs_long_running(capsys):
    code, _, _ = run(["hybrid", "--t0", "auto:zero-index=10^12"], capsys)
    assert code == 2


def test_hybrid_default_layout(tmp_path):
    out = tmp_path / "fig.csv"
    proc = subprocess.run([sys.executable, "-m", "hybridzeta.cli", "hybrid", "--span", "5",
                           "--samples", "1000", "--X", "log", "--X", "1000", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    text = out.read_text()
    m = meta(text)
    rec = records(text)
    assert len(rec) == 1000
    Xs = [float(v) for v in m["X"].split()]
    labels = [f"{X:g}" for X in Xs]
    assert list(rec[0]) == ["x", "abs_zeta"] + [f"abs_{q}@{lab}" for lab in labels for q in ("P", "Z", "PZ")]
    assert Xs[0] == pytest.approx(math.log(float(m["t0"])))
    assert Xs[1] == 1000.0
    assert m["zero_provenance"] == "computed"


def test_hybrid_ingested_table(tmp_path, capsys):
    path = tmp_path / "z.txt"
    assert cli.main(["zeros", "--from", "900", "--to", "1100", "--out", str(path)]) == 0
    capsys.readouterr()
    code, out, _ = run(["hybrid", "--t0", "1000", "--span", "2", "--samples", "50", "--zeros", str(path),
                        "--X", "20"], capsys)
    assert code == 0
    assert len(records(out)) == 50
    assert meta(out)["zero_provenance"] == "ingested"
