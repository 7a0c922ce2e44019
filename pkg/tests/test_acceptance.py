"""Acceptance criteria, one test per criterion.

Every test records a ``PASS``/``FAIL`` line (printed immediately and again in
the terminal summary). The desk-scale criteria drive the real command line in
a temporary directory.
"""

import contextlib
import csv
import io
import struct
import time

import numpy as np
import pytest

from glyphnet import experiment, mlp, persistence
from glyphnet.cli import main
from glyphnet.features import extract_features
from glyphnet.imaging import thin
from glyphnet.rng import SplitMix64
from glyphnet.synthgen import reference_glyph

from conftest import CRITERIA


@contextlib.contextmanager
def criterion(name):
    try:
        yield
    except BaseException as exc:
        line = f"FAIL  {name}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        print(line)
        CRITERIA.append(line)
        raise
    line = f"PASS  {name}"
    print(line)
    CRITERIA.append(line)


def _run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    assert code == 0, f"glyphnet {argv[0]} exited {code}"
    return out


def _pipeline(root, capsys, init="symmetric"):
    """gen -> extract -> train -> eval with default flags; returns (stdout of eval, seconds)."""
    start = time.perf_counter()
    _run(["gen", "--out", root / "corpus", "--seed", 42, "--train-per-letter", 20, "--test-per-letter", 5], capsys)
    _run(["extract", "--in", root / "corpus", "--out", root / "features.csv"], capsys)
    _run(["train", "--features", root / "features.csv", "--out", root / "model.txt", "--init", init], capsys)
    text = _run(["eval", "--model", root / "model.txt", "--features", root / "features.csv",
                 "--runs", 10, "--out-dir", root / "report"], capsys)
    (root / "report" / "table.txt").write_text(text)
    return text, time.perf_counter() - start


def _table_rows(text):
    lines = text.splitlines()
    return [ln.split() for ln in lines[2:28]]


def _average(text):
    line = next(ln for ln in text.splitlines() if ln.startswith("Average % Recognition Accuracy:"))
    return float(line.split(":")[1].split()[0])


def _check_report(text):
    rows = _table_rows(text)
    assert [r[0] for r in rows] == list(persistence.LETTERS), "table must list a..z"
    for r in rows:
        assert len(r) == 5 and 0.0 <= float(r[4]) <= 100.0
    assert "(runs: 10)" in text
    for group in ("c,e", "i,j,l,r", "u,v", "overall"):
        assert group in text, f"similarity group {group} missing"


@pytest.fixture(scope="module")
def desk_runs():
    # filled by the desk-scale test so the determinism check can reuse its outputs
    return {}


def test_published_table_average():
    with criterion("published-table arithmetic: average of the 26 reported accuracies is exactly 82.5"):
        values = [experiment.REPORTED_TABLE[l][1] for l in persistence.LETTERS]
        assert values == [94, 83, 71, 88, 64, 85, 89, 92, 72, 73, 91, 71, 86, 82,
                          94, 88, 82, 70, 88, 79, 80, 77, 94, 91, 71, 90]
        assert experiment.average_accuracy(values) == 82.5 == experiment.REPORTED_AVERAGE


def test_non_reproducibility_statement():
    # Informational: the original per-letter epochs and accuracies come from an
    # unavailable handwriting set, so nothing below compares against them.
    with criterion("non-reproducibility: per-letter reported values are reference data only, never asserted"):
        assert experiment.REPORTED_TABLE["a"] == (294, 94.0)


def test_gradient_fidelity():
    with criterion("gradient fidelity: 100 seeds, max relative error <= 1e-4, under 10 s"):
        start = time.perf_counter()
        worst = max(mlp.gradient_check(mlp.MULTICLASS_TOPOLOGY, seed, 1e-5) for seed in range(100))
        elapsed = time.perf_counter() - start
        print(f"  worst relative error {worst:.3e} in {elapsed:.2f} s")
        assert worst <= 1e-4
        assert elapsed < 10


def test_template_memorization(template_grays):
    with criterion("template memorization: 26/26 within 5000 epochs, under 30 s"):
        start = time.perf_counter()
        X = np.array([extract_features(template_grays[l]) for l in persistence.LETTERS], dtype=np.float64)
        config = mlp.TrainConfig(learning_rate=0.05, max_epochs=5000, tolerance=0.005,
                                 init_mode="symmetric", seed=1)
        net = mlp.init_network(mlp.MULTICLASS_TOPOLOGY, config)
        net, rep = mlp.train_arrays(net, X, np.eye(26), config)
        correct = sum(mlp.predict(net, x)[0] == i for i, x in enumerate(X))
        elapsed = time.perf_counter() - start
        print(f"  {correct}/26 after {rep.epochs_run} epochs ({rep.stop_reason}) in {elapsed:.2f} s")
        assert correct == 26 and rep.epochs_run <= 5000
        assert elapsed < 30


@pytest.mark.slow
def test_desk_scale_experiment(tmp_path, capsys, desk_runs):
    with criterion("desk-scale experiment: full pipeline under 5 min, full table and groups, average >= 60"):
        text, elapsed = _pipeline(tmp_path / "first", capsys)
        desk_runs["first"] = tmp_path / "first"
        with capsys.disabled():
            print("\n" + text + f"  pipeline wall time {elapsed:.1f} s")
        _check_report(text)
        assert elapsed < 300
        assert _average(text) >= 60.0


@pytest.mark.slow
def test_determinism(tmp_path, capsys, desk_runs):
    with criterion("determinism: repeated pipeline gives byte-identical manifest, features, models, reports"):
        first = desk_runs.get("first")
        if first is None:
            first = tmp_path / "first"
            _pipeline(first, capsys)
        second = tmp_path / "second"
        _pipeline(second, capsys)
        compared = ["corpus/manifest.csv", "features.csv", "model.txt", "report/table.txt",
                    "report/results.csv", "report/similarity.csv", "report/confusion.csv",
                    "report/accuracy.png", "report/confusion.png"]
        for rel in compared:
            assert (first / rel).read_bytes() == (second / rel).read_bytes(), f"{rel} differs"
        for p in sorted((first / "corpus").rglob("*.pgm")):
            assert p.read_bytes() == (second / p.relative_to(first)).read_bytes(), f"{p.name} differs"


def _random_binary(rng, h, w, density):
    return (rng.units(h * w) < density).reshape(h, w).astype(np.uint8)


def test_thinning_properties():
    with criterion("thinning: idempotent and a subset on 26 templates plus 1000 random images, under 10 s"):
        start = time.perf_counter()
        images = [reference_glyph(l) for l in persistence.LETTERS]
        rng = SplitMix64(2024)
        for _ in range(1000):
            h = 5 + int(rng.next_unit() * 36)
            w = 5 + int(rng.next_unit() * 36)
            images.append(_random_binary(rng, h, w, 0.2 + 0.6 * rng.next_unit()))
        for img in images:
            once = thin(img)
            assert np.all(once <= img), "skeleton left the foreground"
            assert np.array_equal(thin(once), once), "thinning is not idempotent"
        elapsed = time.perf_counter() - start
        print(f"  {len(images)} images in {elapsed:.2f} s")
        assert elapsed < 10


def _special_network():
    net = mlp.init_network(mlp.MULTICLASS_TOPOLOGY, mlp.TrainConfig(seed=5))
    weights = [w.copy() for w in net.weights]
    biases = [b.copy() for b in net.biases]
    specials = [-0.0, 5e-324, -5e-324, 2.2250738585072014e-308 / 3, 1.7976931348623157e308, 0.1]
    weights[0].flat[:len(specials)] = specials
    biases[2][:3] = [-0.0, 1e-310, -1e-320]
    return mlp.Network(net.topology, tuple(weights), tuple(biases))


def _bits(arrays):
    return [struct.pack(f"<{a.size}d", *a.ravel()) for a in arrays]


def test_round_trips():
    with criterion("round trips: model bit-exact with -0.0 and subnormals; PGM and feature CSV exact"):
        net = _special_network()
        back = persistence.load_model(persistence.save_model(net))
        assert _bits(back.weights) == _bits(net.weights) and _bits(back.biases) == _bits(net.biases)
        assert np.signbit(back.weights[0].flat[0]) and back.weights[0].flat[1] == 5e-324

        entry = persistence.ModelEntry(0, None, 12, "tolerance_met", -0.0, net)
        models = persistence.ModelSet("multiclass", 1, (entry,))
        again = persistence.load_model_set(persistence.save_model_set(models))
        assert _bits(again.entries[0].network.weights) == _bits(net.weights)
        assert np.signbit(again.entries[0].final_loss)

        rng = SplitMix64(77)
        for _ in range(50):
            h, w = 1 + int(rng.next_unit() * 60), 1 + int(rng.next_unit() * 60)
            img = (rng.units(h * w) * 256).astype(np.uint8).reshape(h, w)
            assert np.array_equal(persistence.parse_pgm(persistence.write_pgm(img)), img)

        rows = [(persistence.LETTERS[i % 26], (rng.units(25) < 0.5).astype(np.uint8)) for i in range(100)]
        parsed = persistence.read_features(persistence.write_features(rows))
        assert [l for l, _ in parsed] == [l for l, _ in rows]
        assert all(np.array_equal(a, b) for (_, a), (_, b) in zip(parsed, rows))
        split_rows = [("train" if i % 5 else "test", l, b) for i, (l, b) in enumerate(rows)]
        data = persistence.write_split_features(split_rows)
        assert persistence.write_split_features(persistence.read_split_features(data)) == data


@pytest.mark.slow
def test_init_paper_mode(tmp_path, capsys):
    with criterion("init mode \"paper\": --init paper completes with a valid report (quality not asserted)"):
        text, elapsed = _pipeline(tmp_path, capsys, init="paper")
        with capsys.disabled():
            print(f"\n  --init paper: average {_average(text):.2f}% in {elapsed:.1f} s (documented, not asserted)")
        _check_report(text)
        rows = list(csv.reader(io.StringIO((tmp_path / "report" / "results.csv").read_text())))
        assert len(rows) == 28 and rows[-1][0] == "average"
