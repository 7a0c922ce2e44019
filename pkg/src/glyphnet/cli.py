"""``glyphnet`` command line: gen, extract, train, eval, predict, gradcheck.

Exit codes: 0 success, 1 usage error, 2 input/format error, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiment, mlp, persistence, report, synthgen
from .errors import ConfigError, EmptyImage, GlyphnetError
from .features import GridSpec, PipelineConfig, bits_to_str, extract_features
from .persistence import LETTERS

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path, data: bytes) -> None:
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _pipeline(args) -> PipelineConfig:
    try:
        return PipelineConfig(args.threshold, args.size, GridSpec(args.grid, args.grid, args.min_pixels))
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


# -- commands ----------------------------------------------------------------


def cmd_gen(args) -> int:
    try:
        params = synthgen.PerturbationParams(
            args.rotation_max, args.shear_max, args.scale_jitter,
            args.translate_max, args.dilation_steps, args.noise_rate,
        )
        spec = synthgen.CorpusSpec(args.train_per_letter, args.test_per_letter, args.seed, params)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    corpus = synthgen.generate_corpus(spec)
    out = Path(args.out)
    for sample in corpus.samples:
        _write(out / sample.relative_path, persistence.write_pgm(sample.image))
    _write(out / "manifest.csv", persistence.write_manifest(corpus.manifest()))
    print(f"wrote {len(corpus.samples)} samples to {out}")
    return EXIT_OK


def cmd_extract(args) -> int:
    config = _pipeline(args)
    if config.grid.size != persistence.N_FEATURES:
        raise UsageError(f"the feature file format holds {persistence.N_FEATURES} features; use --grid 5")
    root = Path(args.in_dir)
    try:
        manifest = persistence.read_manifest(_read(root / "manifest.csv"))
    except GlyphnetError as exc:
        raise InputError(f"{root / 'manifest.csv'}: {exc}") from None
    rows = []
    for entry in manifest:
        path = root / entry.relative_path
        try:
            bits = extract_features(persistence.parse_pgm(_read(path)), config)
        except EmptyImage:
            raise InputError(f"{path}: blank image (no ink after binarize and clean)") from None
        except GlyphnetError as exc:
            raise InputError(f"{path}: {exc}") from None
        rows.append((entry.split, entry.label, bits))
    _write(args.out, persistence.write_split_features(rows))
    print(f"wrote {len(rows)} feature rows to {args.out}")
    return EXIT_OK


def _load_features(path):
    try:
        rows = persistence.read_split_features(_read(path))
    except (GlyphnetError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    split = np.array([r[0] for r in rows])
    y = np.array([LETTERS.index(r[1]) for r in rows], dtype=np.int64)
    X = np.array([r[2] for r in rows], dtype=np.float64).reshape(len(rows), persistence.N_FEATURES)
    return split, X, y


def cmd_train(args) -> int:
    try:
        config = mlp.TrainConfig(args.lr, args.max_epochs, args.tol, args.init, args.update, args.seed)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    split, X, y = _load_features(args.features)
    train = split == "train"
    if not train.any():
        raise InputError(f"{args.features}: no rows with split=train")
    models = experiment.train_models(X[train], y[train], config, args.mode, args.runs, progress=print)
    _write(args.out, persistence.save_model_set(models))
    print(f"wrote {len(models.entries)} network(s) to {args.out}")
    return EXIT_OK


def _load_models(path) -> persistence.ModelSet:
    try:
        return persistence.load_model_set(_read(path))
    except (GlyphnetError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _check_inputs(models: persistence.ModelSet, width: int) -> None:
    for e in models.entries:
        if e.network.n_inputs != width:
            raise InputError(f"model expects {e.network.n_inputs} inputs, features have {width}")
        expected = 26 if models.mode == "multiclass" else 1
        if e.network.n_outputs != expected:
            raise InputError(f"{models.mode} model needs {expected} output(s), got {e.network.n_outputs}")


def cmd_eval(args) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    models = _load_models(args.model)
    if args.runs > models.runs:
        raise InputError(f"{args.model} holds {models.runs} run(s); --runs {args.runs} requested")
    split, X, y = _load_features(args.features)
    _check_inputs(models, X.shape[1])
    test = split == "test"
    n_train = np.bincount(y[split == "train"], minlength=26)
    missing = [LETTERS[i] for i in range(26) if not np.any(y[test] == i)]
    if missing:
        raise InputError(f"{args.features}: no test rows for letter(s) {','.join(missing)}")
    table, matrix = experiment.evaluate_models(models, X[test], y[test], n_train, args.runs)
    similarity = experiment.similarity_report(matrix)
    if args.report == "csv":
        sys.stdout.write(report.table_csv(table))
    else:
        sys.stdout.write(report.render_table(table, similarity))
    if args.out_dir:
        try:
            report.write_report_dir(args.out_dir, table, matrix, similarity)
        except OSError as exc:
            raise InputError(f"cannot write report to {args.out_dir}: {exc}") from None
    return EXIT_OK


def cmd_predict(args) -> int:
    config = _pipeline(args)
    models = _load_models(args.model)
    _check_inputs(models, config.grid.size)
    try:
        bits = extract_features(persistence.parse_pgm(_read(args.image)), config)
    except EmptyImage:
        raise InputError(f"{args.image}: blank image (no ink after binarize and clean)") from None
    except GlyphnetError as exc:
        raise InputError(f"{args.image}: {exc}") from None
    entries = models.networks_for_run(0)
    x = bits.astype(np.float64)
    if models.mode == "multiclass":
        _, scores = mlp.predict(entries[0].network, x)
    else:
        by_letter = {e.letter: e.network for e in entries}
        scores = np.array([mlp.predict(by_letter[l], x)[1][0] for l in LETTERS])
    print(LETTERS[int(np.argmax(scores))])
    print(f"features {bits_to_str(bits)}")
    for letter, score in zip(LETTERS, scores):
        print(f"{letter} {score:.6f}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    if not args.eps > 0:
        raise UsageError("--eps must be > 0")
    err = mlp.gradient_check(mlp.MULTICLASS_TOPOLOGY, args.seed, args.eps)
    verdict = "ok" if err <= args.tol else "FAILED"
    print(f"max relative error {err:.3e} (tolerance {args.tol:g}): {verdict}")
    return EXIT_OK if err <= args.tol else EXIT_VERIFY


# -- parser ------------------------------------------------------------------


def _add_pipeline_flags(p) -> None:
    p.add_argument("--threshold", type=int, default=128, help="binarization threshold (default 128)")
    p.add_argument("--size", type=int, default=50, help="standard side in pixels (default 50)")
    p.add_argument("--grid", type=int, default=5, help="grid rows and columns (default 5)")
    p.add_argument("--min-pixels", type=int, default=1, help="ink pixels for a cell to read as 1 (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="glyphnet", description="Handwritten alphabet recognition with a from-scratch MLP.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic corpus of PGM images")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--train-per-letter", type=int, default=20)
    p.add_argument("--test-per-letter", type=int, default=5)
    defaults = synthgen.PerturbationParams()
    p.add_argument("--rotation-max", type=float, default=defaults.rotation_max, help="degrees")
    p.add_argument("--shear-max", type=float, default=defaults.shear_max)
    p.add_argument("--scale-jitter", type=float, default=defaults.scale_jitter)
    p.add_argument("--translate-max", type=float, default=defaults.translate_max, help="pixels")
    p.add_argument("--dilation-steps", type=int, default=defaults.dilation_steps)
    p.add_argument("--noise-rate", type=float, default=defaults.pixel_noise_rate)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("extract", help="extract 25-bit features for every manifest row")
    p.add_argument("--in", dest="in_dir", required=True, help="corpus directory with manifest.csv")
    p.add_argument("--out", required=True, help="feature CSV to write")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train networks on the split=train rows")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--mode", choices=experiment.MODES, default="multiclass")
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--tol", type=float, default=0.005)
    p.add_argument("--init", choices=mlp.INIT_MODES, default="symmetric")
    p.add_argument("--update", choices=mlp.UPDATE_MODES, default="per-sample")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--runs", type=int, default=10, help="independent repetitions (default 10)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="per-letter accuracy table on the split=test rows")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--report", choices=("table", "csv"), default="table")
    p.add_argument("--out-dir", help="also write CSV files and PNG figures here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="classify one PGM image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gradcheck", help="compare backprop against finite differences")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"glyphnet {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"glyphnet {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
