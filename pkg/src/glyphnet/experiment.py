"""Per-letter accuracy/epoch table, confusion matrix and similar-letter report.

Training and evaluation are separate steps (:func:`train_models`,
:func:`evaluate`) so the CLI can persist models in between;
:func:`run_experiment` chains them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import mlp
from .errors import EmptyDataset, MissingLetter, WrongRowCount
from .features import PipelineConfig, extract_features
from .persistence import LETTERS, ModelEntry, ModelSet
from .rng import mix

MODES = ("multiclass", "per-letter")
SIMILARITY_GROUPS: tuple[tuple[str, ...], ...] = (("c", "e"), ("i", "j", "l", "r"), ("u", "v"))

# Reported per-letter results the table layout mirrors: (epochs, % accuracy).
REPORTED_TABLE = {
    "a": (294, 94.0), "b": (321, 83.0), "c": (587, 71.0), "d": (282, 88.0),
    "e": (548, 64.0), "f": (254, 85.0), "g": (247, 89.0), "h": (263, 92.0),
    "i": (658, 72.0), "j": (599, 73.0), "k": (300, 91.0), "l": (652, 71.0),
    "m": (456, 86.0), "n": (398, 82.0), "o": (356, 94.0), "p": (264, 88.0),
    "q": (287, 82.0), "r": (669, 70.0), "s": (202, 88.0), "t": (252, 79.0),
    "u": (458, 80.0), "v": (488, 77.0), "w": (511, 94.0), "x": (341, 91.0),
    "y": (268, 71.0), "z": (296, 90.0),
}
REPORTED_AVERAGE = 82.5


@dataclass(frozen=True)
class PerLetterResult:
    letter: str
    n_train: int
    n_test: int
    epochs: int
    accuracy: float  # percent


@dataclass(frozen=True)
class ResultTable:
    rows: tuple[PerLetterResult, ...]
    runs: int

    def __post_init__(self):
        if len(self.rows) != 26 or [r.letter for r in self.rows] != list(LETTERS):
            raise WrongRowCount("a result table has one row per letter a-z, in order")

    @property
    def average(self) -> float:
        return average_accuracy([r.accuracy for r in self.rows])


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    counts: np.ndarray  # counts[true, predicted], 26 x 26

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class GroupRate:
    letters: tuple[str, ...]
    errors: int  # off-diagonal counts among group members
    total: int  # evaluated samples whose true letter is in the group
    rate: float


@dataclass(frozen=True)
class SimilarityReport:
    groups: tuple[GroupRate, ...]
    overall_errors: int
    overall_total: int
    overall_rate: float


def average_accuracy(values: Sequence[float]) -> float:
    values = list(values)
    if len(values) != 26:
        raise WrongRowCount(f"expected 26 accuracies, got {len(values)}")
    return math.fsum(values) / 26


def confusion_matrix(pairs: Iterable[tuple[str, str]]) -> ConfusionMatrix:
    counts = np.zeros((26, 26), dtype=np.int64)
    for true, pred in pairs:
        counts[LETTERS.index(true), LETTERS.index(pred)] += 1
    return ConfusionMatrix(counts)


def _rate(errors: int, total: int) -> float:
    return errors / total if total else 0.0


def similarity_report(matrix: ConfusionMatrix,
                      groups: Sequence[Sequence[str]] = SIMILARITY_GROUPS) -> SimilarityReport:
    counts = matrix.counts
    rates = []
    for group in groups:
        idx = [LETTERS.index(g) for g in group]
        block = counts[np.ix_(idx, idx)]
        errors = int(block.sum() - np.trace(block))
        total = int(counts[idx].sum())
        rates.append(GroupRate(tuple(group), errors, total, _rate(errors, total)))
    total = int(counts.sum())
    errors = total - int(np.trace(counts))
    return SimilarityReport(tuple(rates), errors, total, _rate(errors, total))


def _half_up(total: int, n: int) -> int:
    # round(total / n) with halves going up, in exact integer arithmetic
    return (2 * total + n) // (2 * n)


def train_models(X, y, config: mlp.TrainConfig = mlp.TrainConfig(), mode: str = "multiclass",
                 runs: int = 10, progress: Callable[[str], None] | None = None) -> ModelSet:
    """Train ``runs`` independent repetitions on feature rows X with labels y (0..25).

    Run ``r`` uses seed ``mix(config.seed, r)``; per-letter networks inside a run
    use ``mix(run_seed, letter_index)``.
    """
    mode = mode.replace("_", "-")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyDataset("no training samples")
    entries = []
    for r in range(runs):
        run_seed = mix(config.seed, r)
        if mode == "multiclass":
            cfg = _with_seed(config, run_seed)
            net = mlp.init_network(mlp.MULTICLASS_TOPOLOGY, cfg)
            net, report = mlp.train_arrays(net, X, np.eye(26)[y], cfg)
            entries.append(ModelEntry(r, None, report.epochs_run, report.stop_reason, report.final_mean_loss, net))
            if progress:
                progress(f"run {r}: {_describe(report)}")
            continue
        for i, letter in enumerate(LETTERS):
            cfg = _with_seed(config, mix(run_seed, i))
            net = mlp.init_network(mlp.PER_LETTER_TOPOLOGY, cfg)
            net, report = mlp.train_arrays(net, X, (y == i).astype(np.float64)[:, None], cfg)
            entries.append(ModelEntry(r, letter, report.epochs_run, report.stop_reason, report.final_mean_loss, net))
            if progress:
                progress(f"run {r} letter {letter}: {_describe(report)}")
    return ModelSet(mode, runs, tuple(entries))


def _with_seed(config: mlp.TrainConfig, seed: int) -> mlp.TrainConfig:
    return mlp.TrainConfig(config.learning_rate, config.max_epochs, config.tolerance,
                           config.init_mode, config.update_mode, seed)


def _describe(report: mlp.TrainReport) -> str:
    return f"epochs={report.epochs_run} loss={report.final_mean_loss:.6f} stop={report.stop_reason}"


def predict_run(models: ModelSet, run: int, X) -> np.ndarray:
    """Predicted label indices for feature rows X using the networks of one run."""
    entries = models.networks_for_run(run)
    if not entries:
        raise ValueError(f"model set has no run {run}")
    X = np.asarray(X, dtype=np.float64)
    if models.mode == "multiclass":
        scores = mlp.forward(entries[0].network, X)[-1]
    else:
        by_letter = {e.letter: e.network for e in entries}
        scores = np.column_stack([mlp.forward(by_letter[l], X)[-1][:, 0] for l in LETTERS])
    # argmax takes the first maximum, i.e. ties go to the lowest letter index
    return np.argmax(scores, axis=1)


def _check_letters(y_train, y_test) -> None:
    if len(y_train) == 0 or len(y_test) == 0:
        raise EmptyDataset("need both training and test samples")
    for i, letter in enumerate(LETTERS):
        if not np.any(y_train == i) or not np.any(y_test == i):
            raise MissingLetter(f"letter {letter!r} lacks training or test samples")


def evaluate(predict: Callable[[np.ndarray, int], Sequence[int]], X_test, y_test, n_train: Sequence[int],
             runs: int, epochs: Sequence[int] = (0,) * 26) -> tuple[ResultTable, ConfusionMatrix]:
    """Score ``predict(X_test, run)`` for every run and build the table.

    ``n_train`` and ``epochs`` give the per-letter training-sample and
    (already averaged) epoch columns.
    """
    X_test = np.asarray(X_test, dtype=np.float64)
    y_test = np.asarray(y_test, dtype=np.int64)
    counts = np.zeros((26, 26), dtype=np.int64)
    for r in range(runs):
        pred = np.asarray(predict(X_test, r), dtype=np.int64)
        np.add.at(counts, (y_test, pred), 1)
    n_test = np.bincount(y_test, minlength=26)
    rows = []
    for i, letter in enumerate(LETTERS):
        evaluated = int(n_test[i]) * runs
        acc = 100.0 * int(counts[i, i]) / evaluated if evaluated else 0.0
        rows.append(PerLetterResult(letter, int(n_train[i]), int(n_test[i]), int(epochs[i]), acc))
    return ResultTable(tuple(rows), runs), ConfusionMatrix(counts)


def epochs_column(models: ModelSet, runs: int) -> list[int]:
    """Per-letter epochs averaged over the first ``runs`` runs, rounded half up."""
    used = [e for e in models.entries if e.run < runs]
    if models.mode == "multiclass":
        value = _half_up(sum(e.epochs for e in used), runs)
        return [value] * 26
    return [_half_up(sum(e.epochs for e in used if e.letter == l), runs) for l in LETTERS]


def evaluate_models(models: ModelSet, X_test, y_test, n_train: Sequence[int],
                    runs: int | None = None) -> tuple[ResultTable, ConfusionMatrix]:
    runs = models.runs if runs is None else runs
    if not 1 <= runs <= models.runs:
        raise ValueError(f"model set holds {models.runs} run(s); cannot evaluate {runs}")
    return evaluate(lambda X, r: predict_run(models, r, X), X_test, y_test, n_train, runs,
                    epochs_column(models, runs))


def corpus_features(corpus, pipeline: PipelineConfig = PipelineConfig()):
    """(split, label index, feature bits) per sample, in corpus order."""
    return [(s.split, LETTERS.index(s.label), extract_features(s.image, pipeline)) for s in corpus.samples]


def run_experiment(corpus, config: mlp.TrainConfig = mlp.TrainConfig(), mode: str = "multiclass",
                   runs: int = 10, pipeline: PipelineConfig = PipelineConfig(),
                   predictor: Callable[[np.ndarray, int], Sequence[int]] | None = None
                   ) -> tuple[ResultTable, ConfusionMatrix]:
    """Extract features once, train ``runs`` repetitions, evaluate on the test split.

    ``predictor(X_test, run)`` replaces training entirely when given (the
    epochs column is then 0); it exists so the bookkeeping can be tested
    against known answers.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    rows = corpus_features(corpus, pipeline)
    if not rows:
        raise EmptyDataset("corpus is empty")
    split = np.array([r[0] for r in rows])
    y = np.array([r[1] for r in rows], dtype=np.int64)
    X = np.array([r[2] for r in rows], dtype=np.float64)
    train, test = split == "train", split == "test"
    _check_letters(y[train], y[test])
    n_train = np.bincount(y[train], minlength=26)
    if predictor is not None:
        return evaluate(predictor, X[test], y[test], n_train, runs)
    models = train_models(X[train], y[train], config, mode, runs)
    return evaluate_models(models, X[test], y[test], n_train, runs)
