"""Rendering of result tables: aligned text, CSV, and matplotlib figures."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .experiment import REPORTED_TABLE, ConfusionMatrix, ResultTable, SimilarityReport
from .persistence import LETTERS

TABLE_COLUMNS = (
    "Alphabet",
    "No. of samples for training",
    "No. of samples for testing",
    "No. of epochs",
    "% Recognition Accuracy",
)


def _row_fields(table: ResultTable) -> list[list[str]]:
    return [[r.letter, str(r.n_train), str(r.n_test), str(r.epochs), f"{r.accuracy:.1f}"] for r in table.rows]


def render_table(table: ResultTable, similarity: SimilarityReport | None = None) -> str:
    rows = [list(TABLE_COLUMNS)] + _row_fields(table)
    widths = [max(len(row[i]) for row in rows) for i in range(len(TABLE_COLUMNS))]
    lines = ["  ".join(f.ljust(w) for f, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    lines.append("")
    lines.append(f"Average % Recognition Accuracy: {table.average:.2f} (runs: {table.runs})")
    if similarity is not None:
        lines.append("")
        lines.extend(render_similarity(similarity))
    return "\n".join(lines) + "\n"


def render_similarity(similarity: SimilarityReport) -> list[str]:
    lines = ["Similar-pattern groups (in-group misclassification rate):"]
    for g in similarity.groups:
        name = ",".join(g.letters)
        lines.append(f"  {name:<9} {g.rate:.4f}  ({g.errors}/{g.total})")
    lines.append(
        f"  {'overall':<9} {similarity.overall_rate:.4f}  "
        f"({similarity.overall_errors}/{similarity.overall_total})"
    )
    return lines


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def table_csv(table: ResultTable) -> str:
    """Same columns as the text table; a final ``average`` row carries the mean."""
    return _csv([list(TABLE_COLUMNS)] + _row_fields(table) + [["average", "", "", "", f"{table.average:.2f}"]])


def similarity_csv(similarity: SimilarityReport) -> str:
    rows = [["group", "errors", "total", "rate"]]
    rows += [[" ".join(g.letters), g.errors, g.total, f"{g.rate:.6f}"] for g in similarity.groups]
    rows.append(["overall", similarity.overall_errors, similarity.overall_total, f"{similarity.overall_rate:.6f}"])
    return _csv(rows)


def confusion_csv(matrix: ConfusionMatrix) -> str:
    rows = [["true\\predicted"] + list(LETTERS)]
    rows += [[letter] + [int(c) for c in matrix.counts[i]] for i, letter in enumerate(LETTERS)]
    return _csv(rows)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 9, "axes.titlesize": 10, "svg.hashsalt": "glyphnet"})
    return plt


def plot_accuracy(table: ResultTable, path: Path) -> None:
    """Bars of per-letter accuracy next to the published table's values."""
    plt = _pyplot()
    x = np.arange(26)
    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.bar(x - 0.2, [r.accuracy for r in table.rows], width=0.4, label="this run", color="#3b6ea5")
    ax.bar(x + 0.2, [REPORTED_TABLE[l][1] for l in LETTERS], width=0.4, label="reported", color="#bbbbbb")
    ax.axhline(table.average, color="#3b6ea5", lw=0.8, ls="--")
    ax.set_xticks(x, list(LETTERS))
    ax.set_ylim(0, 100)
    ax.set_ylabel("% recognition accuracy")
    ax.set_title(f"Per-letter accuracy (average {table.average:.2f}%, runs {table.runs})")
    ax.legend(ncol=2, loc="lower right", bbox_to_anchor=(1.0, 1.0), frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_confusion(matrix: ConfusionMatrix, path: Path) -> None:
    plt = _pyplot()
    counts = matrix.counts
    rows = counts.sum(axis=1, keepdims=True)
    frac = np.divide(counts, rows, out=np.zeros(counts.shape), where=rows > 0)
    fig, ax = plt.subplots(figsize=(5.6, 5))
    im = ax.imshow(frac, cmap="Blues", vmin=0, vmax=1, interpolation="nearest")
    ax.set_xticks(range(26), list(LETTERS))
    ax.set_yticks(range(26), list(LETTERS))
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title("Confusion matrix (row-normalized)")
    fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def write_report_dir(out_dir, table: ResultTable, matrix: ConfusionMatrix,
                     similarity: SimilarityReport) -> list[Path]:
    """Delimited outputs plus figures, all under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in (
        ("results.csv", table_csv(table)),
        ("similarity.csv", similarity_csv(similarity)),
        ("confusion.csv", confusion_csv(matrix)),
    ):
        (out / name).write_text(text)
        written.append(out / name)
    plot_accuracy(table, out / "accuracy.png")
    plot_confusion(matrix, out / "confusion.png")
    return written + [out / "accuracy.png", out / "confusion.png"]
