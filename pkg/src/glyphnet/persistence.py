"""File formats: PGM, ASCII glyph text, manifest CSV, feature CSV, model files.

All encoders return ``bytes`` and all decoders accept ``bytes`` so callers
choose where data lives. The byte layouts are stable interfaces.
"""

from __future__ import annotations

import csv
import io
import math
import string
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import imaging
from .errors import (
    BadMagic,
    EmptyInput,
    InvalidBit,
    InvalidCharacter,
    InvalidLabel,
    MalformedHeader,
    NonFiniteValue,
    RaggedRows,
    ShapeMismatch,
    TruncatedData,
    UnsupportedMaxval,
    WrongArity,
)
from .mlp import ACTIVATIONS, LayerSpec, Network

LETTERS = string.ascii_lowercase
MODEL_MAGIC = "GLYPHNET-MLP 1"
SET_MAGIC = "GLYPHNET-SET 1"
MANIFEST_HEADER = ("relative_path", "label", "split")
SPLITS = ("train", "test")
N_FEATURES = 25

# -- PGM ---------------------------------------------------------------------

_WS = b" \t\n\r\x0b\x0c"


def _pgm_tokens(data: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WS:
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WS and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise MalformedHeader("PGM header ends prematurely")
        tokens.append(data[start:pos])
    return tokens, pos


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode a P2 or P5 graymap with maxval <= 255 into a uint8 gray image."""
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise MalformedHeader("not a P2/P5 PGM file")
    kind = data[:2]
    try:
        tokens, pos = _pgm_tokens(data, 3, 2)
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MalformedHeader(f"bad PGM header: {exc}") from None
    if width < 1 or height < 1 or maxval < 1:
        raise MalformedHeader(f"invalid PGM dimensions {width}x{height} maxval {maxval}")
    if maxval > 255:
        raise UnsupportedMaxval(f"maxval {maxval} > 255 is not supported")
    n = width * height
    if kind == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or data[pos] not in _WS:
            raise MalformedHeader("missing whitespace after PGM header")
        raster = data[pos + 1:pos + 1 + n]
        if len(raster) < n:
            raise TruncatedData(f"expected {n} raster bytes, got {len(raster)}")
        values = np.frombuffer(raster, dtype=np.uint8).astype(np.int64)
    else:
        fields = data[pos:].split()
        if len(fields) < n:
            raise TruncatedData(f"expected {n} samples, got {len(fields)}")
        try:
            values = np.array([int(f) for f in fields[:n]], dtype=np.int64)
        except ValueError:
            raise MalformedHeader("non-numeric sample in P2 raster") from None
    if values.size and (values.min() < 0 or values.max() > maxval):
        raise MalformedHeader("sample value outside 0..maxval")
    if maxval != 255:
        values = (values * 255 + maxval // 2) // maxval
    return values.astype(np.uint8).reshape(height, width)


def write_pgm(img) -> bytes:
    gray = imaging.as_gray(img)
    h, w = gray.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes()


# -- glyph text --------------------------------------------------------------


def parse_glyph_text(text: str) -> np.ndarray:
    """``#`` = ink, ``.`` = background, one row per line."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise EmptyInput("glyph text is empty")
    width = len(lines[0])
    if width == 0:
        raise EmptyInput("glyph text has an empty first row")
    rows = []
    for i, line in enumerate(lines):
        if len(line) != width:
            raise RaggedRows(f"row {i} has {len(line)} columns, expected {width}")
        bad = set(line) - {"#", "."}
        if bad:
            raise InvalidCharacter(f"row {i} contains {sorted(bad)!r}")
        rows.append([1 if ch == "#" else 0 for ch in line])
    return np.array(rows, dtype=np.uint8)


def format_glyph_text(img) -> str:
    bits = imaging.as_binary(img)
    return "".join("".join("#" if b else "." for b in row) + "\n" for row in bits)


# -- models ------------------------------------------------------------------


def _hex(x: float) -> str:
    return struct.pack(">d", x).hex().upper()


def _unhex(token: str) -> float:
    if len(token) != 16:
        raise ShapeMismatch(f"expected a 16-digit hex real, got {token!r}")
    try:
        x = struct.unpack(">d", bytes.fromhex(token))[0]
    except ValueError:
        raise ShapeMismatch(f"invalid hex real {token!r}") from None
    if not math.isfinite(x):
        raise NonFiniteValue(f"non-finite parameter {token}")
    return x


def _model_lines(net: Network) -> list[str]:
    lines = [MODEL_MAGIC, f"layers {len(net.topology)}"]
    lines += [f"layer {i} {spec.units} {spec.activation}" for i, spec in enumerate(net.topology)]
    for l, (w, b) in enumerate(zip(net.weights, net.biases), start=1):
        rows, cols = w.shape
        lines.append(f"weights {l} {rows} {cols}")
        lines += [" ".join(_hex(float(x)) for x in row) for row in w]
        lines.append(f"biases {l} {b.shape[0]}")
        lines.append(" ".join(_hex(float(x)) for x in b))
    return lines


def save_model(net: Network) -> bytes:
    """Text model file; every real is its IEEE-754 binary64 bit pattern in hex."""
    return ("\n".join(_model_lines(net)) + "\n").encode("ascii")


class _Lines:
    def __init__(self, lines: Sequence[str]):
        self.lines = lines
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.lines)

    def peek(self) -> str | None:
        return None if self.done() else self.lines[self.pos]

    def next(self, what: str) -> str:
        if self.done():
            raise TruncatedData(f"model data ends before {what}")
        line = self.lines[self.pos]
        self.pos += 1
        return line


def _expect(line: str, keyword: str, nargs: int) -> list[str]:
    parts = line.split()
    if len(parts) != nargs + 1 or parts[0] != keyword:
        raise ShapeMismatch(f"expected '{keyword}' line, got {line!r}")
    return parts[1:]


def _ints(parts: Iterable[str], line: str) -> list[int]:
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ShapeMismatch(f"bad integer in {line!r}") from None


def _values(lines: _Lines, count: int, what: str) -> list[float]:
    tokens = lines.next(what).split()
    if len(tokens) != count:
        raise ShapeMismatch(f"{what}: expected {count} values, got {len(tokens)}")
    return [_unhex(t) for t in tokens]


def _read_model(lines: _Lines) -> Network:
    magic = lines.next("magic line").strip()
    if magic != MODEL_MAGIC:
        raise BadMagic(f"expected {MODEL_MAGIC!r}, got {magic!r}")
    line = lines.next("layer count")
    (n_layers,) = _ints(_expect(line, "layers", 1), line)
    if n_layers < 2:
        raise ShapeMismatch("a model needs at least two layers")
    topology = []
    for i in range(n_layers):
        line = lines.next(f"layer {i}")
        idx, units, act = _expect(line, "layer", 3)
        idx, units = _ints((idx, units), line)
        if idx != i or units < 1 or act not in ACTIVATIONS:
            raise ShapeMismatch(f"bad layer line {line!r}")
        topology.append(LayerSpec(units, act))
    weights, biases = [], []
    for l in range(1, n_layers):
        rows, cols = topology[l].units, topology[l - 1].units
        line = lines.next(f"weights {l}")
        got = _ints(_expect(line, "weights", 3), line)
        if got != [l, rows, cols]:
            raise ShapeMismatch(f"expected 'weights {l} {rows} {cols}', got {line!r}")
        w = np.array([_values(lines, cols, f"weights {l} row {r}") for r in range(rows)])
        line = lines.next(f"biases {l}")
        got = _ints(_expect(line, "biases", 2), line)
        if got != [l, rows]:
            raise ShapeMismatch(f"expected 'biases {l} {rows}', got {line!r}")
        b = np.array(_values(lines, rows, f"biases {l}"))
        weights.append(w.reshape(rows, cols))
        biases.append(b)
    return Network(tuple(topology), weights, biases)


def _split_lines(data: bytes) -> list[str]:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        raise BadMagic("model file is not ASCII text") from None
    return [ln for ln in text.splitlines() if ln.strip()]


def load_model(data: bytes) -> Network:
    lines = _Lines(_split_lines(data))
    net = _read_model(lines)
    if not lines.done():
        raise ShapeMismatch(f"unexpected trailing content: {lines.peek()!r}")
    return net


@dataclass(frozen=True)
class ModelEntry:
    """One trained network in a model set, with its training outcome."""

    run: int
    letter: str | None  # None for the shared multiclass network
    epochs: int
    stop_reason: str
    final_loss: float
    network: Network


@dataclass(frozen=True)
class ModelSet:
    mode: str  # "multiclass" or "per-letter"
    runs: int
    entries: tuple[ModelEntry, ...]

    def networks_for_run(self, run: int) -> list[ModelEntry]:
        return [e for e in self.entries if e.run == run]


def save_model_set(models: ModelSet) -> bytes:
    """Container of several model blocks, each preceded by a ``member`` line."""
    lines = [SET_MAGIC, f"mode {models.mode}", f"runs {models.runs}", f"members {len(models.entries)}"]
    for e in models.entries:
        lines.append(
            f"member {e.run} {e.letter or '*'} {e.epochs} {e.stop_reason} {_hex(e.final_loss)}"
        )
        lines += _model_lines(e.network)
    return ("\n".join(lines) + "\n").encode("ascii")


def load_model_set(data: bytes) -> ModelSet:
    """Read a model set; a bare single-model file becomes a one-run multiclass set."""
    raw = _split_lines(data)
    if raw and raw[0].strip() == MODEL_MAGIC:
        net = load_model(data)
        return ModelSet("multiclass", 1, (ModelEntry(0, None, 0, "unknown", math.nan, net),))
    lines = _Lines(raw)
    magic = lines.next("magic line").strip()
    if magic != SET_MAGIC:
        raise BadMagic(f"expected {SET_MAGIC!r} or {MODEL_MAGIC!r}, got {magic!r}")
    (mode,) = _expect(lines.next("mode"), "mode", 1)
    if mode not in ("multiclass", "per-letter"):
        raise ShapeMismatch(f"unknown mode {mode!r}")
    line = lines.next("runs")
    (runs,) = _ints(_expect(line, "runs", 1), line)
    line = lines.next("members")
    (members,) = _ints(_expect(line, "members", 1), line)
    entries = []
    for _ in range(members):
        line = lines.next("member line")
        run, letter, epochs, stop, loss = _expect(line, "member", 5)
        run, epochs = _ints((run, epochs), line)
        if letter != "*" and letter not in LETTERS:
            raise ShapeMismatch(f"bad member letter in {line!r}")
        final_loss = struct.unpack(">d", bytes.fromhex(loss))[0]
        entries.append(
            ModelEntry(run, None if letter == "*" else letter, epochs, stop, final_loss, _read_model(lines))
        )
    if not lines.done():
        raise ShapeMismatch(f"unexpected trailing content: {lines.peek()!r}")
    expected = runs * (26 if mode == "per-letter" else 1)
    if len(entries) != expected:
        raise ShapeMismatch(f"{mode} set with {runs} runs needs {expected} members, got {len(entries)}")
    return ModelSet(mode, runs, tuple(entries))


# -- feature CSV -------------------------------------------------------------

FEATURE_COLUMNS = [f"f{i:02d}" for i in range(N_FEATURES)]


def _bits(fields: Sequence[str], where: str) -> np.ndarray:
    if len(fields) != N_FEATURES:
        raise WrongArity(f"{where}: expected {N_FEATURES} feature fields, got {len(fields)}")
    if any(f not in ("0", "1") for f in fields):
        raise InvalidBit(f"{where}: feature fields must be 0 or 1")
    return np.array([int(f) for f in fields], dtype=np.uint8)


def _label(value: str, where: str) -> str:
    if value not in LETTERS or len(value) != 1:
        raise InvalidLabel(f"{where}: label {value!r} is not a letter a-z")
    return value


def _csv_bytes(header: list[str], rows: Iterable[list[str]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("ascii")


def _csv_rows(data: bytes, header: list[str]) -> list[list[str]]:
    text = data.decode("ascii")
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise WrongArity("feature file is empty")
    if rows[0] != header:
        raise WrongArity(f"unexpected header {','.join(rows[0][:3])}...")
    return rows[1:]


def write_features(rows: Iterable[tuple[str, Sequence[int]]]) -> bytes:
    out = []
    for label, bits in rows:
        bits = [int(b) for b in bits]
        if len(bits) != N_FEATURES:
            raise WrongArity(f"feature vector has {len(bits)} bits, expected {N_FEATURES}")
        out.append([_label(label, "row")] + [str(b) for b in bits])
    return _csv_bytes(["label"] + FEATURE_COLUMNS, out)


def read_features(data: bytes) -> list[tuple[str, np.ndarray]]:
    out = []
    for i, row in enumerate(_csv_rows(data, ["label"] + FEATURE_COLUMNS), start=2):
        where = f"line {i}"
        if len(row) != N_FEATURES + 1:
            raise WrongArity(f"{where}: expected {N_FEATURES + 1} fields, got {len(row)}")
        out.append((_label(row[0], where), _bits(row[1:], where)))
    return out


def write_split_features(rows: Iterable[tuple[str, str, Sequence[int]]]) -> bytes:
    """Feature CSV with a leading ``split`` column (train/test)."""
    out = []
    for split, label, bits in rows:
        if split not in SPLITS:
            raise InvalidLabel(f"split {split!r} is not train/test")
        bits = [int(b) for b in bits]
        if len(bits) != N_FEATURES:
            raise WrongArity(f"feature vector has {len(bits)} bits, expected {N_FEATURES}")
        out.append([split, _label(label, "row")] + [str(b) for b in bits])
    return _csv_bytes(["split", "label"] + FEATURE_COLUMNS, out)


def read_split_features(data: bytes) -> list[tuple[str, str, np.ndarray]]:
    out = []
    for i, row in enumerate(_csv_rows(data, ["split", "label"] + FEATURE_COLUMNS), start=2):
        where = f"line {i}"
        if len(row) != N_FEATURES + 2:
            raise WrongArity(f"{where}: expected {N_FEATURES + 2} fields, got {len(row)}")
        if row[0] not in SPLITS:
            raise InvalidLabel(f"{where}: split {row[0]!r} is not train/test")
        out.append((row[0], _label(row[1], where), _bits(row[2:], where)))
    return out


# -- manifest ----------------------------------------------------------------


@dataclass(frozen=True)
class ManifestRow:
    relative_path: str
    label: str
    split: str


def sample_path(label: str, split: str, index: int) -> str:
    return f"{label}/{split}_{index:03d}.pgm"


def write_manifest(rows: Iterable[ManifestRow]) -> bytes:
    rows = list(rows)
    seen = set()
    for r in rows:
        if r.relative_path in seen:
            raise ShapeMismatch(f"duplicate manifest path {r.relative_path}")
        seen.add(r.relative_path)
    return _csv_bytes(list(MANIFEST_HEADER), ([r.relative_path, r.label, r.split] for r in rows))


def read_manifest(data: bytes) -> list[ManifestRow]:
    rows = [r for r in csv.reader(io.StringIO(data.decode("utf-8"))) if r]
    if not rows or tuple(rows[0]) != MANIFEST_HEADER:
        raise MalformedHeader("manifest must start with 'relative_path,label,split'")
    out, seen = [], set()
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise WrongArity(f"manifest line {i}: expected 3 fields, got {len(row)}")
        path, label, split = row
        _label(label, f"manifest line {i}")
        if split not in SPLITS:
            raise InvalidLabel(f"manifest line {i}: split {split!r} is not train/test")
        if path in seen:
            raise ShapeMismatch(f"manifest line {i}: duplicate path {path}")
        seen.add(path)
        out.append(ManifestRow(path, label, split))
    return out
