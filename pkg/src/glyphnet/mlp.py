"""Fully connected feed-forward network trained by gradient-descent backprop.

Layer ``l`` computes ``a_l = f_l(W_l @ a_{l-1} + b_l)`` with ``f_l`` one of
logsig, tansig or identity. The loss is half the summed squared error per
sample and the mean of that over a dataset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernel
from .errors import ConfigError, DimensionMismatch, EmptyDataset, InvalidEpsilon
from .rng import SplitMix64, mix

ACTIVATIONS = ("logsig", "tansig", "identity")
ACTIVATION_CODES = {"logsig": _kernel.LOGSIG, "tansig": _kernel.TANSIG, "identity": _kernel.IDENTITY}
INIT_MODES = ("symmetric", "paper")
UPDATE_MODES = ("per-sample", "batch")


def logsig(x):
    return 1.0 / (1.0 + np.exp(-x))


def tansig(x):
    return 2.0 / (1.0 + np.exp(-2.0 * x)) - 1.0


def _identity(x):
    return x


_FORWARD = {"logsig": logsig, "tansig": tansig, "identity": _identity}


def activation_slope(kind: str, y):
    """Derivative of the activation expressed through its output ``y``."""
    if kind == "logsig":
        return y * (1.0 - y)
    if kind == "tansig":
        return 1.0 - y * y
    return np.ones_like(y)


class LayerSpec(NamedTuple):
    units: int
    activation: str


Topology = tuple[LayerSpec, ...]

MULTICLASS_TOPOLOGY: Topology = (
    LayerSpec(25, "identity"),
    LayerSpec(25, "logsig"),
    LayerSpec(25, "tansig"),
    LayerSpec(26, "logsig"),
)
PER_LETTER_TOPOLOGY: Topology = MULTICLASS_TOPOLOGY[:-1] + (LayerSpec(1, "logsig"),)


def validate_topology(topology: Sequence[LayerSpec]) -> Topology:
    topology = tuple(LayerSpec(int(u), str(a)) for u, a in topology)
    if len(topology) < 2:
        raise ConfigError("a network needs an input layer and at least one more layer")
    if topology[0].activation != "identity":
        raise ConfigError("the input layer must use the identity activation")
    for spec in topology:
        if spec.units < 1:
            raise ConfigError("every layer needs at least one unit")
        if spec.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {spec.activation!r}")
    for spec in topology[1:]:
        if spec.activation == "identity":
            raise ConfigError("hidden and output layers must use logsig or tansig")
    return topology


@dataclass(frozen=True, eq=False)
class Network:
    topology: Topology
    weights: list[np.ndarray]  # weights[l-1] has shape (units_l, units_{l-1})
    biases: list[np.ndarray]

    def __post_init__(self):
        validate_topology(self.topology)
        if len(self.weights) != len(self.topology) - 1 or len(self.biases) != len(self.weights):
            raise DimensionMismatch("one weight matrix and bias vector per non-input layer")
        for l, (w, b) in enumerate(zip(self.weights, self.biases), start=1):
            shape = (self.topology[l].units, self.topology[l - 1].units)
            if w.shape != shape or b.shape != (shape[0],):
                raise DimensionMismatch(f"layer {l}: expected {shape} weights, got {w.shape}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l} holds non-finite parameters")

    @property
    def n_inputs(self) -> int:
        return self.topology[0].units

    @property
    def n_outputs(self) -> int:
        return self.topology[-1].units

    def copy(self) -> "Network":
        return Network(self.topology, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def same_bits(self, other: "Network") -> bool:
        if self.topology != other.topology:
            return False
        pairs = list(zip(self.weights, other.weights)) + list(zip(self.biases, other.biases))
        return all(a.tobytes() == b.tobytes() for a, b in pairs)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    max_epochs: int = 1000
    tolerance: float = 0.005
    init_mode: str = "symmetric"
    update_mode: str = "per-sample"
    seed: int = 0

    def __post_init__(self):
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ConfigError("learning_rate must be a finite value > 0")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if not self.tolerance >= 0:
            raise ConfigError("tolerance must be >= 0")
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"init_mode must be one of {INIT_MODES}")
        if self.update_mode not in UPDATE_MODES:
            raise ConfigError(f"update_mode must be one of {UPDATE_MODES}")


class TrainReport(NamedTuple):
    epochs_run: int
    final_mean_loss: float
    stop_reason: str  # "tolerance_met" or "max_epochs"


def init_network(topology: Sequence[LayerSpec], config: TrainConfig = TrainConfig()) -> Network:
    """Draw W_l row-major then b_l for each layer in order from one seeded stream."""
    topology = validate_topology(topology)
    rng = SplitMix64(config.seed)
    offset = 0.0 if config.init_mode == "paper" else -0.5
    weights, biases = [], []
    for prev, spec in zip(topology, topology[1:]):
        w = rng.units(spec.units * prev.units).reshape(spec.units, prev.units) + offset
        b = rng.units(spec.units) + offset
        weights.append(w)
        biases.append(b)
    return Network(topology, weights, biases)


def _as_inputs(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (net.n_inputs,) or x.ndim > 2:
        raise DimensionMismatch(f"expected {net.n_inputs} inputs, got shape {x.shape}")
    return x


def forward(net: Network, x) -> list[np.ndarray]:
    """All layer activations, input first. ``x`` may be one vector or a row per sample."""
    a = _as_inputs(net, x)
    acts = [a]
    for spec, w, b in zip(net.topology[1:], net.weights, net.biases):
        a = _FORWARD[spec.activation](a @ w.T + b)
        acts.append(a)
    return acts


def loss(output, target) -> float:
    output = np.asarray(output, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if output.shape != target.shape:
        raise DimensionMismatch(f"output {output.shape} vs target {target.shape}")
    return 0.5 * float(np.sum((output - target) ** 2))


def mean_loss(net: Network, X, T) -> float:
    out = forward(net, X)[-1]
    T = np.asarray(T, dtype=np.float64)
    if out.shape != T.shape:
        raise DimensionMismatch(f"output {out.shape} vs target {T.shape}")
    return float(np.mean(0.5 * np.sum((out - T) ** 2, axis=1)))


class Gradient(NamedTuple):
    weights: list[np.ndarray]
    biases: list[np.ndarray]


def _backprop_rows(net: Network, X: np.ndarray, T: np.ndarray) -> Gradient:
    """Gradient of the mean loss over the rows of X."""
    acts = forward(net, X)
    if acts[-1].shape != T.shape:
        raise DimensionMismatch(f"output {acts[-1].shape} vs target {T.shape}")
    n = X.shape[0]
    delta = (acts[-1] - T) * activation_slope(net.topology[-1].activation, acts[-1])
    gw, gb = [None] * len(net.weights), [None] * len(net.weights)
    for l in range(len(net.weights), 0, -1):
        gw[l - 1] = delta.T @ acts[l - 1] / n
        gb[l - 1] = delta.sum(axis=0) / n
        if l > 1:
            delta = (delta @ net.weights[l - 1]) * activation_slope(net.topology[l - 1].activation, acts[l - 1])
    return Gradient(gw, gb)


def backprop(net: Network, x, target) -> Gradient:
    """Exact gradient of the per-sample loss for one input vector."""
    x = _as_inputs(net, x)
    t = np.asarray(target, dtype=np.float64)
    if x.ndim != 1 or t.shape != (net.n_outputs,):
        raise DimensionMismatch("backprop takes one input vector and one target vector")
    return _backprop_rows(net, x[None, :], t[None, :])


def gd_step(net: Network, grad: Gradient, learning_rate: float) -> Network:
    if len(grad.weights) != len(net.weights) or len(grad.biases) != len(net.biases):
        raise DimensionMismatch("gradient does not match the network's layer count")
    for p, g in zip(net.weights + net.biases, grad.weights + grad.biases):
        if p.shape != g.shape:
            raise DimensionMismatch(f"gradient shape {g.shape} vs parameter shape {p.shape}")
    return Network(
        net.topology,
        [w - learning_rate * g for w, g in zip(net.weights, grad.weights)],
        [b - learning_rate * g for b, g in zip(net.biases, grad.biases)],
    )


def _flatten(net: Network):
    w_off = np.cumsum([0] + [w.size for w in net.weights])[:-1].astype(np.int64)
    b_off = np.cumsum([0] + [b.size for b in net.biases])[:-1].astype(np.int64)
    W = np.concatenate([w.ravel() for w in net.weights])
    B = np.concatenate(net.biases)
    return W, B, w_off, b_off


def _unflatten(net: Network, W: np.ndarray, B: np.ndarray) -> Network:
    weights, biases, wi, bi = [], [], 0, 0
    for w, b in zip(net.weights, net.biases):
        weights.append(W[wi:wi + w.size].reshape(w.shape).copy())
        biases.append(B[bi:bi + b.size].copy())
        wi += w.size
        bi += b.size
    return Network(net.topology, weights, biases)


def train_arrays(net: Network, X, T, config: TrainConfig = TrainConfig()) -> tuple[Network, TrainReport]:
    """Train on input rows ``X`` and target rows ``T``; see :func:`train`."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    T = np.ascontiguousarray(T, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDataset("training needs at least one sample")
    if X.shape[1] != net.n_inputs or T.shape != (X.shape[0], net.n_outputs):
        raise DimensionMismatch(f"samples {X.shape}/{T.shape} do not fit topology {net.topology}")

    current = net.copy()
    if config.update_mode == "per-sample":
        W, B, w_off, b_off = _flatten(current)
        units = np.array([s.units for s in net.topology], dtype=np.int64)
        kinds = np.array([ACTIVATION_CODES[s.activation] for s in net.topology], dtype=np.int64)

    epochs = 0
    current_loss = mean_loss(current, X, T)
    while True:
        if current_loss <= config.tolerance:
            reason = "tolerance_met"
            break
        if epochs >= config.max_epochs:
            reason = "max_epochs"
            break
        if config.update_mode == "per-sample":
            _kernel.per_sample_epoch(X, T, W, B, w_off, b_off, units, kinds, config.learning_rate)
            current = _unflatten(current, W, B)
        else:
            current = gd_step(current, _backprop_rows(current, X, T), config.learning_rate)
        epochs += 1
        current_loss = mean_loss(current, X, T)
    return current, TrainReport(epochs, current_loss, reason)


def train(net: Network, samples, config: TrainConfig = TrainConfig()) -> tuple[Network, TrainReport]:
    """Gradient descent until the mean loss is <= tolerance or max_epochs pass.

    The mean loss is checked before every epoch, so ``epochs_run`` counts only
    completed epochs. Batch mode takes one step on the mean gradient per epoch;
    per-sample mode takes one step per sample in order.
    """
    samples = list(samples)
    if not samples:
        raise EmptyDataset("training needs at least one sample")
    X = np.array([np.asarray(x, dtype=np.float64) for x, _ in samples])
    T = np.array([np.asarray(t, dtype=np.float64) for _, t in samples])
    return train_arrays(net, X, T, config)


def predict(net: Network, features) -> tuple[int, np.ndarray]:
    """Multiclass: index of the largest output (lowest index on ties).

    Single-output nets answer 1 (positive) when the output is >= 0.5, else 0.
    """
    x = _as_inputs(net, features)
    if x.ndim != 1:
        raise DimensionMismatch("predict takes a single feature vector")
    out = forward(net, x)[-1]
    if net.n_outputs == 1:
        return int(out[0] >= 0.5), out
    return int(np.argmax(out)), out


def relative_error(analytic, numeric) -> np.ndarray:
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(1e-12, np.abs(a) + np.abs(n))


def numeric_gradient(net: Network, x, target, epsilon: float) -> Gradient:
    """Central finite differences of the per-sample loss.

    Every parameter is nudged by +/-epsilon and the loss recomputed from the
    nudged layer onward; all nudges of one layer are evaluated as a batch.
    """
    x = _as_inputs(net, x)
    target = np.asarray(target, dtype=np.float64)
    acts = forward(net, x)
    specs = net.topology

    def losses_from(l, w_batch, b_batch):
        # w_batch: (P, rows, cols), b_batch: (P, rows) -> loss per perturbation
        a = _FORWARD[specs[l].activation](np.einsum("prc,c->pr", w_batch, acts[l - 1]) + b_batch)
        for spec, w, b in zip(specs[l + 1:], net.weights[l:], net.biases[l:]):
            a = _FORWARD[spec.activation](a @ w.T + b)
        return 0.5 * np.sum((a - target) ** 2, axis=1)

    gw, gb = [], []
    for l, (w, b) in enumerate(zip(net.weights, net.biases), start=1):
        for which, p in (("w", w), ("b", b)):
            n = p.size
            diffs = []
            for sign in (1.0, -1.0):
                wb = np.repeat(w[None], n, axis=0)
                bb = np.repeat(b[None], n, axis=0)
                target_batch = (wb if which == "w" else bb).reshape(n, -1)
                target_batch[np.arange(n), np.arange(n)] += sign * epsilon
                diffs.append(losses_from(l, wb, bb))
            g = ((diffs[0] - diffs[1]) / (2.0 * epsilon)).reshape(p.shape)
            (gw if which == "w" else gb).append(g)
    return Gradient(gw, gb)


def gradient_check_case(topology: Sequence[LayerSpec], seed: int):
    """The seeded (network, binary input, one-hot target) triple used by gradient_check."""
    topology = validate_topology(topology)
    net = init_network(topology, TrainConfig(seed=seed))
    rng = SplitMix64(mix(seed, 1))
    x = (rng.units(topology[0].units) < 0.5).astype(np.float64)
    n_out = topology[-1].units
    t = np.zeros(n_out)
    if n_out == 1:
        t[0] = float(rng.next_unit() < 0.5)
    else:
        t[int(rng.next_unit() * n_out)] = 1.0
    return net, x, t


def gradient_check(topology: Sequence[LayerSpec] = MULTICLASS_TOPOLOGY, seed: int = 7,
                   epsilon: float = 1e-5) -> float:
    """Largest relative error between backprop and central differences."""
    if not epsilon > 0:
        raise InvalidEpsilon(f"epsilon must be > 0, got {epsilon}")
    net, x, t = gradient_check_case(topology, seed)
    analytic = backprop(net, x, t)
    numeric = numeric_gradient(net, x, t, epsilon)
    errs = [
        float(relative_error(a, n).max())
        for a, n in zip(analytic.weights + analytic.biases, numeric.weights + numeric.biases)
    ]
    return max(errs)
