"""Logistic feedforward network with a flat parameter encoding."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MODEL_FORMAT_HEADER = "swarmnet-model v1"

# Open-interval bounds for the activation: saturated outputs are nudged off
# 0.0 and 1.0 so downstream error terms never collapse to exact endpoints.
_LOWEST = np.nextafter(0.0, 1.0)
_HIGHEST = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class Topology:
    """Layer widths: input size, one or more hidden sizes, output size."""

    input_count: int
    hidden_sizes: tuple[int, ...]
    output_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_sizes", tuple(self.hidden_sizes))
        if len(self.hidden_sizes) == 0:
            raise ValueError("topology needs at least one hidden layer")
        for size in self.layer_sizes:
            if not isinstance(size, (int, np.integer)) or size < 1:
                raise ValueError(f"layer sizes must be positive integers, got {self.layer_sizes}")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_count, *self.hidden_sizes, self.output_count)


def flat_dimension(topology: Topology) -> int:
    """Parameter count: one weight per connection plus one bias per non-input neuron."""
    sizes = topology.layer_sizes
    return sum((src + 1) * dst for src, dst in zip(sizes, sizes[1:]))


def logistic(x):
    """Numerically stable 1 / (1 + exp(-x)); saturates inside the open unit interval."""
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    np.clip(out, _LOWEST, _HIGHEST, out=out)
    return float(out) if out.ndim == 0 else out


class Network:
    """Fully connected feedforward network with logistic units everywhere.

    Each layer is stored as one matrix of shape ``(destinations, sources + 1)``
    whose last column holds the bias weights. The flat encoding concatenates
    the row-major entries of every layer matrix, so vector order is layer by
    layer, destination neuron by destination neuron, with the bias weight last
    within each destination's block.
    """

    def __init__(self, topology: Topology, layers) -> None:
        sizes = topology.layer_sizes
        expected = [(dst, src + 1) for src, dst in zip(sizes, sizes[1:])]
        layers = list(layers)
        if len(layers) != len(expected):
            raise ValueError(f"expected {len(expected)} layer matrices, got {len(layers)}")
        frozen = []
        for matrix, shape in zip(layers, expected):
            arr = np.array(matrix, dtype=float)
            if arr.shape != shape:
                raise ValueError(f"layer matrix shape {arr.shape} does not match topology slot {shape}")
            arr.flags.writeable = False
            frozen.append(arr)
        self.topology = topology
        self.layers = tuple(frozen)

    @classmethod
    def random(cls, topology: Topology, seed, low: float = -1.0, high: float = 1.0) -> "Network":
        """Network with every weight and bias drawn uniformly from [low, high)."""
        rng = np.random.default_rng(seed)
        return cls.from_vector(topology, rng.uniform(low, high, flat_dimension(topology)))

    @classmethod
    def from_vector(cls, topology: Topology, values) -> "Network":
        vec = np.asarray(values, dtype=float).ravel()
        if vec.size != flat_dimension(topology):
            raise ValueError(
                f"weight vector has {vec.size} values, topology {topology.layer_sizes} needs "
                f"{flat_dimension(topology)}"
            )
        sizes = topology.layer_sizes
        layers = []
        offset = 0
        for src, dst in zip(sizes, sizes[1:]):
            block = dst * (src + 1)
            layers.append(vec[offset : offset + block].reshape(dst, src + 1))
            offset += block
        return cls(topology, layers)

    def to_vector(self) -> np.ndarray:
        # ravel order of each (dst, src + 1) matrix matches the documented layout
        return np.concatenate([matrix.ravel() for matrix in self.layers])

    def forward(self, features):
        """Output activations for one sample (1-D input) or a batch (2-D input)."""
        x = np.asarray(features, dtype=float)
        single = x.ndim == 1
        a = np.atleast_2d(x)
        if a.ndim != 2 or a.shape[1] != self.topology.input_count:
            raise ValueError(
                f"expected {self.topology.input_count} features per sample, got shape {x.shape}"
            )
        if not np.all(np.isfinite(a)):
            raise ValueError("features must be finite")
        for matrix in self.layers:
            a = logistic(a @ matrix[:, :-1].T + matrix[:, -1])
        return a[0] if single else a

    def forward_trace(self, features) -> list[np.ndarray]:
        """Per-layer activations for one sample, input first and output last."""
        x = np.asarray(features, dtype=float)
        if x.ndim != 1 or x.size != self.topology.input_count:
            raise ValueError(
                f"expected a single sample of {self.topology.input_count} features, got shape {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        activations = [x]
        a = x
        for matrix in self.layers:
            a = logistic(matrix[:, :-1] @ a + matrix[:, -1])
            activations.append(a)
        return activations


def mean_squared_error(network: Network, features, targets) -> float:
    """Sum of squared output errors over a sample set, divided by the sample count."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    t = np.asarray(targets, dtype=float)
    if t.ndim == 1:
        t = t.reshape(-1, 1)
    if x.shape[0] != t.shape[0]:
        raise ValueError(f"{x.shape[0]} samples but {t.shape[0]} targets")
    if x.shape[0] == 0:
        raise ValueError("sample set is empty")
    out = network.forward(x)
    return float(np.sum((out - t) ** 2) / x.shape[0])


def save_model(network: Network, path) -> None:
    """Write a model file: header line, layer sizes line, then one weight per line."""
    sizes = ",".join(str(s) for s in network.topology.layer_sizes)
    lines = [MODEL_FORMAT_HEADER, sizes]
    lines.extend(f"{value:.17g}" for value in network.to_vector())
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_model(path) -> Network:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0].strip() != MODEL_FORMAT_HEADER:
        raise ValueError(f"unsupported model file: expected header {MODEL_FORMAT_HEADER!r}")
    if len(lines) < 2:
        raise ValueError("model file is missing the layer sizes line")
    try:
        sizes = [int(part) for part in lines[1].split(",")]
    except ValueError as exc:
        raise ValueError(f"bad layer sizes line {lines[1]!r}") from exc
    if len(sizes) < 3:
        raise ValueError("layer sizes line must list input, hidden, and output widths")
    topology = Topology(sizes[0], tuple(sizes[1:-1]), sizes[-1])
    values = []
    for number, line in enumerate(lines[2:], start=3):
        text = line.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError as exc:
            raise ValueError(f"line {number}: not a weight value: {text!r}") from exc
    return Network.from_vector(topology, np.array(values))
