"""Per-sample gradient training with momentum for logistic feedforward networks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Network, mean_squared_error


@dataclass(frozen=True)
class BpConfig:
    learning_rate: float = 0.3
    momentum: float = 0.9
    max_epochs: int = 500
    target_error: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.target_error < 0:
            raise ValueError("target_error cannot be negative")


@dataclass(frozen=True)
class TrainTrace:
    """Per-epoch training error, number of epochs run, and why training stopped."""

    epoch_errors: tuple[float, ...]
    epochs_run: int
    stop_reason: str  # "max_epochs" or "target_error"


def output_delta(output, desired):
    """Error term of an output neuron: output * (1 - output) * (desired - output)."""
    return output * (1.0 - output) * (desired - output)


def hidden_delta(output, downstream) -> float:
    """Error term of a hidden neuron from its output and downstream (delta, weight) pairs."""
    total = sum(delta * weight for delta, weight in downstream)
    return output * (1.0 - output) * total


def backward_deltas(network: Network, activations, desired) -> list[np.ndarray]:
    """Per-layer error terms for one sample, aligned with ``network.layers``."""
    desired = np.asarray(desired, dtype=float).ravel()
    deltas: list[np.ndarray] = [np.empty(0)] * len(network.layers)
    deltas[-1] = output_delta(activations[-1], desired)
    for layer in reversed(range(len(network.layers) - 1)):
        outgoing = network.layers[layer + 1][:, :-1]  # bias column carries no error back
        x = activations[layer + 1]
        deltas[layer] = x * (1.0 - x) * (outgoing.T @ deltas[layer + 1])
    return deltas


def apply_update(network: Network, deltas, activations, config: BpConfig, previous_changes):
    """One weight update from a single sample's error terms.

    Every weight moves by ``learning_rate * delta * input`` plus ``momentum``
    times the change applied on the previous call; bias weights see a constant
    input of 1. Returns the updated network and the change record to feed back
    in next time.
    """
    new_layers = []
    new_changes = []
    for matrix, delta, inputs, previous in zip(
        network.layers, deltas, activations[:-1], previous_changes
    ):
        with_bias = np.append(inputs, 1.0)
        change = config.learning_rate * np.outer(delta, with_bias) + config.momentum * previous
        new_layers.append(matrix + change)
        new_changes.append(change)
    return Network(network.topology, new_layers), new_changes


def zero_changes(network: Network) -> list[np.ndarray]:
    return [np.zeros_like(matrix) for matrix in network.layers]


def train_bp(network: Network, features, targets, config: BpConfig):
    """Train by per-sample updates over seeded-shuffle epochs.

    Args:
        network: starting network; its weights seed the search.
        features: sample matrix, one row per sample.
        targets: desired outputs, shape (n,) or (n, output_count).
        config: learning rate, momentum, epoch budget, stop threshold, shuffle seed.

    Returns:
        (trained network, TrainTrace). Training stops once the epoch error
        drops to ``target_error`` or below, else after ``max_epochs`` epochs.
    """
    x = np.atleast_2d(np.asarray(features, dtype=float))
    t = np.asarray(targets, dtype=float)
    if t.ndim == 1:
        t = t.reshape(-1, 1)
    if x.shape[0] == 0:
        raise ValueError("training set is empty")
    if x.shape[0] != t.shape[0]:
        raise ValueError(f"{x.shape[0]} samples but {t.shape[0]} targets")
    if x.shape[1] != network.topology.input_count:
        raise ValueError(
            f"samples have {x.shape[1]} features, network expects {network.topology.input_count}"
        )
    if t.shape[1] != network.topology.output_count:
        raise ValueError(
            f"targets have width {t.shape[1]}, network expects {network.topology.output_count}"
        )

    rng = np.random.default_rng(config.seed)
    changes = zero_changes(network)
    errors: list[float] = []
    stop_reason = "max_epochs"
    for _ in range(config.max_epochs):
        for index in rng.permutation(x.shape[0]):
            activations = network.forward_trace(x[index])
            deltas = backward_deltas(network, activations, t[index])
            network, changes = apply_update(network, deltas, activations, config, changes)
        epoch_error = mean_squared_error(network, x, t)
        errors.append(epoch_error)
        if epoch_error <= config.target_error:
            stop_reason = "target_error"
            break
    return network, TrainTrace(tuple(errors), len(errors), stop_reason)
