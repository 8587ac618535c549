"""Strict and tolerant accuracy models, error metrics, and report formatting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import ClassLabel, Dataset
from .network import Network

TOLERANCE_BAND = 0.1
BAND_EPSILON = 1e-9

TOLERANT_NOTE = (
    "tolerant assignment consults the true label before snapping, so it is a "
    "nearness scoring rule, not a deployable classifier"
)


def assign_strict(raw: float) -> ClassLabel:
    """Nearest class target on the tenths grid, halves away from zero, clamped to A..E."""
    index = int(math.floor(raw * 10.0 + 0.5))
    return ClassLabel(min(max(index, ClassLabel.A.value), ClassLabel.E.value))


def assign_tolerant(raw: float, target: ClassLabel) -> ClassLabel:
    """Snap to the true class when the raw output is within the tolerance band."""
    if abs(raw - target.target) <= TOLERANCE_BAND + BAND_EPSILON:
        return target
    return assign_strict(raw)


@dataclass(frozen=True)
class Prediction:
    raw: float
    target: ClassLabel
    strict: ClassLabel
    tolerant: ClassLabel

    @classmethod
    def from_raw(cls, raw: float, target: ClassLabel) -> "Prediction":
        return cls(float(raw), target, assign_strict(raw), assign_tolerant(raw, target))

    def assigned(self, mode: str) -> ClassLabel:
        if mode == "strict":
            return self.strict
        if mode == "tolerant":
            return self.tolerant
        raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed [actual class, assigned class] in A..E order."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.counts, dtype=int)
        size = len(ClassLabel)
        if arr.shape != (size, size):
            raise ValueError(f"confusion matrix must be {size}x{size}, got {arr.shape}")
        if (arr < 0).any():
            raise ValueError("confusion matrix counts must be non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def diagonal_total(self) -> int:
        return int(np.trace(self.counts))

    def to_lists(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.counts]

    def format_text(self) -> str:
        grades = [label.grade for label in ClassLabel]
        width = max(5, *(len(str(v)) for v in self.counts.ravel()))
        lines = ["actual \\ assigned".ljust(18) + "".join(g.rjust(width) for g in grades)]
        for label, row in zip(ClassLabel, self.counts):
            lines.append(label.grade.ljust(18) + "".join(str(v).rjust(width) for v in row))
        return "\n".join(lines)


@dataclass(frozen=True)
class EvaluationReport:
    mode: str
    correct: int  # samples whose assigned class equals the actual class
    incorrect: int
    mae: float  # mean |10 * raw - class code|
    rmse: float
    mae_raw: float  # same errors on the (0, 1) output scale
    rmse_raw: float
    matrix: ConfusionMatrix

    @property
    def total(self) -> int:
        return self.correct + self.incorrect

    @property
    def accuracy_percent(self) -> float:
        return 100.0 * self.correct / self.total

    @property
    def error_percent(self) -> float:
        return 100.0 * self.incorrect / self.total

    def to_json_dict(self) -> dict:
        record = {
            "mode": self.mode,
            "samples": self.total,
            "correct": self.correct,
            "incorrect": self.incorrect,
            "accuracy_percent": round(self.accuracy_percent, 2),
            "error_percent": round(self.error_percent, 2),
            "mae": round(self.mae, 4),
            "rmse": round(self.rmse, 4),
            "mae_raw_scale": round(self.mae_raw, 4),
            "rmse_raw_scale": round(self.rmse_raw, 4),
            "confusion_matrix": self.matrix.to_lists(),
        }
        if self.mode == "tolerant":
            record["note"] = TOLERANT_NOTE
        return record


def report_from_predictions(predictions, mode: str) -> EvaluationReport:
    predictions = list(predictions)
    if not predictions:
        raise ValueError("no predictions to evaluate")
    counts = np.zeros((len(ClassLabel), len(ClassLabel)), dtype=int)
    correct = 0
    for prediction in predictions:
        assigned = prediction.assigned(mode)
        counts[prediction.target.value - 1, assigned.value - 1] += 1
        if assigned is prediction.target:
            correct += 1
    errors = np.array([10.0 * p.raw - p.target.value for p in predictions])
    mae = float(np.mean(np.abs(errors)))
    rmse = float(np.sqrt(np.mean(errors**2)))
    return EvaluationReport(
        mode=mode,
        correct=correct,
        incorrect=len(predictions) - correct,
        mae=mae,
        rmse=rmse,
        mae_raw=mae / 10.0,
        rmse_raw=rmse / 10.0,
        matrix=ConfusionMatrix(counts),
    )


def predictions_for(network: Network, dataset: Dataset) -> list[Prediction]:
    if network.topology.output_count != 1:
        raise ValueError("grade evaluation needs a single-output network")
    if dataset.n_features != network.topology.input_count:
        raise ValueError(
            f"dataset has {dataset.n_features} features, network expects "
            f"{network.topology.input_count}"
        )
    raw = network.forward(dataset.features)[:, 0]
    return [Prediction.from_raw(value, label) for value, label in zip(raw, dataset.labels)]


def evaluate(network: Network, dataset: Dataset, mode: str) -> EvaluationReport:
    """Score a network's raw outputs against the dataset labels under one accuracy model."""
    if mode not in ("strict", "tolerant"):
        raise ValueError(f"unknown mode {mode!r}")
    return report_from_predictions(predictions_for(network, dataset), mode)


@dataclass(frozen=True)
class ComparisonRecord:
    strict_accuracy: float
    tolerant_accuracy: float
    difference: float

    def to_json_dict(self) -> dict:
        return {
            "strict_accuracy_percent": round(self.strict_accuracy, 2),
            "tolerant_accuracy_percent": round(self.tolerant_accuracy, 2),
            "difference_percent": round(self.difference, 2),
            "note": TOLERANT_NOTE,
        }


def compare_models(strict_report: EvaluationReport, tolerant_report: EvaluationReport) -> ComparisonRecord:
    """Accuracy comparison of the two models over the same predictions."""
    if strict_report.total != tolerant_report.total:
        raise ValueError(
            f"sample counts differ: {strict_report.total} vs {tolerant_report.total}"
        )
    if strict_report.mode != "strict" or tolerant_report.mode != "tolerant":
        raise ValueError("expected one strict report and one tolerant report, in that order")
    strict_acc = strict_report.accuracy_percent
    tolerant_acc = tolerant_report.accuracy_percent
    if tolerant_acc < strict_acc:
        raise ValueError(
            "tolerant accuracy fell below strict accuracy; the reports cannot "
            "describe the same predictions"
        )
    return ComparisonRecord(strict_acc, tolerant_acc, tolerant_acc - strict_acc)


def format_results_table(rows) -> str:
    """Aligned text table: one row per (phase label, report)."""
    header = f"{'Phase':<12}{'Mode':<10}{'CCNI':>6}{'CCI (%)':>10}{'ICNI':>6}{'ICI (%)':>10}{'MAE':>9}{'RMSE':>9}"
    lines = [header]
    for phase, report in rows:
        lines.append(
            f"{phase:<12}{report.mode:<10}{report.correct:>6}"
            f"{report.accuracy_percent:>10.2f}{report.incorrect:>6}"
            f"{report.error_percent:>10.2f}{report.mae:>9.4f}{report.rmse:>9.4f}"
        )
    return "\n".join(lines)
