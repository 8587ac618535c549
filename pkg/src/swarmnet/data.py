"""Tabular appraisal data: schema, grade rules, preprocessing, synthesis, CSV I/O."""

from __future__ import annotations

import csv
import enum
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PRF_FEATURES = tuple(f"PRF{i}" for i in range(1, 12))
CAD_FEATURES = ("CAD1", "CAD2", "CAD3")
FB_FEATURES = tuple(f"FB{i}" for i in range(1, 13))
COMBINED_FEATURES = PRF_FEATURES + CAD_FEATURES + FB_FEATURES

# Reduced column set kept by the shipped feature-selection preset.
REDUCED_FEATURES = (
    "PRF1", "PRF2", "PRF3", "PRF4", "PRF6", "PRF8", "PRF10", "PRF11",
    "CAD1", "CAD2", "CAD3", "FB4", "FB5", "FB10",
)
FEATURE_PRESETS = {"table3": REDUCED_FEATURES}

# Point budget used by the generator for one activity slot; the combined slot
# (third column of the activity group) spans twice this many points.
CAD_UNIT_POINTS = 20.0
_CAD_SCALES = {"CAD1": CAD_UNIT_POINTS, "CAD2": CAD_UNIT_POINTS, "CAD3": 2.0 * CAD_UNIT_POINTS}


def feature_group(name: str) -> str:
    for prefix in ("PRF", "CAD", "FB"):
        if name.startswith(prefix):
            return prefix
    raise ValueError(f"unknown feature group for {name!r}")


class ClassLabel(enum.IntEnum):
    """Final appraisal classes; the numeric code doubles as the network target times ten."""

    A = 1
    B = 2
    C = 3
    D = 4
    E = 5

    @property
    def grade(self) -> str:
        return self.name

    @property
    def target(self) -> float:
        return self.value / 10.0

    @classmethod
    def from_grade(cls, text: str) -> "ClassLabel":
        try:
            return cls[text]
        except KeyError:
            raise ValueError(f"unknown class grade {text!r}") from None


class SubGrade(enum.Enum):
    """Six-step quality scale used by the per-group assessments; A* sits above A."""

    A_STAR = "A*"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"

    @property
    def rank(self) -> int:
        return _SUBGRADE_RANK[self]

    @classmethod
    def from_text(cls, text: str) -> "SubGrade":
        for member in cls:
            if member.value == text:
                return member
        raise ValueError(f"unknown sub-grade {text!r}")


_SUBGRADE_RANK = {member: position for position, member in enumerate(SubGrade)}
_TOP = (SubGrade.A_STAR, SubGrade.A)
_B_OR_BELOW = (SubGrade.B, SubGrade.C, SubGrade.D, SubGrade.E)


@dataclass(frozen=True)
class SubGrades:
    """Per-group grades: activities, feedback, portfolio."""

    cad: SubGrade
    fb: SubGrade
    prf: SubGrade


def final_label(grades: SubGrades):
    """Map the three group grades to a final class by fixed decision rows.

    Rows are checked top down and the first match wins. Returns None when no
    row covers the combination; callers must treat that case explicitly.
    """
    cad, fb, prf = grades.cad, grades.fb, grades.prf
    if cad is SubGrade.A_STAR and fb is SubGrade.A_STAR and prf is SubGrade.A:
        return ClassLabel.A
    if cad in _TOP and fb in _TOP and prf is SubGrade.B:
        return ClassLabel.B
    if cad in _B_OR_BELOW and fb in _B_OR_BELOW and prf in (SubGrade.B, SubGrade.C):
        return ClassLabel.C
    if cad in _TOP and fb in _TOP and prf is SubGrade.D:
        return ClassLabel.C
    if cad in _B_OR_BELOW and fb in _B_OR_BELOW and prf is SubGrade.D:
        return ClassLabel.D
    if cad in _TOP and fb in _TOP and prf is SubGrade.E:
        return ClassLabel.D
    if cad in _B_OR_BELOW and fb in _B_OR_BELOW and prf is SubGrade.E:
        return ClassLabel.E
    return None


def coerce_labels(values) -> tuple[ClassLabel, ...]:
    """Accept labels as ClassLabel members, codes 1..5, or grade letters."""
    labels = []
    for value in values:
        if isinstance(value, ClassLabel):
            labels.append(value)
        elif isinstance(value, str):
            labels.append(ClassLabel.from_grade(value))
        elif isinstance(value, (int, np.integer)):
            labels.append(ClassLabel(int(value)))
        else:
            raise ValueError(f"cannot interpret class label {value!r}")
    return tuple(labels)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus one class label per row; NaN cells mark missing values."""

    feature_names: tuple[str, ...]
    features: np.ndarray
    labels: tuple[ClassLabel, ...]

    def __post_init__(self) -> None:
        names = tuple(self.feature_names)
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        arr = np.array(self.features, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != len(names):
            raise ValueError(f"feature matrix shape {arr.shape} does not match {len(names)} names")
        labels = tuple(self.labels)
        if len(labels) != arr.shape[0]:
            raise ValueError(f"{arr.shape[0]} rows but {len(labels)} labels")
        arr.flags.writeable = False
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "features", arr)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def targets(self) -> np.ndarray:
        return np.array([label.target for label in self.labels])

    def codes(self) -> np.ndarray:
        return np.array([label.value for label in self.labels], dtype=float)

    def class_counts(self) -> dict[ClassLabel, int]:
        counts = {label: 0 for label in ClassLabel}
        for label in self.labels:
            counts[label] += 1
        return counts

    def with_features(self, features) -> "Dataset":
        return Dataset(self.feature_names, features, self.labels)

    def select(self, names) -> "Dataset":
        """Column subset, in the order the names are given."""
        names = tuple(names)
        missing = [name for name in names if name not in self.feature_names]
        if missing:
            raise ValueError(f"dataset has no columns named {missing}")
        indices = [self.feature_names.index(name) for name in names]
        return Dataset(names, self.features[:, indices], self.labels)

    def take(self, indices) -> "Dataset":
        indices = list(indices)
        return Dataset(
            self.feature_names,
            self.features[indices],
            tuple(self.labels[i] for i in indices),
        )


def column_bounds(features, column_names=None):
    """Observed (min, max) per column, ignoring missing cells."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if x.shape[0] < 1:
        raise ValueError("no rows to scan")
    mins, maxs = [], []
    for column in range(x.shape[1]):
        values = x[:, column]
        present = values[~np.isnan(values)]
        if present.size == 0:
            name = column_names[column] if column_names else f"index {column}"
            raise ValueError(f"column {name} has no observed values")
        mins.append(float(present.min()))
        maxs.append(float(present.max()))
    return np.array(mins), np.array(maxs)


def apply_minmax(features, mins, maxs) -> np.ndarray:
    """Rescale columns by recorded bounds; constant columns go to 0, NaN stays NaN."""
    x = np.atleast_2d(np.asarray(features, dtype=float)).copy()
    mins = np.asarray(mins, dtype=float)
    maxs = np.asarray(maxs, dtype=float)
    if x.shape[1] != mins.size or mins.size != maxs.size:
        raise ValueError(f"{x.shape[1]} columns but bounds for {mins.size}/{maxs.size}")
    for column in range(x.shape[1]):
        span = maxs[column] - mins[column]
        if span == 0.0:
            x[:, column] = np.where(np.isnan(x[:, column]), np.nan, 0.0)
        else:
            x[:, column] = (x[:, column] - mins[column]) / span
    return x


def column_means(features, column_names=None) -> np.ndarray:
    """Per-column means over observed values; a fully missing column is an error."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    means = []
    for column in range(x.shape[1]):
        values = x[:, column]
        present = values[~np.isnan(values)]
        if present.size == 0:
            name = column_names[column] if column_names else f"index {column}"
            raise ValueError(f"column {name} has no observed values")
        means.append(float(present.mean()))
    return np.array(means)


def fill_missing(features, means) -> np.ndarray:
    x = np.atleast_2d(np.asarray(features, dtype=float)).copy()
    means = np.asarray(means, dtype=float)
    if x.shape[1] != means.size:
        raise ValueError(f"{x.shape[1]} columns but means for {means.size}")
    mask = np.isnan(x)
    x[mask] = np.take(means, np.nonzero(mask)[1])
    return x


def normalize_minmax(dataset: Dataset):
    """Scale each column to [0, 1] by its observed min and max.

    Constant columns become 0.0 and missing cells stay missing. Returns the
    rescaled dataset and a per-column {name: (min, max)} record so that other
    data can be transformed with the same statistics.
    """
    mins, maxs = column_bounds(dataset.features, dataset.feature_names)
    stats = {
        name: (float(low), float(high))
        for name, low, high in zip(dataset.feature_names, mins, maxs)
    }
    return apply_normalization(dataset, stats), stats


def apply_normalization(dataset: Dataset, stats) -> Dataset:
    """Rescale columns with previously recorded (min, max) statistics, matched by name."""
    missing = [name for name in dataset.feature_names if name not in stats]
    if missing:
        raise ValueError(f"normalization record lacks columns {missing}")
    mins = np.array([stats[name][0] for name in dataset.feature_names])
    maxs = np.array([stats[name][1] for name in dataset.feature_names])
    return dataset.with_features(apply_minmax(dataset.features, mins, maxs))


def impute_mean(dataset: Dataset) -> Dataset:
    """Replace each missing cell with its column's mean over observed values."""
    means = column_means(dataset.features, dataset.feature_names)
    return dataset.with_features(fill_missing(dataset.features, means))


def balance_oversample(dataset: Dataset, target_total: int, seed, required_classes=None) -> Dataset:
    """Grow the dataset to ``target_total`` rows by duplicating seeded-random samples.

    Duplicates go to the smallest classes first, so final class counts are as
    equal as the originals allow (within one of each other when no class
    already exceeds its share). Original rows are always retained.
    """
    counts = {label: n for label, n in dataset.class_counts().items() if n > 0}
    if required_classes is not None:
        absent = [label.grade for label in required_classes if counts.get(label, 0) == 0]
        if absent:
            raise ValueError(f"cannot balance: no samples for class(es) {absent}")
    if not counts:
        raise ValueError("dataset is empty")
    if target_total < dataset.n_samples:
        raise ValueError(
            f"target_total {target_total} is below the current {dataset.n_samples} samples"
        )
    quota = dict(counts)
    for _ in range(target_total - dataset.n_samples):
        smallest = min(quota, key=lambda label: (quota[label], label.value))
        quota[smallest] += 1

    rng = np.random.default_rng(seed)
    extra_indices: list[int] = []
    by_class = {
        label: [i for i, row_label in enumerate(dataset.labels) if row_label is label]
        for label in counts
    }
    for label in sorted(counts, key=lambda l: l.value):
        extra = quota[label] - counts[label]
        if extra > 0:
            extra_indices.extend(rng.choice(by_class[label], size=extra, replace=True).tolist())
    keep = list(range(dataset.n_samples)) + extra_indices
    return dataset.take(keep)


def stratified_split(dataset: Dataset, train_fraction: float = 0.9, seed=0):
    """Seeded stratified partition into (train, test) datasets.

    Per-class training counts follow the largest-remainder rule so the split
    is exact in total and within one sample of proportional per class.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    if dataset.n_samples < 10:
        raise ValueError("need at least 10 samples to split")
    counts = {label: n for label, n in dataset.class_counts().items() if n > 0}
    for label, n in counts.items():
        if n < 2:
            warnings.warn(
                f"class {label.grade} has only {n} sample(s); one side of the split will miss it",
                stacklevel=2,
            )
    target_train = round(dataset.n_samples * train_fraction)
    ideals = {label: counts[label] * train_fraction for label in counts}
    takes = {label: int(np.floor(ideals[label])) for label in counts}
    remainder_rank = sorted(
        counts, key=lambda label: (-(ideals[label] - takes[label]), label.value)
    )
    extras = target_train - sum(takes.values())
    position = 0
    while extras > 0:
        label = remainder_rank[position % len(remainder_rank)]
        if takes[label] < counts[label]:
            takes[label] += 1
            extras -= 1
        position += 1

    rng = np.random.default_rng(seed)
    train_mask = np.zeros(dataset.n_samples, dtype=bool)
    for label in sorted(counts, key=lambda l: l.value):
        indices = np.array([i for i, row in enumerate(dataset.labels) if row is label])
        chosen = rng.permutation(indices)[: takes[label]]
        train_mask[chosen] = True
    train_idx = np.flatnonzero(train_mask)
    test_idx = np.flatnonzero(~train_mask)
    return dataset.take(train_idx), dataset.take(test_idx)


# Lower bound of each sub-grade's band on the group-mean level, best grade first.
DEFAULT_GRADE_THRESHOLDS = (
    (SubGrade.A_STAR, 0.9),
    (SubGrade.A, 0.8),
    (SubGrade.B, 0.7),
    (SubGrade.C, 0.6),
    (SubGrade.D, 0.5),
    (SubGrade.E, 0.0),
)


def grade_from_level(level: float, thresholds=DEFAULT_GRADE_THRESHOLDS) -> SubGrade:
    for grade, bound in thresholds:
        if level >= bound:
            return grade
    return thresholds[-1][0]


def _band(grade: SubGrade, thresholds):
    for position, (candidate, bound) in enumerate(thresholds):
        if candidate is grade:
            high = thresholds[position - 1][1] if position > 0 else np.inf
            return bound, high
    raise ValueError(f"thresholds do not mention grade {grade}")


def derive_subgrades(row, thresholds=DEFAULT_GRADE_THRESHOLDS, feature_names=COMBINED_FEATURES) -> SubGrades:
    """Group grades implied by one raw row: mean level per group against the thresholds.

    Activity columns are point scores, so they are divided by their point
    budgets before averaging; rating columns already live on [0, 1].
    """
    levels = {"PRF": [], "CAD": [], "FB": []}
    for name, value in zip(feature_names, row):
        scale = _CAD_SCALES.get(name, 1.0)
        levels[feature_group(name)].append(value / scale)
    return SubGrades(
        cad=grade_from_level(float(np.mean(levels["CAD"])), thresholds),
        fb=grade_from_level(float(np.mean(levels["FB"])), thresholds),
        prf=grade_from_level(float(np.mean(levels["PRF"])), thresholds),
    )


def _covered_combinations():
    mapping: dict[ClassLabel, list[SubGrades]] = {label: [] for label in ClassLabel}
    for cad in SubGrade:
        for fb in SubGrade:
            for prf in SubGrade:
                grades = SubGrades(cad, fb, prf)
                label = final_label(grades)
                if label is not None:
                    mapping[label].append(grades)
    return {label: tuple(combos) for label, combos in mapping.items()}


_COVERED = _covered_combinations()


def _rating_block(rng, size: int, low: float, high: float) -> np.ndarray:
    # five-step ratings rescaled to [0, 1]: values move on a 0.25 grid
    center = rng.uniform(low, min(high, 1.0))
    values = np.clip(np.round((center + rng.normal(0.0, 0.15, size)) * 4.0) / 4.0, 0.0, 1.0)
    while values.mean() < low:
        values[rng.choice(np.flatnonzero(values < 1.0))] += 0.25
    while values.mean() >= high:
        values[rng.choice(np.flatnonzero(values > 0.0))] -= 0.25
    return values


def _cad_block(rng, low: float, high: float):
    level = rng.uniform(low, min(high, 1.0))
    share = rng.uniform(0.2, 0.8)
    total = level * 2.0 * CAD_UNIT_POINTS
    first = total * share
    second = total - first
    return np.array([first, second, first + second])


def synthesize(
    count: int,
    seed,
    noise_level: float = 0.0,
    missing_rate: float = 0.0,
    thresholds=DEFAULT_GRADE_THRESHOLDS,
) -> Dataset:
    """Generate a labeled raw dataset with the shipped 26-column schema.

    Class targets are stratified up front (all five classes appear, counts
    within one of each other). For each row a covered grade combination of its
    target class is drawn, then group features are sampled so their mean
    levels land in the drawn grades' threshold bands: rating columns on the
    five-step [0, 1] grid, activity columns as non-negative points whose third
    column is the sum of the first two. Rows whose derived grades fail to
    reproduce the target class are regenerated. ``noise_level`` is the scale
    of Gaussian noise added afterwards (labels keep their constructed class),
    and ``missing_rate`` is the probability that any single cell is blanked.
    """
    if count < 10:
        raise ValueError("count must be at least 10")
    if noise_level < 0:
        raise ValueError("noise_level cannot be negative")
    if not 0.0 <= missing_rate < 1.0:
        raise ValueError("missing_rate must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    prf_n, cad_n, fb_n = len(PRF_FEATURES), len(CAD_FEATURES), len(FB_FEATURES)
    base, remainder = divmod(count, len(ClassLabel))
    rows: list[np.ndarray] = []
    labels: list[ClassLabel] = []
    for position, label in enumerate(ClassLabel):
        quota = base + (1 if position < remainder else 0)
        combos = _COVERED[label]
        for _ in range(quota):
            for _attempt in range(1000):
                grades = combos[rng.integers(len(combos))]
                prf = _rating_block(rng, prf_n, *_band(grades.prf, thresholds))
                cad = _cad_block(rng, *_band(grades.cad, thresholds))
                fb = _rating_block(rng, fb_n, *_band(grades.fb, thresholds))
                row = np.concatenate([prf, cad, fb])
                if final_label(derive_subgrades(row, thresholds)) is label:
                    break
            else:
                raise ValueError(
                    f"could not generate class {label.grade} under the given thresholds"
                )
            if noise_level > 0.0:
                row[:prf_n] = np.clip(
                    row[:prf_n] + rng.normal(0.0, noise_level, prf_n), 0.0, 1.0
                )
                fb_start = prf_n + cad_n
                row[fb_start:] = np.clip(
                    row[fb_start:] + rng.normal(0.0, noise_level, fb_n), 0.0, 1.0
                )
                first = max(0.0, row[prf_n] + rng.normal(0.0, noise_level) * CAD_UNIT_POINTS)
                second = max(0.0, row[prf_n + 1] + rng.normal(0.0, noise_level) * CAD_UNIT_POINTS)
                row[prf_n], row[prf_n + 1], row[prf_n + 2] = first, second, first + second
            if missing_rate > 0.0:
                blank = rng.uniform(size=row.size) < missing_rate
                row[blank] = np.nan
            rows.append(row)
            labels.append(label)
    order = rng.permutation(len(rows))
    features = np.array(rows)[order]
    return Dataset(COMBINED_FEATURES, features, tuple(labels[i] for i in order))


def save_csv(dataset: Dataset, path) -> None:
    """Write features plus a trailing ``class`` column; missing cells are empty fields."""
    with open(path, "w", newline="", encoding="ascii") as handle:
        writer = csv.writer(handle)
        writer.writerow([*dataset.feature_names, "class"])
        for row, label in zip(dataset.features, dataset.labels):
            cells = ["" if np.isnan(value) else repr(float(value)) for value in row]
            writer.writerow([*cells, label.grade])


def load_csv(path) -> Dataset:
    with open(path, newline="", encoding="ascii") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty") from None
        if len(header) < 2 or header[-1] != "class":
            raise ValueError(f"{path}: last header column must be 'class'")
        names = tuple(header[:-1])
        rows: list[list[float]] = []
        labels: list[ClassLabel] = []
        for line, cells in enumerate(reader, start=2):
            if len(cells) != len(header):
                raise ValueError(f"{path}: row {line}: expected {len(header)} fields, got {len(cells)}")
            values = []
            for name, cell in zip(names, cells):
                cell = cell.strip()
                if cell == "":
                    values.append(np.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ValueError(f"{path}: row {line}: bad number {cell!r} in column {name}") from None
            try:
                labels.append(ClassLabel.from_grade(cells[-1].strip()))
            except ValueError as exc:
                raise ValueError(f"{path}: row {line}: {exc}") from None
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return Dataset(names, np.array(rows, dtype=float), tuple(labels))


def save_normalization_stats(stats, path) -> None:
    record = {name: [low, high] for name, (low, high) in stats.items()}
    Path(path).write_text(json.dumps(record, indent=2) + "\n", encoding="ascii")


def load_normalization_stats(path):
    record = json.loads(Path(path).read_text(encoding="ascii"))
    return {name: (float(pair[0]), float(pair[1])) for name, pair in record.items()}
