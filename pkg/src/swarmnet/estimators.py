"""Scikit-learn style estimators wrapping the core trainers and preprocessing."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import backprop, cfs, data, pso
from .evaluation import assign_strict
from .network import Network, Topology


def _as_matrix(X, allow_nan: bool = False) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D sample matrix, got shape {arr.shape}")
    if not allow_nan and np.isnan(arr).any():
        raise ValueError("input contains missing values")
    if not np.all(np.isfinite(arr) | np.isnan(arr)):
        raise ValueError("input contains infinite values")
    return arr


def _check_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"this {type(estimator).__name__} instance is not fitted yet; call fit first"
        )


class MinMaxNormalizer(BaseEstimator, TransformerMixin):
    """Column min-max scaler: constant columns map to 0, missing cells pass through."""

    def fit(self, X, y=None):
        X = _as_matrix(X, allow_nan=True)
        self.data_min_, self.data_max_ = data.column_bounds(X)
        return self

    def transform(self, X):
        _check_fitted(self, "data_min_")
        X = _as_matrix(X, allow_nan=True)
        return data.apply_minmax(X, self.data_min_, self.data_max_)


class MeanImputer(BaseEstimator, TransformerMixin):
    """Fill missing cells with per-column means of the observed training values."""

    def fit(self, X, y=None):
        X = _as_matrix(X, allow_nan=True)
        self.means_ = data.column_means(X)
        return self

    def transform(self, X):
        _check_fitted(self, "means_")
        X = _as_matrix(X, allow_nan=True)
        return data.fill_missing(X, self.means_)


class CfsFeatureSelector(BaseEstimator, TransformerMixin):
    """Correlation-merit subset selection; transform keeps the chosen columns."""

    def fit(self, X, y):
        X = _as_matrix(X)
        codes = np.array([label.value for label in data.coerce_labels(y)], dtype=float)
        result = cfs.select_features(X, codes)
        self.selected_indices_ = result.indices
        self.merit_ = result.merit
        self.search_trace_ = result.trace
        return self

    def transform(self, X):
        _check_fitted(self, "selected_indices_")
        X = _as_matrix(X, allow_nan=True)
        return X[:, list(self.selected_indices_)]


class _GradePredictorMixin:
    """Shared label handling and prediction for the single-output grade networks."""

    def _store_labels(self, y) -> np.ndarray:
        labels = data.coerce_labels(y)
        self.classes_ = np.unique([label.value for label in labels])
        self._letter_labels = bool(len(y)) and isinstance(next(iter(y)), str)
        return np.array([label.target for label in labels])

    def predict_raw(self, X) -> np.ndarray:
        """Raw network outputs in (0, 1), one per sample."""
        _check_fitted(self, "network_")
        X = _as_matrix(X)
        return self.network_.forward(X)[:, 0]

    def predict(self, X):
        raw = self.predict_raw(X)
        labels = [assign_strict(value) for value in raw]
        if self._letter_labels:
            return np.array([label.grade for label in labels])
        return np.array([label.value for label in labels])


class PsoNeuralClassifier(_GradePredictorMixin, ClassifierMixin, BaseEstimator):
    """Grade classifier whose weights are found by particle swarm search.

    The network has one logistic output trained toward class targets
    code / 10; ``predict`` rounds the raw output to the nearest class.
    """

    def __init__(
        self,
        hidden=(12, 8),
        inertia=0.729,
        cognitive=1.4944,
        social=1.4944,
        particles=24,
        epochs=500,
        exit_error=0.0,
        position_init=(-1.0, 1.0),
        velocity_init=(-0.5, 0.5),
        velocity_clamp=1.0,
        scalar_r=False,
        refine_epochs=0,
        refine_learning_rate=0.3,
        refine_momentum=0.9,
        seed=0,
    ):
        self.hidden = hidden
        self.inertia = inertia
        self.cognitive = cognitive
        self.social = social
        self.particles = particles
        self.epochs = epochs
        self.exit_error = exit_error
        self.position_init = position_init
        self.velocity_init = velocity_init
        self.velocity_clamp = velocity_clamp
        self.scalar_r = scalar_r
        self.refine_epochs = refine_epochs
        self.refine_learning_rate = refine_learning_rate
        self.refine_momentum = refine_momentum
        self.seed = seed

    def fit(self, X, y):
        X = _as_matrix(X)
        targets = self._store_labels(y)
        if X.shape[0] != targets.size:
            raise ValueError(f"{X.shape[0]} samples but {targets.size} labels")
        topology = Topology(X.shape[1], tuple(self.hidden), 1)
        config = pso.PsoConfig(
            inertia=self.inertia,
            cognitive=self.cognitive,
            social=self.social,
            particle_count=self.particles,
            max_epochs=self.epochs,
            exit_error=self.exit_error,
            position_init_range=tuple(self.position_init),
            velocity_init_range=tuple(self.velocity_init),
            velocity_clamp=self.velocity_clamp,
            scalar_r=self.scalar_r,
            seed=self.seed,
        )
        result = pso.pso_train(X, targets, topology, config)
        network = Network.from_vector(topology, result.best_position)
        self.error_trace_ = result.trace
        if self.refine_epochs > 0:
            # optional gradient polish of the swarm's best weights, off by default
            refine = backprop.BpConfig(
                learning_rate=self.refine_learning_rate,
                momentum=self.refine_momentum,
                max_epochs=self.refine_epochs,
                seed=self.seed,
            )
            network, refine_trace = backprop.train_bp(network, X, targets, refine)
            self.refine_trace_ = refine_trace
        self.network_ = network
        return self


class BackpropNeuralClassifier(_GradePredictorMixin, ClassifierMixin, BaseEstimator):
    """Grade classifier trained by per-sample gradient descent with momentum."""

    def __init__(
        self,
        hidden=(12, 8),
        learning_rate=0.3,
        momentum=0.9,
        epochs=500,
        target_error=0.0,
        seed=0,
    ):
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.epochs = epochs
        self.target_error = target_error
        self.seed = seed

    def fit(self, X, y):
        X = _as_matrix(X)
        targets = self._store_labels(y)
        if X.shape[0] != targets.size:
            raise ValueError(f"{X.shape[0]} samples but {targets.size} labels")
        topology = Topology(X.shape[1], tuple(self.hidden), 1)
        init_seed, shuffle_seed = np.random.SeedSequence(self.seed).spawn(2)
        network = Network.random(topology, init_seed)
        config = backprop.BpConfig(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            max_epochs=self.epochs,
            target_error=self.target_error,
            seed=shuffle_seed,
        )
        self.network_, self.trace_ = backprop.train_bp(network, X, targets, config)
        return self
