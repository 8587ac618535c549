"""Inertia-weight particle swarm search over flat parameter vectors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .network import Network, Topology, flat_dimension, mean_squared_error


@dataclass(frozen=True)
class PsoConfig:
    inertia: float = 0.729
    cognitive: float = 1.4944  # pull toward a particle's own best position
    social: float = 1.4944  # pull toward the swarm's best position
    particle_count: int = 24
    max_epochs: int = 500
    exit_error: float = 0.0
    position_init_range: tuple[float, float] = (-1.0, 1.0)
    velocity_init_range: tuple[float, float] = (-0.5, 0.5)
    velocity_clamp: float = 1.0
    scalar_r: bool = False  # one random coefficient per update instead of one per dimension
    seed: int = 0

    def __post_init__(self) -> None:
        if self.particle_count < 2:
            raise ValueError("particle_count must be at least 2")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        for name in ("position_init_range", "velocity_init_range"):
            low, high = getattr(self, name)
            if not low < high:
                raise ValueError(f"{name} must satisfy low < high, got ({low}, {high})")
        if self.velocity_clamp <= 0:
            raise ValueError("velocity_clamp must be positive")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_error: float


@dataclass
class SwarmState:
    particles: list[Particle]
    global_best_position: np.ndarray
    global_best_error: float
    epoch: int


@dataclass(frozen=True)
class PsoResult:
    best_position: np.ndarray
    best_error: float
    trace: tuple[float, ...]  # global best error after init, then after each epoch
    swarm: SwarmState


def update_velocity(particle: Particle, global_best_position, config: PsoConfig, r1, r2):
    """New velocity: inertia term plus seeded pulls toward the two best positions."""
    velocity = (
        config.inertia * particle.velocity
        + config.cognitive * r1 * (particle.best_position - particle.position)
        + config.social * r2 * (global_best_position - particle.position)
    )
    return np.clip(velocity, -config.velocity_clamp, config.velocity_clamp)


def update_position(position, velocity):
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    if position.shape != velocity.shape:
        raise ValueError(f"position shape {position.shape} != velocity shape {velocity.shape}")
    return position + velocity


def minimize(fitness: Callable[[np.ndarray], float], dimension: int, config: PsoConfig) -> PsoResult:
    """Minimize ``fitness`` over real vectors of the given dimension.

    One master seed spawns an independent stream per particle (initial state
    and every random coefficient) plus one stream for the per-epoch visiting
    order, so results do not depend on how evaluations are scheduled. Personal
    and global bests only move on strictly smaller error. The search stops
    before an epoch once the global best error is below ``exit_error``, else
    after ``max_epochs`` epochs.
    """
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    root = np.random.SeedSequence(config.seed)
    children = root.spawn(config.particle_count + 1)
    order_rng = np.random.default_rng(children[-1])
    rngs = [np.random.default_rng(child) for child in children[:-1]]

    pos_low, pos_high = config.position_init_range
    vel_low, vel_high = config.velocity_init_range
    particles: list[Particle] = []
    for rng in rngs:
        position = rng.uniform(pos_low, pos_high, dimension)
        velocity = rng.uniform(vel_low, vel_high, dimension)
        error = float(fitness(position))
        particles.append(Particle(position, velocity, position.copy(), error))

    global_best_error = np.inf
    global_best_position = particles[0].position.copy()
    for particle in particles:
        if particle.best_error < global_best_error:
            global_best_error = particle.best_error
            global_best_position = particle.best_position.copy()

    trace = [global_best_error]
    epoch = 0
    while epoch < config.max_epochs:
        if global_best_error < config.exit_error:
            break
        for index in order_rng.permutation(config.particle_count):
            particle = particles[index]
            rng = rngs[index]
            if config.scalar_r:
                r1 = rng.uniform()
                r2 = rng.uniform()
            else:
                r1 = rng.uniform(size=dimension)
                r2 = rng.uniform(size=dimension)
            particle.velocity = update_velocity(particle, global_best_position, config, r1, r2)
            particle.position = update_position(particle.position, particle.velocity)
            error = float(fitness(particle.position))
            if error < particle.best_error:
                particle.best_error = error
                particle.best_position = particle.position.copy()
            if error < global_best_error:
                global_best_error = error
                global_best_position = particle.position.copy()
        epoch += 1
        trace.append(global_best_error)

    swarm = SwarmState(particles, global_best_position, global_best_error, epoch)
    return PsoResult(global_best_position.copy(), global_best_error, tuple(trace), swarm)


def mse_fitness(features, targets, topology: Topology, position) -> float:
    """Training-set mean squared error of the network encoded by ``position``."""
    return mean_squared_error(Network.from_vector(topology, position), features, targets)


def pso_train(features, targets, topology: Topology, config: PsoConfig) -> PsoResult:
    """Search weight space for the network minimizing training-set error."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("training set is empty")

    def fitness(position: np.ndarray) -> float:
        return mse_fitness(x, targets, topology, position)

    return minimize(fitness, flat_dimension(topology), config)
