"""Gesture classification with a mixture of interaction primitives.

Human and robot trajectories are encoded as ProMP weight vectors over
normalized Gaussian radial basis functions.  One Gaussian component is fit per
intention over the concatenated ``[human | robot]`` weights.  A single
observed human point is classified by the marginal likelihood of each
component, and the robot response is obtained by Gaussian conditioning of the
joint weight distribution on that point.

Weight vectors are laid out per spatial dimension: for a ``D``-dimensional
trajectory, entries ``[d*K:(d+1)*K]`` hold the weights of dimension ``d``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .distributions import CategoricalDistribution, from_log_weights


class ConfigError(ValueError):
    pass


class RankDeficiencyError(ValueError):
    pass


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class BasisConfig:
    """Basis and noise hyperparameters.

    ``width`` is in normalized-time units; ``None`` means 1.2 times the
    spacing between neighbouring centers.
    """

    n_basis: int = 8
    width: Optional[float] = None
    ridge: float = 1e-6
    obs_noise: float = 1e-4
    cov_reg: float = 1e-8

    def __post_init__(self):
        if self.n_basis < 2:
            raise ConfigError(f"need at least 2 basis functions, got {self.n_basis}")
        if self.width is not None and self.width <= 0:
            raise ConfigError("basis width must be positive")
        if self.ridge < 0:
            raise ConfigError("ridge regularizer must be non-negative")
        if self.obs_noise <= 0:
            raise ConfigError("observation noise variance must be positive")
        if self.cov_reg < 0:
            raise ConfigError("covariance regularizer must be non-negative")

    @property
    def centers(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_basis)

    @property
    def h(self) -> float:
        if self.width is not None:
            return self.width
        return 1.2 / (self.n_basis - 1)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        y = np.asarray(self.points, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if t.ndim != 1 or y.shape[0] != t.shape[0]:
            raise ValueError("trajectory needs one point per time stamp")
        if t.size and (t[0] < 0 or t[-1] > 1):
            raise ValueError("trajectory times must lie in [0, 1]")
        if np.any(np.diff(t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", y)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.times.shape[0]


def basis_matrix(times, cfg: BasisConfig) -> np.ndarray:
    """Row-normalized Gaussian RBF activations, shape ``(len(times), K)``."""
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("basis times must lie in [0, 1]")
    act = np.exp(-((t[:, None] - cfg.centers[None, :]) ** 2) / (2.0 * cfg.h**2))
    return act / act.sum(axis=1, keepdims=True)


def block_basis(times, cfg: BasisConfig, dim: int) -> np.ndarray:
    """Basis acting on a stacked ``dim``-dimensional weight vector.

    Shape ``(len(times) * dim, K * dim)``; rows are ordered dimension-major to
    match the weight layout.
    """
    return np.kron(np.eye(dim), basis_matrix(times, cfg))


def fit_weights(traj: Trajectory, cfg: BasisConfig) -> np.ndarray:
    """Ridge least-squares ProMP weights, ``K * D`` entries."""
    phi = basis_matrix(traj.times, cfg)
    k = cfg.n_basis
    if cfg.ridge == 0 and len(traj) < k:
        raise RankDeficiencyError(
            f"{len(traj)} samples cannot determine {k} weights without regularization"
        )
    gram = phi.T @ phi + cfg.ridge * np.eye(k)
    w = np.linalg.solve(gram, phi.T @ traj.points)  # (K, D)
    return w.T.reshape(-1)


def render(weights: np.ndarray, times, cfg: BasisConfig, dim: int) -> Trajectory:
    phi = basis_matrix(times, cfg)
    w = np.asarray(weights, dtype=float).reshape(dim, cfg.n_basis)
    return Trajectory(np.asarray(times, dtype=float), phi @ w.T)


@dataclass(frozen=True)
class InteractionComponent:
    label: int
    mean: np.ndarray
    cov: np.ndarray
    prior: float


@dataclass(frozen=True)
class InteractionMixture:
    components: tuple[InteractionComponent, ...]
    basis: BasisConfig
    human_dim: int
    robot_dim: int

    @property
    def n_human(self) -> int:
        return self.basis.n_basis * self.human_dim

    def __len__(self) -> int:
        return len(self.components)

    def observation_matrix(self, time: float) -> np.ndarray:
        """Map from joint weights to the human position at ``time``."""
        a_h = block_basis([time], self.basis, self.human_dim)
        n_robot = self.basis.n_basis * self.robot_dim
        return np.hstack([a_h, np.zeros((self.human_dim, n_robot))])


@dataclass(frozen=True)
class Demo:
    label: int
    human: Trajectory
    robot: Trajectory


def train_mixture(
    demos: Sequence[Demo], n_intentions: int, cfg: BasisConfig = BasisConfig()
) -> InteractionMixture:
    """Maximum-likelihood mixture with one component per intention."""
    if not demos:
        raise TrainingError("no demonstrations")
    human_dim = demos[0].human.dim
    robot_dim = demos[0].robot.dim
    by_label: dict[int, list[np.ndarray]] = {k: [] for k in range(n_intentions)}
    for demo in demos:
        if demo.label not in by_label:
            raise TrainingError(f"demo label {demo.label} outside 0..{n_intentions - 1}")
        if demo.human.dim != human_dim or demo.robot.dim != robot_dim:
            raise TrainingError("demos disagree on spatial dimensionality")
        by_label[demo.label].append(
            np.concatenate([fit_weights(demo.human, cfg), fit_weights(demo.robot, cfg)])
        )
    missing = [k for k, ws in by_label.items() if not ws]
    if missing:
        raise TrainingError(f"no demonstrations for intentions {missing}")
    short = [k for k, ws in by_label.items() if len(ws) < 2]
    if short:
        raise TrainingError(f"intentions {short} have fewer than 2 demonstrations")

    total = len(demos)
    components = []
    for k in range(n_intentions):
        w = np.asarray(by_label[k])
        mean = w.mean(axis=0)
        centered = w - mean
        cov = centered.T @ centered / w.shape[0] + cfg.cov_reg * np.eye(w.shape[1])
        components.append(InteractionComponent(k, mean, cov, w.shape[0] / total))
    return InteractionMixture(tuple(components), cfg, human_dim, robot_dim)


def _gaussian_logpdf(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> float:
    c = cho_factor(cov, lower=True)
    r = x - mean
    maha = r @ cho_solve(c, r)
    logdet = 2.0 * np.sum(np.log(np.diag(c[0])))
    return float(-0.5 * (maha + logdet + x.shape[0] * np.log(2.0 * np.pi)))


def component_log_likelihoods(mix: InteractionMixture, point, time: float = 1.0) -> np.ndarray:
    """``log pi_k + log N(point; A mu_k, A Sigma_k A^T + obs_noise I)`` per component."""
    if not mix.components:
        raise RuntimeError("mixture has no trained components")
    if not 0.0 <= time <= 1.0:
        raise ValueError("observation time must lie in [0, 1]")
    o = np.asarray(point, dtype=float).reshape(-1)
    if o.shape[0] != mix.human_dim:
        raise ValueError(f"expected a {mix.human_dim}-d observation, got {o.shape[0]}")
    a = mix.observation_matrix(time)
    noise = mix.basis.obs_noise * np.eye(mix.human_dim)
    return np.array(
        [
            np.log(c.prior) + _gaussian_logpdf(o, a @ c.mean, a @ c.cov @ a.T + noise)
            for c in mix.components
        ]
    )


def classify_gesture(mix: InteractionMixture, point, time: float = 1.0) -> CategoricalDistribution:
    """Component responsibilities for one observed human point."""
    return from_log_weights(component_log_likelihoods(mix, point, time))


def condition_weights(
    mix: InteractionMixture, k: int, point, time: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and covariance of component ``k``'s joint weights."""
    if not 0 <= k < len(mix.components):
        raise IndexError(f"component {k} out of range for {len(mix.components)} intentions")
    comp = mix.components[k]
    o = np.asarray(point, dtype=float).reshape(-1)
    a = mix.observation_matrix(time)
    sa = comp.cov @ a.T
    innov_cov = a @ sa + mix.basis.obs_noise * np.eye(mix.human_dim)
    gain = np.linalg.solve(innov_cov, sa.T).T
    mean = comp.mean + gain @ (o - a @ comp.mean)
    cov = comp.cov - gain @ sa.T
    return mean, 0.5 * (cov + cov.T)


def condition_response(
    mix: InteractionMixture,
    k: int,
    point,
    time: float = 1.0,
    grid: Optional[Sequence[float]] = None,
    n_points: int = 50,
) -> Trajectory:
    """Most likely robot trajectory for intention ``k`` given the observed point."""
    mean, _ = condition_weights(mix, k, point, time)
    times = np.linspace(0.0, 1.0, n_points) if grid is None else np.asarray(grid, dtype=float)
    return render(mean[mix.n_human :], times, mix.basis, mix.robot_dim)


def conditioned_human(
    mix: InteractionMixture, k: int, point, time: float = 1.0, n_points: int = 50
) -> Trajectory:
    mean, _ = condition_weights(mix, k, point, time)
    times = np.linspace(0.0, 1.0, n_points)
    return render(mean[: mix.n_human], times, mix.basis, mix.human_dim)


# -- serialization -------------------------------------------------------------


def mixture_to_dict(mix: InteractionMixture) -> dict:
    b = mix.basis
    return {
        "basis": {
            "n_basis": b.n_basis,
            "width": b.width,
            "ridge": b.ridge,
            "obs_noise": b.obs_noise,
            "cov_reg": b.cov_reg,
        },
        "human_dim": mix.human_dim,
        "robot_dim": mix.robot_dim,
        "components": [
            {
                "label": c.label,
                "prior": c.prior,
                "mean": c.mean.tolist(),
                "cov": c.cov.tolist(),
            }
            for c in mix.components
        ],
    }


def mixture_from_dict(data: dict) -> InteractionMixture:
    comps = tuple(
        InteractionComponent(
            int(c["label"]), np.asarray(c["mean"], dtype=float), np.asarray(c["cov"], dtype=float),
            float(c["prior"]),
        )
        for c in data["components"]
    )
    return InteractionMixture(
        comps, BasisConfig(**data["basis"]), int(data["human_dim"]), int(data["robot_dim"])
    )
