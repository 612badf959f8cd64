"""
Fixed points of the trained autonomous map, found as zeros of the kinetic energy q(x) = 1/2 |F(x) - x|^2.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize, root
from scipy.stats import qmc
from sklearn.cluster import KMeans
from sklearn.metrics import davies_bouldin_score

from esnena import globals as esnena_globals
from esnena.esn import EsnModel, Trajectory
from esnena.exceptions import EsnUsageError, NotAFixedPoint
from esnena.schemas import FixedPointConfig, FixedPointInfo, FixedPointReport

logger = logging.getLogger(__name__)

MARGINAL_BAND = 1e-9
BOX_START = -1
BOX_MARGIN = 0.1


class Stability(str, Enum):
    STABLE = "stable"
    SADDLE = "saddle"
    REPELLER = "repeller"


@dataclass(frozen=True, eq=False)
class VelocityField:
    """
    Q(x) = alpha [tanh(M x) - x] of a trained model.
    """
    m: np.ndarray
    leak_rate: float

    @classmethod
    def from_model(cls, model: EsnModel) -> VelocityField:
        if not model.is_trained:
            raise EsnUsageError("VelocityField", "The model has no readout.")
        return cls(m=model.trained_reservoir.m, leak_rate=model.leak_rate)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.leak_rate * (np.tanh(x @ self.m.T) - x)

    def energy(self, x: np.ndarray) -> float:
        q = self(x)
        return 0.5 * float(q @ q)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """
        J_Q(x) = alpha (D(x) M - I) with D = diag(1 - tanh^2(M x)).
        """
        d = 1.0 - np.tanh(self.m @ x) ** 2
        return self.leak_rate * (d[:, None] * self.m - np.eye(len(x)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.jacobian(x).T @ self(x)

    def map_jacobian(self, x: np.ndarray) -> np.ndarray:
        """
        J_F(x) = (1 - alpha) I + alpha D(x) M.
        """
        return np.eye(len(x)) + self.jacobian(x)


def kinetic_energy(model: EsnModel, x) -> float:
    return VelocityField.from_model(model).energy(np.asarray(x, dtype=float))


def kinetic_energy_gradient(model: EsnModel, x) -> np.ndarray:
    """
    Analytic gradient of q, J_Q(x)^T Q(x).
    """
    return VelocityField.from_model(model).gradient(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class Candidate:
    location: np.ndarray
    energy: float
    start_index: int
    iterations: int


@dataclass
class FixedPointSearch:
    """
    Outcome of the BFGS starts: accepted minima, positive local minima (ghosts) and the number of dropped starts.
    """
    candidates: List[Candidate] = field(default_factory=list)
    ghosts: List[Candidate] = field(default_factory=list)
    dropped: int = 0

    def __iter__(self) -> Iterator[Candidate]:
        return iter(self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)


@dataclass(frozen=True, eq=False)
class FixedPoint:
    location: np.ndarray
    energy: float
    jacobian_spectrum: np.ndarray
    unstable_count: int
    marginal: bool = False
    cluster_size: int = 1

    @property
    def stability(self) -> Stability:
        if self.unstable_count == 0:
            return Stability.STABLE
        if self.unstable_count == len(self.location):
            return Stability.REPELLER
        return Stability.SADDLE

    @property
    def label(self) -> str:
        if self.stability is Stability.SADDLE:
            return f"saddle({self.unstable_count})"
        return self.stability.value

    def to_info(self) -> FixedPointInfo:
        return FixedPointInfo(location=[float(v) for v in self.location], energy=float(self.energy),
                              spectrum=[(float(v.real), float(v.imag)) for v in self.jacobian_spectrum],
                              unstable_count=self.unstable_count, stability=self.label, marginal=self.marginal,
                              cluster_size=self.cluster_size)

    @classmethod
    def from_info(cls, info: FixedPointInfo) -> FixedPoint:
        return cls(location=np.array(info.location), energy=info.energy,
                   jacobian_spectrum=np.array([complex(re, im) for re, im in info.spectrum]),
                   unstable_count=info.unstable_count, marginal=info.marginal, cluster_size=info.cluster_size)


def _polish(velocity: VelocityField, location: np.ndarray, energy: float):
    solution = root(velocity, location, jac=velocity.jacobian, method="hybr")
    if not solution.success:
        return location, energy
    polished_energy = velocity.energy(solution.x)
    if polished_energy <= energy and np.max(np.abs(solution.x - location)) < 1e-2:
        return solution.x, polished_energy
    return location, energy


def find_fixed_points(model: EsnModel, trajectory: Trajectory, n_starts: int, tol: float = 1e-6, seed: int = 0,
                      config: Optional[FixedPointConfig] = None) -> FixedPointSearch:
    """
    Minimize the kinetic energy with BFGS from states sampled out of a trajectory.

    Starts are sampled without replacement when the trajectory is long enough. A share config.box_starts of the
    starts instead covers the bounding box of the visited states, widened by 10% and clipped to the cube [-1, 1]^N
    that holds every fixed point, with a scrambled Halton sequence; these carry start index -1. Each start runs
    independently on a thread pool; results keep the start order.

    :param model: Trained model.
    :type model: EsnModel
    :param trajectory: Trajectory supplying initial conditions.
    :type trajectory: Trajectory
    :param n_starts: Number of BFGS runs.
    :type n_starts: int
    :param tol: Energy below which a minimum is a fixed point.
    :type tol: float
    :param seed: Seed of the start sampling.
    :type seed: int
    :param config: Iteration caps, jitter and polishing options; n_starts, tol and seed given here take precedence.
    :type config: Optional[FixedPointConfig]
    :return: Candidates, ghosts and dropped count.
    :rtype: FixedPointSearch
    """
    config = (config or FixedPointConfig()).model_copy(update={"n_starts": n_starts, "tol": tol, "seed": seed})
    velocity = VelocityField.from_model(model)
    if n_starts == 0:
        return FixedPointSearch()
    states = trajectory.states
    if len(states) == 0:
        raise EsnUsageError("find_fixed_points", "The trajectory is empty.")
    rng = np.random.default_rng(seed)
    n_box = int(round(config.box_starts * n_starts))
    n_sampled = n_starts - n_box
    replace = n_sampled > len(states)
    indices = rng.choice(len(states), n_sampled, replace=replace)
    starts = states[indices]
    if config.start_noise > 0:
        starts = starts + rng.normal(0.0, config.start_noise, starts.shape)
    if n_box:
        low, high = states.min(axis=0), states.max(axis=0)
        margin = BOX_MARGIN * (high - low)
        low, high = np.clip(low - margin, -1.0, 1.0), np.clip(high + margin, -1.0, 1.0)
        box = qmc.scale(qmc.Halton(d=states.shape[1], seed=seed).random(n_box), low, np.maximum(high, low + 1e-12))
        starts = np.vstack([starts, box])
        indices = np.concatenate([indices, np.full(n_box, BOX_START)])
    logger.info("BFGS from %d trajectory and %d box starts (replace=%s, maxiter=%d, gtol=%.0e)", n_sampled, n_box,
                replace, config.max_iters, config.gtol)

    def run(start: np.ndarray):
        return minimize(velocity.energy, start, jac=velocity.gradient, method="BFGS",
                        options={"gtol": config.gtol, "maxiter": config.max_iters, "c1": 1e-4, "c2": 0.9})

    with ThreadPoolExecutor(max_workers=esnena_globals.num_threads) as executor:
        results = list(executor.map(run, starts))

    search = FixedPointSearch()
    for start_index, result in zip(indices, results):
        location, energy = result.x, float(result.fun)
        if energy < config.tol:
            if config.polish:
                location, energy = _polish(velocity, location, energy)
            search.candidates.append(Candidate(location, energy, int(start_index), int(result.nit)))
        elif np.linalg.norm(velocity.gradient(location)) <= config.ghost_gtol:
            search.ghosts.append(Candidate(location, energy, int(start_index), int(result.nit)))
        else:
            search.dropped += 1
    if search.ghosts:
        logger.warning("%d starts ended in positive local minima of the kinetic energy", len(search.ghosts))
    if search.dropped:
        logger.warning("%d of %d starts did not converge and were dropped", search.dropped, n_starts)
    return search


def classify(model: EsnModel, fp_location, tol: float = 1e-6) -> FixedPoint:
    """
    Linear stability from the eigenvalues of J_F: the number of eigenvalues outside the unit circle.

    :raises NotAFixedPoint: If q(fp_location) is not below tol.
    """
    velocity = VelocityField.from_model(model)
    location = np.asarray(fp_location, dtype=float)
    energy = velocity.energy(location)
    if energy >= tol:
        raise NotAFixedPoint(energy, tol)
    spectrum = np.linalg.eigvals(velocity.map_jacobian(location))
    moduli = np.abs(spectrum)
    marginal = bool(np.any(np.abs(moduli - 1.0) < MARGINAL_BAND))
    if marginal:
        logger.warning("Fixed point with marginal eigenvalue modulus %s", moduli[np.argmin(np.abs(moduli - 1.0))])
    return FixedPoint(location=location, energy=energy, jacobian_spectrum=spectrum,
                      unstable_count=int(np.sum(moduli > 1.0)), marginal=marginal)


def _unique_count(locations: np.ndarray, merge_tol: float) -> int:
    representatives: List[np.ndarray] = []
    for location in locations:
        if not any(np.max(np.abs(location - r)) < merge_tol for r in representatives):
            representatives.append(location)
    return len(representatives)


def _choose_k(locations: np.ndarray, k_max: int, merge_tol: float, seed: int) -> np.ndarray:
    n = len(locations)
    n_unique = _unique_count(locations, merge_tol)
    if n_unique <= 1:
        return np.zeros(n, dtype=int)
    if n_unique == 2:
        return KMeans(n_clusters=2, n_init=10, random_state=seed).fit_predict(locations)
    if n_unique == n and n <= k_max:
        return np.arange(n)
    best_labels, best_score = None, np.inf
    for k in range(2, min(k_max, n_unique, n - 1) + 1):
        labels = KMeans(n_clusters=k, n_init=10, random_state=seed).fit_predict(locations)
        score = davies_bouldin_score(locations, labels)
        if score < best_score:
            best_labels, best_score = labels, score
    return best_labels


def aggregate(fixed_points: List[FixedPoint], k_max: int = 10, merge_tol: float = 1e-5,
              seed: int = 0) -> List[FixedPoint]:
    """
    Reduce duplicated fixed points to one representative per cluster.

    Points are grouped by their number of unstable directions. Each group is clustered with k-means, k chosen by
    the lowest Davies-Bouldin index, and the member closest to each centroid is kept. Representatives closer than
    merge_tol are merged at the end.

    :param fixed_points: Classified candidates.
    :type fixed_points: List[FixedPoint]
    :param k_max: Largest number of clusters tried per group.
    :type k_max: int
    :param merge_tol: Infinity-norm distance below which points coincide.
    :type merge_tol: float
    :param seed: k-means random state.
    :type seed: int
    :return: Representatives ordered by unstable count and location.
    :rtype: List[FixedPoint]
    """
    if not fixed_points:
        raise EsnUsageError("aggregate", "No candidates to aggregate.")
    groups: Dict[int, List[FixedPoint]] = defaultdict(list)
    for point in fixed_points:
        groups[point.unstable_count].append(point)

    representatives: List[FixedPoint] = []
    for unstable_count in sorted(groups):
        group = groups[unstable_count]
        locations = np.array([p.location for p in group])
        labels = _choose_k(locations, k_max, merge_tol, seed) if len(group) > 1 else np.zeros(1, dtype=int)
        for label in np.unique(labels):
            members = np.flatnonzero(labels == label)
            centroid = locations[members].mean(axis=0)
            closest = members[np.argmin(np.linalg.norm(locations[members] - centroid, axis=1))]
            representatives.append(_with_cluster_size(group[closest], len(members)))

    merged: List[FixedPoint] = []
    for point in representatives:
        for i, kept in enumerate(merged):
            if np.max(np.abs(point.location - kept.location)) < merge_tol:
                merged[i] = _with_cluster_size(kept, kept.cluster_size + point.cluster_size)
                break
        else:
            merged.append(point)
    merged.sort(key=lambda p: (p.unstable_count, tuple(np.round(p.location, 8))))
    logger.info("Aggregated %d candidates into %d fixed points", len(fixed_points), len(merged))
    return merged


def _with_cluster_size(point: FixedPoint, cluster_size: int) -> FixedPoint:
    return FixedPoint(location=point.location, energy=point.energy, jacobian_spectrum=point.jacobian_spectrum,
                      unstable_count=point.unstable_count, marginal=point.marginal, cluster_size=cluster_size)


def locate_fixed_points(model: EsnModel, trajectory: Trajectory,
                        config: FixedPointConfig) -> Tuple[List[FixedPoint], FixedPointSearch]:
    """
    Search, classify and aggregate in one call.
    """
    search = find_fixed_points(model, trajectory, config.n_starts, config.tol, config.seed, config)
    classified = []
    for candidate in search:
        try:
            classified.append(classify(model, candidate.location, config.tol))
        except NotAFixedPoint as e:
            logger.warning("Dropping candidate from start %d: %s", candidate.start_index, e)
    if not classified:
        return [], search
    return aggregate(classified, config.k_max, config.merge_tol, config.seed), search


def fixed_point_report(fixed_points: List[FixedPoint], search: Optional[FixedPointSearch] = None,
                       seed: int = 0) -> FixedPointReport:
    ghosts = [[float(v) for v in g.location] for g in search.ghosts] if search else []
    return FixedPointReport(fixed_points=[p.to_info() for p in fixed_points], ghosts=ghosts,
                            dropped_starts=search.dropped if search else 0, seed=seed)
