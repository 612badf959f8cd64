"""
Excitable network attractor extraction.

Pulse difference vectors (PDVs) recorded near each stable fixed point span a local switching subspace (LSS). A
lattice in that subspace is iterated under the autonomous map; the lattice points that leave the home basin give
the input-driven excitability threshold, the volume ratio and the effective excitability of each connection.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import root
from sklearn.decomposition import PCA

from esnena import globals as esnena_globals
from esnena.esn import EsnModel, Trajectory, autonomous_map
from esnena.exceptions import EsnUsageError, InsufficientPdvs, NotAFixedPoint
from esnena.fixed_points import FixedPoint, Stability, VelocityField, classify
from esnena.schemas import EnaEdgeInfo, EnaGraphInfo, EnaNodeInfo, ExtractionConfig, GridSpec, \
    OmegaLimitConfig, TaskConfig, ThresholdEstimateConfig

logger = logging.getLogger(__name__)

UNRESOLVED = -1
LABEL_TOLERANCE = 0.5


# PDVs and local switching subspaces:

@dataclass(frozen=True, eq=False)
class Pdv:
    vector: np.ndarray
    origin_state: np.ndarray
    pulse: np.ndarray
    step: int


def collect_pdvs(trajectory: Trajectory) -> List[Pdv]:
    """
    One PDV x[k] - x[k-1] per step k >= 1 with a nonzero input.
    """
    states, inputs = trajectory.states, trajectory.inputs
    pdvs = [Pdv(vector=states[k] - states[k - 1], origin_state=states[k - 1], pulse=inputs[k], step=k)
            for k in np.flatnonzero(np.any(inputs != 0, axis=1)) if k >= 1]
    if not pdvs:
        logger.warning("Trajectory of %d steps contains no input pulses", len(trajectory))
    return pdvs


@dataclass(frozen=True, eq=False)
class Lss:
    anchor: FixedPoint
    basis: np.ndarray
    explained_variance: np.ndarray
    radius_r: float
    local_pdvs: int

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


def build_lss(fp: FixedPoint, pdvs: Sequence[Pdv], radius_r: float = 0.2, variance_target: float = 0.95,
              max_dim: Optional[int] = None, attractor_index: int = 0) -> Lss:
    """
    PCA of the PDVs whose origin lies within radius_r (infinity norm) of the attractor.

    The subspace keeps the fewest components reaching variance_target, at most max_dim.

    :param fp: Anchor attractor.
    :type fp: FixedPoint
    :param pdvs: All PDVs of a trajectory.
    :type pdvs: Sequence[Pdv]
    :param radius_r: Radius of the local ball.
    :type radius_r: float
    :param variance_target: Cumulative explained variance to reach.
    :type variance_target: float
    :param max_dim: Cap on the subspace dimension.
    :type max_dim: Optional[int]
    :param attractor_index: Index used in the error message.
    :type attractor_index: int
    :return: The local switching subspace.
    :rtype: Lss
    :raises InsufficientPdvs: If fewer than 2 PDVs are local.
    """
    local = np.array([p.vector for p in pdvs if np.max(np.abs(p.origin_state - fp.location)) <= radius_r])
    if len(local) < 2:
        raise InsufficientPdvs(attractor_index, len(local), radius_r)
    pca = PCA(n_components=min(len(local), local.shape[1])).fit(local)
    ratios = pca.explained_variance_ratio_
    dim = int(np.searchsorted(np.cumsum(ratios), variance_target - 1e-12) + 1)
    dim = min(dim, len(ratios))
    if max_dim is not None:
        dim = min(dim, max_dim)
    return Lss(anchor=fp, basis=pca.components_[:dim].copy(), explained_variance=ratios[:dim].copy(),
               radius_r=radius_r, local_pdvs=len(local))


def grid_points(lss: Lss, spec: GridSpec) -> np.ndarray:
    """
    Regular lattice of points_per_edge^dim points on the hypercube of edge edge_length centered on the anchor,
    embedded in the ambient space as anchor + coords @ basis.
    """
    dim = lss.dim if spec.dim is None else spec.dim
    if dim > lss.dim:
        raise EsnUsageError("grid_points", f"Grid dimension {dim} exceeds the LSS dimension {lss.dim}.")
    axis = np.linspace(-spec.edge_length / 2, spec.edge_length / 2, spec.points_per_edge)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    coords = np.stack([m.reshape(-1) for m in mesh], axis=1)
    return lss.anchor.location + coords @ lss.basis[:dim]


# Omega-limit classification:

@dataclass(frozen=True, eq=False)
class OmegaLimitOutcome:
    attractor: int
    iterations: int
    final_state: np.ndarray
    settled: bool = field(default=False)

    @property
    def unresolved(self) -> bool:
        return self.attractor == UNRESOLVED


def _omega_limit_chunk(model: EsnModel, starts: np.ndarray, locations: np.ndarray, max_iters: int,
                       match_eps: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    x = np.array(starts, dtype=float)
    labels = np.full(len(x), UNRESOLVED)
    iterations = np.full(len(x), max_iters)
    displacement = np.full(len(x), np.inf)
    active = np.arange(len(x))
    for it in range(1, max_iters + 1):
        current = x[active]
        following = autonomous_map(model, current)
        step = np.max(np.abs(following - current), axis=1)
        x[active] = following
        displacement[active] = step
        distances = np.stack([np.max(np.abs(following - p), axis=1) for p in locations], axis=1)
        nearest = np.argmin(distances, axis=1)
        hit = (step < match_eps) & (distances[np.arange(len(active)), nearest] < match_eps)
        labels[active[hit]] = nearest[hit]
        iterations[active[hit]] = it
        active = active[~hit]
        if len(active) == 0:
            break
    settled = (labels == UNRESOLVED) & (displacement < match_eps)
    return labels, iterations, x, settled


def omega_limit_batch(model: EsnModel, starts: np.ndarray, attractors: Sequence[FixedPoint],
                      max_iters: int = 1000,
                      match_eps: float = 1e-4) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Iterate many starts at once and assign each to the attractor it converges to.

    Starts are split into chunks that run on a thread pool and are reassembled in order.

    :return: Attractor indices (UNRESOLVED when none), iteration counts, final states and a mask of unresolved
        starts that stopped moving, i.e. converged to a point missing from attractors.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    locations = np.array([a.location for a in attractors]).reshape(len(attractors), model.n_r)
    if len(locations) == 0:
        locations = np.full((1, model.n_r), np.inf)
    n_chunks = max(1, min(esnena_globals.num_threads, len(starts) // 256))
    chunks = np.array_split(np.arange(len(starts)), n_chunks)
    with ThreadPoolExecutor(max_workers=n_chunks) as executor:
        results = list(executor.map(
            lambda idx: _omega_limit_chunk(model, starts[idx], locations, max_iters, match_eps), chunks))
    labels, iterations, finals, settled = (np.concatenate([r[i] for r in results]) for i in range(4))
    return labels, iterations, finals, settled


def omega_limit(model: EsnModel, start, attractors: Sequence[FixedPoint], max_iters: int = 1000,
                match_eps: float = 1e-4) -> OmegaLimitOutcome:
    """
    Classify one start by the attractor its forward orbit reaches.

    A start is assigned to attractor j once an iterate lies within match_eps of p_j (infinity norm) and moves less
    than match_eps in one step. Orbits that do neither within max_iters are unresolved; unresolved orbits that
    stopped moving report their final state as a new candidate.
    """
    labels, iterations, finals, settled = omega_limit_batch(model, np.asarray(start)[None, :], attractors,
                                                            max_iters, match_eps)
    return OmegaLimitOutcome(attractor=int(labels[0]), iterations=int(iterations[0]), final_state=finals[0],
                             settled=bool(settled[0]))


def estimate_excitability_threshold(model: EsnModel, attractors: Sequence[FixedPoint], i: int, j: int,
                                    witness: np.ndarray, config: Optional[ThresholdEstimateConfig] = None,
                                    omega: Optional[OmegaLimitConfig] = None) -> float:
    """
    Estimate the excitability threshold from p_i towards p_j by marching rays out of p_i in the ambient space.

    Rays follow random unit directions plus the direction of the witness lattice point that realised the
    input-driven threshold, so the estimate never exceeds that threshold.
    """
    config = config or ThresholdEstimateConfig()
    omega = omega or OmegaLimitConfig()
    origin = attractors[i].location
    offset = np.asarray(witness, dtype=float) - origin
    reach = float(np.linalg.norm(offset))
    rng = np.random.default_rng(config.seed)
    directions = rng.normal(size=(config.n_directions, model.n_r))
    directions = np.vstack([offset / reach, directions])
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = reach * np.arange(1, config.n_steps + 1) / config.n_steps
    starts = origin + (directions[:, None, :] * radii[None, :, None]).reshape(-1, model.n_r)
    labels, _, _, _ = omega_limit_batch(model, starts, attractors, omega.max_iters, omega.match_eps)
    hits = labels.reshape(len(directions), len(radii)) == j
    if not hits.any():
        logger.warning("No ray from node %d reached node %d, keeping the lattice threshold", i, j)
        return reach
    first = np.where(hits.any(axis=1), np.argmax(hits, axis=1), len(radii) - 1)
    return float(min(radii[first[hits.any(axis=1)]].min(), reach))


# Graph:

@dataclass(frozen=True, eq=False)
class EnaNode:
    index: int
    fixed_point: FixedPoint
    output: Optional[np.ndarray] = None
    lss: Optional[Lss] = None
    grid_size: int = 0
    unresolved: int = 0
    discovered: bool = False
    pattern: Optional[Tuple[int, ...]] = None
    spurious: bool = False

    @property
    def location(self) -> np.ndarray:
        return self.fixed_point.location

    def to_info(self) -> EnaNodeInfo:
        return EnaNodeInfo(
            index=self.index,
            location=[float(v) for v in self.location],
            output=None if self.output is None else [float(v) for v in self.output],
            pattern=None if self.pattern is None else list(self.pattern),
            spurious=self.spurious,
            discovered=self.discovered,
            lss_dim=None if self.lss is None else self.lss.dim,
            explained_variance=None if self.lss is None else [float(v) for v in self.lss.explained_variance],
            local_pdvs=0 if self.lss is None else self.lss.local_pdvs,
            grid_size=self.grid_size,
            unresolved=self.unresolved,
        )


@dataclass(frozen=True, eq=False)
class EnaEdge:
    source: int
    target: int
    threshold: float
    volume_ratio: float
    count: int
    witness: Optional[np.ndarray] = None
    threshold_estimate: Optional[float] = None
    classification: Optional[str] = None
    spurious: bool = False

    @property
    def effective_excitability(self) -> float:
        return self.volume_ratio / self.threshold

    def to_info(self) -> EnaEdgeInfo:
        return EnaEdgeInfo(source=self.source, target=self.target, threshold=self.threshold,
                           volume_ratio=self.volume_ratio, effective_excitability=self.effective_excitability,
                           count=self.count, threshold_estimate=self.threshold_estimate,
                           classification=self.classification, spurious=self.spurious)


class EnaGraph:
    """
    Directed graph of stable fixed points and their excitable connections, backed by a networkx DiGraph.
    """

    def __init__(self, grid: Optional[GridSpec] = None):
        self.graph = nx.DiGraph()
        self.grid = grid or GridSpec()

    def add_node(self, node: EnaNode):
        self.graph.add_node(node.index, node=node)

    def add_edge(self, edge: EnaEdge):
        if edge.source == edge.target:
            raise EsnUsageError("add_edge", f"Self-edge on node {edge.source}.")
        self.graph.add_edge(edge.source, edge.target, edge=edge)

    def replace_node(self, node: EnaNode):
        self.graph.nodes[node.index]["node"] = node

    def replace_edge(self, edge: EnaEdge):
        self.graph.edges[edge.source, edge.target]["edge"] = edge

    @property
    def nodes(self) -> List[EnaNode]:
        return [self.graph.nodes[i]["node"] for i in sorted(self.graph.nodes)]

    @property
    def edges(self) -> List[EnaEdge]:
        return [self.graph.edges[s, t]["edge"] for s, t in sorted(self.graph.edges)]

    def node(self, index: int) -> EnaNode:
        return self.graph.nodes[index]["node"]

    def edge(self, source: int, target: int) -> Optional[EnaEdge]:
        if not self.graph.has_edge(source, target):
            return None
        return self.graph.edges[source, target]["edge"]

    def out_edges(self, source: int) -> List[EnaEdge]:
        return [self.graph.edges[source, t]["edge"] for t in sorted(self.graph.successors(source))]

    def copy(self) -> EnaGraph:
        duplicate = EnaGraph(self.grid)
        duplicate.graph = self.graph.copy()
        return duplicate

    def to_info(self) -> EnaGraphInfo:
        return EnaGraphInfo(nodes=[n.to_info() for n in self.nodes], edges=[e.to_info() for e in self.edges],
                            grid=self.grid)

    @classmethod
    def from_info(cls, info: EnaGraphInfo) -> EnaGraph:
        graph = cls(info.grid)
        for node in info.nodes:
            fixed_point = FixedPoint(location=np.array(node.location), energy=0.0,
                                     jacobian_spectrum=np.array([]), unstable_count=0)
            graph.add_node(EnaNode(
                index=node.index, fixed_point=fixed_point,
                output=None if node.output is None else np.array(node.output),
                grid_size=node.grid_size, unresolved=node.unresolved, discovered=node.discovered,
                pattern=None if node.pattern is None else tuple(node.pattern), spurious=node.spurious))
        for edge in info.edges:
            graph.add_edge(EnaEdge(source=edge.source, target=edge.target, threshold=edge.threshold,
                                   volume_ratio=edge.volume_ratio, count=edge.count,
                                   threshold_estimate=edge.threshold_estimate,
                                   classification=edge.classification, spurious=edge.spurious))
        return graph

    def to_dot(self) -> str:
        result = ['digraph ENA {', '    splines=true;', '    overlap=scalexy;']
        for node in self.nodes:
            label = f"{node.index}" if node.output is None else \
                f"{node.index}: (" + ", ".join(f"{v:.2f}" for v in node.output) + ")"
            attributes = [f'label="{label}"']
            if node.spurious:
                attributes.append("style=dashed")
            result.append(f'    {node.index} [{",".join(attributes)}]')
        for edge in self.edges:
            attributes = [f'label="δ={edge.threshold:.3f}, ν={edge.volume_ratio:.3f}, '
                          f'β={edge.effective_excitability:.3f}"']
            if edge.classification == "undesired":
                attributes.append("color=red")
            if edge.spurious:
                attributes.append("style=dashed")
            result.append(f'    {edge.source} -> {edge.target} [{",".join(attributes)}]')
        result.append('}')
        return '\n'.join(result) + '\n'


# Extraction:

def _discover(model: EsnModel, final_states: np.ndarray, attractors: List[FixedPoint], tol: float,
              merge_tol: float) -> List[FixedPoint]:
    velocity = VelocityField.from_model(model)
    discovered: List[FixedPoint] = []
    for state in final_states:
        solution = root(velocity, state, jac=velocity.jacobian, method="hybr")
        location = solution.x if solution.success else state
        known = attractors + discovered
        if any(np.max(np.abs(location - a.location)) < merge_tol for a in known):
            continue
        try:
            point = classify(model, location, tol)
        except NotAFixedPoint:
            continue
        if point.stability is Stability.STABLE:
            discovered.append(point)
    return discovered


def _edges_from_labels(index: int, points: np.ndarray, labels: np.ndarray, anchor: np.ndarray,
                       n_nodes: int) -> List[EnaEdge]:
    unresolved = int(np.sum(labels == UNRESOLVED))
    home = int(np.sum(labels == index))
    denominator = len(labels) - home - unresolved
    if denominator == 0:
        logger.warning("All resolved lattice points of node %d return home, no outgoing edges", index)
        return []
    edges = []
    for target in range(n_nodes):
        if target == index:
            continue
        members = np.flatnonzero(labels == target)
        if len(members) == 0:
            continue
        distances = np.linalg.norm(points[members] - anchor, axis=1)
        closest = members[np.argmin(distances)]
        threshold = float(distances.min())
        edges.append(EnaEdge(source=index, target=target, threshold=threshold,
                             volume_ratio=len(members) / denominator, count=len(members),
                             witness=points[closest]))
    return edges


def extract_ena(model: EsnModel, attractors: Sequence[FixedPoint], lss: Dict[int, Lss], spec: GridSpec,
                config: Optional[ExtractionConfig] = None, pdvs: Optional[Sequence[Pdv]] = None,
                tol: float = 1e-6, merge_tol: float = 1e-5) -> EnaGraph:
    """
    Build the ENA graph from the stable attractors and their switching subspaces.

    For every attractor with an LSS the lattice is classified by omega-limit. The threshold of edge i -> j is the
    smallest Euclidean distance from p_i to a lattice point converging to p_j, its volume ratio the share of such
    points among the points leaving the home basin, unresolved points excluded, and its effective excitability
    the ratio of the two. Stable points found by lattice orbits that settle away from every known attractor are
    appended as discovered nodes and the orbits are classified again. Once all lattices are done, the unresolved
    points of nodes classified before a later discovery continue from their final states against the full list.

    :param model: Trained model.
    :type model: EsnModel
    :param attractors: Stable fixed points, at least two.
    :type attractors: Sequence[FixedPoint]
    :param lss: Switching subspace per attractor index; attractors without one get no outgoing edges.
    :type lss: Dict[int, Lss]
    :param spec: Lattice parameters.
    :type spec: GridSpec
    :param config: Omega-limit, LSS and threshold-estimate options.
    :type config: Optional[ExtractionConfig]
    :param pdvs: PDVs used to build subspaces of discovered attractors.
    :type pdvs: Optional[Sequence[Pdv]]
    :return: The graph, nodes indexed as attractors followed by discovered points.
    :rtype: EnaGraph
    """
    config = config or ExtractionConfig()
    omega = config.omega
    attractors = list(attractors)
    if len(attractors) < 2:
        raise EsnUsageError("extract_ena", f"Need at least 2 stable attractors, got {len(attractors)}.")
    logger.info("Lattice classification with max_iters=%d, match_eps=%.0e", omega.max_iters, omega.match_eps)
    lss = dict(lss)
    discovered_from = len(attractors)
    results: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    finals_by_node: Dict[int, Tuple[np.ndarray, int]] = {}

    index = 0
    while index < len(attractors):
        if index not in lss and index >= discovered_from and pdvs is not None:
            try:
                lss[index] = build_lss(attractors[index], pdvs, config.lss.radius_r, config.lss.variance_target,
                                       spec.dim, index)
            except InsufficientPdvs as e:
                logger.warning("Discovered node without switching subspace: %s", e)
        if index not in lss:
            logger.warning("Node %d has no switching subspace and gets no outgoing edges", index)
            index += 1
            continue
        local_spec = spec
        if spec.dim is not None and spec.dim > lss[index].dim:
            logger.info("Node %d: LSS has %d dimensions, lattice reduced from %d", index, lss[index].dim, spec.dim)
            local_spec = spec.model_copy(update={"dim": lss[index].dim})
        points = grid_points(lss[index], local_spec)
        labels, _, finals, settled = omega_limit_batch(model, points, attractors, omega.max_iters, omega.match_eps)
        if settled.any():
            found = _discover(model, finals[settled], attractors, tol, merge_tol)
            for point in found:
                logger.warning("Lattice of node %d converges to an unlisted stable point, adding node %d", index,
                               len(attractors))
                attractors.append(point)
            if found:
                retry = np.flatnonzero(settled)
                relabels, _, _, _ = omega_limit_batch(model, finals[retry], attractors, omega.max_iters,
                                                      omega.match_eps)
                labels[retry] = relabels
        unresolved = int(np.sum(labels == UNRESOLVED))
        if unresolved:
            logger.warning("Node %d: %d of %d lattice points unresolved", index, unresolved, len(labels))
        results[index] = (points, labels)
        finals_by_node[index] = (finals, len(attractors))
        index += 1

    for i, (finals, known) in finals_by_node.items():
        labels = results[i][1]
        retry = np.flatnonzero(labels == UNRESOLVED)
        if known == len(attractors) or len(retry) == 0:
            continue
        relabels, _, _, _ = omega_limit_batch(model, finals[retry], attractors, omega.max_iters, omega.match_eps)
        labels[retry] = relabels
        logger.info("Node %d: %d of %d unresolved lattice points resolved after later discoveries", i,
                    int(np.sum(relabels != UNRESOLVED)), len(retry))

    graph = EnaGraph(spec)
    for i, point in enumerate(attractors):
        points, labels = results.get(i, (np.empty((0, model.n_r)), np.empty(0, dtype=int)))
        graph.add_node(EnaNode(index=i, fixed_point=point,
                               output=model.output(point.location) if model.is_trained else None,
                               lss=lss.get(i), grid_size=len(labels),
                               unresolved=int(np.sum(labels == UNRESOLVED)), discovered=i >= discovered_from))
    for i, (points, labels) in sorted(results.items()):
        for edge in _edges_from_labels(i, points, labels, attractors[i].location, len(attractors)):
            if config.threshold_estimate.enabled:
                estimate = estimate_excitability_threshold(model, attractors, i, edge.target, edge.witness,
                                                           config.threshold_estimate, omega)
                edge = replace(edge, threshold_estimate=estimate)
            graph.add_edge(edge)
    return graph


def extract_from_trajectory(model: EsnModel, trajectory: Trajectory, attractors: Sequence[FixedPoint],
                            config: ExtractionConfig, tol: float = 1e-6) -> Tuple[EnaGraph, List[Pdv]]:
    """
    Collect PDVs, build one LSS per attractor and extract the graph.

    :raises InsufficientPdvs: If an attractor is starved and config.allow_starved_nodes is off.
    """
    pdvs = collect_pdvs(trajectory)
    lss: Dict[int, Lss] = {}
    logger.info("LSS from PDVs within %.2f, variance target %.2f", config.lss.radius_r, config.lss.variance_target)
    for i, point in enumerate(attractors):
        try:
            lss[i] = build_lss(point, pdvs, config.lss.radius_r, config.lss.variance_target, config.grid.dim, i)
        except InsufficientPdvs as e:
            if not config.allow_starved_nodes:
                raise
            logger.warning("%s", e)
    return extract_ena(model, attractors, lss, config.grid, config, pdvs, tol), pdvs


# Task semantics:

def label_edges(graph: EnaGraph, task: TaskConfig) -> EnaGraph:
    """
    Tag nodes with output sign patterns and edges as desired or undesired.

    A node is labelable if its output lies within 0.5 (infinity norm) of a sign pattern of task.bits entries. Of
    the nodes sharing a pattern the closest keeps it, the others are spurious, as are unlabelable nodes. An edge is
    desired iff its endpoint patterns differ in exactly one bit; edges touching spurious nodes are flagged spurious.
    """
    labelled = graph.copy()
    best: Dict[Tuple[int, ...], Tuple[float, int]] = {}
    patterns: Dict[int, Optional[Tuple[int, ...]]] = {}
    for node in graph.nodes:
        pattern = None
        if node.output is not None and len(node.output) == task.bits:
            candidate = tuple(int(v) for v in np.where(node.output >= 0, 1, -1))
            distance = float(np.max(np.abs(node.output - np.array(candidate))))
            if distance <= LABEL_TOLERANCE:
                pattern = candidate
                if pattern not in best or distance < best[pattern][0]:
                    best[pattern] = (distance, node.index)
        patterns[node.index] = pattern
    spurious = {}
    for node in graph.nodes:
        pattern = patterns[node.index]
        spurious[node.index] = pattern is None or best[pattern][1] != node.index
        if spurious[node.index]:
            logger.warning("Node %d with output %s is spurious", node.index,
                           None if node.output is None else np.round(node.output, 2))
        labelled.replace_node(replace(node, pattern=pattern, spurious=spurious[node.index]))
    for edge in graph.edges:
        source, target = patterns[edge.source], patterns[edge.target]
        flips = None if source is None or target is None else sum(a != b for a, b in zip(source, target))
        classification = "desired" if flips == 1 else "undesired"
        labelled.replace_edge(replace(edge, classification=classification,
                                      spurious=spurious[edge.source] or spurious[edge.target]))
    return labelled
