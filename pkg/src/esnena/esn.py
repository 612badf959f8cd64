"""
Echo state networks with output feedback.

A model holds W_r, W_in, W_fb and, once trained, W_o. Teacher forced (open loop) updates feed the target back,
closed-loop updates feed the readout back through the trained reservoir M = W_r + W_fb W_o.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import pandas as pd
import xarray as xr
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigs

from esnena.exceptions import EsnDimensionError, EsnUsageError, ReservoirRebuildRequired

logger = logging.getLogger(__name__)

DENSE_RADIUS_LIMIT = 64


def spectral_radius(matrix: np.ndarray) -> float:
    """
    Largest eigenvalue modulus of a square matrix.

    Small matrices use a full eigendecomposition, larger ones ARPACK on the sparse form.

    :param matrix: Square matrix.
    :type matrix: np.ndarray
    :return: The spectral radius.
    :rtype: float
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[0] <= DENSE_RADIUS_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvals(matrix))))
    try:
        eigenvalues = eigs(sparse.csr_matrix(matrix), k=1, which="LM", tol=1e-12,
                           ncv=min(matrix.shape[0] - 1, 64), return_eigenvectors=False,
                           v0=np.ones(matrix.shape[0]))
        return float(np.abs(eigenvalues[0]))
    except ArpackNoConvergence:
        logger.warning("ARPACK did not converge, falling back to dense eigenvalues")
        return float(np.max(np.abs(np.linalg.eigvals(matrix))))


_radius_of = spectral_radius


@dataclass(frozen=True, eq=False)
class TrainedReservoir:
    m: np.ndarray


@dataclass(frozen=True, eq=False)
class EsnModel:
    reservoir: np.ndarray
    input_weights: np.ndarray
    feedback_weights: np.ndarray
    readout: Optional[np.ndarray] = None
    leak_rate: float = 1.0
    noise_std: float = 0.0
    seed: Optional[int] = None
    provenance: str = ""

    def __post_init__(self):
        if not 0.0 < self.leak_rate <= 1.0:
            raise ValueError(f"leak_rate must lie in (0, 1], got {self.leak_rate}")
        if self.noise_std < 0.0:
            raise ValueError(f"noise_std must be nonnegative, got {self.noise_std}")
        for name in ("reservoir", "input_weights", "feedback_weights", "readout"):
            value = getattr(self, name)
            if value is None:
                continue
            array = np.array(value, dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        n_r = self.reservoir.shape[0]
        if self.reservoir.shape != (n_r, n_r):
            raise EsnDimensionError("reservoir", (n_r, n_r), self.reservoir.shape)
        if self.input_weights.ndim != 2 or self.input_weights.shape[0] != n_r:
            raise EsnDimensionError("input_weights", (n_r, -1), self.input_weights.shape)
        if self.feedback_weights.ndim != 2 or self.feedback_weights.shape[0] != n_r:
            raise EsnDimensionError("feedback_weights", (n_r, -1), self.feedback_weights.shape)
        if self.readout is not None and self.readout.shape != (self.n_o, n_r):
            raise EsnDimensionError("readout", (self.n_o, n_r), self.readout.shape)

    @property
    def n_r(self) -> int:
        return self.reservoir.shape[0]

    @property
    def n_i(self) -> int:
        return self.input_weights.shape[1]

    @property
    def n_o(self) -> int:
        return self.feedback_weights.shape[1]

    @property
    def is_trained(self) -> bool:
        return self.readout is not None

    @cached_property
    def trained_reservoir(self) -> TrainedReservoir:
        """
        M = W_r + W_fb W_o.

        :raises EsnUsageError: If the model has no readout.
        """
        if self.readout is None:
            raise EsnUsageError("trained_reservoir", "The model has no readout.")
        m = self.reservoir + self.feedback_weights @ self.readout
        m.setflags(write=False)
        return TrainedReservoir(m=m)

    def with_readout(self, readout: np.ndarray) -> EsnModel:
        return dataclasses.replace(self, readout=readout)

    def with_noise(self, noise_std: float) -> EsnModel:
        return dataclasses.replace(self, noise_std=noise_std)

    def output(self, states: np.ndarray) -> np.ndarray:
        """
        z = W_o x for a single state or a (steps, N_r) array of states.
        """
        if self.readout is None:
            raise EsnUsageError("output", "The model has no readout.")
        return np.asarray(states) @ self.readout.T


def build_random_esn(n_r: int, n_i: int, n_o: int, sparsity: float, spectral_radius: float, seed: int,
                     leak_rate: float = 1.0, noise_std: float = 1e-4) -> EsnModel:
    """
    Draw an untrained ESN with uniform [-1, 1] weights.

    The reservoir is masked to the requested sparsity and then rescaled to the target spectral radius, so the
    radius holds exactly regardless of the mask.

    :param n_r: Number of reservoir neurons.
    :type n_r: int
    :param n_i: Number of inputs.
    :type n_i: int
    :param n_o: Number of outputs.
    :type n_o: int
    :param sparsity: Fraction of reservoir entries set to zero.
    :type sparsity: float
    :param spectral_radius: Target spectral radius.
    :type spectral_radius: float
    :param seed: Seed of the generator all weights are drawn from.
    :type seed: int
    :param leak_rate: Leak rate (alpha).
    :type leak_rate: float
    :param noise_std: State noise standard deviation.
    :type noise_std: float
    :return: The untrained model.
    :rtype: EsnModel
    :raises ReservoirRebuildRequired: If the masked draw has a numerically zero spectral radius.
    """
    if n_r < 1:
        raise ValueError("n_r must be at least 1")
    if not 0.0 <= sparsity < 1.0:
        raise ValueError("sparsity must lie in [0, 1)")
    if spectral_radius <= 0.0:
        raise ValueError("spectral_radius must be positive")
    rng = np.random.default_rng(seed)
    reservoir = rng.uniform(-1.0, 1.0, (n_r, n_r))
    reservoir *= rng.random((n_r, n_r)) >= sparsity
    raw_radius = _radius_of(reservoir)
    if raw_radius < 1e-12:
        raise ReservoirRebuildRequired(seed, raw_radius)
    reservoir *= spectral_radius / raw_radius
    input_weights = rng.uniform(-1.0, 1.0, (n_r, n_i))
    feedback_weights = rng.uniform(-1.0, 1.0, (n_r, n_o))
    logger.debug("Built %d-neuron reservoir with radius %.3f (raw %.3f)", n_r, spectral_radius, raw_radius)
    return EsnModel(reservoir=reservoir, input_weights=input_weights, feedback_weights=feedback_weights,
                    leak_rate=leak_rate, noise_std=noise_std, seed=seed, provenance="random")


def _check_vector(name: str, value, size: int) -> np.ndarray:
    vector = np.asarray(value, dtype=float)
    if vector.shape != (size,):
        raise EsnDimensionError(name, (size,), vector.shape)
    return vector


def _noise(model: EsnModel, noise, rng: Optional[np.random.Generator]) -> np.ndarray:
    if noise is not None:
        return _check_vector("noise", noise, model.n_r)
    if model.noise_std == 0.0:
        return np.zeros(model.n_r)
    if rng is None:
        raise EsnUsageError("step", "A noisy model needs a noise generator, see noise_generator.")
    return rng.normal(0.0, model.noise_std, model.n_r)


def noise_generator(model: EsnModel, seed: Optional[int] = None) -> np.random.Generator:
    """
    Seeded noise generator of a run, from seed or else the model seed (0 for models without one).
    """
    if seed is None:
        seed = 0 if model.seed is None else model.seed
    return np.random.default_rng(seed)


def step_open_loop(model: EsnModel, x, u, y_prev, noise=None, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    One teacher forced update, (1 - a) x + a tanh(W_r x + W_in u + W_fb y_prev + e).

    :param noise: Explicit pre-activation noise, drawn from rng with model.noise_std when omitted.
    :raises EsnUsageError: If the model is noisy and neither noise nor rng is given.
    """
    x = _check_vector("x", x, model.n_r)
    u = _check_vector("u", u, model.n_i)
    y_prev = _check_vector("y_prev", y_prev, model.n_o)
    pre = model.reservoir @ x + model.input_weights @ u + model.feedback_weights @ y_prev + _noise(model, noise, rng)
    return (1.0 - model.leak_rate) * x + model.leak_rate * np.tanh(pre)


def step_closed_loop(model: EsnModel, x, u, noise=None, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    One closed-loop update through the trained reservoir M.
    """
    if not model.is_trained:
        raise EsnUsageError("step_closed_loop", "The model has no readout.")
    x = _check_vector("x", x, model.n_r)
    u = _check_vector("u", u, model.n_i)
    pre = model.trained_reservoir.m @ x + model.input_weights @ u + _noise(model, noise, rng)
    return (1.0 - model.leak_rate) * x + model.leak_rate * np.tanh(pre)


def autonomous_map(model: EsnModel, x) -> np.ndarray:
    """
    F(x) = G(x, 0) without noise. Accepts a single state or a (points, N_r) batch.
    """
    if not model.is_trained:
        raise EsnUsageError("autonomous_map", "The model has no readout.")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.n_r:
        raise EsnDimensionError("x", (model.n_r,), x.shape)
    return (1.0 - model.leak_rate) * x + model.leak_rate * np.tanh(x @ model.trained_reservoir.m.T)


class Trajectory:
    """
    States, inputs, outputs and optional targets of one run, held in an xarray Dataset with dims step, neuron,
    input and output.
    """

    def __init__(self, dataset: xr.Dataset):
        self.dataset = dataset

    @classmethod
    def from_arrays(cls, states, inputs, outputs=None, targets=None, **attrs) -> Trajectory:
        states = np.asarray(states, dtype=float)
        inputs = np.asarray(inputs, dtype=float)
        if states.ndim != 2 or inputs.ndim != 2 or len(states) != len(inputs):
            raise EsnDimensionError("inputs", (len(states), -1), inputs.shape, "All sequences share one length.")
        data_vars = {
            "states": (("step", "neuron"), states),
            "inputs": (("step", "input"), inputs),
        }
        for name, value in (("outputs", outputs), ("targets", targets)):
            if value is None:
                continue
            value = np.asarray(value, dtype=float)
            if value.ndim != 2 or len(value) != len(states):
                raise EsnDimensionError(name, (len(states), -1), value.shape, "All sequences share one length.")
            data_vars[name] = (("step", "output"), value)
        return cls(xr.Dataset(data_vars, coords={"step": np.arange(len(states))}, attrs=attrs))

    def __len__(self) -> int:
        return self.dataset.sizes["step"]

    @property
    def states(self) -> np.ndarray:
        return self.dataset["states"].values

    @property
    def inputs(self) -> np.ndarray:
        return self.dataset["inputs"].values

    @property
    def outputs(self) -> Optional[np.ndarray]:
        return self.dataset["outputs"].values if "outputs" in self.dataset else None

    @property
    def targets(self) -> Optional[np.ndarray]:
        return self.dataset["targets"].values if "targets" in self.dataset else None

    def to_frame(self) -> pd.DataFrame:
        """
        Flat table with columns step, u_1..u_k, y_1..y_k, z_1..z_k, x_1..x_Nr.
        """
        columns = {"step": self.dataset["step"].values}
        blocks = [("u", self.inputs), ("y", self.targets), ("z", self.outputs), ("x", self.states)]
        for prefix, block in blocks:
            if block is None:
                continue
            for j in range(block.shape[1]):
                columns[f"{prefix}_{j + 1}"] = block[:, j]
        return pd.DataFrame(columns)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> Trajectory:
        def block(prefix):
            names = sorted((c for c in frame.columns if c.startswith(f"{prefix}_")), key=lambda c: int(c[2:]))
            return frame[names].to_numpy(dtype=float) if names else None

        return cls.from_arrays(block("x"), block("u"), outputs=block("z"), targets=block("y"))


def _as_sequence(name: str, values, width: int) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim != 2 or array.shape[1] != width:
        raise EsnDimensionError(name, (-1, width), array.shape)
    return array


def run_open_loop(model: EsnModel, inputs, targets, x0=None, rng: Optional[np.random.Generator] = None,
                  initial_target: Optional[Sequence[float]] = None) -> Trajectory:
    """
    Teacher forced run: the state at step k sees u[k] and the target of step k - 1.

    The target before the first step defaults to all +1, the initial memory state of the flip-flop task.
    """
    rng = noise_generator(model) if rng is None else rng
    inputs = _as_sequence("inputs", inputs, model.n_i)
    targets = _as_sequence("targets", targets, model.n_o)
    if len(inputs) != len(targets):
        raise EsnDimensionError("targets", inputs.shape[:1], targets.shape[:1])
    x = np.zeros(model.n_r) if x0 is None else _check_vector("x0", x0, model.n_r)
    y_prev = np.ones(model.n_o) if initial_target is None else _check_vector("initial_target", initial_target,
                                                                             model.n_o)
    states = np.empty((len(inputs), model.n_r))
    for k in range(len(inputs)):
        x = step_open_loop(model, x, inputs[k], y_prev, rng=rng)
        states[k] = x
        y_prev = targets[k]
    outputs = model.output(states) if model.is_trained else None
    return Trajectory.from_arrays(states, inputs, outputs=outputs, targets=targets, mode="open-loop")


def run_closed_loop(model: EsnModel, inputs, x0=None, rng: Optional[np.random.Generator] = None,
                    targets=None, noise_std: Optional[float] = None) -> Trajectory:
    """
    Autonomous run driven only by the inputs.

    :param noise_std: Overrides the model noise for this run.
    """
    if noise_std is not None:
        model = model.with_noise(noise_std)
    rng = noise_generator(model) if rng is None else rng
    inputs = _as_sequence("inputs", inputs, model.n_i)
    x = np.zeros(model.n_r) if x0 is None else _check_vector("x0", x0, model.n_r)
    states = np.empty((len(inputs), model.n_r))
    for k in range(len(inputs)):
        x = step_closed_loop(model, x, inputs[k], rng=rng)
        states[k] = x
    if targets is not None:
        targets = _as_sequence("targets", targets, model.n_o)
    return Trajectory.from_arrays(states, inputs, outputs=model.output(states), targets=targets, mode="closed-loop")


def prime_state(model: EsnModel, settle_steps: int = 50) -> np.ndarray:
    """
    Drive a trained model from the origin into the all +1 memory state.

    The origin is a fixed point of the autonomous map, so one +1 pulse per channel is applied, each followed by
    settle_steps steps without input.
    """
    if not model.is_trained:
        raise EsnUsageError("prime_state", "The model has no readout.")
    x = np.zeros(model.n_r)
    silence = np.zeros(model.n_i)
    zero_noise = np.zeros(model.n_r)
    for channel in range(model.n_i):
        pulse = np.zeros(model.n_i)
        pulse[channel] = 1.0
        x = step_closed_loop(model, x, pulse, noise=zero_noise)
        for _ in range(settle_steps):
            x = step_closed_loop(model, x, silence, noise=zero_noise)
    return x
