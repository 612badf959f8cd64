from typing import Dict, Optional, Any, List, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


# Task:

class TaskConfig(BaseModel):
    bits: int = Field(2, ge=1, description="Number of flip-flop channels (k).")
    pulse_prob: float = Field(0.1, gt=0.0, lt=1.0, description="Probability (p) of a pulse at each step.")
    length: int = Field(1000, ge=1, description="Number of time steps.")
    seed: int = Field(0, description="Seed of the input draw.")


# Networks:

class EsnBuildConfig(BaseModel):
    n_r: int = Field(500, ge=1, description="Number of reservoir neurons.")
    n_i: int = Field(2, ge=1, description="Number of inputs.")
    n_o: int = Field(2, ge=1, description="Number of outputs.")
    sparsity: float = Field(0.95, ge=0.0, lt=1.0, description="Fraction of reservoir weights set to zero.")
    spectral_radius: float = Field(0.9, gt=0.0, description="Target spectral radius of the reservoir.")
    leak_rate: float = Field(1.0, gt=0.0, le=1.0, description="Leak rate (alpha).")
    noise_std: float = Field(1e-4, ge=0.0, description="Standard deviation of the state noise.")
    seed: int = Field(0, description="Seed of the weight draw.")


class DesignConfig(BaseModel):
    design_type: str = Field(...,
                             description="The type of design, corresponds to the plugin module under " +
                                         "esnena.designs without the .py extension.")
    args: Dict[str, Any] = Field({}, description="A dict of arguments passed to the Design class.")


class DesignType(BaseModel):
    name: str = Field(..., description="Name of the design type.")
    design_description: Optional[str] = Field(..., description="Description of the design type.")
    args: Dict[str, str] = Field(..., description="Dict of arguments needed to construct the design.")


class EsnModelDocument(BaseModel):
    n_r: int
    n_i: int
    n_o: int
    leak_rate: float
    noise_std: float
    reservoir: List[List[float]] = Field(..., description="W_r, row-major.")
    input_weights: List[List[float]] = Field(..., description="W_in, row-major.")
    feedback_weights: List[List[float]] = Field(..., description="W_fb, row-major.")
    readout: Optional[List[List[float]]] = Field(None, description="W_o, row-major, absent if untrained.")
    seed: Optional[int] = Field(None, description="Seed the model was drawn or trained with.")
    provenance: str = Field("", description="How the model was produced.")


# Training:

class TrainConfig(BaseModel):
    ridge_lambda: float = Field(1e-4, ge=0.0, description="Ridge regularization, enters the solver squared.")
    washout: int = Field(100, ge=0, description="Initial steps discarded before regression and scoring.")
    train_length: int = Field(50000, ge=1, description="Length of the teacher forced training sequence.")
    test_length: int = Field(10000, ge=1, description="Length of the closed-loop test sequence.")
    noise_std: float = Field(1e-4, ge=0.0, description="State noise used while harvesting.")
    seed: int = Field(0, description="Seed of the harvesting noise.")
    test_seed: int = Field(1, description="Seed of the test sequence.")
    test_noise_seed: Optional[int] = Field(None, description="Seed of the test noise, defaults to seed + 1.")

    @model_validator(mode="after")
    def washout_shorter_than_sequences(self):
        if self.washout >= self.train_length or self.washout >= self.test_length:
            raise ValueError("washout must be shorter than train_length and test_length")
        return self


class TrainingReport(BaseModel):
    train_mse: float
    test_mse: float
    ridge_lambda: float
    washout: int
    switch_errors: int = Field(..., description="Pulses after which the output sign did not match the target.")
    task: TaskConfig
    train: TrainConfig


# Fixed points:

class FixedPointConfig(BaseModel):
    n_starts: int = Field(100, ge=0, description="Number of BFGS starts sampled from the trajectory.")
    tol: float = Field(1e-6, gt=0.0, description="Kinetic energy tolerance for accepting a minimum.")
    max_iters: int = Field(500, ge=1, description="BFGS iteration cap.")
    gtol: float = Field(1e-10, gt=0.0, description="BFGS gradient norm stop.")
    ghost_gtol: float = Field(1e-6, gt=0.0, description="Gradient norm below which a positive minimum is a ghost.")
    start_noise: float = Field(0.0, ge=0.0, description="Std of Gaussian jitter added to sampled starts.")
    box_starts: float = Field(0.5, ge=0.0, le=1.0,
                              description="Share of starts spread over the bounding box of the trajectory states.")
    polish: bool = Field(True, description="Refine accepted minima with a Newton-type root solve.")
    k_max: int = Field(10, ge=1, description="Largest k tried in the Davies-Bouldin sweep.")
    merge_tol: float = Field(1e-5, gt=0.0, description="Infinity-norm distance below which points coincide.")
    seed: int = Field(0, description="Seed for start sampling and k-means.")


class FixedPointInfo(BaseModel):
    location: List[float]
    energy: float
    spectrum: List[Tuple[float, float]] = Field(..., description="Jacobian eigenvalues as (re, im) pairs.")
    unstable_count: int
    stability: str = Field(..., description="stable, saddle(k) or repeller.")
    marginal: bool = False
    cluster_size: int = 1


class FixedPointReport(BaseModel):
    fixed_points: List[FixedPointInfo]
    ghosts: List[List[float]] = Field([], description="Positive local minima of the kinetic energy.")
    dropped_starts: int = 0
    seed: int = 0


# Extraction:

class GridSpec(BaseModel):
    dim: Optional[int] = Field(None, ge=1, description="Grid dimension, defaults to the LSS dimension.")
    edge_length: float = Field(4.0, gt=0.0, description="Hypercube edge length.")
    points_per_edge: int = Field(101, ge=2, description="Lattice points per edge.")

    @property
    def spacing(self) -> float:
        return self.edge_length / (self.points_per_edge - 1)


class LssConfig(BaseModel):
    radius_r: float = Field(0.2, gt=0.0, description="Infinity-norm radius selecting local PDVs.")
    variance_target: float = Field(0.95, gt=0.0, le=1.0, description="Explained variance fixing the LSS size.")


class OmegaLimitConfig(BaseModel):
    max_iters: int = Field(1000, ge=1, description="Iterations of the autonomous map before giving up.")
    match_eps: float = Field(1e-4, gt=0.0, description="Distance and displacement tolerance for convergence.")


class ThresholdEstimateConfig(BaseModel):
    enabled: bool = Field(True, description="Estimate excitability thresholds by ray marching in the ambient space.")
    n_directions: int = Field(16, ge=0, description="Random unit directions added to the witness direction.")
    n_steps: int = Field(40, ge=1, description="Radii tried along each direction.")
    seed: int = Field(0, description="Seed of the random directions.")


class ExtractionConfig(BaseModel):
    grid: GridSpec = GridSpec()
    lss: LssConfig = LssConfig()
    omega: OmegaLimitConfig = OmegaLimitConfig()
    threshold_estimate: ThresholdEstimateConfig = ThresholdEstimateConfig()
    allow_starved_nodes: bool = Field(True, description="Keep attractors without local PDVs as edge-less nodes.")


class EnaNodeInfo(BaseModel):
    index: int
    location: List[float]
    output: Optional[List[float]] = None
    pattern: Optional[List[int]] = Field(None, description="Output sign pattern when the node is labelable.")
    spurious: bool = False
    discovered: bool = Field(False, description="Found during grid classification, not by the fixed-point search.")
    lss_dim: Optional[int] = None
    explained_variance: Optional[List[float]] = None
    local_pdvs: int = 0
    grid_size: int = 0
    unresolved: int = 0


class EnaEdgeInfo(BaseModel):
    source: int
    target: int
    threshold: float = Field(..., description="Input-driven excitability threshold estimate.")
    volume_ratio: float
    effective_excitability: float
    count: int = Field(..., description="Grid points of the source converging to the target.")
    threshold_estimate: Optional[float] = Field(None, description="Ambient excitability threshold estimate.")
    classification: Optional[str] = Field(None, description="desired or undesired.")
    spurious: bool = False


class EnaGraphInfo(BaseModel):
    nodes: List[EnaNodeInfo]
    edges: List[EnaEdgeInfo]
    grid: GridSpec


# Experiments:

class SweepResult(BaseModel):
    noise_levels: List[float]
    mse_per_level: List[float]
    breakdown_level: Optional[float] = Field(None, description="First level whose MSE exceeds the threshold.")
    failure_threshold: float = 0.1
    seeds: List[int] = [0]

    @model_validator(mode="after")
    def levels_match(self):
        if any(b <= a for a, b in zip(self.noise_levels, self.noise_levels[1:])):
            raise ValueError("noise_levels must be strictly increasing")
        if len(self.mse_per_level) != len(self.noise_levels):
            raise ValueError("mse_per_level and noise_levels differ in length")
        return self


class RobustnessRanking(BaseModel):
    max_undesired_beta: List[float]
    breakdown_levels: List[Optional[float]]
    agrees: bool = Field(..., description="Larger undesired beta never breaks down at a larger noise level.")


class ErrorInterval(BaseModel):
    start: int
    end: int = Field(..., description="Last step of the interval (inclusive).")
    max_error: float
    nodes: List[int] = Field(..., description="Nearest graph nodes visited, consecutive duplicates removed.")
    spurious_nodes: List[int] = []
    undesired_edges: List[Tuple[int, int]] = []
    outputs_at_spurious: List[List[float]] = []


class ErrorReport(BaseModel):
    threshold: float = 0.25
    intervals: List[ErrorInterval] = []


# Runs:

class RunConfig(BaseModel):
    task: TaskConfig = TaskConfig()
    esn: Optional[EsnBuildConfig] = Field(None, description="Random ESN to build and train.")
    design: Optional[DesignConfig] = Field(None, description="Hand-designed reservoir, used instead of esn.")
    model_path: Optional[str] = Field(None, description="Load a model document instead of building one.")
    train: TrainConfig = TrainConfig()
    simulate_length: int = Field(1000, ge=1, description="Closed-loop trajectory length used for analysis.")
    fixed_points: FixedPointConfig = FixedPointConfig()
    extraction: ExtractionConfig = ExtractionConfig()
    seed: int = Field(0, description="Seed of the analysed trajectory.")

    @field_validator("design")
    @classmethod
    def design_has_type(cls, value: Optional[DesignConfig]):
        if value is not None and not value.design_type:
            raise ValueError("design_type must be set")
        return value

    @model_validator(mode="after")
    def one_model_source(self):
        sources = [self.esn is not None, self.design is not None, self.model_path is not None]
        if sum(sources) != 1:
            raise ValueError("exactly one of esn, design and model_path must be given")
        return self


class Metrics(BaseModel):
    timestamp: str
    train_mse: Optional[float] = None
    test_mse: Optional[float] = None
    switch_errors: Optional[int] = None
    fixed_points: int
    stable: int
    nodes: int
    edges: int
    pdvs: int
    seeds: Dict[str, int]
