import json
import os
from typing import Type, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from esnena.ena import EnaGraph
from esnena.esn import EsnModel, Trajectory
from esnena.exceptions import ArtifactError
from esnena.schemas import EnaGraphInfo, EsnModelDocument, FixedPointReport, RunConfig
from esnena.task import TaskData

SchemaType = TypeVar("SchemaType", bound=BaseModel)


def _matrix(values) -> list:
    return [[float(v) for v in row] for row in np.asarray(values)]


def model_document(model: EsnModel) -> EsnModelDocument:
    return EsnModelDocument(n_r=model.n_r, n_i=model.n_i, n_o=model.n_o, leak_rate=model.leak_rate,
                            noise_std=model.noise_std, reservoir=_matrix(model.reservoir),
                            input_weights=_matrix(model.input_weights),
                            feedback_weights=_matrix(model.feedback_weights),
                            readout=None if model.readout is None else _matrix(model.readout), seed=model.seed,
                            provenance=model.provenance)


def model_from_document(document: EsnModelDocument) -> EsnModel:
    return EsnModel(reservoir=np.array(document.reservoir).reshape(document.n_r, document.n_r),
                    input_weights=np.array(document.input_weights).reshape(document.n_r, document.n_i),
                    feedback_weights=np.array(document.feedback_weights).reshape(document.n_r, document.n_o),
                    readout=None if document.readout is None else np.array(document.readout),
                    leak_rate=document.leak_rate, noise_std=document.noise_std, seed=document.seed,
                    provenance=document.provenance)


def write_json(document: BaseModel, path: str) -> str:
    with open(path, "w", encoding="utf-8") as f:
        f.write(document.model_dump_json(indent=2))
        f.write("\n")
    return path


def read_json(schema: Type[SchemaType], path: str) -> SchemaType:
    try:
        with open(path, encoding="utf-8") as f:
            return schema.model_validate(json.load(f))
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        raise ArtifactError(path, str(e))


def create_model(model: EsnModel, path: str) -> str:
    return write_json(model_document(model), path)


def get_model(path: str) -> EsnModel:
    return model_from_document(read_json(EsnModelDocument, path))


def create_trajectory(trajectory: Trajectory, path: str) -> str:
    trajectory.to_frame().to_csv(path, index=False, float_format="%.17g")
    return path


def get_trajectory(path: str) -> Trajectory:
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ArtifactError(path, str(e))
    if not any(c.startswith("x_") for c in frame.columns) or not any(c.startswith("u_") for c in frame.columns):
        raise ArtifactError(path, "Expected state columns x_* and input columns u_*.")
    return Trajectory.from_frame(frame)


def create_task(task: TaskData, path: str) -> str:
    task.to_frame().to_csv(path, index=False)
    return path


def create_fixed_points(report: FixedPointReport, path: str) -> str:
    return write_json(report, path)


def get_fixed_points(path: str) -> FixedPointReport:
    return read_json(FixedPointReport, path)


def create_graph(graph: EnaGraph, json_path: str, dot_path: str = None) -> str:
    write_json(graph.to_info(), json_path)
    if dot_path is not None:
        with open(dot_path, "w", encoding="utf-8") as f:
            f.write(graph.to_dot())
    return json_path


def get_graph(path: str) -> EnaGraph:
    return EnaGraph.from_info(read_json(EnaGraphInfo, path))


def get_run_config(path: str) -> RunConfig:
    return read_json(RunConfig, path)


def bundle_path(out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)
