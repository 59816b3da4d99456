"""Shared base for handlers that turn an experiment config into artifacts."""

__all__ = [
    "ConfiguredHandler",
]

from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from vpgen.common.handler import ExperimentHandler
from vpgen.handlers.model import ExperimentConfig, ExperimentRequest, ExperimentResponse


@dataclass
class ConfiguredHandler(ExperimentHandler[ExperimentRequest, ExperimentResponse]):
    """Handler writing every artifact into the request's output directory.

    Subclasses implement `run`; `handle` prepares the directory and collects
    the written paths into the response.
    """

    artifacts: list[Path] = field(default_factory=list, init=False, repr=False)

    def handle(self, request: ExperimentRequest) -> ExperimentResponse:
        self.output_dir = request.output_dir
        self.artifacts = []
        self.log.info(f"Running {request.config.kind} experiment into {self.output_dir}")
        response = self.run(request.config, request.threads)
        response.artifacts = [str(path) for path in self.artifacts]
        return response

    def run(self, config: ExperimentConfig, threads: int) -> ExperimentResponse:
        raise NotImplementedError("Please implement `run` method")  # pragma: no cover

    def response(self, **kwargs) -> ExperimentResponse:
        return ExperimentResponse(output_dir=str(self.output_dir), **kwargs)

    def write_frame(self, frame: pd.DataFrame, filename: str) -> Path:
        path = self.output_dir / filename
        frame.to_csv(path, index=False)
        self.artifacts.append(path)
        return path

    def record(self, paths: list[Path]):
        self.artifacts.extend(paths)
