"""Models for the artifacts written next to every experiment's outputs."""

__all__ = [
    "MANIFEST_FILENAME",
    "Manifest",
    "config_sha256",
]

import json
from datetime import datetime
from pathlib import Path

from aibs_informatics_core.models.base import PydanticBaseModel
from aibs_informatics_core.utils.hashing import sha256_hexdigest
from aibs_informatics_core.utils.json import JSON
from aibs_informatics_core.utils.time import get_current_time
from pydantic import Field

MANIFEST_FILENAME = "manifest.json"


def config_sha256(config: JSON) -> str:
    """Content hash of a serialized experiment configuration."""
    return sha256_hexdigest(content=json.dumps(config, sort_keys=True))


class Manifest(PydanticBaseModel):
    """Provenance of an output directory.

    Attributes:
        config_sha256: Hash of the fully materialized configuration.
        version: Package version that produced the outputs.
        started: Wall-clock start of the experiment.
        finished: Wall-clock end of the experiment.
        failures: Recorded per-width failures, ``{"width", "error"}``.
    """

    config_sha256: str
    version: str
    started: datetime = Field(default_factory=get_current_time)
    finished: datetime | None = None
    failures: list[dict[str, float | str]] = Field(default_factory=list)

    def finish(self, failures: list[dict[str, float | str]] | None = None) -> "Manifest":
        self.finished = get_current_time()
        if failures:
            self.failures = list(failures)
        return self

    def write(self, output_dir: Path) -> Path:
        path = output_dir / MANIFEST_FILENAME
        path.write_text(self.model_dump_json(indent=2) + "\n")
        return path

    @classmethod
    def read(cls, output_dir: Path) -> "Manifest":
        return cls.model_validate_json((output_dir / MANIFEST_FILENAME).read_text())
