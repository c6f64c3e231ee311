"""
Run Options

Command-line values merged over Settings and validated in one place, so a
bad flag fails before any file is read.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..config import Settings
from ..errors import BadParams


class RunConfig(BaseModel):
    """Resolved values of one subcommand invocation (flag > env > default)"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str
    strategies: tuple[str, ...] = ()
    budget: int = Field(ge=1)
    steps: int = Field(ge=0)
    runs: int = Field(ge=1)
    seed: int = Field(ge=0)
    restarts: int = Field(ge=1)
    max_iter: int = Field(ge=1)
    tol: float = Field(gt=0)
    jobs: int = Field(ge=1)
    normalize: bool = True
    embedding: Optional[Path] = None
    out_dir: Optional[Path] = None

    @classmethod
    def resolve(cls, command: str, settings: Settings, **flags) -> RunConfig:
        """
        Merge command-line flags over settings

        Args:
            command: Subcommand name
            settings: Environment-backed defaults
            **flags: Flag values; None means "not given"

        Raises:
            BadParams: A value violates its constraint
        """
        values: dict[str, object] = dict(
            budget=settings.budget,
            steps=settings.steps,
            runs=settings.runs,
            seed=settings.seed,
            restarts=settings.restarts,
            max_iter=settings.max_iter,
            tol=settings.tol,
            jobs=settings.jobs,
            normalize=settings.normalize,
        )
        values.update({k: v for k, v in flags.items() if v is not None})
        try:
            return cls(command=command, **values)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(p) for p in first["loc"])
            raise BadParams(f"{command}: --{where.replace('_', '-')}: {first['msg']}") from e
