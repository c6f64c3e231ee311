"""
Dataset Manifest

JSON manifest parsing and writing. Structure is validated with pydantic,
cross-file consistency (existing paths, embedding row count) by hand.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import InconsistentCounts, IoFailure, MissingFile, SchemaViolation
from .io import read_matrix_header
from .types import DatasetManifest, VideoEntry

logger = logging.getLogger(__name__)


class FrameSchema(BaseModel):
    """One frame entry; a frame with a mask counts as labeled"""

    model_config = ConfigDict(extra="forbid")

    prob_map: Optional[str] = None
    mask: Optional[str] = None


class VideoSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int = Field(ge=0)
    frames: list[FrameSchema] = Field(min_length=1)


class ManifestSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    videos: list[VideoSchema] = Field(min_length=1)
    embedding_path: str


def _resolve(base: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    path = Path(value).expanduser()
    return path if path.is_absolute() else base / path


def _require(path: Path | None, what: str) -> None:
    if path is not None and not path.is_file():
        raise MissingFile(f"{what} '{path}' does not exist")


def parse_manifest(path: Path) -> DatasetManifest:
    """
    Parse and validate a manifest file

    Args:
        path: JSON manifest

    Returns:
        DatasetManifest with absolute artifact paths

    Raises:
        MissingFile: Manifest or a referenced file is missing
        SchemaViolation: Field missing, of the wrong kind, or video ids not dense
        InconsistentCounts: Embedding rows differ from the total frame count
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest '{path}' does not exist")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"manifest '{path}' is not valid JSON: {e}") from e
    except OSError as e:
        raise IoFailure(f"cannot read manifest '{path}': {e}") from e

    try:
        schema = ManifestSchema.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise SchemaViolation(f"manifest '{path}': {where}: {first['msg']}") from e

    ids = [v.id for v in schema.videos]
    if len(set(ids)) != len(ids):
        raise SchemaViolation(f"manifest '{path}' has duplicate video ids")
    if sorted(ids) != list(range(len(ids))):
        raise SchemaViolation(f"manifest '{path}' video ids are not dense 0..{len(ids) - 1}")

    base = path.parent
    videos = []
    for video in sorted(schema.videos, key=lambda v: v.id):
        prob_maps = tuple(_resolve(base, f.prob_map) for f in video.frames)
        masks = tuple(_resolve(base, f.mask) for f in video.frames)
        for p in prob_maps:
            _require(p, "probability map")
        for m in masks:
            _require(m, "mask")
        videos.append(
            VideoEntry(
                video_id=video.id,
                frame_count=len(video.frames),
                prob_maps=prob_maps,
                masks=masks,
            )
        )

    embedding_path = _resolve(base, schema.embedding_path)
    assert embedding_path is not None
    _require(embedding_path, "embedding file")
    manifest = DatasetManifest(videos=tuple(videos), embedding_path=embedding_path)

    rows, _ = read_matrix_header(embedding_path)
    if rows != manifest.total_frames:
        raise InconsistentCounts(
            f"manifest lists {manifest.total_frames} frames but '{embedding_path}' has {rows} rows"
        )

    logger.info(
        "loaded manifest %s: %d videos, %d frames, %d labeled",
        path,
        manifest.num_videos,
        manifest.total_frames,
        len(manifest.labeled_frames()),
    )
    return manifest


def write_manifest(manifest: DatasetManifest, path: Path) -> None:
    """Write a manifest, storing artifact paths relative to its directory"""
    path = Path(path)
    base = path.parent.resolve()

    def rel(p: Path | None) -> str | None:
        if p is None:
            return None
        return Path(os.path.relpath(Path(p).resolve(), base)).as_posix()

    schema = ManifestSchema(
        videos=[
            VideoSchema(
                id=v.video_id,
                frames=[
                    FrameSchema(prob_map=rel(pm), mask=rel(m))
                    for pm, m in zip(v.prob_maps, v.masks)
                ],
            )
            for v in manifest.videos
        ],
        embedding_path=rel(manifest.embedding_path) or "",
    )
    try:
        path.write_text(schema.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write manifest '{path}': {e}") from e
