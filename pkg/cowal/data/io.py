"""
Artifact I/O

Binary embedding and probability files, PGM masks and the CSV result files.
All binary formats are little-endian with fixed magic strings.
"""

from __future__ import annotations

import csv
import io
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import (
    BadMagic,
    EmptyInput,
    IoFailure,
    MalformedCsv,
    MismatchedGrids,
    MissingFile,
    NonFiniteValue,
    TrailingBytes,
    TruncatedFile,
)
from .types import ALCurve, EmbeddingMatrix, LabelMask, ProbabilityMap, normalize_rows

logger = logging.getLogger(__name__)

EMBEDDING_MAGIC = b"COWEMB1"
PROBABILITY_MAGIC = b"COWPRB1"


def read_raw(path: Path) -> bytes:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"'{path}' does not exist")
    try:
        return path.read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read '{path}': {e}") from e


def write_raw(path: Path, payload: bytes) -> None:
    try:
        Path(path).write_bytes(payload)
    except OSError as e:
        raise IoFailure(f"cannot write '{path}': {e}") from e


def split_header(
    raw: bytes, magic: bytes, fields: int, path: Path
) -> tuple[tuple[int, ...], bytes]:
    if raw[: len(magic)] != magic:
        raise BadMagic(f"'{path}' does not start with {magic.decode()}")
    header_end = len(magic) + 4 * fields
    if len(raw) < header_end:
        raise TruncatedFile(f"'{path}' ends inside its header")
    return struct.unpack(f"<{fields}I", raw[len(magic) : header_end]), raw[header_end:]


def unpack_payload(body: bytes, count: int, path: Path) -> np.ndarray:
    expected = 4 * count
    if len(body) < expected:
        raise TruncatedFile(f"'{path}' holds {len(body)} payload bytes, header declares {expected}")
    if len(body) > expected:
        raise TrailingBytes(f"'{path}' has {len(body) - expected} bytes past its payload")
    values = np.frombuffer(body, dtype="<f4").astype(np.float32)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue(f"'{path}' contains NaN or infinite values")
    return values


def read_matrix_header(path: Path) -> tuple[int, int]:
    """Rows and dims of an embedding file without loading the payload"""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"'{path}' does not exist")
    with open(path, "rb") as f:
        head = f.read(len(EMBEDDING_MAGIC) + 8)
    (rows, dims), _ = split_header(head, EMBEDDING_MAGIC, 2, path)
    return rows, dims


def read_matrix(path: Path, normalize: bool = True) -> EmbeddingMatrix:
    """
    Read an embedding file

    Args:
        path: File written by write_matrix
        normalize: Scale every row to unit length (rows already there are kept bit-exact)

    Returns:
        EmbeddingMatrix with one row per global frame index
    """
    raw = read_raw(path)
    (rows, dims), body = split_header(raw, EMBEDDING_MAGIC, 2, path)
    data = unpack_payload(body, rows * dims, path).reshape(rows, dims)
    if normalize:
        data = normalize_rows(data)
    logger.debug("read %dx%d embedding from %s", rows, dims, path)
    return EmbeddingMatrix(data)


def write_matrix(matrix: EmbeddingMatrix, path: Path) -> None:
    """Write an embedding file"""
    header = EMBEDDING_MAGIC + struct.pack("<II", matrix.rows, matrix.dims)
    write_raw(path, header + matrix.data.astype("<f4").tobytes())


def read_prob_map(path: Path) -> ProbabilityMap:
    """Read a probability file; a single sigmoid channel is expanded to two"""
    raw = read_raw(path)
    (height, width, classes), body = split_header(raw, PROBABILITY_MAGIC, 3, path)
    data = unpack_payload(body, height * width * classes, path).reshape(height, width, classes)
    return ProbabilityMap.from_raw(data)


def write_prob_map(prob_map: ProbabilityMap, path: Path) -> None:
    """Write a probability file, pixel-major then class"""
    header = PROBABILITY_MAGIC + struct.pack(
        "<III", prob_map.height, prob_map.width, prob_map.classes
    )
    write_raw(path, header + prob_map.data.astype("<f4").tobytes())


def read_mask(path: Path) -> LabelMask:
    """Read a binary PGM mask; pixel value is the class id"""
    raw = read_raw(path)
    try:
        with Image.open(io.BytesIO(raw)) as image:
            if image.format != "PPM" or image.mode != "L":
                raise IoFailure(f"'{path}' is not an 8-bit PGM")
            return LabelMask(np.asarray(image, dtype=np.uint8))
    except UnidentifiedImageError as e:
        raise IoFailure(f"'{path}' is not an image: {e}") from e


def write_mask(mask: LabelMask, path: Path) -> None:
    """Write a binary (P5) PGM mask with maxval 255"""
    buffer = io.BytesIO()
    Image.fromarray(np.asarray(mask.data, dtype=np.uint8)).save(buffer, format="PPM")
    write_raw(path, buffer.getvalue())


# CSV results


@dataclass(frozen=True)
class DiceRecord:
    """One row of the per-step DICE summary"""

    strategy: str
    seed: int
    step: int
    dice: float


def _open_for_write(path: Path):
    try:
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as e:
        raise IoFailure(f"cannot write '{path}': {e}") from e


def _read_rows(path: Path, header: Sequence[str] | None = None) -> list[list[str]]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"'{path}' does not exist")
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = [row for row in csv.reader(f) if row]
    if not rows:
        raise MalformedCsv(f"'{path}' is empty")
    if header is not None and rows[0] != list(header):
        raise MalformedCsv(f"'{path}' header {rows[0]} != {list(header)}")
    return rows


def write_curve_csv(curves: Sequence[ALCurve], labels: Sequence[str], path: Path) -> None:
    """
    Write AL curves as one column per strategy

    Args:
        curves: Curves sharing one step grid
        labels: Column label per curve
        path: Output file

    Raises:
        EmptyInput: No curves given
        MismatchedGrids: Curves disagree on their steps
    """
    if not curves:
        raise EmptyInput("no curves to write")
    if len(labels) != len(curves):
        raise MismatchedGrids(f"{len(curves)} curves but {len(labels)} labels")
    grid = curves[0].steps
    for label, curve in zip(labels, curves):
        if curve.steps != grid:
            raise MismatchedGrids(f"curve '{label}' has steps {curve.steps}, expected {grid}")

    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["step", *labels])
        for row, step in enumerate(grid):
            writer.writerow([step, *(f"{curve.scores[row]:.6f}" for curve in curves)])


def read_curve_csv(path: Path) -> tuple[list[str], list[int], list[list[float]]]:
    """
    Parse a curve CSV

    Returns:
        (labels, steps, one score column per label)
    """
    rows = _read_rows(path)
    header = rows[0]
    if len(header) < 2 or header[0] != "step":
        raise MalformedCsv(f"'{path}' header must be step,<label>,...")
    labels = header[1:]
    steps: list[int] = []
    columns: list[list[float]] = [[] for _ in labels]
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise MalformedCsv(
                f"'{path}' line {line} has {len(row)} fields, expected {len(header)}"
            )
        try:
            steps.append(int(row[0]))
            for column, value in zip(columns, row[1:]):
                column.append(float(value))
        except ValueError as e:
            raise MalformedCsv(f"'{path}' line {line}: {e}") from e
    if not steps:
        raise MalformedCsv(f"'{path}' has no data rows")
    return labels, steps, columns


def write_dice_csv(records: Sequence[DiceRecord], path: Path) -> None:
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["strategy", "seed", "step", "dice"])
        for r in records:
            writer.writerow([r.strategy, r.seed, r.step, f"{r.dice:.6f}"])


def read_dice_csv(path: Path) -> list[DiceRecord]:
    rows = _read_rows(path, ["strategy", "seed", "step", "dice"])
    try:
        return [DiceRecord(r[0], int(r[1]), int(r[2]), float(r[3])) for r in rows[1:]]
    except (ValueError, IndexError) as e:
        raise MalformedCsv(f"'{path}': {e}") from e


def write_aualc_csv(rows: Sequence[tuple[str, int, float]], path: Path) -> None:
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["strategy", "seed", "aualc"])
        for strategy, seed, value in rows:
            writer.writerow([strategy, seed, f"{value:.6f}"])


def write_reference_csv(references: dict[int, float], path: Path) -> None:
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["seed", "full_data_dice"])
        for seed in sorted(references):
            writer.writerow([seed, f"{references[seed]:.6f}"])


def read_reference_csv(path: Path) -> dict[int, float]:
    rows = _read_rows(path, ["seed", "full_data_dice"])
    try:
        return {int(r[0]): float(r[1]) for r in rows[1:]}
    except (ValueError, IndexError) as e:
        raise MalformedCsv(f"'{path}': {e}") from e
