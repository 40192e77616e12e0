"""
File artifacts: CSV tables, 8-bit grayscale maps and trajectory tables.

CSV files are comma-separated with a header row; floats are written with
17 significant digits so values round-trip exactly and reruns are
byte-identical.
"""

import csv
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np

from core.exceptions import DomainError, ScenarioError

PathLike = Union[str, Path]


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


@contextmanager
def open_output(path: PathLike, mode: str = "w") -> Iterator:
    """Open an output file, creating parent directories first"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {"newline": ""} if "b" not in mode else {}
    handle = open(target, mode, **kwargs)
    try:
        yield handle
    finally:
        handle.close()


def write_csv(path: PathLike, header: Sequence[str], columns: Sequence[Sequence]) -> Path:
    """
    Write column-oriented data as CSV.

    Args:
        path: Output file
        header: Column names
        columns: One sequence per column, all of equal length

    Returns:
        The written path
    """
    if len(header) != len(columns):
        raise DomainError("header and columns differ in length")
    lengths = {len(col) for col in columns}
    if len(lengths) > 1:
        raise DomainError(f"columns differ in length: {sorted(lengths)}")

    with open_output(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([format_value(v) for v in row])
    return Path(path)


def write_grayscale_map(path: PathLike, image: np.ndarray) -> Path:
    """
    Write a binary PGM (P5), max-normalised to 8 bits, row-major.

    Args:
        path: Output file
        image: 2-D array, first axis is the image row
    """
    data = np.asarray(image, dtype=float)
    if data.ndim != 2:
        raise DomainError("grayscale map needs a 2-D array")
    peak = float(np.max(data)) if data.size else 0.0
    scaled = np.zeros_like(data) if peak <= 0 else data / peak
    pixels = np.clip(np.rint(scaled * 255.0), 0, 255).astype(np.uint8)
    height, width = pixels.shape
    with open_output(path, "wb") as handle:
        handle.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        handle.write(np.ascontiguousarray(pixels).tobytes())
    return Path(path)


def read_trajectory_table(path: PathLike) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``z,x`` CSV (header row required)"""
    source = Path(path)
    if not source.is_file():
        raise ScenarioError(f"trajectory table not found: {source}")
    try:
        table = np.loadtxt(source, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise ScenarioError(f"cannot parse trajectory table {source}: {e}")
    if table.shape[1] != 2:
        raise ScenarioError(f"trajectory table {source} must have exactly two columns (z, x)")
    z, x = table[:, 0], table[:, 1]
    if np.any(np.diff(z) <= 0):
        raise ScenarioError(f"trajectory table {source}: z must be strictly increasing")
    return z, x
