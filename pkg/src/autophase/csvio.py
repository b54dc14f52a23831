"""CSV and image writers shared by the analysis modules.

Dialect: comma separated, ``#``-prefixed header comments of the form
``# key: <json>``, floats written with ``repr`` so they round-trip exactly.
Every file is written through a temporary file and renamed into place.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    return repr(float(x))


def atomic_write_bytes(path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialise {type(value).__name__}")


def header_lines(header: dict) -> list:
    return [
        f"# {key}: {json.dumps(value, sort_keys=True, default=_jsonable)}"
        for key, value in header.items()
    ]


def write_table(path, header: dict, columns: list, rows) -> Path:
    """Write ``rows`` (iterable of number sequences) under a comment header."""
    lines = header_lines(header)
    lines.append("# columns: " + ",".join(columns))
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return atomic_write_text(path, "\n".join(lines) + "\n")


def _cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def read_header(path) -> dict:
    header = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            if key == "columns":
                header[key] = value.split(",")
                continue
            header[key] = json.loads(value)
    return header


def read_table(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)


def write_pgm(path, image, lo: float = 0.0, hi: float = 1.0) -> Path:
    """8-bit binary graymap; row 0 of ``image`` is drawn at the bottom."""
    img = np.asarray(image, dtype=float)
    scaled = np.clip((img - lo) / (hi - lo), 0.0, 1.0)
    pix = np.round(scaled[::-1] * 255).astype(np.uint8)
    head = f"P5\n{pix.shape[1]} {pix.shape[0]}\n255\n".encode("ascii")
    return atomic_write_bytes(path, head + pix.tobytes())


def write_ppm(path, rgb) -> Path:
    pix = np.asarray(rgb, dtype=np.uint8)
    head = f"P6\n{pix.shape[1]} {pix.shape[0]}\n255\n".encode("ascii")
    return atomic_write_bytes(path, head + pix.tobytes())


def read_pnm(path) -> np.ndarray:
    """Read back a binary PGM/PPM written by this module."""
    data = Path(path).read_bytes()
    magic, dims, maxval, body = data.split(b"\n", 3)
    width, height = (int(x) for x in dims.split())
    channels = 3 if magic == b"P6" else 1
    arr = np.frombuffer(body, dtype=np.uint8)
    shape = (height, width, channels) if channels == 3 else (height, width)
    return arr.reshape(shape)
