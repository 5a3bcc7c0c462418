"""Binary snapshots: one JSON header line, then raw float64 field blocks.

The header is UTF-8 JSON terminated by a newline. It records the grid, the
time, the parameters and, for every field, its name and shape. The blocks
follow in header order as little-endian float64 arrays in row-major order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import AbcdParams, WaveState
from .spectral import GridSpec

FORMAT = "abcd-snapshot/1"
_DTYPE = np.dtype("<f8")


def write_snapshot(path, state: WaveState, params: AbcdParams | None = None) -> Path:
    path = Path(path)
    g = state.grid
    fields = {"eta": state.eta, "V": state.V, "W": state.W}
    header = {
        "format": FORMAT,
        "grid": {"n": g.n, "N": g.N, "L": g.L},
        "t": float(state.t),
        "epsilon": None if params is None else params.epsilon,
        "params": None if params is None else params.as_dict(),
        "fields": [{"name": k, "shape": list(v.shape)} for k, v in fields.items()],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for v in fields.values():
            fh.write(np.ascontiguousarray(v, dtype=_DTYPE).tobytes(order="C"))
    return path


def read_snapshot(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Return ``(header, {name: array})``."""
    raw = Path(path).read_bytes()
    cut = raw.find(b"\n")
    if cut < 0:
        raise ValueError(f"{path}: missing snapshot header")
    try:
        header = json.loads(raw[:cut].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: unreadable snapshot header ({exc})") from None
    if header.get("format") != FORMAT:
        raise ValueError(f"{path}: unknown snapshot format {header.get('format')!r}")
    pos = cut + 1
    arrays = {}
    for spec in header["fields"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape))
        nbytes = count * _DTYPE.itemsize
        if pos + nbytes > len(raw):
            raise ValueError(f"{path}: truncated block for field {spec['name']!r}")
        arrays[spec["name"]] = np.frombuffer(raw, dtype=_DTYPE, count=count, offset=pos).reshape(shape).copy()
        pos += nbytes
    if pos != len(raw):
        raise ValueError(f"{path}: {len(raw) - pos} trailing bytes after the last block")
    return header, arrays


def load_state(path) -> WaveState:
    header, arrays = read_snapshot(path)
    grid = GridSpec(**header["grid"])
    return WaveState(grid, arrays["eta"], arrays["V"], W=arrays.get("W"), t=header["t"])
