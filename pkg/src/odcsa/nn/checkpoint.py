"""Binary checkpoint format.

Layout (little-endian)::

    b"ODCSA1\\n"
    u32 tensor count
    per tensor: u16 name length, name (utf-8), u8 rank, rank x u32 dims,
                float32 payload (C order)
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .net import OdcSaNet, ablation_from_names

MAGIC = b"ODCSA1\n"


class CheckpointError(ValueError):
    pass


def save_state(state: dict[str, np.ndarray], path) -> None:
    chunks = [MAGIC, struct.pack("<I", len(state))]
    for name, arr in state.items():
        raw = name.encode("utf-8")
        arr = np.ascontiguousarray(arr, dtype="<f4")
        chunks.append(struct.pack("<H", len(raw)))
        chunks.append(raw)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_state(path) -> dict[str, np.ndarray]:
    buf = Path(path).read_bytes()
    if not buf.startswith(MAGIC):
        raise CheckpointError(f"{path}: bad magic bytes, not an ODCSA1 checkpoint")
    pos = len(MAGIC)

    def take(fmt):
        nonlocal pos
        size = struct.calcsize(fmt)
        if pos + size > len(buf):
            raise CheckpointError(f"{path}: truncated at byte {pos}")
        vals = struct.unpack_from(fmt, buf, pos)
        pos += size
        return vals

    (count,) = take("<I")
    state = {}
    for _ in range(count):
        (name_len,) = take("<H")
        name = bytes(take(f"<{name_len}s")[0]).decode("utf-8")
        (rank,) = take("<B")
        dims = take(f"<{rank}I") if rank else ()
        n = int(np.prod(dims)) if dims else 1
        payload = take(f"<{4 * n}s")[0]
        state[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float64)
    if pos != len(buf):
        raise CheckpointError(f"{path}: {len(buf) - pos} trailing bytes after last tensor")
    return state


def model_state(model) -> dict[str, np.ndarray]:
    return {name: p.data for name, p in model.named_parameters()}


def save_model(model, path) -> None:
    save_state(model_state(model), path)


def load_into(model, state: dict[str, np.ndarray]) -> None:
    params = dict(model.named_parameters())
    missing = set(params) - set(state)
    extra = set(state) - set(params)
    if missing or extra:
        raise CheckpointError(f"parameter mismatch: missing {sorted(missing)[:3]}, unexpected {sorted(extra)[:3]}")
    for name, p in params.items():
        if p.data.shape != state[name].shape:
            raise CheckpointError(f"{name}: shape {state[name].shape} does not match model {p.data.shape}")
        p.data[...] = state[name]


def load_model(path) -> OdcSaNet:
    """Rebuild a network whose structure is implied by the stored names and shapes."""
    state = load_state(path)
    ablation = ablation_from_names(state)
    widths = tuple(state[f"encoder.stage{i}.1.weight"].shape[0] for i in range(1, 5))
    ch = state["rfb1.fuse.weight"].shape[0]
    model = OdcSaNet(seed=0, ablation=ablation, ch=ch, widths=widths)
    load_into(model, state)
    return model
