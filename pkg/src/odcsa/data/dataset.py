"""Dataset directories: ``images/<id>.ppm`` with ``masks/<id>.pgm``."""
from __future__ import annotations

from pathlib import Path

from .netpbm import read_image, read_mask, write_pgm, write_ppm
from .sample import Sample


def list_ids(root) -> list[str]:
    root = Path(root)
    images = {p.stem for p in (root / "images").glob("*.ppm")}
    masks = {p.stem for p in (root / "masks").glob("*.pgm")}
    if not images:
        raise FileNotFoundError(f"{root}: no images/*.ppm found")
    missing = sorted(images - masks)
    if missing:
        raise FileNotFoundError(f"{root}: no mask for image id {missing[0]!r}")
    return sorted(images)


def load_dataset(root) -> list[Sample]:
    root = Path(root)
    return [
        Sample(image=read_image(root / "images" / f"{i}.ppm"), mask=read_mask(root / "masks" / f"{i}.pgm"), id=i)
        for i in list_ids(root)
    ]


def save_dataset(samples, root) -> None:
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    for s in samples:
        write_ppm(s.image, root / "images" / f"{s.id}.ppm")
        write_pgm(s.mask[0], root / "masks" / f"{s.id}.pgm")
