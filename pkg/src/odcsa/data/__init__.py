from .dataset import list_ids, load_dataset, save_dataset
from .netpbm import NetpbmError, read_image, read_mask, read_netpbm, write_pgm, write_ppm
from .sample import Sample
from .synth import SynthConfig, SynthDataset, rot90_sample, synth_generate
from .transforms import multiscale_pick, resize_image, resize_nearest, resize_sample, snap32

__all__ = [
    "NetpbmError",
    "Sample",
    "SynthConfig",
    "SynthDataset",
    "list_ids",
    "load_dataset",
    "multiscale_pick",
    "read_image",
    "read_mask",
    "read_netpbm",
    "resize_image",
    "resize_nearest",
    "resize_sample",
    "rot90_sample",
    "save_dataset",
    "snap32",
    "synth_generate",
    "write_pgm",
    "write_ppm",
]
