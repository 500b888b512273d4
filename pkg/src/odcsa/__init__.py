"""Orthogonal-direction, scale-aware polyp segmentation on a numpy autograd core."""
from .config import Config, load_config, parse_config
from .nn import ABLATION_LADDER, Ablation, OdcSaNet
from .train import train

__version__ = "0.1.0"

__all__ = ["ABLATION_LADDER", "Ablation", "Config", "OdcSaNet", "load_config", "parse_config", "train"]
