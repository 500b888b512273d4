from .accounting import Accounting, count_params_flops, dense_branch_weights, rect_branch_weights
from .blocks import CBAM, CSA, ERA, MSFA, ODC, RFA, RFB, S2E, SRA, Encoder
from .checkpoint import load_model, load_state, save_model, save_state
from .layers import Conv2d, ConvStack, Module, pointwise
from .net import ABLATION_LADDER, Ablation, OdcSaNet

__all__ = [
    "ABLATION_LADDER",
    "Ablation",
    "Accounting",
    "CBAM",
    "CSA",
    "Conv2d",
    "ConvStack",
    "ERA",
    "Encoder",
    "MSFA",
    "Module",
    "ODC",
    "OdcSaNet",
    "RFA",
    "RFB",
    "S2E",
    "SRA",
    "count_params_flops",
    "dense_branch_weights",
    "load_model",
    "load_state",
    "pointwise",
    "rect_branch_weights",
    "save_model",
    "save_state",
]
