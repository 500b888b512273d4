from . import functional
from .gradcheck import finite_diff_check
from .prng import Prng, he_uniform_init
from .tensor import Tensor, is_grad_enabled, no_grad

__all__ = [
    "Prng",
    "Tensor",
    "finite_diff_check",
    "functional",
    "he_uniform_init",
    "is_grad_enabled",
    "no_grad",
]
