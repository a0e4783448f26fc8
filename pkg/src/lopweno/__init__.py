"""Fifth-order WENO finite-volume solvers with order-preserving Z-type weights."""

from .kernels import Scheme, SchemeConfig, reconstruct_interface, reconstruct_interface_right

__all__ = ["Scheme", "SchemeConfig", "reconstruct_interface", "reconstruct_interface_right"]
__version__ = "0.1.0"
