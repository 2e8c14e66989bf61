"""2D anisotropic Ginzburg-Landau gradient-flow laboratory.

Evolves a planar order parameter whose diffuse interface converges to
curve-shortening flow, and measures the sharp-interface diagnostics
(modulated energy, phase-indicator errors, level-set lengths, anchoring
defect, bulk director residual) against the evolving geometry.
"""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
