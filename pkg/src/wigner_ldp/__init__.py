"""Large-deviation rate functions for the largest eigenvalue of sub-Gaussian Wigner matrices."""

from __future__ import annotations

__version__ = "0.1.0"
