"""Physical constants (SI, CODATA via scipy)."""

from scipy.constants import hbar as HBAR  # J s
from scipy.constants import k as KB  # J / K
from scipy.constants import c as C_LIGHT  # m / s

TWO_PI = 6.283185307179586

__all__ = ["HBAR", "KB", "C_LIGHT", "TWO_PI"]
