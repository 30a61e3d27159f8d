"""Abstract-index tensor algebra with exact rational-function coefficients."""

__version__ = "0.1.0"
