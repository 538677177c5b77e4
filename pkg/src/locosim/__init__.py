"""Deterministic simulator and autonomy stack for the LoCO micro-AUV."""

__version__ = "0.1.0"
