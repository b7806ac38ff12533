"""Prediction-preserving word swaps that make word attributions fragile."""

__version__ = "0.1.0"
