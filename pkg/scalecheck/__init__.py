"""Covariance-structure estimation under alternative latent scalings."""

__version__ = "0.1.0"
