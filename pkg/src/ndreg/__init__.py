"""Interior point solver with dynamic non-diagonal regularization."""

__version__ = "0.1.0"
