"""Monte Carlo simulator for measurement-free quantum error correction."""

__version__ = "0.1.0"
