"""
gridstore: optimal storage placement on DC power-flow networks.

Builds the storage placement program of a network, solves it with an
interior-point method, evaluates the closed forms for single-generator
topologies and runs sweeps and verification campaigns.
"""

__version__ = "1.0.0"

__all__ = ["__version__"]
