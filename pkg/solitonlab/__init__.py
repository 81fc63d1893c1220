"""One-dimensional bright-soliton simulator: coupled-Gaussian variational engine,
finite-difference lattice engine and the harness that cross-checks them."""

__version__ = "0.1.0"
