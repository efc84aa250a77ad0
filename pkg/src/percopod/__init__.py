"""Meshless RBF collocation for coffee-pod percolation.

Hydraulic head, solute transport, solid dissolution and heat on a
cylindrical point cloud, discretized by Kansa-type radial basis function
collocation and integrated as a linearly implicit differential-algebraic
system.  A one-dimensional finite-difference solver of the same physics
serves as an independent cross-check.
"""

__version__ = "0.1.0"
