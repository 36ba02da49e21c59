"""FrozenTree: modified frozen percolation on the degree-3 tree."""

__version__ = "0.1.0"
