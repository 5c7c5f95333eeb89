"""llsh: lattice-based locality-sensitive hashing for l2 nearest neighbor
search, with the numerics to estimate collision curves, LSH exponents, and
random-lattice statistics."""

__version__ = "0.1.0"
