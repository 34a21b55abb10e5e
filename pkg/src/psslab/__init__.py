"""Matrix realizations of pseudosupersymmetric quantum mechanics and their numerical checks."""

__version__ = "0.1.0"
