"""wittkit: exact computation with quadratic forms, square classes and
norm-group certificates over decidable field towers."""

__version__ = "0.1.0"
