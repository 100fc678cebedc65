"""Zero-error arithmetic-sum computation over the three-source diamond network."""

__version__ = "0.1.0"
