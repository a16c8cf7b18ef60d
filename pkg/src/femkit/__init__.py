"""Formula evolution map mining and educational-resource ranking."""

__version__ = "0.1.0"
