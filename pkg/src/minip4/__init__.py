"""MiniP4: a small P4-like compiler with translation validation and model-based testing."""
__version__ = "0.1.0"
