"""Simulate lexical semantic change from sense-annotated corpora and evaluate change-detection models."""

__version__ = "0.1.0"
