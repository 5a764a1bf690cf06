"""Rewrite nested array quantifiers into trigger-friendly single-variable form."""

__version__ = "0.1.0"
