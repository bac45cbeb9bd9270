"""Exact computations of stable Calabi-Yau dimensions for self-injective algebras of finite type."""

__version__ = "0.1.0"
