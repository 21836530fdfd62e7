"""Exact computations with derivators on finite shapes.

Two concrete models are provided: diagrams of finite-dimensional rational
vector spaces with strict Kan extensions (``repmodel``) and diagrams of
bounded rational chain complexes over finite posets with homotopy Kan
extensions (``stablemodel``).
"""

__version__ = "0.1.0"
