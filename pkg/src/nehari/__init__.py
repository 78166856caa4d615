# src/nehari/__init__.py
"""
Nehari: two-branch solutions of concave-convex p-Laplacian systems on the
Sierpinski gasket.
"""

__version__ = "0.1.0"
