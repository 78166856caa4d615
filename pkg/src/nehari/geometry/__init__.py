# src/nehari/geometry/__init__.py
"""
Level-m graph approximations of the Sierpinski gasket.
"""

from nehari.geometry.gasket import (
    CellAddress,
    GasketGraph,
    DEFAULT_CORNERS,
    MAX_LEVEL,
    build_gasket,
    cached_gasket,
    cell_vertex_ids,
    cell_neighborhoods,
    same_or_adjacent_cell_pairs,
    level_from_vertex_count,
)

__all__ = [
    "CellAddress",
    "GasketGraph",
    "DEFAULT_CORNERS",
    "MAX_LEVEL",
    "build_gasket",
    "cached_gasket",
    "cell_vertex_ids",
    "cell_neighborhoods",
    "same_or_adjacent_cell_pairs",
    "level_from_vertex_count",
]
