# src/nehari/cli/render.py
"""SVG rendering of vertex fields, one filled triangle per cell."""

from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import PolyCollection  # noqa: E402
from matplotlib.colors import Normalize  # noqa: E402

from nehari.geometry.gasket import GasketGraph  # noqa: E402

CMAP = "RdBu_r"
COLLECTION_GID = "gasket-cells"


def cell_colors(values: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Mean of the three corner values of every cell."""
    return np.asarray(values, dtype=float)[cells].mean(axis=1)


def symmetric_norm(values: np.ndarray) -> Normalize:
    """Color scale centred at 0 so sign changes read as a colour change."""
    vmax = float(np.max(np.abs(values))) if np.size(values) else 0.0
    if vmax == 0.0:
        vmax = 1.0
    return Normalize(vmin=-vmax, vmax=vmax)


def render_field(
    graph: GasketGraph,
    values: np.ndarray,
    path: Union[str, Path],
    title: Optional[str] = None,
) -> Path:
    """Write the field as an SVG with a colour bar labelled by the data range."""
    values = graph.check_field(values)
    polys = np.asarray(graph.vertices)[graph.cells]
    colors = cell_colors(values, graph.cells)

    fig, ax = plt.subplots(figsize=(6.0, 5.4))
    coll = PolyCollection(polys, array=colors, cmap=CMAP, norm=symmetric_norm(colors), edgecolors="none")
    coll.set_gid(COLLECTION_GID)
    ax.add_collection(coll)
    ax.set_xlim(polys[..., 0].min(), polys[..., 0].max())
    ax.set_ylim(polys[..., 1].min(), polys[..., 1].max())
    ax.set_aspect("equal")
    ax.axis("off")
    bar = fig.colorbar(coll, ax=ax, shrink=0.8)
    bar.set_label(f"range [{values.min():.6g}, {values.max():.6g}]")
    if title:
        ax.set_title(title)

    path = Path(path)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return path
