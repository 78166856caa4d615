# src/nehari/geometry/gasket.py
"""
The level-m vertex/cell complex of the Sierpinski gasket.

Points are tracked by exact integer barycentric weights over the three
corners with common denominator 2^m, so vertices shared by neighbouring cells
deduplicate exactly. Ids are deterministic: the corners q1, q2, q3 take ids
0, 1, 2 and every other vertex is numbered in the order it is first met when
cells are visited in lexicographic word order.
"""

import itertools
import math
from collections import defaultdict
from functools import cached_property, lru_cache
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from nehari.core.errors import AddressError, LevelMismatchError

DEFAULT_CORNERS: Tuple[Tuple[float, float], ...] = (
    (0.0, 0.0),
    (1.0, 0.0),
    (0.5, math.sqrt(3.0) / 2.0),
)

# Cell indices are stored as int32.
CELL_INDEX_MAX = np.iinfo(np.int32).max
MAX_LEVEL = int(math.floor(math.log(CELL_INDEX_MAX) / math.log(3)))


class CellAddress(BaseModel):
    """A word over {1,2,3} naming the cell F_w(S)."""
    word: str = ""

    @field_validator("word")
    @classmethod
    def _symbols(cls, value: str) -> str:
        if any(ch not in "123" for ch in value):
            raise ValueError(f"cell word {value!r} uses symbols outside {{1,2,3}}")
        return value

    @property
    def index(self) -> int:
        """Position of the cell in lexicographic order."""
        if not self.word:
            return 0
        return int("".join(str(int(ch) - 1) for ch in self.word), 3)

    def __len__(self) -> int:
        return len(self.word)


class GasketGraph(BaseModel):
    """
    Immutable level-m approximation of the gasket.

    vertices: (V, 2) coordinates, for output and rendering only
    cells: (3^m, 3) vertex ids, corner i of cell w is F_w q_i
    vertex_weight: quadrature weights of the normalized measure (sum to 1)
    vertex_keys: (V, 3) integer barycentric weights, denominator 2^m
    vertex_words: generating word of each vertex (cell word + corner index)
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    level: int = Field(..., ge=0)
    corners: Tuple[Tuple[float, float], ...]
    vertices: np.ndarray
    cells: np.ndarray
    boundary_ids: Tuple[int, int, int] = (0, 1, 2)
    vertex_weight: np.ndarray
    vertex_keys: np.ndarray
    vertex_words: Tuple[str, ...]

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_cells(self) -> int:
        return int(self.cells.shape[0])

    @cached_property
    def interior_mask(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[list(self.boundary_ids)] = False
        mask.flags.writeable = False
        return mask

    @cached_property
    def interior_ids(self) -> np.ndarray:
        ids = np.flatnonzero(self.interior_mask)
        ids.flags.writeable = False
        return ids

    @cached_property
    def edges(self) -> np.ndarray:
        """(3^{m+1}, 2) vertex-id pairs; each edge lies in exactly one cell."""
        c = self.cells
        e = np.concatenate([c[:, [0, 1]], c[:, [1, 2]], c[:, [0, 2]]], axis=0)
        e.flags.writeable = False
        return e

    @cached_property
    def cell_words(self) -> Tuple[str, ...]:
        return tuple("".join(w) for w in itertools.product("123", repeat=self.level))

    @cached_property
    def code_index(self) -> Tuple[np.ndarray, np.ndarray]:
        codes = _encode(self.vertex_keys, 1 << self.level)
        order = np.argsort(codes, kind="stable")
        return codes[order], order

    def embed(self, coarse: "GasketGraph") -> np.ndarray:
        """Ids in this graph of the vertices of a coarser graph on the same corners."""
        if coarse.level > self.level:
            raise ValueError(f"cannot embed level {coarse.level} into level {self.level}")
        if not np.allclose(np.asarray(coarse.corners), np.asarray(self.corners)):
            raise ValueError("graphs are built on different corners")
        scaled = coarse.vertex_keys * (1 << (self.level - coarse.level))
        codes = _encode(scaled, 1 << self.level)
        sorted_codes, order = self.code_index
        pos = np.searchsorted(sorted_codes, codes)
        return order[pos]

    def check_field(self, values: np.ndarray, what: str = "field") -> np.ndarray:
        """Return values as a float array, raising on a length mismatch."""
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != self.n_vertices:
            raise LevelMismatchError(self.n_vertices, int(arr.size), what)
        return arr


def _encode(keys: np.ndarray, denominator: int) -> np.ndarray:
    base = np.int64(denominator + 1)
    keys = keys.astype(np.int64)
    return (keys[..., 0] * base + keys[..., 1]) * base + keys[..., 2]


def build_gasket(
    level: int = 0,
    corners: Sequence[Sequence[float]] = DEFAULT_CORNERS,
) -> GasketGraph:
    """
    Build the level-m graph by applying the contractions F_i(x) = (x + q_i)/2.

    Raises:
        ValueError: negative level, level beyond the int32 cell index space,
            or coincident corners
    """
    if level < 0:
        raise ValueError(f"level must be nonnegative, got {level}")
    if level > MAX_LEVEL:
        raise ValueError(
            f"level {level} gives 3^{level} cells, beyond the cell index space (max level {MAX_LEVEL})"
        )
    q = np.asarray(corners, dtype=float)
    if q.shape != (3, 2):
        raise ValueError(f"expected 3 planar corners, got shape {q.shape}")
    for i, j in ((0, 1), (1, 2), (0, 2)):
        if np.allclose(q[i], q[j]):
            raise ValueError(f"corners {i + 1} and {j + 1} coincide")

    unit = np.eye(3, dtype=np.int64)
    bary = unit[None, :, :]
    for k in range(level):
        shift = np.int64(1) << k
        bary = np.concatenate([bary + shift * unit[i] for i in range(3)], axis=0)

    denominator = 1 << level
    flat = bary.reshape(-1, 3)
    codes = _encode(flat, denominator)
    uniq, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)

    priority = first.astype(np.int64)
    boundary_codes = _encode(unit * denominator, denominator)
    for j, code in enumerate(boundary_codes):
        priority[np.searchsorted(uniq, code)] = j - 3
    order = np.argsort(priority, kind="stable")
    new_id = np.empty_like(order)
    new_id[order] = np.arange(order.size)

    cells = new_id[inverse].reshape(-1, 3).astype(np.int32)
    keys = flat[first[order]]
    coords = keys.astype(float) @ q / denominator

    n_cells = cells.shape[0]
    counts = np.bincount(cells.ravel(), minlength=order.size)
    weight = counts / (3.0 * n_cells)

    words = ["".join(w) for w in itertools.product("123", repeat=level)]
    vertex_words = tuple(
        words[int(f) // 3] + str(int(f) % 3 + 1) for f in first[order]
    )

    for arr in (coords, cells, weight, keys):
        arr.flags.writeable = False

    return GasketGraph(
        level=level,
        corners=tuple((float(x), float(y)) for x, y in q),
        vertices=coords,
        cells=cells,
        boundary_ids=(0, 1, 2),
        vertex_weight=weight,
        vertex_keys=keys,
        vertex_words=vertex_words,
    )


def cell_vertex_ids(g: GasketGraph, addr: Union[CellAddress, str]) -> Tuple[int, int, int]:
    """Ids of F_w q1, F_w q2, F_w q3 for the cell at word w."""
    if isinstance(addr, str):
        try:
            addr = CellAddress(word=addr)
        except ValueError as e:
            raise AddressError(str(e)) from e
    if len(addr) != g.level:
        raise AddressError(f"word {addr.word!r} has length {len(addr)}, graph level is {g.level}")
    row = g.cells[addr.index]
    return int(row[0]), int(row[1]), int(row[2])


def _order_cell_members(g: GasketGraph, order: int) -> Tuple[List[np.ndarray], np.ndarray]:
    if not 0 <= order <= g.level:
        raise ValueError(f"order must lie in [0, {g.level}], got {order}")
    depth = g.level - order
    block = 3 ** depth
    n_order = 3 ** order
    members = [np.unique(g.cells[c * block:(c + 1) * block].ravel()) for c in range(n_order)]
    offsets = [j * (block - 1) // 2 for j in range(3)]
    corner_ids = np.array(
        [[g.cells[c * block + offsets[j], j] for j in range(3)] for c in range(n_order)],
        dtype=np.int64,
    )
    return members, corner_ids


def cell_neighborhoods(g: GasketGraph, order: int) -> List[np.ndarray]:
    """
    Vertex sets of every order-m' cell and of every pair of order-m' cells
    sharing a vertex. A vertex pair lies in one cell or in two adjacent cells
    exactly when it lies inside one of these sets.
    """
    members, corner_ids = _order_cell_members(g, order)
    owners = defaultdict(list)
    for c, row in enumerate(corner_ids):
        for vid in row:
            owners[int(vid)].append(c)

    groups = list(members)
    for vid in sorted(owners):
        touching = owners[vid]
        if len(touching) == 2:
            c, d = touching
            groups.append(np.union1d(members[c], members[d]))
    return groups


def same_or_adjacent_cell_pairs(g: GasketGraph, order: int) -> np.ndarray:
    """Sorted (k, 2) array of unordered vertex pairs i < j in the same or adjacent order-m' cells."""
    chunks = []
    for group in cell_neighborhoods(g, order):
        i, j = np.triu_indices(group.size, k=1)
        chunks.append(np.stack([group[i], group[j]], axis=1))
    if not chunks:
        return np.empty((0, 2), dtype=np.int64)
    return np.unique(np.concatenate(chunks, axis=0), axis=0)


def level_from_vertex_count(n_vertices: int) -> int:
    """Invert V_m = 3(3^m + 1)/2."""
    cells = (2 * n_vertices) // 3 - 1
    level = 0
    while 3 ** level < cells:
        level += 1
    if 3 * (3 ** level + 1) // 2 != n_vertices:
        raise ValueError(f"{n_vertices} is not a gasket vertex count")
    return level


@lru_cache(maxsize=32)
def cached_gasket(level: int, corners: Tuple[Tuple[float, float], ...] = DEFAULT_CORNERS) -> GasketGraph:
    """Shared immutable graphs for the multilevel routines."""
    return build_gasket(level, corners)
