# src/nehari/problem/fields.py
"""
Vertex fields and coefficient sources.

Inside the numerics a field is a plain float array indexed by vertex id;
VertexField is the validated record used where a field crosses a boundary
(problem specs, files, the command line).
"""

from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from nehari.core.errors import LevelMismatchError
from nehari.geometry.gasket import GasketGraph, level_from_vertex_count


class VertexField(BaseModel):
    """One real per level-m vertex, in id order."""
    model_config = ConfigDict(frozen=True)

    level: int = Field(..., ge=0)
    values: List[float]

    @model_validator(mode="after")
    def _length_matches_level(self) -> "VertexField":
        expected = 3 * (3 ** self.level + 1) // 2
        if len(self.values) != expected:
            raise LevelMismatchError(expected, len(self.values), f"level-{self.level} field")
        return self

    @classmethod
    def from_array(cls, values: np.ndarray) -> "VertexField":
        arr = np.asarray(values, dtype=float)
        return cls(level=level_from_vertex_count(arr.size), values=arr.tolist())

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def is_zero_trace(self) -> bool:
        return all(self.values[i] == 0.0 for i in (0, 1, 2))

    @property
    def is_nonnegative(self) -> bool:
        return min(self.values) >= 0.0


def preset_one(graph: GasketGraph) -> np.ndarray:
    return np.ones(graph.n_vertices)


def preset_bump(graph: GasketGraph, word: str) -> np.ndarray:
    """
    1 on the vertices of the sub-cell named by word (any length up to the
    graph level), 0 elsewhere.
    """
    if len(word) > graph.level:
        raise ValueError(f"bump word {word!r} is deeper than the graph level {graph.level}")
    depth = graph.level - len(word)
    out = np.zeros(graph.n_vertices)
    # every level-m cell whose word starts with `word`
    start = int("".join(str(int(ch) - 1) for ch in word), 3) * 3 ** depth if word else 0
    out[np.unique(graph.cells[start:start + 3 ** depth])] = 1.0
    return out


class FieldSource(BaseModel):
    """Where a coefficient field comes from: a named preset or a field file."""
    preset: Optional[Literal["one", "bump"]] = None
    word: str = ""
    file: Optional[Path] = None

    @field_validator("word")
    @classmethod
    def _word_symbols(cls, value: str) -> str:
        if any(ch not in "123" for ch in value):
            raise ValueError(f"cell word {value!r} uses symbols outside {{1,2,3}}")
        return value

    @model_validator(mode="after")
    def _exactly_one(self) -> "FieldSource":
        if (self.preset is None) == (self.file is None):
            raise ValueError("a field source names exactly one of 'preset' or 'file'")
        return self

    def resolve(self, graph: GasketGraph, base_dir: Optional[Path] = None) -> np.ndarray:
        if self.preset == "one":
            return preset_one(graph)
        if self.preset == "bump":
            return preset_bump(graph, self.word)
        path = self.file if base_dir is None or self.file.is_absolute() else base_dir / self.file
        return read_field(path, graph, nonnegative=True)


def read_field(path: Union[str, Path], graph: GasketGraph, nonnegative: bool = False) -> np.ndarray:
    """
    Read one real per line in vertex-id order.

    Raises:
        LevelMismatchError: wrong number of values for the graph
        ValueError: a negative value when nonnegative is requested
    """
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    values = np.array([float(ln) for ln in lines if ln], dtype=float)
    values = graph.check_field(values, f"field file {path}")
    if nonnegative and np.any(values < 0.0):
        first = int(np.flatnonzero(values < 0.0)[0])
        raise ValueError(f"field file {path} has a negative value at vertex {first}")
    return values


def write_field(path: Union[str, Path], values: np.ndarray) -> None:
    """Write one value per line with repr, so reading back is exact."""
    text = "\n".join(repr(float(x)) for x in np.asarray(values, dtype=float))
    Path(path).write_text(text + "\n")
