"""Named block vectors for primal-dual iterates.

Iterates in this package are tuples of variable blocks, e.g. (x1, x2, lam)
for linearly constrained problems or (x, y) for saddle problems. BlockVector
keeps the blocks named and supports the affine combinations the correction
and extrapolation steps need.
"""
from __future__ import annotations

import numpy as np


class BlockVector:
    """Immutable concatenation of named 1-d float blocks."""

    __slots__ = ("_names", "_blocks")

    def __init__(self, names, blocks):
        names = tuple(str(n) for n in names)
        if len(names) != len(set(names)):
            raise ValueError("block names must be unique")
        arrs = []
        for name, blk in zip(names, blocks, strict=True):
            a = np.array(blk, dtype=float)
            if a.ndim != 1:
                raise ValueError(f"block {name!r} must be 1-d, got shape {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"block {name!r} contains non-finite entries")
            a.setflags(write=False)
            arrs.append(a)
        self._names = names
        self._blocks = tuple(arrs)

    @property
    def names(self):
        return self._names

    @property
    def blocks(self):
        return self._blocks

    @property
    def dims(self):
        return tuple(b.size for b in self._blocks)

    def __len__(self):
        return len(self._blocks)

    def __getitem__(self, key):
        if isinstance(key, str):
            try:
                key = self._names.index(key)
            except ValueError:
                raise KeyError(f"no block named {key!r}") from None
        return self._blocks[key]

    def same_structure(self, other: "BlockVector") -> bool:
        return self._names == other._names and self.dims == other.dims

    def concat(self) -> np.ndarray:
        """Flatten to a single writable vector, blocks in order."""
        return np.concatenate(self._blocks) if self._blocks else np.zeros(0)

    @classmethod
    def from_concat(cls, names, dims, flat) -> "BlockVector":
        """Split a flat vector back into named blocks of the given sizes."""
        flat = np.asarray(flat, dtype=float)
        if flat.ndim != 1 or flat.size != sum(dims):
            raise ValueError(f"flat vector of size {flat.size} does not match dims {tuple(dims)}")
        out, pos = [], 0
        for d in dims:
            out.append(flat[pos:pos + d])
            pos += d
        return cls(names, out)

    @classmethod
    def zeros(cls, names, dims) -> "BlockVector":
        return cls(names, [np.zeros(d) for d in dims])

    def combine(self, other: "BlockVector", a: float, b: float) -> "BlockVector":
        """Blockwise a*self + b*other."""
        if not self.same_structure(other):
            raise ValueError("block structure mismatch")
        return BlockVector(self._names,
                           [a * u + b * v for u, v in zip(self._blocks, other._blocks)])

    def __add__(self, other):
        return self.combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self.combine(other, 1.0, -1.0)

    def __mul__(self, scalar):
        scalar = float(scalar)
        return BlockVector(self._names, [scalar * u for u in self._blocks])

    __rmul__ = __mul__

    def dot(self, other: "BlockVector") -> float:
        if not self.same_structure(other):
            raise ValueError("block structure mismatch")
        return float(sum(u @ v for u, v in zip(self._blocks, other._blocks)))

    def norm(self) -> float:
        return float(np.sqrt(sum(u @ u for u in self._blocks)))

    def __repr__(self):
        parts = ", ".join(f"{n}[{b.size}]" for n, b in zip(self._names, self._blocks))
        return f"BlockVector({parts})"
