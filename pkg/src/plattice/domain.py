"""Finite lattice truncations of Z^N and of Cayley graphs of Z^N.

Vertices carry coordinates in ``{0, ..., side-1}^dim`` and are indexed in
row-major (C) order, so vertex ``i`` has coordinates
``np.unravel_index(i, (side,) * dim)``. In ``dirichlet`` mode every offset that
leaves the box lands on a single ghost vertex whose value is pinned to zero;
in ``torus`` mode offsets wrap around each axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

GHOST = -1

BOUNDARIES = ("dirichlet", "torus")


class Edge(NamedTuple):
    a: int
    b: int

    @property
    def has_ghost(self) -> bool:
        return self.a == GHOST or self.b == GHOST


def unit_generators(dim: int) -> tuple[tuple[int, ...], ...]:
    gens = []
    for i in range(dim):
        e = [0] * dim
        e[i] = 1
        gens.append(tuple(e))
        e = [0] * dim
        e[i] = -1
        gens.append(tuple(e))
    return tuple(gens)


def _half_generators(gens: Sequence[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """One representative from each {s, -s} pair, in first-appearance order."""
    half = []
    seen = set()
    for s in gens:
        if s in seen:
            continue
        neg = tuple(-c for c in s)
        seen.add(s)
        seen.add(neg)
        half.append(s if s > neg else neg)
    return half


@dataclass(frozen=True)
class Domain:
    dim: int
    side: int
    boundary: str
    generators: tuple[tuple[int, ...], ...]
    # edge endpoints as vertex indices; the ghost is stored as ``vertex_count``
    _tail: np.ndarray = field(repr=False, compare=False)
    _head: np.ndarray = field(repr=False, compare=False)

    @property
    def vertex_count(self) -> int:
        return self.side**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dim

    @property
    def is_torus(self) -> bool:
        return self.boundary == "torus"

    @property
    def edge_count(self) -> int:
        return len(self._tail)

    @property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(tail, head) index arrays; the ghost vertex has index ``vertex_count``."""
        return self._tail, self._head

    def coords(self) -> np.ndarray:
        """Integer coordinates, shape (vertex_count, dim), row-major order."""
        grids = np.indices(self.shape).reshape(self.dim, -1)
        return grids.T.copy()

    def index(self, coord: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(int(c) for c in coord), self.shape))

    def degree(self) -> np.ndarray:
        """Number of edge endpoints at each real vertex (ghost edges included)."""
        n = self.vertex_count
        deg = np.bincount(self._tail, minlength=n + 1) + np.bincount(
            self._head, minlength=n + 1
        )
        return deg[:n]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "side": self.side,
            "boundary": self.boundary,
            "generators": [list(s) for s in self.generators],
        }

    def __reduce__(self):
        return (build_domain, (self.dim, self.side, self.boundary, self.generators))


def build_domain(
    dim: int,
    side: int,
    boundary: str = "dirichlet",
    generators: Sequence[Sequence[int]] | None = None,
) -> Domain:
    """Build a lattice box or torus with adjacency given by ``generators``.

    ``generators`` defaults to the unit vectors ``±e_i``. The set must be
    symmetric, duplicate free and must not contain the zero offset.
    """
    if int(dim) != dim or dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim!r}")
    if int(side) != side or side < 1:
        raise ValueError(f"side must be a positive integer, got {side!r}")
    dim, side = int(dim), int(side)
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")

    if generators is None:
        gens = unit_generators(dim)
    else:
        gens = tuple(tuple(int(c) for c in s) for s in generators)
    if not gens:
        raise ValueError("generator set is empty")
    for s in gens:
        if len(s) != dim:
            raise ValueError(f"generator {s} has length {len(s)}, expected {dim}")
        if not any(s):
            raise ValueError("generator set contains the zero offset")
    if len(set(gens)) != len(gens):
        raise ValueError("generator set contains duplicates")
    gset = set(gens)
    for s in gens:
        if tuple(-c for c in s) not in gset:
            raise ValueError(f"generator set is not symmetric: {s} has no inverse")

    tail, head = _build_edges(dim, side, boundary, _half_generators(gens))
    d = Domain(dim, side, boundary, gens, tail, head)
    if not _is_connected(d):
        raise ValueError(
            f"generators {list(gens)} do not give a connected graph on this {boundary} domain"
        )
    return d


def _build_edges(dim, side, boundary, half):
    shape = (side,) * dim
    n = side**dim
    coords = np.indices(shape).reshape(dim, -1).T
    idx = np.arange(n)
    tails, heads = [], []
    for s in half:
        s = np.asarray(s)
        if boundary == "torus":
            fwd = np.ravel_multi_index(tuple(((coords + s) % side).T), shape)
            tails.append(idx)
            heads.append(fwd)
            continue
        back = coords - s
        fwd = coords + s
        back_out = np.any((back < 0) | (back >= side), axis=1)
        fwd_in = np.all((fwd >= 0) & (fwd < side), axis=1)
        fwd_idx = np.full(n, n)
        fwd_idx[fwd_in] = np.ravel_multi_index(tuple(fwd[fwd_in].T), shape)
        # per vertex: (ghost, x) if x - s leaves the box, then (x, x + s)
        t = np.full((n, 2), -2)
        h = np.full((n, 2), -2)
        t[back_out, 0] = n
        h[back_out, 0] = idx[back_out]
        t[:, 1] = idx
        h[:, 1] = fwd_idx
        keep = t.ravel() != -2
        tails.append(t.ravel()[keep])
        heads.append(h.ravel()[keep])
    return (
        np.concatenate(tails).astype(np.intp),
        np.concatenate(heads).astype(np.intp),
    )


def _is_connected(d: Domain) -> bool:
    n = d.vertex_count
    if n == 1:
        return True
    tail, head = d.edge_arrays
    size = n + 1
    g = coo_matrix((np.ones(len(tail)), (tail, head)), shape=(size, size))
    _, labels = connected_components(g, directed=False)
    if d.is_torus:
        labels = labels[:n]
    return len(np.unique(labels)) == 1


def edges(d: Domain) -> list[Edge]:
    """Every undirected edge once; ghost endpoints are reported as ``GHOST``."""
    n = d.vertex_count
    tail, head = d.edge_arrays
    out = []
    for a, b in zip(tail.tolist(), head.tolist()):
        out.append(Edge(GHOST if a == n else a, GHOST if b == n else b))
    return out


def translate(d: Domain, u: np.ndarray, k: Sequence[int] | int) -> np.ndarray:
    """Shift ``u`` by ``k`` on a torus: ``v(x) = u(x - k)`` componentwise mod side."""
    if not d.is_torus:
        raise ValueError("translate requires a torus domain")
    k = np.broadcast_to(np.asarray(k, dtype=int), (d.dim,))
    grid = np.asarray(u).reshape(d.shape)
    return np.roll(grid, tuple(int(c) for c in k), axis=tuple(range(d.dim))).ravel()
