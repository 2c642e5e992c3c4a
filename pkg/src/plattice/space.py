"""Grid functions and the norms used throughout: l^q, the Dirichlet p-seminorm
and the potential-weighted energy norm.

A grid function is a 1-D float array with one entry per vertex, in the
domain's row-major order. Edge sums run over each undirected edge exactly once
(ghost edges included), which is the same as the symmetric half-weighted sum
over ordered pairs.
"""
from __future__ import annotations

import warnings

import numpy as np

from .domain import Domain


class IndefiniteNormError(ArithmeticError):
    """The potential-weighted p-th power came out negative."""


def as_grid_function(d: Domain, values) -> np.ndarray:
    u = np.asarray(values, dtype=float)
    if u.ndim != 1:
        u = u.reshape(-1)
    if u.shape[0] != d.vertex_count:
        raise ValueError(
            f"grid function has {u.shape[0]} values, domain has {d.vertex_count} vertices"
        )
    if not np.all(np.isfinite(u)):
        raise ValueError("grid function contains non-finite values")
    return u


def edge_differences(d: Domain, u: np.ndarray) -> np.ndarray:
    """``u(head) - u(tail)`` for every edge, with the ghost value 0."""
    tail, head = d.edge_arrays
    ext = np.append(u, 0.0)
    return ext[head] - ext[tail]


def lq_norm(u: np.ndarray, q: float) -> float:
    u = np.asarray(u, dtype=float)
    if q == np.inf:
        return float(np.max(np.abs(u))) if u.size else 0.0
    if not q >= 1:
        raise ValueError(f"lq_norm needs q >= 1 or q = inf, got {q}")
    a = np.abs(u)
    if q == 1:
        return float(np.sum(a))
    # rescale by the max to keep large q from overflowing
    m = float(np.max(a)) if a.size else 0.0
    if m == 0.0:
        return 0.0
    return m * float(np.sum((a / m) ** q)) ** (1.0 / q)


def dirichlet_power(d: Domain, u: np.ndarray, p: float) -> float:
    """Sum over edges of ``|u(y) - u(x)|^p``."""
    return float(np.sum(np.abs(edge_differences(d, u)) ** p))


def dirichlet_norm(d: Domain, u: np.ndarray, p: float) -> float:
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    return dirichlet_power(d, u, p) ** (1.0 / p)


def e_norm_power(d: Domain, u: np.ndarray, V: np.ndarray, p: float) -> float:
    """``||u||^p``, allowed to be negative when ``V`` has a negative part."""
    return dirichlet_power(d, u, p) + float(np.sum(V * np.abs(u) ** p))


def e_norm(d: Domain, u: np.ndarray, V: np.ndarray | float, p: float) -> float:
    """Energy norm ``(sum_edges |grad u|^p + sum_x V(x) |u(x)|^p)^(1/p)``.

    A potential with a negative part is accepted with a warning; if it drives
    the p-th power below zero an :class:`IndefiniteNormError` is raised.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    V = np.broadcast_to(np.asarray(V, dtype=float), np.shape(u))
    total = e_norm_power(d, u, V, p)
    if np.any(V < 0):
        warnings.warn(
            "potential has a negative part; the energy norm is only a norm when the "
            "negative-part smallness check passes",
            stacklevel=2,
        )
        if total < 0:
            raise IndefiniteNormError(
                f"energy norm p-th power is negative ({total!r}); the negative part of V is too large"
            )
    return total ** (1.0 / p)
