"""Energy functional, its derivative pairing and the Euler-Lagrange residual."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import Domain
from .model import PowerNonlinearity, Potential
from .space import edge_differences, e_norm_power, lq_norm


def signed_power(s: np.ndarray, e: float) -> np.ndarray:
    """``|s|^(e-1) s`` written as ``sign(s) |s|^e``; zero at ``s = 0`` for any ``e > 0``."""
    return np.sign(s) * np.abs(s) ** e


@dataclass(frozen=True)
class Problem:
    domain: Domain
    potential: Potential
    nonlinearity: PowerNonlinearity
    p: float
    V: np.ndarray = field(init=False, repr=False, compare=False)
    a: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        object.__setattr__(self, "V", self.potential.values(self.domain))
        object.__setattr__(self, "a", self.nonlinearity.weights(self.domain))

    def f(self, u: np.ndarray) -> np.ndarray:
        return self.nonlinearity.f(u, self.a)

    def F(self, u: np.ndarray) -> np.ndarray:
        return self.nonlinearity.F(u, self.a)

    def norm_power(self, u: np.ndarray) -> float:
        """``||u||^p`` (may be negative for an indefinite potential)."""
        return e_norm_power(self.domain, u, self.V, self.p)

    def j_pairing(self, u: np.ndarray, v: np.ndarray) -> float:
        """``<J(u), v>``: the derivative of ``||u||^p / p`` applied to ``v``."""
        p = self.p
        du = edge_differences(self.domain, u)
        dv = edge_differences(self.domain, v)
        return float(np.sum(signed_power(du, p - 1) * dv)) + float(
            np.sum(self.V * signed_power(u, p - 1) * v)
        )

    def with_potential(self, potential: Potential) -> "Problem":
        return Problem(self.domain, potential, self.nonlinearity, self.p)


def energy(pr: Problem, u: np.ndarray) -> float:
    return pr.norm_power(u) / pr.p - float(np.sum(pr.F(u)))


def pairing(pr: Problem, u: np.ndarray, v: np.ndarray) -> float:
    """``<Phi'(u), v>``."""
    return pr.j_pairing(u, v) - float(np.sum(pr.f(u) * v))


def minus_p_laplacian(d: Domain, u: np.ndarray, p: float) -> np.ndarray:
    """``-Delta_p u(x) = sum_{y ~ x} |u(x) - u(y)|^(p-2) (u(x) - u(y))``."""
    n = d.vertex_count
    tail, head = d.edge_arrays
    flux = signed_power(edge_differences(d, u), p - 1)
    out = np.bincount(tail, weights=-flux, minlength=n + 1)
    out += np.bincount(head, weights=flux, minlength=n + 1)
    return out[:n]


def residual(pr: Problem, u: np.ndarray) -> np.ndarray:
    """Pointwise ``-Delta_p u + V |u|^(p-2) u - f(x, u)``."""
    return (
        minus_p_laplacian(pr.domain, u, pr.p)
        + pr.V * signed_power(u, pr.p - 1)
        - pr.f(u)
    )


def residual_norm(pr: Problem, u: np.ndarray) -> float:
    """Residual in the dual exponent ``p / (p - 1)``."""
    return lq_norm(residual(pr, u), pr.p / (pr.p - 1))


def pairing_scale(pr: Problem, u: np.ndarray, v: np.ndarray) -> float:
    """Sum of absolute values of the terms in ``<Phi'(u), v>``; a natural size for relative errors."""
    p = pr.p
    du = edge_differences(pr.domain, u)
    dv = edge_differences(pr.domain, v)
    return float(
        np.sum(np.abs(signed_power(du, p - 1) * dv))
        + np.sum(np.abs(pr.V * signed_power(u, p - 1) * v))
        + np.sum(np.abs(pr.f(u) * v))
    )
