"""Potentials, the weighted power nonlinearity, and sampled hypothesis checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .domain import Domain


def critical_exponent(p: float, dim: int) -> float | None:
    """Sobolev exponent ``N p / (N - p)``, or None when ``p >= N``."""
    if p >= dim:
        return None
    return dim * p / (dim - p)


def _cell_lookup(d: Domain, period: int, table: np.ndarray) -> np.ndarray:
    table = np.asarray(table, dtype=float)
    if table.ndim == 0:
        return np.full(d.vertex_count, float(table))
    expected = (period,) * d.dim
    if table.shape != expected:
        raise ValueError(f"cell table has shape {table.shape}, expected {expected}")
    cells = d.coords() % period
    return table[tuple(cells.T)]


@dataclass(frozen=True)
class Potential:
    """V(x) in one of three modes.

    * ``constant``: ``V = value``.
    * ``periodic``: ``V(x) = table[x mod period]``, table of shape ``(period,)*dim``.
    * ``decaying``: ``V(x) = limit + dev(x)`` with ``dev <= 0``; ``dev`` is a sum of
      point deviations ``{"at": coords, "value": v}`` and an optional Gaussian
      well ``-depth * exp(-|x - center|^2 / width^2)`` centred in the box.
    """

    mode: str = "constant"
    value: float = 0.0
    period: int = 1
    table: Any = None
    limit: float = 0.0
    deviations: tuple = ()
    depth: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.mode not in ("constant", "periodic", "decaying"):
            raise ValueError(f"unknown potential mode {self.mode!r}")
        if self.mode == "periodic" and (self.table is None or self.period < 1):
            raise ValueError("periodic potential needs period >= 1 and a cell table")
        if self.mode == "decaying":
            if any(float(dv["value"]) > 0 for dv in self.deviations) or self.depth < 0:
                raise ValueError("decaying potential must satisfy V <= V_inf (deviations <= 0)")

    def values(self, d: Domain) -> np.ndarray:
        if self.mode == "constant":
            return np.full(d.vertex_count, float(self.value))
        if self.mode == "periodic":
            if d.is_torus and d.side % self.period:
                raise ValueError(
                    f"period {self.period} does not divide torus side {d.side}"
                )
            return _cell_lookup(d, self.period, self.table)
        V = np.full(d.vertex_count, float(self.limit))
        if self.depth:
            center = (d.side - 1) / 2.0
            r2 = np.sum((d.coords() - center) ** 2, axis=1)
            V -= self.depth * np.exp(-r2 / self.width**2)
        for dv in self.deviations:
            V[d.index(dv["at"])] += float(dv["value"])
        return V

    @property
    def supremum_limit(self) -> float | None:
        return float(self.limit) if self.mode == "decaying" else None

    def to_dict(self) -> dict:
        if self.mode == "constant":
            return {"mode": "constant", "value": self.value}
        if self.mode == "periodic":
            return {
                "mode": "periodic",
                "period": self.period,
                "table": np.asarray(self.table, dtype=float).tolist(),
            }
        return {
            "mode": "decaying",
            "limit": self.limit,
            "deviations": [dict(dv) for dv in self.deviations],
            "depth": self.depth,
            "width": self.width,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Potential":
        mode = data.get("mode", "constant")
        if mode == "constant":
            return cls("constant", value=float(data.get("value", 0.0)))
        if mode == "periodic":
            return cls("periodic", period=int(data["period"]), table=data["table"])
        devs = tuple(
            {"at": [int(c) for c in dv["at"]], "value": float(dv["value"])}
            for dv in data.get("deviations", [])
        )
        return cls(
            "decaying",
            limit=float(data["limit"]),
            deviations=devs,
            depth=float(data.get("depth", 0.0)),
            width=float(data.get("width", 1.0)),
        )


@dataclass(frozen=True)
class PowerNonlinearity:
    """``f(x, t) = a(x) |t|^(q-2) t`` with primitive ``F(x, t) = a(x) |t|^q / q``.

    The weight ``a`` is a positive constant or a positive periodic cell table.
    """

    q: float
    weight: Any = 1.0
    period: int = 1
    family: str = field(default="power", init=False)

    def __post_init__(self):
        if not self.q > 1:
            raise ValueError(f"power exponent q must exceed 1, got {self.q}")
        if np.any(np.asarray(self.weight, dtype=float) <= 0):
            raise ValueError("weights a(x) must be strictly positive")

    def weights(self, d: Domain) -> np.ndarray:
        w = np.asarray(self.weight, dtype=float)
        if w.ndim == 0:
            return np.full(d.vertex_count, float(w))
        if d.is_torus and d.side % self.period:
            raise ValueError(f"period {self.period} does not divide torus side {d.side}")
        return _cell_lookup(d, self.period, w)

    def f(self, t, a=1.0):
        t = np.asarray(t, dtype=float)
        return a * np.sign(t) * np.abs(t) ** (self.q - 1)

    def F(self, t, a=1.0):
        t = np.asarray(t, dtype=float)
        return a * np.abs(t) ** self.q / self.q

    def distinct_weights(self) -> np.ndarray:
        return np.unique(np.asarray(self.weight, dtype=float).ravel())

    @property
    def is_odd(self) -> bool:
        return True

    def to_dict(self) -> dict:
        w = np.asarray(self.weight, dtype=float)
        weight = float(w) if w.ndim == 0 else {"period": self.period, "table": w.tolist()}
        return {"family": "power", "q": self.q, "weight": weight}

    @classmethod
    def from_dict(cls, data: dict) -> "PowerNonlinearity":
        if data.get("family", "power") != "power":
            raise ValueError(f"unsupported nonlinearity family {data.get('family')!r}")
        w = data.get("weight", 1.0)
        if isinstance(w, dict):
            return cls(float(data["q"]), weight=w["table"], period=int(w["period"]))
        return cls(float(data["q"]), weight=float(w))


def f_eval(nl: PowerNonlinearity, d: Domain, x: int | Sequence[int], t: float) -> float:
    """f at vertex ``x`` (index or coordinates)."""
    i = x if isinstance(x, (int, np.integer)) else d.index(x)
    return float(nl.f(t, nl.weights(d)[i]))


def F_eval(nl: PowerNonlinearity, d: Domain, x: int | Sequence[int], t: float) -> float:
    i = x if isinstance(x, (int, np.integer)) else d.index(x)
    return float(nl.F(t, nl.weights(d)[i]))


# ---------------------------------------------------------------------------
# sampled hypothesis checks

SAMPLE_LO, SAMPLE_HI, SAMPLE_POINTS = 1e-6, 1e6, 121
SLOPE_FLOOR = 1e-3


@dataclass
class ConditionResult:
    name: str
    passed: bool | None  # None when skipped
    detail: str
    witness: dict = field(default_factory=dict)

    @property
    def skipped(self) -> bool:
        return self.passed is None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": "skipped" if self.skipped else ("pass" if self.passed else "fail"),
            "detail": self.detail,
            "witness": self.witness,
        }


@dataclass
class GrowthReport:
    p: float
    dim: int
    critical: float | None
    conditions: list[ConditionResult]

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failures(self) -> list[ConditionResult]:
        return [c for c in self.conditions if c.passed is False]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "dim": self.dim,
            "critical_exponent": self.critical,
            "conditions": [c.to_dict() for c in self.conditions],
        }


def _sample_grid(lo=SAMPLE_LO, hi=SAMPLE_HI, n=SAMPLE_POINTS) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), n)


def _first_non_increase(values: np.ndarray, rtol: float = 1e-12) -> int | None:
    # increments below rtol * |value| are rounding noise, not growth
    bad = np.nonzero(np.diff(values) <= rtol * np.abs(values[:-1]))[0]
    return int(bad[0]) if bad.size else None


def check_growth_conditions(
    nl: PowerNonlinearity, p: float, dim: int, grid: np.ndarray | None = None
) -> GrowthReport:
    """Sample the growth hypotheses on a log-spaced grid for every distinct weight.

    ``growth`` checks ``f <= A (1 + |t|^(Q-1))`` with some ``Q > p*``;
    ``small`` checks that ``f / |t|^(p*-1)`` decreases strictly as ``t -> 0``
    with a terminal log-log slope of at least ``SLOPE_FLOOR``;
    ``monotone`` checks strict increase of ``f / |t|^(p-1)`` on each half line;
    ``superlinear`` checks that ``F / |t|^p`` increases without levelling off.
    """
    t = _sample_grid() if grid is None else np.sort(np.asarray(grid, dtype=float))
    t = t[t > 0]
    pstar = critical_exponent(p, dim)
    weights = nl.distinct_weights()
    out = []

    # growth bound
    Q = nl.q if pstar is None else max(nl.q, np.nextafter(pstar, np.inf))
    A = float(weights.max())
    ts = np.concatenate([-t[::-1], t])
    bound = A * (1 + np.abs(ts) ** (Q - 1))
    worst = max(float(np.max(nl.f(ts, a) - bound)) for a in weights)
    out.append(
        ConditionResult(
            "growth",
            worst <= 0,
            f"f(x,t) <= {A:g}(1 + |t|^{Q:g}-1) on the sample grid",
            {"Q": float(Q), "max_excess": worst},
        )
    )

    # small amplitude
    if pstar is None:
        out.append(
            ConditionResult("small", None, f"skipped: p = {p:g} >= N = {dim}, p* undefined")
        )
    else:
        small = t[t <= 1.0][::-1]  # decreasing toward 0
        res = None
        for a in weights:
            for sgn in (1.0, -1.0):
                r = np.abs(nl.f(sgn * small, a)) / small ** (pstar - 1)
                k = _first_non_increase(-r)
                slope = np.log(r[-2] / r[-1]) / np.log(small[-2] / small[-1]) if r[-1] > 0 else np.inf
                if k is not None or not slope >= SLOPE_FLOOR:
                    res = ConditionResult(
                        "small",
                        False,
                        f"|f(x,t)|/|t|^(p*-1) does not vanish as t -> 0 (p* = {pstar:g})",
                        {
                            "weight": float(a),
                            "t": float(sgn * small[k + 1] if k is not None else sgn * small[-1]),
                            "ratio": float(r[k + 1] if k is not None else r[-1]),
                            "terminal_slope": float(slope),
                        },
                    )
                    break
            if res:
                break
        out.append(
            res
            or ConditionResult(
                "small", True, f"|f|/|t|^(p*-1) decreases to 0 as t -> 0 (p* = {pstar:g})"
            )
        )

    # monotone ratio
    res = None
    for a in weights:
        pos = nl.f(t, a) / t ** (p - 1)
        neg = nl.f(-t[::-1], a) / t[::-1] ** (p - 1)
        for half, ts_, vals in (("positive", t, pos), ("negative", -t[::-1], neg)):
            k = _first_non_increase(vals)
            if k is not None:
                res = ConditionResult(
                    "monotone",
                    False,
                    f"f(x,t)/|t|^(p-1) is not strictly increasing on the {half} half line",
                    {"weight": float(a), "t1": float(ts_[k]), "t2": float(ts_[k + 1]),
                     "ratio1": float(vals[k]), "ratio2": float(vals[k + 1])},
                )
                break
        if res:
            break
    out.append(
        res or ConditionResult("monotone", True, "f(x,t)/|t|^(p-1) strictly increasing")
    )

    # superlinear primitive
    large = t[t >= 1.0]
    res = None
    for a in weights:
        for sgn in (1.0, -1.0):
            r = nl.F(sgn * large, a) / large**p
            k = _first_non_increase(r)
            slope = np.log(r[-1] / r[-2]) / np.log(large[-1] / large[-2]) if r[-2] > 0 else 0.0
            if k is not None or not slope >= SLOPE_FLOOR:
                res = ConditionResult(
                    "superlinear",
                    False,
                    "F(x,t)/|t|^p does not grow without bound",
                    {"weight": float(a), "t": float(sgn * large[(k or 0) + 1]),
                     "ratio": float(r[(k or 0) + 1]), "terminal_slope": float(slope)},
                )
                break
        if res:
            break
    out.append(res or ConditionResult("superlinear", True, "F(x,t)/|t|^p grows unboundedly"))
    return GrowthReport(p, dim, pstar, out)


def negative_part(V: np.ndarray) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    return (np.abs(V) - V) / 2


def negative_part_check(
    V: np.ndarray, p: float, r: float, S_estimate: float
) -> dict:
    """``||V_-||`` in ``l^(r/(r-p))`` compared against ``S_estimate^p``."""
    if not r > p:
        raise ValueError(f"need r > p, got r={r}, p={p}")
    from .space import lq_norm

    exponent = r / (r - p)
    norm = lq_norm(negative_part(V), exponent)
    threshold = S_estimate**p
    return {"norm": norm, "exponent": exponent, "threshold": threshold, "passed": norm < threshold}
