"""Multi-start search for geometrically distinct solutions on a torus.

Two solutions are the same up to geometry when one is a translate of the other
by a multiple of the period ``T``. On a torus of side ``L`` that shift group has
``(L/T)^N`` elements, so orbit distances are computed by scanning all of them.
"""
from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .domain import translate
from .energy import Problem
from .solver import SolverConfig, SolveResult, SolverError, bump, ground_state
from .space import e_norm_power

log = logging.getLogger(__name__)

THREADS_ENV = "PLATTICE_THREADS"


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _shifts(pr: Problem, T: int):
    d = pr.domain
    if not d.is_torus:
        raise ValueError("orbit computations need a torus domain")
    if T < 1 or d.side % T:
        raise ValueError(f"period {T} does not divide side {d.side}")
    steps = range(0, d.side, T)
    return itertools.product(steps, repeat=d.dim)


def orbit_distance(pr: Problem, u: np.ndarray, v: np.ndarray, T: int) -> float:
    """``min_k ||u(. - kT) - v||`` over all period-lattice shifts of the torus."""
    best = math.inf
    for k in _shifts(pr, T):
        diff = translate(pr.domain, u, k) - v
        best = min(best, max(e_norm_power(pr.domain, diff, pr.V, pr.p), 0.0))
    return best ** (1.0 / pr.p)


@dataclass
class OrbitSet:
    representatives: list[SolveResult]
    period: int
    delta: float
    distances: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    labels: list[str] = field(default_factory=list)
    attempted: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def energies(self) -> list[float]:
        return [r.energy for r in self.representatives]

    def separation(self) -> float:
        """Smallest pairwise orbit distance (inf for fewer than two orbits)."""
        m = self.distances
        if len(m) < 2:
            return math.inf
        return float(np.min(m[~np.eye(len(m), dtype=bool)]))

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "delta": self.delta if math.isfinite(self.delta) else "inf",
            "orbit_count": len(self.representatives),
            "energies": self.energies,
            "labels": self.labels,
            "distances": self.distances.tolist(),
            "min_separation": self.separation() if len(self.representatives) > 1 else None,
            "starts_attempted": self.attempted,
            "failures": self.failures,
        }


def start_configs(cfg: SolverConfig, n_starts: int, mode: str, period: int, seed: int) -> list[SolverConfig]:
    """Initial guesses for the multi-start search.

    ``translated``: bumps at the default centre shifted by ``i * period`` along
    the first axis; ``cells``: bumps at random cells; ``random``: random fields;
    ``mixed`` cycles through the three.
    """
    d = cfg.problem.domain
    rng = np.random.default_rng(seed)
    base = np.full(d.dim, d.side // 2)
    width = cfg.bump_width
    out = []
    for i in range(n_starts):
        kind = mode if mode != "mixed" else ("translated", "cells", "random")[i % 3]
        if kind == "translated":
            c = base.copy()
            c[0] = (c[0] + i * period) % d.side
            g = bump(d, c, width)
        elif kind == "cells":
            g = bump(d, rng.integers(0, d.side, d.dim), width)
        elif kind == "random":
            g = rng.uniform(0.0, 1.0, d.vertex_count)
        else:
            raise ValueError(f"unknown start mode {mode!r}")
        out.append(replace(cfg, initial_guess=g, seed=seed + i))
    return out


def _run(cfg: SolverConfig):
    try:
        return ground_state(cfg), None
    except SolverError as exc:
        return None, str(exc)


def find_distinct(
    cfg: SolverConfig,
    n_starts: int = 5,
    delta: float | None = None,
    period: int = 1,
    sign_companions: bool = False,
    start_mode: str = "translated",
    seed: int | None = None,
) -> OrbitSet:
    """Run ``n_starts`` solves and keep one representative per translation orbit.

    ``delta`` defaults to ``1e-4 * ||u*||`` for the lowest-energy converged
    solution. With ``sign_companions`` the negation of every representative is
    added as its own orbit unless it is within ``delta`` of an existing one.
    """
    pr = cfg.problem
    list(_shifts(pr, period))  # validates torus and period
    if sign_companions and not pr.nonlinearity.is_odd:
        raise ValueError("sign companions need an odd nonlinearity")
    seed = cfg.seed if seed is None else seed
    configs = start_configs(cfg, n_starts, start_mode, period, seed)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(_run, configs))
    else:
        outcomes = [_run(c) for c in configs]

    failures = [f"start {i}: {err}" for i, (_, err) in enumerate(outcomes) if err]
    found = [r for r, _ in outcomes if r is not None and r.converged]
    failures += [
        f"start {i}: not converged ({r.message})"
        for i, (r, _) in enumerate(outcomes)
        if r is not None and not r.converged
    ]
    if not found:
        log.warning("find_distinct: no start converged")
        return OrbitSet([], period, math.nan if delta is None else delta, attempted=n_starts, failures=failures)

    # stable sort keeps start order among equal energies
    found.sort(key=lambda r: r.energy)
    if delta is None:
        delta = 1e-4 * max(pr.norm_power(found[0].u), 0.0) ** (1.0 / pr.p)

    reps: list[SolveResult] = []
    labels: list[str] = []
    for r in found:
        if all(orbit_distance(pr, rep.u, r.u, period) > delta for rep in reps):
            reps.append(r)
            labels.append(f"start-{len(labels)}")
    if sign_companions:
        for rep in list(reps):
            neg = replace(rep, u=-rep.u, w=-rep.w)
            if all(orbit_distance(pr, other.u, neg.u, period) > delta for other in reps):
                reps.append(neg)
                labels.append(f"negated-{reps.index(rep)}")
        order = sorted(range(len(reps)), key=lambda i: reps[i].energy)
        reps = [reps[i] for i in order]
        labels = [labels[i] for i in order]

    n = len(reps)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = orbit_distance(pr, reps[i].u, reps[j].u, period)
    return OrbitSet(reps, period, delta, dist, labels, n_starts, failures)
