"""Nehari projection and ground states by descent on the unit energy sphere.

Every nonzero ``w`` has a unique scaling ``t_w`` with ``t_w w`` on the Nehari set
(the set where ``<Phi'(u), u> = 0``), provided the nonlinearity grows faster than
``|t|^(p-1)``. The reduced functional ``Psi(w) = Phi(t_w w)`` is constant along rays,
so we minimise it over the unit sphere ``||w|| = 1``: project the Euclidean
residual onto the tangent space ``{z : <J(w), z> = 0}``, step, renormalise, and
accept by Armijo backtracking on ``Psi``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .domain import Domain
from .energy import Problem, energy, pairing, residual
from .model import (
    GrowthReport,
    PowerNonlinearity,
    Potential,
    check_growth_conditions,
    critical_exponent,
    negative_part_check,
)
from .space import as_grid_function, lq_norm

log = logging.getLogger(__name__)

T_MAX = 1e18
# relative size below which two energy values are treated as equal up to rounding
ENERGY_FLOOR = 1e-12


class SolverError(RuntimeError):
    pass


class FiberDivergenceError(SolverError):
    """No sign change of the fibering slope before the overflow bound."""


class HypothesisError(ValueError):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


@dataclass
class SolverConfig:
    problem: Problem
    max_iterations: int = 20000
    residual_tol: float = 1e-8
    fiber_tol: float = 1e-12
    initial_guess: Any = "bump"  # "bump" | "random" | array of values
    bump_center: tuple | None = None
    bump_width: float | None = None
    step_initial: float = 1.0
    backtrack: float = 0.5
    armijo_c: float = 1e-4
    step_rule: str = "bb"  # "bb": Barzilai-Borwein trial step; "reset": always step_initial
    seed: int = 0
    override_hypotheses: bool = False
    negative_part_exponent: float | None = None

    def __post_init__(self):
        if not (self.residual_tol > 0 and self.fiber_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtracking factor must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.step_rule not in ("reset", "bb"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


@dataclass
class SolveResult:
    u: np.ndarray
    w: np.ndarray
    energy: float
    residual_norm: float
    tolerance: float
    iterations: int
    converged: bool
    t_history: list[float] = field(default_factory=list)
    trace: list[tuple] = field(default_factory=list)  # (iteration, energy, residual, t, step)
    message: str = ""
    hypotheses: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "residual_norm": self.residual_norm,
            "tolerance": self.tolerance,
            "iterations": self.iterations,
            "converged": self.converged,
            "t_final": self.t_history[-1] if self.t_history else None,
            "message": self.message,
            "hypotheses": self.hypotheses,
        }


# ---------------------------------------------------------------------------
# fibering map


def _check_nonzero(u: np.ndarray) -> None:
    if not np.any(u):
        raise ValueError("fibering map is undefined for u = 0")


def fiber(pr: Problem, u: np.ndarray, t: float) -> float:
    """``psi_u(t) = Phi(t u)``."""
    _check_nonzero(u)
    return energy(pr, t * u)


def fiber_slope(pr: Problem, u: np.ndarray, t: float) -> float:
    """``psi_u'(t) = <Phi'(t u), u>``."""
    _check_nonzero(u)
    return pairing(pr, t * u, u)


def project_nehari(
    pr: Problem, u: np.ndarray, fiber_tol: float = 1e-12
) -> tuple[float, np.ndarray]:
    """Return ``(t_u, t_u * u)`` with ``t_u u`` on the Nehari set.

    The norm part of the slope is exactly homogeneous, so
    ``psi_u'(t) = t^(p-1) ||u||^p - sum f(x, t u) u``; only the nonlinear sum is
    re-evaluated while bracketing (doubling/halving) and bisecting.
    """
    _check_nonzero(u)
    p = pr.p
    A = pr.norm_power(u)
    if not A > 0:
        raise FiberDivergenceError(
            f"||u||^p = {A!r} is not positive; the fibering map has no interior maximum"
        )

    def slope(t):
        return t ** (p - 1) * A - float(np.sum(pr.f(t * u) * u))

    # the pure power family with constant exponent has a closed-form zero;
    # use it to seed the bracket
    B = float(np.sum(pr.F(u))) * pr.nonlinearity.q
    q = pr.nonlinearity.q
    t0 = 1.0
    if B > 0 and q != p:
        with np.errstate(over="ignore"):
            guess = (A / B) ** (1.0 / (q - p))
        if np.isfinite(guess) and 0 < guess < T_MAX:
            t0 = guess

    s0 = slope(t0)
    if s0 == 0:
        return t0, t0 * u
    # widen geometrically around t0 until the slope changes sign
    delta = 1e-8
    if s0 > 0:
        lo, hi = t0, t0 * (1 + delta)
        while slope(hi) > 0:
            lo, delta = hi, min(4 * delta, 1.0)
            hi = lo * (1 + delta)
            if hi > T_MAX:
                raise FiberDivergenceError(
                    f"fibering slope still positive at t = {hi:.3g}; the nonlinearity "
                    "does not dominate |t|^(p-1) (is q <= p?)"
                )
    else:
        lo, hi = t0 / (1 + delta), t0
        while slope(lo) <= 0:
            hi, delta = lo, min(4 * delta, 1.0)
            lo = hi / (1 + delta)
            if lo < 1.0 / T_MAX:
                raise FiberDivergenceError(
                    f"fibering slope still non-positive at t = {lo:.3g}; psi_u has no "
                    "increasing branch near 0"
                )
    # invariant: slope(lo) > 0 >= slope(hi)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
        if slope(mid) > 0:
            lo = mid
        else:
            hi = mid
    t = lo if abs(slope(lo)) <= abs(slope(hi)) else hi
    err = abs(slope(t)) * t
    scale = t**p * A
    if err > fiber_tol * scale:
        raise SolverError(
            f"Nehari projection residual {err:.3e} exceeds {fiber_tol:g} x {scale:.3e}"
        )
    return t, t * u


# ---------------------------------------------------------------------------
# initial guesses


def bump(d: Domain, center=None, width: float | None = None, height: float = 1.0) -> np.ndarray:
    """Discrete Gaussian ``height * exp(-|x - c|^2 / width^2)``.

    On a torus the distance is measured cyclically.
    """
    if center is None:
        center = d.side // 2
    c = np.broadcast_to(np.asarray(center, dtype=float), (d.dim,))
    width = d.side / 8.0 if width is None else float(width)
    diff = d.coords() - c
    if d.is_torus:
        diff = (diff + d.side / 2.0) % d.side - d.side / 2.0
    r2 = np.sum(diff**2, axis=1)
    return height * np.exp(-r2 / width**2)


def initial_guess(cfg: SolverConfig) -> np.ndarray:
    d = cfg.problem.domain
    g = cfg.initial_guess
    if isinstance(g, str):
        if g == "bump":
            u = bump(d, cfg.bump_center, cfg.bump_width)
        elif g == "random":
            u = np.random.default_rng(cfg.seed).uniform(0.0, 1.0, d.vertex_count)
        elif g == "random_signed":
            u = np.random.default_rng(cfg.seed).uniform(-1.0, 1.0, d.vertex_count)
        else:
            raise ValueError(f"unknown initial guess {g!r}")
    else:
        u = as_grid_function(d, g).copy()
    if not np.any(u):
        raise SolverError("initial guess is identically zero")
    return u


# ---------------------------------------------------------------------------
# hypotheses


def check_hypotheses(cfg: SolverConfig) -> dict:
    """Growth checks plus, for potentials with a negative part, the smallness test.

    Raises :class:`HypothesisError` on failure unless ``override_hypotheses`` is set.
    """
    pr = cfg.problem
    report: GrowthReport = check_growth_conditions(pr.nonlinearity, pr.p, pr.domain.dim)
    out = {"growth": report.to_dict()}
    problems = [f"{c.name}: {c.detail}" for c in report.failures]

    if np.any(pr.V < 0):
        pstar = critical_exponent(pr.p, pr.domain.dim)
        r = cfg.negative_part_exponent or max(pr.nonlinearity.q, pstar or 0.0)
        if not r > pr.p:
            r = 2 * pr.p
        est = sobolev_constant(pr.p, r, pr.domain, replace(cfg, override_hypotheses=True))
        neg = negative_part_check(pr.V, pr.p, r, est.S)
        neg["S_estimate"] = est.S
        out["negative_part"] = neg
        if not neg["passed"]:
            problems.append(
                f"negative_part: ||V_-||_{neg['exponent']:g} = {neg['norm']:.6g} is not below "
                f"S^p = {neg['threshold']:.6g}"
            )
    if problems and not cfg.override_hypotheses:
        raise HypothesisError("hypothesis check failed: " + "; ".join(problems), out)
    out["overridden"] = bool(problems)
    return out


# ---------------------------------------------------------------------------
# descent


def _e_size(pr: Problem, w: np.ndarray) -> float:
    n = pr.norm_power(w)
    if not n > 0:
        raise SolverError(f"cannot normalise: ||w||^p = {n!r}")
    return n ** (1.0 / pr.p)


def _normalize(pr: Problem, w: np.ndarray) -> np.ndarray:
    return w / _e_size(pr, w)


def ground_state(cfg: SolverConfig) -> SolveResult:
    """Minimise ``Phi`` over the Nehari set by descent on the unit sphere."""
    pr = cfg.problem
    p = pr.p
    dual = p / (p - 1)
    hyp = check_hypotheses(cfg)

    w = _normalize(pr, initial_guess(cfg))
    t, u = project_nehari(pr, w, cfg.fiber_tol)
    psi = energy(pr, u)
    if not math.isfinite(psi):
        raise SolverError(f"energy is {psi!r} at the initial guess")

    trace, ts = [], []
    step_used = 0.0
    prev = None  # (w, direction) for the BB rule
    converged = False
    message = "iteration cap reached"
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        g = residual(pr, u)
        rn = lq_norm(g, dual)
        tol = cfg.residual_tol * max(1.0, pr.norm_power(u) ** ((p - 1) / p))
        trace.append((it, psi, rn, t, step_used))
        ts.append(t)
        if not math.isfinite(rn):
            raise SolverError(f"residual is {rn!r} at iteration {it}")
        if rn <= tol:
            converged = True
            message = "residual below tolerance"
            break
        if it == cfg.max_iterations:
            break

        direction = g - (pr.j_pairing(w, g) / pr.j_pairing(w, w)) * w
        # directional derivative of Psi along -direction
        decrease = t * float(np.dot(g, direction))
        if not decrease > 0:
            message = "no descent direction"
            break

        sigma = cfg.step_initial
        if cfg.step_rule == "bb" and prev is not None:
            dw = w - prev[0]
            dg = direction - prev[1]
            denom = float(np.dot(dw, dg))
            if denom > 0:
                sigma = float(np.dot(dw, dw)) / denom

        accepted = False
        while sigma > 1e-30:
            z = w - sigma * direction
            try:
                znorm = _e_size(pr, z)
                trial = z / znorm
                t_new, u_new = project_nehari(pr, trial, cfg.fiber_tol)
                psi_new = energy(pr, u_new)
            except SolverError:
                sigma *= cfg.backtrack
                continue
            if math.isnan(psi_new):
                raise SolverError(f"energy became NaN at iteration {it} (step {sigma:g})")
            if psi_new <= psi - cfg.armijo_c * sigma * decrease:
                accepted = True
                break
            if abs(psi_new - psi) <= ENERGY_FLOOR * abs(psi):
                # energy change is at rounding level: use the derivative form of
                # the Armijo test (trapezoid rule on the line)
                slope_new = -(t_new / znorm) * float(np.dot(residual(pr, u_new), direction))
                if slope_new <= (1 - 2 * cfg.armijo_c) * decrease:
                    accepted = True
                    break
            sigma *= cfg.backtrack
        if not accepted:
            message = "line search failed to decrease the energy"
            break
        prev = (w, direction)
        w, t, u, psi, step_used = trial, t_new, u_new, psi_new, sigma

    rn = lq_norm(residual(pr, u), dual)
    tol = cfg.residual_tol * max(1.0, pr.norm_power(u) ** ((p - 1) / p))
    log.info("ground_state: %s after %d iterations, energy %.12g, residual %.3e", message, it, psi, rn)
    return SolveResult(
        u=u,
        w=w,
        energy=psi,
        residual_norm=rn,
        tolerance=tol,
        iterations=len(trace),
        converged=converged,
        t_history=ts,
        trace=trace,
        message=message,
        hypotheses=hyp,
    )


# ---------------------------------------------------------------------------
# best Sobolev constant


@dataclass
class SobolevResult:
    S: float
    extremal: np.ndarray
    result: SolveResult
    theory_valid: bool
    notice: str = ""


def pure_power_problem(d: Domain, p: float, q: float) -> Problem:
    return Problem(d, Potential("constant", value=0.0), PowerNonlinearity(q), p)


def sobolev_constant(
    p: float, q: float, d: Domain, cfg: SolverConfig | None = None
) -> SobolevResult:
    """Estimate ``inf ||u||_D / ||u||_q`` from the ground state of ``-Delta_p u = |u|^(q-2) u``.

    At a Nehari point ``w`` of the pure-power problem the quotient equals
    ``||w||^((q-p)/q)``; the returned extremal is ``w / ||w||_q``.
    """
    if not q > p:
        raise ValueError(f"need q > p, got q={q}, p={p}")
    pr = pure_power_problem(d, p, q)
    cfg = SolverConfig(pr) if cfg is None else replace(cfg, problem=pr)
    cfg = replace(cfg, override_hypotheses=True)
    pstar = critical_exponent(p, d.dim)
    valid = pstar is not None and q > pstar
    notice = "" if valid else (
        f"outside the range 1 < p < N, q > p* (p={p:g}, q={q:g}, N={d.dim}, p*={pstar}); "
        "the value is a finite-domain quotient only"
    )
    res = ground_state(cfg)
    w = res.u
    S = pr.norm_power(w) ** ((q - p) / (p * q))
    return SobolevResult(S, w / lq_norm(w, q), res, valid, notice)
