"""Executable property checks for a problem instance.

Each check draws its own samples from ``default_rng([seed, k])`` so the suite is
reproducible and checks do not perturb each other. Values are uniform on
[-10, 10]; fibering scalings are log-uniform on [1e-3, 1e3].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import Problem, energy, pairing, pairing_scale, residual, signed_power
from .model import check_growth_conditions
from .solver import SolverConfig, SolverError, ground_state
from .space import lq_norm

DEFAULT_TOLERANCES = {
    "lq_monotonicity": 1e-12,
    "p_inequality": 1e-12,
    "fs_vs_pF": 1e-12,
    "fibering_inequality": 1e-12,
    "gradient_check": 1e-6,
    "pairing_residual": 1e-12,
    "nehari_identity": 1e-10,
    "lower_bound": 1e-8,
}

DEFAULT_SAMPLES = {
    "lq_monotonicity": 200,
    "p_inequality": 10_000,
    "fs_vs_pF": 10_000,
    "fibering_inequality": 1000,
    "gradient_check": 100,
    "pairing_residual": 100,
}

VALUE_RANGE = 10.0


@dataclass
class Check:
    name: str
    statement: str
    status: str  # "pass" | "fail" | "skipped"
    tolerance: float | None = None
    samples: int = 0
    witness: dict = field(default_factory=dict)
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statement": self.statement,
            "status": self.status,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "witness": self.witness,
            "detail": self.detail,
        }


@dataclass
class VerifyReport:
    seed: int
    checks: list[Check]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"seed": self.seed, "ok": self.ok, "checks": [c.to_dict() for c in self.checks]}

    def table(self) -> str:
        rows = [("check", "status", "tolerance", "samples", "witness")]
        for c in self.checks:
            wit = ", ".join(f"{k}={_fmt(v)}" for k, v in c.witness.items())
            tol = "" if c.tolerance is None else f"{c.tolerance:g}"
            rows.append((c.name, c.status, tol, str(c.samples), wit or c.detail))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = []
        for r in rows:
            lines.append("  ".join(r[i].ljust(widths[i]) for i in range(4)) + "  " + r[4])
        return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _values(rng, n):
    return rng.uniform(-VALUE_RANGE, VALUE_RANGE, n)


# ---------------------------------------------------------------------------
# individual checks


def check_hypotheses(pr: Problem) -> Check:
    rep = check_growth_conditions(pr.nonlinearity, pr.p, pr.domain.dim)
    statuses = {c.name: c.to_dict()["status"] for c in rep.conditions}
    failed = [c for c in rep.failures]
    return Check(
        "hypotheses",
        "sampled growth conditions on f (growth bound, vanishing at 0, monotone ratio, superlinear primitive)",
        _status(not failed),
        samples=len(rep.conditions),
        witness=statuses,
        detail="; ".join(f"{c.name}: {c.detail}" for c in failed),
    )


def check_lq_monotonicity(pr: Problem, rng, n: int, tol: float) -> Check:
    worst = (-math.inf, None)
    for _ in range(n):
        u = _values(rng, pr.domain.vertex_count)
        q = rng.uniform(1.0, 10.0)
        r = math.inf if rng.random() < 0.1 else rng.uniform(q, 20.0)
        excess = lq_norm(u, r) / lq_norm(u, q) - 1.0
        if excess > worst[0]:
            worst = (excess, (q, r))
    return Check(
        "lq_monotonicity",
        "||u||_r <= ||u||_q for r >= q >= 1",
        _status(worst[0] <= tol),
        tol,
        n,
        {"max_relative_excess": worst[0], "q": worst[1][0], "r": worst[1][1]},
    )


def check_p_inequality(pr: Problem, rng, n: int, tol: float) -> Check:
    p = pr.p
    stmt = "|a1 - a2|^p <= 2^(p-1) (|a1|^(p-2) a1 - |a2|^(p-2) a2)(a1 - a2) for p >= 2"
    if p < 2:
        return Check("p_inequality", stmt, "skipped", tol, 0, detail="skipped: requires p >= 2")
    a1 = _values(rng, n)
    a2 = _values(rng, n)
    lhs = np.abs(a1 - a2) ** p
    rhs = 2 ** (p - 1) * (signed_power(a1, p - 1) - signed_power(a2, p - 1)) * (a1 - a2)
    excess = (lhs - rhs) / np.maximum(np.abs(rhs), np.finfo(float).tiny)
    k = int(np.argmax(excess))
    return Check(
        "p_inequality",
        stmt,
        _status(bool(np.all(excess <= tol))),
        tol,
        n,
        {"max_relative_excess": float(excess[k]), "a1": float(a1[k]), "a2": float(a2[k]),
         "violations": int(np.sum(excess > tol))},
    )


def check_fs_vs_pF(pr: Problem, rng, n: int, tol: float) -> Check:
    idx = rng.integers(0, pr.domain.vertex_count, n)
    s = _values(rng, n)
    a = pr.a[idx]
    fs = pr.nonlinearity.f(s, a) * s
    pF = pr.p * pr.nonlinearity.F(s, a)
    deficit = (pF - fs) / np.maximum(np.abs(fs), np.finfo(float).tiny)
    k = int(np.argmax(deficit))
    ratio = fs / np.where(pF == 0, np.nan, pF)
    return Check(
        "fs_vs_pF",
        "f(x,s) s >= p F(x,s)",
        _status(bool(np.all(deficit <= tol))),
        tol,
        n,
        {"max_relative_deficit": float(deficit[k]), "s": float(s[k]), "vertex": int(idx[k]),
         "min_ratio": float(np.nanmin(ratio)), "violations": int(np.sum(deficit > tol))},
    )


def check_fibering_inequality(pr: Problem, rng, n: int, tol: float) -> Check:
    p = pr.p
    worst = math.inf
    worst_t = None
    near_equal = 0
    for _ in range(n):
        u = _values(rng, pr.domain.vertex_count)
        t = float(np.exp(rng.uniform(np.log(1e-3), np.log(1e3))))
        lhs = energy(pr, u)
        tu = energy(pr, t * u)
        corr = (1 - t**p) / p * pairing(pr, u, u)
        slack = (lhs - tu - corr) / (abs(lhs) + abs(tu) + abs(corr))
        if slack < worst:
            worst, worst_t = slack, t
        if abs(slack) <= tol and t != 1.0:
            near_equal += 1
    # equality case t = 1 through the same formula
    u, t = _values(rng, pr.domain.vertex_count), 1.0
    at_one = energy(pr, u) - energy(pr, t * u) - (1 - t**p) / p * pairing(pr, u, u)
    ok = worst >= -tol and near_equal == 0 and at_one == 0.0
    return Check(
        "fibering_inequality",
        "Phi(u) >= Phi(t u) + (1 - t^p)/p <Phi'(u), u>, equality only at t = 1",
        _status(ok),
        tol,
        n,
        {"min_relative_slack": worst, "t_at_min": worst_t, "equalities_off_t1": near_equal,
         "slack_at_t1": at_one},
    )


def check_gradient(pr: Problem, rng, n: int, tol: float, eps: float = 1e-6) -> Check:
    worst = (0.0, None)
    for _ in range(n):
        u = _values(rng, pr.domain.vertex_count)
        v = _values(rng, pr.domain.vertex_count)
        exact = pairing(pr, u, v)
        fd = (energy(pr, u + eps * v) - energy(pr, u - eps * v)) / (2 * eps)
        err = abs(exact - fd) / pairing_scale(pr, u, v)
        if err > worst[0] or worst[1] is None:
            worst = (err, exact)
    return Check(
        "gradient_check",
        "<Phi'(u), v> matches central differences of Phi",
        _status(worst[0] <= tol),
        tol,
        n,
        {"max_relative_error": worst[0], "pairing_at_max": worst[1], "eps": eps},
    )


def check_pairing_residual(pr: Problem, rng, n: int, tol: float) -> Check:
    worst = 0.0
    for _ in range(n):
        u = _values(rng, pr.domain.vertex_count)
        v = _values(rng, pr.domain.vertex_count)
        err = abs(pairing(pr, u, v) - float(np.dot(residual(pr, u), v))) / pairing_scale(pr, u, v)
        worst = max(worst, err)
    return Check(
        "pairing_residual",
        "<Phi'(u), v> = sum_x residual(u)(x) v(x)",
        _status(worst <= tol),
        tol,
        n,
        {"max_relative_error": worst},
    )


def solution_checks(pr: Problem, res, error: str | None, tols: dict) -> list[Check]:
    """Sign, Nehari energy identity and lower-bound checks on a solve result."""
    names = (
        ("ground_state_sign", "a converged ground state is strictly one-signed", None),
        ("nehari_identity", "Phi(u) = (1/p) sum f(x,u) u - sum F(x,u) on the Nehari set",
         tols["nehari_identity"]),
        ("lower_bound", "Phi(u*) > 0 and ||u*|| >= (p Phi(u*))^(1/p)", tols["lower_bound"]),
    )
    if res is None or not res.converged:
        why = error if res is None else f"solver did not converge: {res.message}"
        return [Check(n, s, "fail", t, 0, detail=why) for n, s, t in names]
    u, phi, p = res.u, res.energy, pr.p
    checks = []
    pos, neg = bool(np.all(u > 0)), bool(np.all(u < 0))
    checks.append(
        Check(names[0][0], names[0][1], _status(pos or neg), None, u.size,
              {"min": float(u.min()), "max": float(u.max())})
    )
    reduced = float(np.sum(pr.f(u) * u)) / p - float(np.sum(pr.F(u)))
    gap = abs(phi - reduced)
    checks.append(
        Check(names[1][0], names[1][1], _status(gap <= names[1][2] * abs(phi)), names[1][2], 1,
              {"energy": phi, "reduced": reduced, "relative_gap": gap / abs(phi) if phi else math.inf})
    )
    norm = max(pr.norm_power(u), 0.0) ** (1 / p)
    bound = (p * phi) ** (1 / p) if phi > 0 else math.nan
    ok = phi > 0 and norm >= bound - names[2][2]
    checks.append(
        Check(names[2][0], names[2][1], _status(ok), names[2][2], 1,
              {"energy": phi, "norm": norm, "bound": bound})
    )
    return checks


def run_suite(
    pr: Problem,
    seed: int = 0,
    tolerances: dict | None = None,
    samples: dict | None = None,
    solver: SolverConfig | None = None,
) -> VerifyReport:
    tols = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    ns = {**DEFAULT_SAMPLES, **(samples or {})}

    def rng(k):
        return np.random.default_rng([seed, k])

    checks = [
        check_hypotheses(pr),
        check_lq_monotonicity(pr, rng(1), ns["lq_monotonicity"], tols["lq_monotonicity"]),
        check_p_inequality(pr, rng(2), ns["p_inequality"], tols["p_inequality"]),
        check_fs_vs_pF(pr, rng(3), ns["fs_vs_pF"], tols["fs_vs_pF"]),
        check_fibering_inequality(pr, rng(4), ns["fibering_inequality"], tols["fibering_inequality"]),
        check_gradient(pr, rng(5), ns["gradient_check"], tols["gradient_check"]),
        check_pairing_residual(pr, rng(6), ns["pairing_residual"], tols["pairing_residual"]),
    ]

    cfg = SolverConfig(pr, seed=seed) if solver is None else replace(solver, problem=pr)
    cfg = replace(cfg, override_hypotheses=True)
    res, error = None, None
    try:
        res = ground_state(cfg)
    except SolverError as exc:
        error = f"{type(exc).__name__}: {exc}"
    solve = Check(
        "ground_state_solve",
        "Nehari descent converges to a critical point",
        _status(res is not None and res.converged),
        None if res is None else res.tolerance,
        0 if res is None else res.iterations,
        {} if res is None else {"energy": res.energy, "residual_norm": res.residual_norm},
        detail=error or ("" if res is None else res.message),
    )
    checks.append(solve)
    checks.extend(solution_checks(pr, res, error, tols))
    return VerifyReport(seed, checks)
