"""Constrained policy optimization.

Minimizes the time-averaged reconstruction error subject to a sampling
budget cost <= eta * delta.  Two objective backends are offered: the
exact-chain oracle (default, ground truth) and the literal closed forms
(for reproducing the derivation's own reduction, defects included).
RS admits a 1-D reduction along the active budget line; EA is
non-convex and searched on a full 2-D grid; CA and SA have no knobs, so
only feasibility of their fixed cost is decided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

from corrtrack.chain import ChainEvaluator, build_kernel, stationary
from corrtrack.formulas import ZERO_SAMPLING_NOTE, cost_closed_form, pe_closed_form
from corrtrack.model import (
    ChangeAware,
    ChannelParams,
    ErrorAware,
    ParameterError,
    RandomSampling,
    SemanticsAware,
    SourceParams,
)

COST_SLACK = 1e-9
_CORNER_EPS = 1e-5
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Budget:
    delta: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        if self.delta <= 0:
            raise ParameterError(f"delta must be positive, got {self.delta!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"eta must lie in [0, 1], got {self.eta!r}")

    @property
    def delta_max(self) -> float:
        return self.eta * self.delta


@dataclass(frozen=True)
class OptResult:
    policy: str
    probs: tuple[float, float]
    pe: float
    cost_per_delta: float
    feasible: bool
    backend: str
    diagnostics: dict = field(compare=False)


@dataclass(frozen=True)
class FeasibilityResult:
    policy: str
    feasible: bool
    cost_per_delta: float
    backend: str


_BACKENDS = {"closed-form": "closed-form", "chain": "exact-chain", "exact-chain": "exact-chain"}


def backend_tag(backend: str) -> str:
    try:
        return _BACKENDS[backend]
    except KeyError:
        raise ParameterError(
            f"unknown backend {backend!r}; expected closed-form or chain"
        ) from None


PeCostFn = Callable[[float, float], tuple[float, float]]


def _rs_objective(source, channel, tag: str) -> PeCostFn:
    if tag == "closed-form":
        def fn(a: float, b: float):
            pol = RandomSampling(a, b)
            return (
                pe_closed_form(pol, source, channel).value,
                cost_closed_form(pol, source, channel).value,
            )
        return fn
    ev = ChainEvaluator("RS", source, channel)

    def fn(a: float, b: float):
        if a == 0.0 and b == 0.0:
            # the exact corner freezes the reconstruction; evaluate the
            # chain a hair inside instead
            a = b = _CORNER_EPS
        return ev.pe_cost(a, b)
    return fn


def _ea_objective(source, channel, tag: str) -> PeCostFn:
    if tag == "closed-form":
        def fn(a: float, b: float):
            pol = ErrorAware(a, b)
            return (
                pe_closed_form(pol, source, channel).value,
                cost_closed_form(pol, source, channel).value,
            )
        return fn
    ev = ChainEvaluator("EA", source, channel)

    def fn(a: float, b: float):
        if a == 0.0 and b == 0.0:
            a = b = _CORNER_EPS
        return ev.pe_cost(a, b)
    return fn


def _zero_budget(tag: str, source, channel, backend_tag: str) -> OptResult:
    pol = RandomSampling(0.0, 0.0) if tag == "RS" else ErrorAware(0.0, 0.0)
    v = pe_closed_form(pol, source, channel)
    return OptResult(
        policy=tag,
        probs=(0.0, 0.0),
        pe=v.value,
        cost_per_delta=0.0,
        feasible=True,
        backend=backend_tag,
        diagnostics={"grid_size": 0, "refinement_iterations": 0, "note": v.note},
    )


def _golden_section(f: Callable[[float], float], lo: float, hi: float,
                    tol: float = 1e-7) -> tuple[float, float, int]:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    iters = 0
    while b - a > tol:
        iters += 1
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x), iters + 1


def _pattern_search(fn: PeCostFn, eta: float, x0: float, y0: float,
                    pe0: float, cost0: float, step: float = 0.005,
                    tol: float = 1e-4) -> tuple[float, float, float, float, int]:
    bx, by, bpe, bcost = x0, y0, pe0, cost0
    h = step
    iters = 0
    while h >= tol:
        moved = False
        for dx, dy in ((h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)):
            x = min(1.0, max(0.0, bx + dx))
            y = min(1.0, max(0.0, by + dy))
            if (x, y) == (bx, by):
                continue
            pe, cost = fn(x, y)
            iters += 1
            if cost <= eta + COST_SLACK and pe < bpe:
                bx, by, bpe, bcost = x, y, pe, cost
                moved = True
                break
        if not moved:
            h /= 2
    return bx, by, bpe, bcost, iters


def optimize_rs(
    source: SourceParams,
    channel: ChannelParams,
    budget: Budget,
    backend: str = "exact-chain",
) -> OptResult:
    """Best RS sampling probabilities under the budget."""
    tag = backend_tag(backend)
    if budget.eta == 0.0:
        return _zero_budget("RS", source, channel, tag)
    p, q, eta = source.p, source.q, budget.eta
    fn = _rs_objective(source, channel, "closed-form" if tag == "closed-form" else "chain")

    if tag == "closed-form":
        # active-budget reduction: pa2 is pinned by the cost line and
        # pa1 scans its feasible interval
        def pa2_of(pa1: float) -> float:
            return min(1.0, max(0.0, (p + 2 * q) * (eta - pa1) / (2 * q)))

        def obj(pa1: float) -> float:
            return fn(pa1, pa2_of(pa1))[0]

        lo = max(0.0, eta - 2 * q / (p + 2 * q))
        hi = min(1.0, eta)
        steps = max(1, int(round((hi - lo) / 1e-3)))
        grid = [lo + (hi - lo) * k / steps for k in range(steps + 1)]
        best_a = min(grid, key=obj)
        left = max(lo, best_a - (hi - lo) / steps)
        right = min(hi, best_a + (hi - lo) / steps)
        x, fx, iters = _golden_section(obj, left, right)
        if obj(best_a) < fx:
            x, fx = best_a, obj(best_a)
        probs = (x, pa2_of(x))
        pe, cost = fn(*probs)
        return OptResult(
            policy="RS", probs=probs, pe=pe, cost_per_delta=cost,
            feasible=cost <= eta + COST_SLACK, backend=tag,
            diagnostics={"grid_size": len(grid), "refinement_iterations": iters},
        )

    # oracle backend: full polytope sweep, no monotonicity assumed
    best = None
    n_points = 0
    a_grid = [k / 100 for k in range(0, 101) if k / 100 <= eta]
    if eta < 1.0 and (not a_grid or a_grid[-1] < eta):
        a_grid.append(eta)
    for a in a_grid:
        b_max = min(1.0, max(0.0, (p + 2 * q) * (eta - a) / (2 * q)))
        b_grid = [k / 100 for k in range(0, int(b_max * 100) + 1)]
        if not b_grid or b_grid[-1] < b_max:
            b_grid.append(b_max)
        for b in b_grid:
            pe, cost = fn(a, b)
            n_points += 1
            if cost <= eta + COST_SLACK and (best is None or pe < best[0]):
                best = (pe, a, b, cost)
    pe0, a0, b0, cost0 = best
    a1, b1, pe1, cost1, iters = _pattern_search(fn, eta, a0, b0, pe0, cost0)
    return OptResult(
        policy="RS", probs=(a1, b1), pe=pe1, cost_per_delta=cost1,
        feasible=cost1 <= eta + COST_SLACK, backend=tag,
        diagnostics={"grid_size": n_points, "refinement_iterations": iters},
    )


def optimize_rs_equal(
    source: SourceParams,
    channel: ChannelParams,
    budget: Budget,
    backend: str = "exact-chain",
) -> OptResult:
    """Best common probability when both samplers share one knob.

    The budget line gives pa = (p+2q)*eta/(p+4q) with the constraint
    active by construction.
    """
    tag = backend_tag(backend)
    if budget.eta == 0.0:
        return _zero_budget("RS", source, channel, tag)
    p, q, eta = source.p, source.q, budget.eta
    pa = (p + 2 * q) * eta / (p + 4 * q)
    fn = _rs_objective(source, channel, "closed-form" if tag == "closed-form" else "chain")
    pe, cost = fn(pa, pa)
    return OptResult(
        policy="RS", probs=(pa, pa), pe=pe, cost_per_delta=cost,
        feasible=cost <= eta + COST_SLACK, backend=tag,
        diagnostics={"grid_size": 1, "refinement_iterations": 0},
    )


def optimize_ea(
    source: SourceParams,
    channel: ChannelParams,
    budget: Budget,
    backend: str = "exact-chain",
) -> OptResult:
    """Best EA sampling probabilities under the budget (non-convex)."""
    tag = backend_tag(backend)
    if budget.eta == 0.0:
        return _zero_budget("EA", source, channel, tag)
    eta = budget.eta
    fn = _ea_objective(source, channel, "closed-form" if tag == "closed-form" else "chain")
    best = None
    feasible_points = []
    n_feasible = 0
    for i in range(101):
        a = i / 100
        for j in range(101):
            b = j / 100
            pe, cost = fn(a, b)
            if cost > eta + COST_SLACK:
                continue
            n_feasible += 1
            feasible_points.append((pe, a, b))
            if best is None or pe < best[0]:
                best = (pe, a, b, cost)
    pe0, a0, b0, cost0 = best
    a1, b1, pe1, cost1, iters = _pattern_search(fn, eta, a0, b0, pe0, cost0)
    feasible_points.sort()
    basins = [
        {"qa1": a, "qa2": b, "pe": pe} for pe, a, b in feasible_points[:5]
    ]
    return OptResult(
        policy="EA", probs=(a1, b1), pe=pe1, cost_per_delta=cost1,
        feasible=cost1 <= eta + COST_SLACK, backend=tag,
        diagnostics={
            "grid_size": n_feasible,
            "refinement_iterations": iters,
            "top_basins": basins,
        },
    )


def feasibility(
    policy: Union[ChangeAware, SemanticsAware],
    source: SourceParams,
    channel: ChannelParams,
    budget: Budget,
    backend: str = "exact-chain",
) -> FeasibilityResult:
    """Whether a parameter-free policy's fixed cost fits the budget."""
    if not isinstance(policy, (ChangeAware, SemanticsAware)):
        raise ParameterError(f"feasibility applies to CA or SA, got {policy!r}")
    tag = backend_tag(backend)
    if tag == "closed-form":
        cost = cost_closed_form(policy, source, channel).value
    else:
        cost = stationary(build_kernel(policy, source, channel)).cost
    return FeasibilityResult(
        policy=policy.tag,
        feasible=cost <= budget.eta + COST_SLACK,
        cost_per_delta=cost,
        backend=tag,
    )


def rs_monotonicity_audit(
    source: SourceParams,
    channel: ChannelParams,
    n: int = 20,
    tol: float = 1e-9,
) -> dict:
    """Checks that oracle RS error never increases as pa2 grows.

    The derivation proves this only for its printed expression; the
    audit records any oracle counterexamples instead of assuming it.
    """
    ev = ChainEvaluator("RS", source, channel)
    violations = []
    grid = [(k + 1) / (n + 1) for k in range(n)]
    for a in grid:
        prev = None
        for b in grid:
            pe, _ = ev.pe_cost(a, b)
            if prev is not None and pe > prev + tol:
                violations.append({"pa1": a, "pa2": b, "increase": pe - prev})
            prev = pe
    return {"points": n * n, "violations": violations}
