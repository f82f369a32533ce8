"""Sweep and concordance experiment drivers.

Two batch jobs sit on top of the evaluators: parameter sweeps that
optimize every policy at each grid point (the figure-reproduction
study), and a validation run that prices the printed closed forms
against the exact chain on random interior tuples.  Both emit rows
with a fixed CSV schema and a machine-readable summary.

The validation stream always carries two designed probes in addition
to the random tuples: a corner row (RS at pa=(1,1) over a perfect
channel) where the printed error expression goes negative while the
chain is exactly zero, and a 200-point grid comparing the printed
EA{1,1} and SA forms, which the derivation claims coincide.  Any
disagreement therefore lands in the report instead of being averaged
away.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from corrtrack.chain import (
    ChainEvaluator,
    NumericalFailure,
    ReducibleChain,
    build_kernel,
    stationary,
)
from corrtrack.formulas import BoundaryEvaluation, cost_closed_form, pe_closed_form
from corrtrack.model import (
    ChangeAware,
    ChannelParams,
    ErrorAware,
    ParameterError,
    Policy,
    RandomSampling,
    SemanticsAware,
    SourceParams,
)
from corrtrack.optimize import Budget, backend_tag, feasibility, optimize_ea, optimize_rs
from corrtrack.simulate import SimConfig, run

MATCH_TOL = 1e-6
WORKERS_ENV = "CORRTRACK_WORKERS"
POLICY_ORDER = ("RS", "CA", "EA", "SA")

SWEEP_COLUMNS = (
    "policy", "p", "q", "eta",
    "ps1_solo", "ps1_joint", "ps2_solo", "ps2_joint",
    "pa1", "pa2", "pe", "cost", "feasible", "backend",
)

VALIDATION_COLUMNS = (
    "policy", "p", "q",
    "ps1_solo", "ps1_joint", "ps2_solo", "ps2_joint",
    "pa1", "pa2",
    "pe_formula", "pe_chain", "pe_sim",
    "cost_formula", "cost_chain",
    "pe_diff", "cost_diff", "classification",
)


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 1:
        raise ParameterError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def _map(fn, items):
    items = list(items)
    n = _workers()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


@dataclass(frozen=True)
class SweepSpec:
    swept: str                       # "p" or "eta"
    start: float
    stop: float
    step: float
    q: float
    channel: ChannelParams
    p: Optional[float] = None        # fixed p, required when sweeping eta
    eta: Optional[float] = None      # fixed eta, required when sweeping p
    policies: tuple = POLICY_ORDER
    backend: str = "chain"
    delta: float = 1.0

    def __post_init__(self):
        if self.swept not in ("p", "eta"):
            raise ParameterError(f"swept must be 'p' or 'eta', got {self.swept!r}")
        if self.step <= 0 or self.stop < self.start:
            raise ParameterError("sweep range needs start <= stop and step > 0")
        if self.swept == "p":
            if self.eta is None:
                raise ParameterError("p-sweep needs a fixed eta")
            if not 0 < self.start <= self.stop <= 0.5:
                raise ParameterError("swept p must stay inside (0, 0.5]")
        else:
            if self.p is None:
                raise ParameterError("eta-sweep needs a fixed p")
            if not 0 <= self.start <= self.stop <= 1:
                raise ParameterError("swept eta must stay inside [0, 1]")
        unknown = set(self.policies) - set(POLICY_ORDER)
        if unknown or not self.policies:
            raise ParameterError(f"policies must be a non-empty subset of {POLICY_ORDER}")
        backend_tag(self.backend)

    def grid(self) -> list:
        n = int(round((self.stop - self.start) / self.step))
        return [round(self.start + k * self.step, 12) for k in range(n + 1)
                if self.start + k * self.step <= self.stop + 1e-12]


@dataclass(frozen=True)
class SweepRow:
    policy: str
    p: float
    q: float
    eta: float
    channel: ChannelParams
    pa1: Optional[float]
    pa2: Optional[float]
    pe: Optional[float]
    cost: Optional[float]
    feasible: bool
    backend: str

    def to_dict(self) -> dict:
        return {
            "policy": self.policy, "p": self.p, "q": self.q, "eta": self.eta,
            "ps1_solo": self.channel.ps1_solo, "ps1_joint": self.channel.ps1_joint,
            "ps2_solo": self.channel.ps2_solo, "ps2_joint": self.channel.ps2_joint,
            "pa1": self.pa1, "pa2": self.pa2, "pe": self.pe, "cost": self.cost,
            "feasible": self.feasible, "backend": self.backend,
        }


def _fixed_policy_point(policy, source, channel, budget, tag):
    fr = feasibility(policy, source, channel, budget, backend=tag)
    if not fr.feasible:
        return None, fr.cost_per_delta, False
    if tag == "closed-form":
        pe = pe_closed_form(policy, source, channel).value
    else:
        pe = stationary(build_kernel(policy, source, channel)).pe
    return pe, fr.cost_per_delta, True


def _sweep_point(spec: SweepSpec, value: float) -> list:
    if spec.swept == "p":
        source = SourceParams(value, spec.q)
        eta = spec.eta
    else:
        source = SourceParams(spec.p, spec.q)
        eta = value
    budget = Budget(spec.delta, eta)
    tag = backend_tag(spec.backend)
    rows = []
    for name in POLICY_ORDER:
        if name not in spec.policies:
            continue
        if name == "RS":
            r = optimize_rs(source, spec.channel, budget, backend=tag)
            rows.append(SweepRow(name, source.p, source.q, eta, spec.channel,
                                 r.probs[0], r.probs[1], r.pe, r.cost_per_delta,
                                 r.feasible, tag))
        elif name == "EA":
            r = optimize_ea(source, spec.channel, budget, backend=tag)
            rows.append(SweepRow(name, source.p, source.q, eta, spec.channel,
                                 r.probs[0], r.probs[1], r.pe, r.cost_per_delta,
                                 r.feasible, tag))
        else:
            policy = ChangeAware() if name == "CA" else SemanticsAware()
            pe, cost, ok = _fixed_policy_point(policy, source, spec.channel, budget, tag)
            rows.append(SweepRow(name, source.p, source.q, eta, spec.channel,
                                 None, None, pe, cost, ok, tag))
    return rows


def run_sweep(spec: SweepSpec) -> tuple:
    """All policy rows over the grid, plus the EA-vs-RS comparison."""
    per_point = _map(lambda v: _sweep_point(spec, v), spec.grid())
    rows = [row for chunk in per_point for row in chunk]
    order = {name: i for i, name in enumerate(POLICY_ORDER)}
    rows.sort(key=lambda r: (r.p if spec.swept == "p" else r.eta, order[r.policy]))
    return rows, _compare_summary(rows)


def _compare_summary(rows: Sequence[SweepRow]) -> dict:
    by_key = {}
    for r in rows:
        key = (r.p, r.q, r.eta, r.channel)
        by_key.setdefault(key, {})[r.policy] = r
    checked = 0
    holds = 0
    exceptions = []
    infeasible = []
    for key, group in sorted(by_key.items(), key=lambda kv: kv[0][:3]):
        rs, ea = group.get("RS"), group.get("EA")
        if rs is not None and ea is not None and rs.feasible and ea.feasible:
            checked += 1
            if ea.pe <= rs.pe + 1e-9:
                holds += 1
            else:
                exceptions.append({"p": key[0], "q": key[1], "eta": key[2],
                                   "pe_ea": ea.pe, "pe_rs": rs.pe})
        for name in ("CA", "SA"):
            r = group.get(name)
            if r is not None and not r.feasible:
                infeasible.append({"policy": name, "p": key[0], "q": key[1],
                                   "eta": key[2], "cost": r.cost})
    return {
        "points_compared": checked,
        "ea_le_rs": holds,
        "exceptions": exceptions,
        "infeasible": infeasible,
    }


def render_sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        d = r.to_dict()
        w.writerow([_fmt(d[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


CHANNEL_WEAK = ChannelParams(0.2, 0.1, 0.2, 0.1)
CHANNEL_STRONG = ChannelParams(0.8, 0.1, 0.8, 0.1)

_Q_NOTE = (
    "q follows the figure captions (0.1 for one sweep, 0.4 for the other); "
    "the accompanying prose once gives q=0.4 for both sweeps, and the "
    "captions win here."
)


@dataclass(frozen=True)
class Preset:
    name: str
    specs: tuple
    notes: str


PRESETS = {
    "fig-p-sweep-q01": Preset(
        "fig-p-sweep-q01",
        (
            SweepSpec("p", 0.05, 0.45, 0.05, q=0.1, eta=0.8, channel=CHANNEL_WEAK),
            SweepSpec("p", 0.05, 0.45, 0.05, q=0.1, eta=0.8, channel=CHANNEL_STRONG),
        ),
        _Q_NOTE,
    ),
    "fig-p-sweep-q04": Preset(
        "fig-p-sweep-q04",
        (
            SweepSpec("p", 0.05, 0.45, 0.05, q=0.4, eta=0.8, channel=CHANNEL_WEAK),
            SweepSpec("p", 0.05, 0.45, 0.05, q=0.4, eta=0.8, channel=CHANNEL_STRONG),
        ),
        _Q_NOTE,
    ),
    "fig-eta-sweep": Preset(
        "fig-eta-sweep",
        (
            SweepSpec("eta", 0.05, 1.0, 0.05, q=0.1, p=0.2, channel=CHANNEL_WEAK),
            SweepSpec("eta", 0.05, 1.0, 0.05, q=0.1, p=0.2, channel=CHANNEL_STRONG),
        ),
        "eta grid at the fixed interior point p=0.2, q=0.1, both caption "
        "channel configurations.",
    ),
}


def run_preset(name: str, backend: Optional[str] = None) -> tuple:
    try:
        preset = PRESETS[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        ) from None
    rows = []
    summaries = []
    for spec in preset.specs:
        if backend is not None:
            spec = SweepSpec(spec.swept, spec.start, spec.stop, spec.step,
                             q=spec.q, channel=spec.channel, p=spec.p,
                             eta=spec.eta, policies=spec.policies,
                             backend=backend, delta=spec.delta)
        chunk, summary = run_sweep(spec)
        rows.extend(chunk)
        summaries.append(summary)
    merged = {
        "points_compared": sum(s["points_compared"] for s in summaries),
        "ea_le_rs": sum(s["ea_le_rs"] for s in summaries),
        "exceptions": [e for s in summaries for e in s["exceptions"]],
        "infeasible": [e for s in summaries for e in s["infeasible"]],
        "notes": preset.notes,
    }
    return rows, merged


@dataclass(frozen=True)
class ConcordanceRow:
    policy: str
    source: SourceParams
    channel: ChannelParams
    pa1: Optional[float]
    pa2: Optional[float]
    pe_formula: Optional[float]
    pe_chain: Optional[float]
    pe_sim: Optional[float]
    cost_formula: Optional[float]
    cost_chain: Optional[float]
    pe_diff: Optional[float]
    cost_diff: Optional[float]
    classification: str

    def to_dict(self) -> dict:
        return {
            "policy": self.policy, "p": self.source.p, "q": self.source.q,
            "ps1_solo": self.channel.ps1_solo, "ps1_joint": self.channel.ps1_joint,
            "ps2_solo": self.channel.ps2_solo, "ps2_joint": self.channel.ps2_joint,
            "pa1": self.pa1, "pa2": self.pa2,
            "pe_formula": self.pe_formula, "pe_chain": self.pe_chain,
            "pe_sim": self.pe_sim,
            "cost_formula": self.cost_formula, "cost_chain": self.cost_chain,
            "pe_diff": self.pe_diff, "cost_diff": self.cost_diff,
            "classification": self.classification,
        }


def _policy_probs(policy: Policy):
    if isinstance(policy, RandomSampling):
        return policy.pa1, policy.pa2
    if isinstance(policy, ErrorAware):
        return policy.qa1, policy.qa2
    return None, None


def concordance_row(
    policy: Policy,
    source: SourceParams,
    channel: ChannelParams,
    sim: Optional[SimConfig] = None,
) -> ConcordanceRow:
    """One formula-vs-chain (and optionally vs-simulation) comparison."""
    pa1, pa2 = _policy_probs(policy)
    try:
        pe_f = pe_closed_form(policy, source, channel).value
        cost_f = cost_closed_form(policy, source, channel).value
    except BoundaryEvaluation:
        pe_f = cost_f = None
    try:
        if isinstance(policy, RandomSampling):
            pe_c, cost_c = ChainEvaluator("RS", source, channel).pe_cost(pa1, pa2)
        elif isinstance(policy, ErrorAware):
            pe_c, cost_c = ChainEvaluator("EA", source, channel).pe_cost(pa1, pa2)
        else:
            st = stationary(build_kernel(policy, source, channel))
            pe_c, cost_c = st.pe, st.cost
    except (ReducibleChain, NumericalFailure):
        pe_c = cost_c = None
    pe_s = None
    if sim is not None:
        pe_s = run(policy, source, channel, sim).pe_mean
    if None in (pe_f, cost_f, pe_c, cost_c):
        pe_d = cost_d = None
        cls = "boundary"
    else:
        pe_d = abs(pe_f - pe_c)
        cost_d = abs(cost_f - cost_c)
        cls = "match" if pe_d <= MATCH_TOL and cost_d <= MATCH_TOL else "mismatch"
    return ConcordanceRow(policy.tag, source, channel, pa1, pa2,
                          pe_f, pe_c, pe_s, cost_f, cost_c, pe_d, cost_d, cls)


def _draw_channel(rng) -> ChannelParams:
    vals = []
    for _ in range(2):
        a, b = rng.uniform(0.05, 0.95, size=2)
        lo, hi = (a, b) if a < b else (b, a)
        vals.extend([hi, lo])   # solo strictly above joint
    return ChannelParams(*vals)


def identity_grid() -> list:
    """200 interior tuples where the printed EA{1,1} and SA forms are
    claimed to coincide."""
    p_vals = [round(0.05 + 0.05 * k, 10) for k in range(8)]
    q_vals = [0.05, 0.15, 0.25, 0.35, 0.45]
    channels = [
        ChannelParams(0.8, 0.1, 0.8, 0.1),
        ChannelParams(0.2, 0.1, 0.2, 0.1),
        ChannelParams(0.9, 0.2, 0.6, 0.3),
        ChannelParams(0.5, 0.25, 0.5, 0.25),
        ChannelParams(0.7, 0.4, 0.9, 0.1),
    ]
    return [(SourceParams(p, q), ch)
            for p in p_vals for q in q_vals for ch in channels]


CORNER_SOURCE = SourceParams(0.2, 0.1)
CORNER_CHANNEL = ChannelParams(1.0, 1.0, 1.0, 1.0)


def run_validation(
    n_points: int,
    seed: int = 0,
    sim: Optional[SimConfig] = None,
    include_identity_grid: bool = True,
) -> tuple:
    """Random-tuple concordance rows plus the designed probes.

    The simulation column stays empty unless a SimConfig is passed; it
    is then filled for the random tuples and the corner row but not
    for the identity grid.
    """
    if n_points < 1:
        raise ParameterError(f"n_points must be >= 1, got {n_points}")
    rng = np.random.default_rng(seed)
    tasks = []
    for _ in range(n_points):
        p = rng.uniform(0.05, 0.45)
        q = rng.uniform(0.05, 0.45)
        source = SourceParams(p, q)
        channel = _draw_channel(rng)
        pa1, pa2 = rng.uniform(0.05, 1.0, size=2)
        qa1, qa2 = rng.uniform(0.05, 1.0, size=2)
        tasks.append((RandomSampling(pa1, pa2), source, channel, sim))
        tasks.append((ChangeAware(), source, channel, sim))
        tasks.append((ErrorAware(qa1, qa2), source, channel, sim))
        tasks.append((SemanticsAware(), source, channel, sim))
    # designed corner probe: the printed RS error is (p-1)/(p+2q) here
    # while the chain is exactly 0
    tasks.append((RandomSampling(1.0, 1.0), CORNER_SOURCE, CORNER_CHANNEL, sim))
    identity_pairs = []
    if include_identity_grid:
        for source, channel in identity_grid():
            tasks.append((ErrorAware(1.0, 1.0), source, channel, None))
            tasks.append((SemanticsAware(), source, channel, None))
            identity_pairs.append(len(tasks) - 2)
    rows = _map(lambda t: concordance_row(*t), tasks)
    summary = _validation_summary(rows, identity_pairs)
    summary["n_points"] = n_points
    summary["seed"] = seed
    return rows, summary


def _validation_summary(rows: Sequence[ConcordanceRow], identity_pairs) -> dict:
    policies = {}
    for tag in POLICY_ORDER:
        sub = [r for r in rows if r.policy == tag]
        if not sub:
            continue
        comparable = [r for r in sub if r.classification != "boundary"]
        matches = sum(1 for r in comparable if r.classification == "match")
        cost_matches = sum(1 for r in comparable if r.cost_diff <= MATCH_TOL)
        worst = max(comparable, key=lambda r: r.pe_diff, default=None)
        policies[tag] = {
            "rows": len(sub),
            "boundary_rows": len(sub) - len(comparable),
            "match_rate": matches / len(comparable) if comparable else None,
            "cost_match_rate": cost_matches / len(comparable) if comparable else None,
            "max_pe_diff": max((r.pe_diff for r in comparable), default=None),
            "max_cost_diff": max((r.cost_diff for r in comparable), default=None),
            "worst_tuple": None if worst is None else worst.to_dict(),
        }
    identity = None
    if identity_pairs:
        diffs = []
        for i in identity_pairs:
            ea, sa = rows[i], rows[i + 1]
            if ea.pe_formula is None or sa.pe_formula is None:
                continue
            diffs.append(abs(ea.pe_formula - sa.pe_formula))
        matches = sum(1 for d in diffs if d <= MATCH_TOL)
        identity = {
            "points": len(identity_pairs),
            "match_rate": matches / len(diffs) if diffs else None,
            "max_diff": max(diffs, default=None),
        }
    return {"policies": policies, "ea_sa_identity": identity}


def render_validation_csv(rows: Sequence[ConcordanceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(VALIDATION_COLUMNS)
    for r in rows:
        d = r.to_dict()
        w.writerow([_fmt(d[c]) for c in VALIDATION_COLUMNS])
    return buf.getvalue()
