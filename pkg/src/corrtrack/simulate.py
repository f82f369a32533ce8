"""Slotted Monte Carlo engine.

Each slot consumes exactly five uniforms in a fixed order (source move,
both sampling decisions, both decode outcomes), whether or not a draw is
needed, so trajectories are reproducible from (seed, replication) alone.
Replication r of a run with master seed s reads the Philox stream keyed
by (s, r); results are therefore independent of execution order and of
the chunking used by the fast loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from corrtrack.model import (
    ChannelParams,
    MicroState,
    ParameterError,
    Policy,
    Reconstruction,
    SlotOutcome,
    SourceParams,
    SourceState,
    error_tables,
    errors,
    fire_prob_tables,
    reception_table,
    sampler_fire_probs,
    source_kernel,
    INITIAL_INDEX,
)

_CHUNK = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    horizon: int
    burn_in: int = 10_000
    replications: int = 16
    seed: int = 0
    delta: float = 1.0

    def __post_init__(self):
        if self.burn_in < 0 or self.horizon <= self.burn_in:
            raise ParameterError(
                f"need horizon > burn_in >= 0, got {self.horizon}, {self.burn_in}"
            )
        if self.replications < 1:
            raise ParameterError(f"replications must be >= 1, got {self.replications}")
        if self.delta < 0:
            raise ParameterError(f"delta must be nonnegative, got {self.delta!r}")


@dataclass(frozen=True)
class MetricsReport:
    pe_mean: float
    pe_stderr: float
    cost_mean: float
    cost_stderr: float
    slots_used: int
    replications: int
    seed: int


def step(
    state: MicroState,
    x_prev: SourceState,
    policy: Policy,
    source: SourceParams,
    channel: ChannelParams,
    rng: np.random.Generator,
    delta: float = 1.0,
) -> tuple[MicroState, SlotOutcome]:
    """Advance one slot; consumes exactly five uniforms from rng."""
    u = rng.random(5)
    row = source_kernel(source)[int(x_prev)]
    if u[0] < row[0]:
        x_now = SourceState.S0
    elif u[0] < row[0] + row[1]:
        x_now = SourceState.S10
    else:
        x_now = SourceState.S11
    f1, f2 = sampler_fire_probs(policy, x_prev, x_now, state.recon)
    a1 = 1 if u[1] < f1 else 0
    a2 = 1 if u[2] < f2 else 0
    p1 = (channel.ps1_joint if a2 else channel.ps1_solo) if a1 else 0.0
    p2 = (channel.ps2_joint if a1 else channel.ps2_solo) if a2 else 0.0
    s1 = 1 if u[3] < p1 else 0
    s2 = 1 if u[4] < p2 else 0
    recon = state.recon
    if s1 or s2:
        xhat1, xhat2 = recon.xhat1, recon.xhat2
        if s1:
            xhat1 = x_now.x1
            if x_now.x1 == 0:
                xhat2 = None
        if s2:
            xhat2 = x_now.x2
            xhat1 = 1
        recon = Reconstruction(xhat1, xhat2)
    e1, e2, sys_err = errors(x_now, recon)
    outcome = SlotOutcome(
        a1=a1, a2=a2, s1=s1, s2=s2, e1=e1, e2=e2, sys_err=sys_err,
        cost=delta * (a1 + a2),
    )
    return MicroState(x_now, recon), outcome


@njit(cache=True)
def _run_chunk(u, m0, cum_rows, f1_tab, f2_tab, rnext, sys_tab,
               s1s, s1j, s2s, s2j, skip):
    m = m0
    err_count = 0
    cost_count = 0
    n = u.shape[0]
    for t in range(n):
        x = m // 6
        r = m % 6
        u0 = u[t, 0]
        if u0 < cum_rows[x, 0]:
            x_now = 0
        elif u0 < cum_rows[x, 1]:
            x_now = 1
        else:
            x_now = 2
        a1 = 1 if u[t, 1] < f1_tab[m, x_now] else 0
        a2 = 1 if u[t, 2] < f2_tab[m, x_now] else 0
        if a1 == 1:
            p1 = s1j if a2 == 1 else s1s
        else:
            p1 = 0.0
        if a2 == 1:
            p2 = s2j if a1 == 1 else s2s
        else:
            p2 = 0.0
        s1 = 1 if u[t, 3] < p1 else 0
        s2 = 1 if u[t, 4] < p2 else 0
        rn = rnext[x_now, r, s1, s2]
        m = 6 * x_now + rn
        if t >= skip:
            err_count += sys_tab[x_now, rn]
            cost_count += a1 + a2
    return m, err_count, cost_count


def _tables(policy: Policy, source: SourceParams):
    cum_rows = np.cumsum(source_kernel(source), axis=1)
    cum_rows[:, -1] = 1.0
    f1_tab, f2_tab = fire_prob_tables(policy)
    rnext = reception_table()
    _, _, sys_tab = error_tables()
    return (
        np.ascontiguousarray(cum_rows),
        np.ascontiguousarray(f1_tab),
        np.ascontiguousarray(f2_tab),
        np.ascontiguousarray(rnext.astype(np.int64)),
        np.ascontiguousarray(sys_tab.astype(np.int64)),
    )


def run(
    policy: Policy,
    source: SourceParams,
    channel: ChannelParams,
    sim: SimConfig,
) -> MetricsReport:
    """Estimate error and cost rates across independent replications."""
    cum_rows, f1_tab, f2_tab, rnext, sys_tab = _tables(policy, source)
    measured = sim.horizon - sim.burn_in
    pe_reps = np.empty(sim.replications)
    cost_reps = np.empty(sim.replications)
    for rep in range(sim.replications):
        key = np.array([sim.seed, rep], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key))
        m = INITIAL_INDEX
        err_total = 0
        cost_total = 0
        done = 0
        while done < sim.horizon:
            n = min(_CHUNK, sim.horizon - done)
            u = gen.random((n, 5))
            skip = min(max(sim.burn_in - done, 0), n)
            m, err_count, cost_count = _run_chunk(
                u, m, cum_rows, f1_tab, f2_tab, rnext, sys_tab,
                channel.ps1_solo, channel.ps1_joint,
                channel.ps2_solo, channel.ps2_joint, skip,
            )
            err_total += err_count
            cost_total += cost_count
            done += n
        pe_reps[rep] = err_total / measured
        cost_reps[rep] = sim.delta * cost_total / measured
    if sim.replications > 1:
        pe_se = float(np.std(pe_reps, ddof=1) / np.sqrt(sim.replications))
        cost_se = float(np.std(cost_reps, ddof=1) / np.sqrt(sim.replications))
    else:
        pe_se = 0.0
        cost_se = 0.0
    return MetricsReport(
        pe_mean=float(np.mean(pe_reps)),
        pe_stderr=pe_se,
        cost_mean=float(np.mean(cost_reps)),
        cost_stderr=cost_se,
        slots_used=measured * sim.replications,
        replications=sim.replications,
        seed=sim.seed,
    )
