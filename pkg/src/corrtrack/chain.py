"""Exact chain engine on the 18 micro-states.

The pair (source state, reconstruction) is Markov under every policy in
this package, with 3 x 6 = 18 micro-states.  This module builds the
exact one-step kernel by enumerating source moves, sampling decisions
and channel outcomes, solves the stationary balance equations with a
dense linear solve, and reads off the time-averaged reconstruction
error and sampling cost.  It is the ground-truth engine the closed
forms and the simulator are checked against.

All slot semantics come from corrtrack.model; nothing here re-derives
decision or reception rules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from corrtrack.model import (
    INITIAL_INDEX,
    N_STATES,
    ChannelParams,
    MicroState,
    Policy,
    SourceParams,
    enumerate_states,
    error_tables,
    fire_prob_tables,
    reception_table,
    source_kernel,
    state_from_index,
    state_label,
)


class ReducibleChain(RuntimeError):
    """The chain has more than one closed class, so the stationary law
    depends on the initial condition."""

    def __init__(self, message: str, components: tuple[tuple[int, ...], ...]):
        super().__init__(message)
        self.components = components


class NumericalFailure(RuntimeError):
    """A linear solve or its cross-check missed the required tolerance."""


# static, parameter-independent tables
_RNEXT = reception_table()
_E1_TABLE, _E2_TABLE, _SYS_TABLE = error_tables()

_SRC_OF = np.arange(N_STATES) // 6
_RECON_OF = np.arange(N_STATES) % 6

# sys_err of a micro-state (its own source value against its own recon)
SYSERR_OF_STATE = _SYS_TABLE[_SRC_OF, _RECON_OF].astype(float)


def _flat_destinations() -> np.ndarray:
    """Flattened kernel slot m*18+dest for each (m, x_now, s1, s2)."""
    idx = np.empty((N_STATES, 3, 2, 2), dtype=np.int64)
    for m in range(N_STATES):
        r = m % 6
        for x in range(3):
            for s1 in (0, 1):
                for s2 in (0, 1):
                    idx[m, x, s1, s2] = m * N_STATES + 6 * x + _RNEXT[x, r, s1, s2]
    return idx


_FLAT_IDX = _flat_destinations()


def _channel_weights(channel: ChannelParams) -> np.ndarray:
    """w[a1, a2, s1, s2] = P[(s1,s2) | (a1,a2)]."""
    s1p = np.array([[0.0, 0.0], [channel.ps1_solo, channel.ps1_joint]])
    s2p = np.array([[0.0, channel.ps2_solo], [0.0, channel.ps2_joint]])
    w = np.empty((2, 2, 2, 2))
    for a1 in (0, 1):
        for a2 in (0, 1):
            p1, p2 = s1p[a1, a2], s2p[a1, a2]
            for s1 in (0, 1):
                for s2 in (0, 1):
                    w[a1, a2, s1, s2] = (p1 if s1 else 1.0 - p1) * (
                        p2 if s2 else 1.0 - p2
                    )
    return w


def _action_weights(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """w[m, x, a1, a2] from per-sampler fire probabilities."""
    w = np.empty((N_STATES, 3, 2, 2))
    w[:, :, 0, 0] = (1.0 - f1) * (1.0 - f2)
    w[:, :, 0, 1] = (1.0 - f1) * f2
    w[:, :, 1, 0] = f1 * (1.0 - f2)
    w[:, :, 1, 1] = f1 * f2
    return w


def _assemble_kernel(
    p_src: np.ndarray, w_a: np.ndarray, w_s: np.ndarray
) -> np.ndarray:
    t = np.einsum("mx,mxab,abst->mxst", p_src, w_a, w_s)
    return np.bincount(
        _FLAT_IDX.ravel(), weights=t.ravel(), minlength=N_STATES * N_STATES
    ).reshape(N_STATES, N_STATES)


@dataclass(frozen=True)
class ChainModel:
    states: tuple[MicroState, ...]
    kernel: np.ndarray
    policy: Policy
    source: SourceParams
    channel: ChannelParams


@dataclass(frozen=True)
class StationaryResult:
    """Stationary law with its scalar summaries.

    pi is indexed by micro-state; cost is the expected per-slot sampling
    spend delta * E[a1 + a2].  projection aggregates pi by the observable
    pattern (x1, x2, e1, e2); mass that fits none of the eight patterns
    (possible only through unreachable reconstructions) lands in residual.
    initial_component_only marks a law computed on a reducible chain by
    restricting to the component reachable from the synchronized start,
    in which case it depends on that choice of start.
    """

    pi: np.ndarray
    pe: float
    cost: float
    projection: dict[str, float]
    residual: float
    initial_component_only: bool = False


PROJECTION_LABELS = (
    "0,0,0",
    "0,1,1",
    "1,0,0,0",
    "1,0,0,1",
    "1,0,1,1",
    "1,1,0,0",
    "1,1,0,1",
    "1,1,1,1",
)


def build_kernel(
    policy: Policy, source: SourceParams, channel: ChannelParams
) -> ChainModel:
    """Exact one-step kernel over the 18 micro-states.

    Entry (m, n) sums P[x_now | src(m)] * P[a1,a2] * P[s1,s2] over every
    outcome tuple whose reception lands reconstruction r(n) with source
    x(n); the factors come from the core slot rules.
    """
    f1, f2 = fire_prob_tables(policy)
    p_src = source_kernel(source)[_SRC_OF, :]
    kernel = _assemble_kernel(p_src, _action_weights(f1, f2), _channel_weights(channel))
    return ChainModel(enumerate_states(), kernel, policy, source, channel)


# ---------------------------------------------------------------------------
# graph structure

def _reachable_from(adj: np.ndarray, start: int) -> list[int]:
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(adj[i]):
            j = int(j)
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return sorted(seen)


def _strongly_connected_components(adj: np.ndarray) -> list[list[int]]:
    # Kosaraju; the graph has 18 nodes so plain recursion-free DFS is fine.
    n = adj.shape[0]
    order: list[int] = []
    seen = [False] * n
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        stack = [(s, iter(np.flatnonzero(adj[s])))]
        while stack:
            node, it = stack[-1]
            advanced = False
            for j in it:
                j = int(j)
                if not seen[j]:
                    seen[j] = True
                    stack.append((j, iter(np.flatnonzero(adj[j]))))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    comp = [-1] * n
    radj = adj.T
    n_comp = 0
    for s in reversed(order):
        if comp[s] != -1:
            continue
        comp[s] = n_comp
        stack = [s]
        while stack:
            u = stack.pop()
            for j in np.flatnonzero(radj[u]):
                j = int(j)
                if comp[j] == -1:
                    comp[j] = n_comp
                    stack.append(j)
        n_comp += 1
    groups: list[list[int]] = [[] for _ in range(n_comp)]
    for i, c in enumerate(comp):
        groups[c].append(i)
    return groups


def _closed_classes(adj: np.ndarray) -> list[list[int]]:
    closed = []
    for group in _strongly_connected_components(adj):
        members = set(group)
        if all(int(j) in members for i in group for j in np.flatnonzero(adj[i])):
            closed.append(sorted(group))
    return closed


# ---------------------------------------------------------------------------
# stationary law

def _solve_balance(sub: np.ndarray) -> np.ndarray:
    """Solve pi K = pi, sum(pi) = 1 with the last balance row replaced."""
    n = sub.shape[0]
    m = sub.T - np.eye(n)
    m[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        return np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"stationary solve failed: {exc}") from exc


def _power_limit(sub: np.ndarray) -> np.ndarray:
    """Row of the damped kernel's high power; independent route to pi.

    Repeated squaring of (K+I)/2 converges for any spectral gap the
    doubles can resolve, so the cross-check does not slow down on
    slowly mixing parameter corners.
    """
    a = 0.5 * (sub + np.eye(sub.shape[0]))
    for _ in range(60):
        a = a @ a
        # renormalize rows: squaring doubles the tiny row-sum drift each
        # step, which would compound to a blow-up over 60 squarings
        a /= a.sum(axis=1, keepdims=True)
    return a[0]


def project_to_labels(pi: np.ndarray) -> tuple[dict[str, float], float]:
    """Aggregate a micro-state law by the pattern (x1, x2, e1, e2).

    While x1 = 0 the secondary value does not exist and e2 collapses
    onto e1, leaving the two three-digit labels.  The combination
    x1 = 1, e1 = 1, e2 = 0 fits no label (it needs a reconstruction that
    guessed the secondary bit while missing the primary one, which no
    reception sequence produces); any mass there is returned as the
    residual.
    """
    agg = {label: 0.0 for label in PROJECTION_LABELS}
    residual = 0.0
    for m in range(N_STATES):
        x = int(_SRC_OF[m])
        e1 = int(_E1_TABLE[x, _RECON_OF[m]])
        e2 = int(_E2_TABLE[x, _RECON_OF[m]])
        if x == 0:
            label = f"0,{e1},{e2}"
        elif e1 == 1 and e2 == 0:
            residual += float(pi[m])
            continue
        else:
            x2 = 0 if x == 1 else 1
            label = f"1,{x2},{e1},{e2}"
        agg[label] += float(pi[m])
    return agg, residual


def _cost_rate(pi: np.ndarray, p_src: np.ndarray, f1: np.ndarray, f2: np.ndarray) -> float:
    return float(np.einsum("m,mx,mx->", pi, p_src, f1 + f2))


def stationary(
    model: ChainModel,
    tol: float = 1e-12,
    allow_initial_component: bool = False,
    delta: float = 1.0,
    cross_check: bool = True,
) -> StationaryResult:
    """Stationary law of the chain, restricted to states reachable from
    the synchronized start (S0, (0, placeholder)); unreachable states get 0.

    A chain with several closed classes has no unique stationary law
    (e.g. zero sampling probabilities freeze the reconstruction); that
    raises ReducibleChain unless allow_initial_component is set, in
    which case the law is computed on the reachable component and
    flagged.  The dense solve is verified against the residual tolerance
    and, when cross_check is set, against a repeated-squaring limit of
    the kernel.
    """
    kernel = model.kernel
    adj = kernel > 0.0
    closed = _closed_classes(adj)
    reach = _reachable_from(adj, INITIAL_INDEX)
    reach_set = set(reach)
    closed_in_reach = [c for c in closed if set(c) <= reach_set]
    if len(closed_in_reach) > 1:
        names = "; ".join(
            "{" + ", ".join(state_label(state_from_index(i)) for i in c) + "}"
            for c in closed_in_reach
        )
        raise ReducibleChain(
            f"several closed classes are reachable from the start: {names}",
            tuple(tuple(c) for c in closed_in_reach),
        )
    initial_only = len(closed) > 1
    if initial_only and not allow_initial_component:
        names = "; ".join(
            "{" + ", ".join(state_label(state_from_index(i)) for i in c) + "}"
            for c in closed
        )
        raise ReducibleChain(
            f"the chain has {len(closed)} closed classes, so the stationary "
            f"law depends on the initial state: {names}",
            tuple(tuple(c) for c in closed),
        )

    sub = kernel[np.ix_(reach, reach)]
    pi_sub = _solve_balance(sub)
    pi = np.zeros(N_STATES)
    pi[reach] = pi_sub

    if pi.min() < -1e-10:
        raise NumericalFailure(f"stationary solve went negative: min {pi.min():.3e}")
    pi = np.clip(pi, 0.0, None)

    residual_norm = float(np.max(np.abs(pi @ kernel - pi)))
    if residual_norm > tol:
        raise NumericalFailure(
            f"stationary residual {residual_norm:.3e} exceeds tol {tol:.1e}"
        )
    if cross_check:
        pi_pow = np.zeros(N_STATES)
        pi_pow[reach] = _power_limit(sub)
        gap = float(np.max(np.abs(pi_pow - pi)))
        if gap > 1e-10:
            raise NumericalFailure(
                f"dense solve and power limit disagree by {gap:.3e}"
            )

    pe = float(pi @ SYSERR_OF_STATE)
    f1, f2 = fire_prob_tables(model.policy)
    p_src = source_kernel(model.source)[_SRC_OF, :]
    cost = delta * _cost_rate(pi, p_src, f1, f2)
    projection, proj_residual = project_to_labels(pi)
    return StationaryResult(
        pi=pi,
        pe=pe,
        cost=cost,
        projection=projection,
        residual=proj_residual,
        initial_component_only=initial_only,
    )


def source_marginal(result: StationaryResult) -> np.ndarray:
    """Mass of pi on each source state."""
    return np.array([result.pi[_SRC_OF == x].sum() for x in range(3)])


# ---------------------------------------------------------------------------
# fast path for optimizers and sweeps

class ChainEvaluator:
    """Repeated (pe, cost-rate) evaluation for one policy family.

    Fixes (source, channel) and the family's fire-probability masks once,
    then evaluates many probability settings with one kernel assembly and
    one 18x18 solve each.  The masks come from the same fire-probability
    authority as everything else: RS and EA fire probabilities are their
    masks at probability 1, scaled by the requested probabilities.
    """

    def __init__(self, family: str, source: SourceParams, channel: ChannelParams):
        if family not in ("RS", "EA"):
            raise ValueError(f"family must be RS or EA, got {family!r}")
        from corrtrack.model import ErrorAware, RandomSampling

        probe = RandomSampling(1.0, 1.0) if family == "RS" else ErrorAware(1.0, 1.0)
        self.family = family
        self.source = source
        self.channel = channel
        self.mask1, self.mask2 = fire_prob_tables(probe)
        self.p_src = source_kernel(source)[_SRC_OF, :]
        self.w_s = _channel_weights(channel)

    def pe_cost(self, prob1: float, prob2: float) -> tuple[float, float]:
        """(pe, per-slot expected samples) at the given fire probabilities.

        Zero probabilities can make the chain reducible; that surfaces as
        NumericalFailure from the singular solve rather than a graph scan,
        so callers probing boundaries must handle it.
        """
        f1 = prob1 * self.mask1
        f2 = prob2 * self.mask2
        kernel = _assemble_kernel(self.p_src, _action_weights(f1, f2), self.w_s)
        pi = _solve_balance(kernel)
        if pi.min() < -1e-10 or np.max(np.abs(pi @ kernel - pi)) > 1e-11:
            raise NumericalFailure(
                f"fast stationary solve unreliable at probs ({prob1}, {prob2})"
            )
        pi = np.clip(pi, 0.0, None)
        pe = float(pi @ SYSERR_OF_STATE)
        return pe, _cost_rate(pi, self.p_src, f1, f2)
