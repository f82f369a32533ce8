"""State space and per-slot rules for the two-process monitoring model.

A single three-state chain drives both monitored processes: in state S0
the primary bit is 0 and the secondary bit carries no information; S10
and S11 are the two primary-active states, split on the secondary bit.
Each receiver pair holds a reconstruction (xhat1, xhat2); xhat2 may hold
a placeholder (None) that matches neither 0 nor 1.

Every engine in the package (Monte Carlo, exact chain) derives its
transition logic from the functions in this module; nothing else
re-implements the slot semantics.  The slot order is fixed: source move,
sampling decisions, channel outcomes, reception, error accounting.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Union

import numpy as np


class ParameterError(ValueError):
    """A model parameter left its documented domain."""


class ChannelOrderingWarning(UserWarning):
    """Solo decode success is expected to dominate joint decode success."""


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ParameterError(f"{name} must lie in [0,1], got {value!r}")


class SourceState(IntEnum):
    S0 = 0
    S10 = 1
    S11 = 2

    @property
    def x1(self) -> int:
        return 0 if self is SourceState.S0 else 1

    @property
    def x2(self) -> Optional[int]:
        # None encodes "irrelevant": the secondary process has no value
        # while the primary bit is 0.
        if self is SourceState.S0:
            return None
        return 0 if self is SourceState.S10 else 1


@dataclass(frozen=True)
class SourceParams:
    """Departure rates of the source chain.

    q is the per-slot probability of each of the two edges out of S0;
    p is the per-slot probability of each of the two edges out of S10
    (and, symmetrically, S11).
    """

    p: float
    q: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p <= 0.5:
            raise ParameterError(f"p must lie in (0, 0.5], got {self.p!r}")
        if not 0.0 < self.q <= 0.5:
            raise ParameterError(f"q must lie in (0, 0.5], got {self.q!r}")


@dataclass(frozen=True)
class ChannelParams:
    """Decode-success probabilities on the shared collision channel.

    *_solo applies when only that sampler transmits, *_joint when both
    transmit in the same slot.  Solo success is expected to dominate
    joint success (interference); violations only warn because corner
    configurations (e.g. a perfect channel) are legitimate test inputs.
    """

    ps1_solo: float
    ps1_joint: float
    ps2_solo: float
    ps2_joint: float

    def __post_init__(self) -> None:
        for name in ("ps1_solo", "ps1_joint", "ps2_solo", "ps2_joint"):
            _check_prob(name, getattr(self, name))
        if self.ps1_solo < self.ps1_joint or self.ps2_solo < self.ps2_joint:
            warnings.warn(
                "joint decode success exceeds solo decode success; "
                "interference normally makes solo transmissions more reliable",
                ChannelOrderingWarning,
                stacklevel=2,
            )


@dataclass(frozen=True)
class RandomSampling:
    """Sample blindly: sampler m fires with a fixed probability each slot."""

    pa1: float
    pa2: float
    tag = "RS"

    def __post_init__(self) -> None:
        _check_prob("pa1", self.pa1)
        _check_prob("pa2", self.pa2)


@dataclass(frozen=True)
class ChangeAware:
    """Sample exactly when the observed process value changed this slot."""

    tag = "CA"


@dataclass(frozen=True)
class ErrorAware:
    """Sample with fixed probability, but only while the reconstruction
    disagrees with the current process value."""

    qa1: float
    qa2: float
    tag = "EA"

    def __post_init__(self) -> None:
        _check_prob("qa1", self.qa1)
        _check_prob("qa2", self.qa2)


@dataclass(frozen=True)
class SemanticsAware:
    """Always sample while the reconstruction disagrees (ErrorAware at 1)."""

    tag = "SA"


Policy = Union[RandomSampling, ChangeAware, ErrorAware, SemanticsAware]

POLICY_TAGS = ("RS", "CA", "EA", "SA")


def as_error_aware(policy: Policy) -> Policy:
    """Normalize SemanticsAware to its ErrorAware(1,1) equivalent.

    Both engines route SA through this so the two tags share one code
    path and produce identical results.
    """
    if isinstance(policy, SemanticsAware):
        return ErrorAware(1.0, 1.0)
    return policy


@dataclass(frozen=True)
class Reconstruction:
    xhat1: int
    xhat2: Optional[int]

    def __post_init__(self) -> None:
        if self.xhat1 not in (0, 1):
            raise ParameterError(f"xhat1 must be 0 or 1, got {self.xhat1!r}")
        if self.xhat2 not in (0, 1, None):
            raise ParameterError(f"xhat2 must be 0, 1 or None, got {self.xhat2!r}")


@dataclass(frozen=True)
class MicroState:
    src: SourceState
    recon: Reconstruction


@dataclass(frozen=True)
class SlotOutcome:
    a1: int
    a2: int
    s1: int
    s2: int
    e1: int
    e2: int
    sys_err: int
    cost: float


# ---------------------------------------------------------------------------
# source dynamics

def source_kernel(source: SourceParams) -> np.ndarray:
    """Row-stochastic 3x3 kernel over (S0, S10, S11)."""
    p, q = source.p, source.q
    return np.array(
        [
            [1.0 - 2.0 * q, q, q],
            [p, 1.0 - 2.0 * p, p],
            [p, p, 1.0 - 2.0 * p],
        ]
    )


def source_stationary(source: SourceParams) -> np.ndarray:
    """Stationary law (p, q, q)/(p+2q) of the source chain."""
    p, q = source.p, source.q
    return np.array([p, q, q]) / (p + 2.0 * q)


# ---------------------------------------------------------------------------
# per-slot rules

def sampler_fire_probs(
    policy: Policy,
    x_prev: SourceState,
    x_now: SourceState,
    recon_prev: Reconstruction,
) -> tuple[float, float]:
    """Probability that each sampler fires, given the slot context.

    This is the single authority for decision semantics.  Sampler 2 is
    idle whenever the primary bit is 0 (its process carries no value),
    under every policy.  The two samplers decide independently.
    """
    policy = as_error_aware(policy)
    x1 = x_now.x1
    if isinstance(policy, RandomSampling):
        return policy.pa1, policy.pa2 if x1 == 1 else 0.0
    if isinstance(policy, ChangeAware):
        f1 = 1.0 if x_now.x1 != x_prev.x1 else 0.0
        f2 = 1.0 if x1 == 1 and x_now.x2 != x_prev.x2 else 0.0
        return f1, f2
    if isinstance(policy, ErrorAware):
        f1 = policy.qa1 if x1 != recon_prev.xhat1 else 0.0
        f2 = policy.qa2 if x1 == 1 and x_now.x2 != recon_prev.xhat2 else 0.0
        return f1, f2
    raise TypeError(f"unknown policy {policy!r}")


def decision_distribution(
    policy: Policy,
    x_prev: SourceState,
    x_now: SourceState,
    recon_prev: Reconstruction,
) -> dict[tuple[int, int], float]:
    """Distribution of the action pair (a1, a2); zero-probability pairs omitted."""
    f1, f2 = sampler_fire_probs(policy, x_prev, x_now, recon_prev)
    dist = {}
    for a1 in (0, 1):
        w1 = f1 if a1 else 1.0 - f1
        if w1 == 0.0:
            continue
        for a2 in (0, 1):
            w2 = f2 if a2 else 1.0 - f2
            if w1 * w2 > 0.0:
                dist[(a1, a2)] = w1 * w2
    return dist


def channel_distribution(
    a1: int, a2: int, channel: ChannelParams
) -> dict[tuple[int, int], float]:
    """Distribution of decode successes (s1, s2) given who transmits.

    Simultaneous transmissions interfere, so both samplers fall back to
    their joint success probabilities; a silent sampler never succeeds.
    """
    if a1 and a2:
        p1, p2 = channel.ps1_joint, channel.ps2_joint
    elif a1:
        p1, p2 = channel.ps1_solo, 0.0
    elif a2:
        p1, p2 = 0.0, channel.ps2_solo
    else:
        p1, p2 = 0.0, 0.0
    dist = {}
    for s1 in (0, 1):
        w1 = p1 if s1 else 1.0 - p1
        if w1 == 0.0:
            continue
        for s2 in (0, 1):
            w2 = p2 if s2 else 1.0 - p2
            if w1 * w2 > 0.0:
                dist[(s1, s2)] = w1 * w2
    return dist


def apply_reception(
    x_now: SourceState, recon_prev: Reconstruction, s1: int, s2: int
) -> Reconstruction:
    """Update the reconstruction with whatever decoded this slot.

    A decoded primary sample carries the primary bit; a primary bit of 0
    also certifies the secondary process is irrelevant, clearing xhat2 to
    the placeholder.  A decoded secondary sample carries the secondary
    bit and implies the primary bit is 1 (the secondary sampler only acts
    while the primary bit is 1).
    """
    xhat1, xhat2 = recon_prev.xhat1, recon_prev.xhat2
    if s1:
        xhat1 = x_now.x1
        if x_now.x1 == 0:
            xhat2 = None
    if s2:
        xhat2 = x_now.x2
        xhat1 = 1
    return Reconstruction(xhat1, xhat2)


def errors(x_now: SourceState, recon_now: Reconstruction) -> tuple[int, int, int]:
    """Discrepancy errors (e1, e2) and the combined flag.

    While the primary bit is 0 the secondary process has no value of its
    own, so e2 collapses onto e1.  The placeholder mismatches both 0 and 1.
    """
    e1 = int(x_now.x1 != recon_now.xhat1)
    if x_now.x1 == 1:
        e2 = int(x_now.x2 != recon_now.xhat2)
    else:
        e2 = e1
    return e1, e2, int(e1 + e2 != 0)


# ---------------------------------------------------------------------------
# index space shared by the chain and the simulator
#
# state index m = 6*src + 3*xhat1 + xhat2code, xhat2code in {0,1,2(=None)}

N_STATES = 18

_XHAT2_CODES = (0, 1, None)


def _recon_index(recon: Reconstruction) -> int:
    code = 2 if recon.xhat2 is None else recon.xhat2
    return 3 * recon.xhat1 + code


def state_index(state: MicroState) -> int:
    return 6 * int(state.src) + _recon_index(state.recon)


def state_from_index(m: int) -> MicroState:
    if not 0 <= m < N_STATES:
        raise ParameterError(f"state index out of range: {m!r}")
    src, r = divmod(m, 6)
    xhat1, code = divmod(r, 3)
    return MicroState(SourceState(src), Reconstruction(xhat1, _XHAT2_CODES[code]))


def enumerate_states() -> tuple[MicroState, ...]:
    return tuple(state_from_index(m) for m in range(N_STATES))


def state_label(state: MicroState) -> str:
    xh2 = "-" if state.recon.xhat2 is None else str(state.recon.xhat2)
    return f"{state.src.name}/{state.recon.xhat1}{xh2}"


INITIAL_STATE = MicroState(SourceState.S0, Reconstruction(0, None))
INITIAL_INDEX = 6 * 0 + 3 * 0 + 2


def reception_table() -> np.ndarray:
    """next recon index, indexed [x_now, recon_prev, s1, s2]."""
    table = np.empty((3, 6, 2, 2), dtype=np.int64)
    for x in SourceState:
        for r in range(6):
            recon = state_from_index(r).recon
            for s1 in (0, 1):
                for s2 in (0, 1):
                    table[int(x), r, s1, s2] = _recon_index(
                        apply_reception(x, recon, s1, s2)
                    )
    return table


def error_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(e1, e2, sys_err) tables indexed [x_now, recon]."""
    e1t = np.empty((3, 6), dtype=np.int64)
    e2t = np.empty_like(e1t)
    syst = np.empty_like(e1t)
    for x in SourceState:
        for r in range(6):
            e1, e2, sys_err = errors(x, state_from_index(r).recon)
            e1t[int(x), r] = e1
            e2t[int(x), r] = e2
            syst[int(x), r] = sys_err
    return e1t, e2t, syst


def fire_prob_tables(policy: Policy) -> tuple[np.ndarray, np.ndarray]:
    """Per-sampler fire probabilities indexed [previous micro-state, x_now]."""
    f1 = np.empty((N_STATES, 3))
    f2 = np.empty((N_STATES, 3))
    for m in range(N_STATES):
        prev = state_from_index(m)
        for x in SourceState:
            f1[m, int(x)], f2[m, int(x)] = sampler_fire_probs(
                policy, prev.src, x, prev.recon
            )
    return f1, f2
