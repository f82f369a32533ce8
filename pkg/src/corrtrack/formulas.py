"""Analytic stationary-regime values for the four policies.

Each policy family has hand-derived closed forms for the time-averaged
reconstruction error, the time-averaged sampling cost, and the labeled
stationary aggregates.  They are transcribed exactly as derived and are
never patched or clamped: the random-sampling error expression is known
to leave [0, 1] at the pa = (1, 1) perfect-channel corner (it evaluates
to (p-1)/(p+2q) there), and the validate command quantifies every such
defect against the exact-chain engine instead of hiding it.  Results
carry an in_unit_interval flag for exactly this reason.

Two notational readings are baked in: the bare symbols "p_{1/12}" and
"p_{1/1}" inside G and G' denote the primary decode probabilities
ps1_joint and ps1_solo (shorthand used by the surrounding expressions),
and the semantics-aware forms are kept separate from error-aware at
probability one so the two printed derivations can be compared
numerically (see the validate command) rather than be assumed equal.

Local shorthand throughout: s1s/s1j are the primary sampler's solo and
joint decode probabilities; s2s/s2j the secondary sampler's.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from corrtrack.chain import PROJECTION_LABELS
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

ZERO_SAMPLING_NOTE = (
    "ergodic-limit value: the behavioral chain is reducible when both "
    "sampling probabilities are exactly 0"
)


class BoundaryEvaluation(ArithmeticError):
    """A formula denominator vanished at the requested parameters."""


@dataclass(frozen=True)
class FormulaValue:
    value: float
    in_unit_interval: bool
    policy: str
    backend: str = "closed-form"
    note: str = ""


@dataclass(frozen=True)
class RSCoefficients:
    F: float
    G: float
    A: float
    B: float
    D: float
    I: float
    H: float
    K: float


@dataclass(frozen=True)
class EACoefficients:
    F_prime: float
    G_prime: float
    Z1: float
    Z2: float
    M: float
    N: float
    J: float
    W: float


@dataclass(frozen=True)
class SACACoefficients:
    L1: float
    L2: float
    Y1: float
    Y2: float


def _div(num: float, den: float, factor: str) -> float:
    if den == 0.0:
        raise BoundaryEvaluation(f"{factor} vanished at these parameters")
    return num / den


def _val(value: float, tag: str, note: str = "") -> FormulaValue:
    return FormulaValue(
        value=value,
        in_unit_interval=0.0 <= value <= 1.0,
        policy=tag,
        note=note,
    )


def _unpack(source: SourceParams, channel: ChannelParams):
    return (
        source.p,
        source.q,
        channel.ps1_solo,
        channel.ps1_joint,
        channel.ps2_solo,
        channel.ps2_joint,
    )


# ---------------------------------------------------------------------------
# random sampling

def _rs_coefficients(source, channel, pa1, pa2) -> RSCoefficients:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    F = pa2 * s2s - pa1 * pa2 * (s1s - s1j * (1 - s2s) - s2j + s2s)
    G = (
        1
        - pa1 * pa2 * (s1j * (1 - s2j) + s2j - s2s)
        - pa1 * (1 - pa2) * s1s
        - pa2 * s2s
    )
    H = 1 + pa1 * pa2 * (s2s - s2j) - pa2 * s2s
    A = 4 * p * q * G * H + 4 * q * pa2 * s2s * (1 - pa2 * s2s)
    B = 3 * p + (1 - 3 * p) * pa1 * pa2 * s2j + (1 - 3 * p) * (1 - pa1) * pa2 * s2s
    D = (
        pa2 * s1s * s2s
        + 4 * q * s1s
        - 4 * q * pa2 * s1j * (1 - s2j)
        - 4 * q * pa2 * s2j
        + 8 * q * pa2 * s1s * s2s
        + p * (1 - 4 * q) * s1s * G * H
        - pa2**2
        * s2s
        * (
            s1s * s2s
            - 4 * q * s1s
            + 4 * q * s1j
            - 4 * q * s1j * s2j
            + 8 * q * s2j
            - 4 * q * (2 + s1s) * s2s
            + 4 * q * pa2 * (s2s - s1s)
        )
    )
    I = (
        4 * q * pa2**2 * (s2s - s2j) * (s1j * (1 - s2j) + s2j - s2s)
        + (1 - pa2) * s1s**2 * (2 - 4 * q - pa2 * s2s * (1 - 4 * q))
        - pa2
        * s1s
        * (s2s - s2j)
        * (1 - 2 * pa2 * s2s - 4 * q * (2 - pa2 - 2 * pa2 * s2s))
        - pa2 * s1s * s1j * (1 - s2j) * (2 - 4 * q - pa2 * s2s * (1 - 4 * q))
    )
    K = (
        -pa2
        * s1s
        * (s2s - s2j)
        * ((1 - pa2) * s1s + pa2 * s1j * (1 - s2j) + pa2 * s2j - pa2 * s2s)
        * (1 - 4 * q)
    )
    return RSCoefficients(F=F, G=G, A=A, B=B, D=D, I=I, H=H, K=K)


def _rs_den1(source, channel, pa1, G) -> float:
    p, q, s1s = source.p, source.q, channel.ps1_solo
    return (p + 2 * q) * (
        (2 * p * G - G + 1) * pa1 * s1s
        + 2 * q * (p * G - G + 1) * (1 - pa1 * s1s)
    )


def _rs_pi(source, channel, pa1, pa2) -> dict[str, float]:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _rs_coefficients(source, channel, pa1, pa2)
    den1 = _rs_den1(source, channel, pa1, c.G)
    pi000 = _div(
        pa1 * s1s * (c.F + 2 * p * c.G + pa1 * s1s), den1, "the primary-branch factor"
    )
    pi011 = _div(
        2 * p * q * (1 - pa1 * s1s) * (c.F + p * c.G + pa1 * s1s),
        den1,
        "the primary-branch factor",
    )
    pi1000 = _div(
        q * (p + (1 - p) * pa1 * pa2 * s2j + (1 - p) * (1 - pa1) * pa2 * s2s),
        (p + 2 * q) * c.B,
        "the secondary-branch factor",
    )
    pi1001 = _div(
        p * q * (-c.K * pa1**3 + c.I * pa1**2 + c.D * pa1 + c.A),
        c.B * den1,
        "the cubic denominator",
    )
    pi1011 = _div(p * q * c.G * pa1 * s1s, den1, "the primary-branch factor")
    return {
        "0,0,0": pi000,
        "0,1,1": pi011,
        "1,0,0,0": pi1000,
        "1,0,0,1": pi1001,
        "1,0,1,1": pi1011,
        "1,1,0,0": pi1000,
        "1,1,0,1": pi1001,
        "1,1,1,1": pi1011,
    }


def _rs_pe(source, channel, pa1, pa2) -> float:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _rs_coefficients(source, channel, pa1, pa2)
    den1 = _rs_den1(source, channel, pa1, c.G)
    first = _div(
        pa1 * s1s * (c.F + 2 * p * c.G + pa1 * s1s), den1, "the primary-branch factor"
    )
    second = _div(
        2 * q * (p + (1 - p) * pa1 * pa2 * s2j + (1 - p) * (1 - pa1) * pa2 * s2s),
        (p + 2 * q)
        * (3 * p + (1 - 3 * p) * pa1 * pa2 * s2j + (1 - 3 * p) * (1 - pa1) * pa2 * s2s),
        "the secondary-branch factor",
    )
    return 1 - first - second


def _rs_cost_rate(source, pa1, pa2) -> float:
    p, q = source.p, source.q
    return ((p + 2 * q) * pa1 + 2 * q * pa2) / (p + 2 * q)


# ---------------------------------------------------------------------------
# error-aware

def _ea_coefficients(source, channel, qa1, qa2) -> EACoefficients:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    F_prime = qa2 * s2s - qa1 * qa2 * (s1s - s1j * (1 - s2s) - s2j + s2s)
    G_prime = (
        1
        - qa1 * qa2 * (s1j * (1 - s2j) + s2j - s2s)
        - qa1 * (1 - qa2) * s1s
        - qa2 * s2s
    )
    Z1 = (p + 2 * q) * (
        (2 * p * G_prime - G_prime + 1) * qa1 * s1s
        + 2 * q * (p * G_prime - G_prime + 1) * (1 - qa1 * s1s)
    )
    Z2 = Z1 * (3 * p + (1 - 3 * p) * qa2 * s2s)
    M = (
        3 * qa2 * s2s * (1 - qa2 * s2s)
        + qa1 * qa2 * s1j * (1 - s2j) * (1 - 3 * qa2 * s2s)
        + qa1 * s1s * (1 - qa2) * (1 - 3 * qa2 * s2s)
        + qa1 * qa2 * (s2s - s2j) * (-2 + 3 * qa2 * s2s)
    )
    N = (
        4 * p * q * qa2 * s2s * (1 - qa1 * s1s) * (1 - qa2 * s2s)
        + 2 * p**2 * G_prime * (1 - qa2 * s2s) * (q + (1 - q) * qa1 * s1s)
        + 2
        * p
        * q
        * qa1
        * (1 - qa1 * s1s)
        * (1 - 2 * qa2 * s2s)
        * ((1 - qa2) * s1s - qa2 * (s1j * (1 - s2j) + s2j - s2s))
    )
    J = (
        2 * qa1 * (1 - qa2) * s1s
        + qa1 * qa2 * (2 * s1j * (1 - s2j) + s2j)
        + qa2 * s2s * (1 - p * G_prime)
        - qa1 * qa2 * s2s * (1 + s1s - qa2 * s1s)
        - qa1 * qa2**2 * s2s * (s1j + s2j - s1j * s2j)
        - qa2**2 * s2s**2 * (1 - qa1)
    )
    W = (1 - qa1 * s1s) * (1 - qa2 * s2s)
    return EACoefficients(
        F_prime=F_prime, G_prime=G_prime, Z1=Z1, Z2=Z2, M=M, N=N, J=J, W=W
    )


def _ea_pe(source, channel, qa1, qa2) -> float:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _ea_coefficients(source, channel, qa1, qa2)
    first = _div(
        qa1 * s1s * (c.F_prime + 2 * p * c.G_prime + qa1 * s1s),
        c.Z1,
        "Z1",
    )
    second = _div(2 * p * q * c.M * qa1 * s1s, c.Z2, "Z2")
    third = _div(
        2
        * (
            q * c.N
            + q
            * qa1
            * s2s
            * (1 - c.G_prime)
            * (2 * q + (1 - 2 * q) * qa1 * s1s)
        ),
        c.Z2,
        "Z2",
    )
    return 1 - first - second - third


def _ea_pi(source, channel, qa1, qa2) -> dict[str, float]:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _ea_coefficients(source, channel, qa1, qa2)
    pi000 = _div(
        qa1 * s1s * (c.F_prime + 2 * p * c.G_prime + qa1 * s1s), c.Z1, "Z1"
    )
    pi011 = _div(
        2 * p * q * (1 - qa1 * s1s) * (c.F_prime + p * c.G_prime + qa1 * s1s),
        c.Z1,
        "Z1",
    )
    pi1000 = _div(
        q * c.N
        + q * qa1 * s2s * (1 - c.G_prime) * (2 * q + (1 - 2 * q) * qa1 * s1s)
        + p * q * c.M * qa1 * s1s,
        c.Z2,
        "Z2",
    )
    pi1001 = _div(
        p
        * q
        * (
            (p * c.G_prime + c.J) * qa1 * s1s
            + 4 * q * c.W * (1 - (1 - p) * c.G_prime)
        ),
        c.Z2,
        "Z2",
    )
    pi1011 = _div(p * q * c.G_prime * qa1 * s1s, c.Z1, "Z1")
    return {
        "0,0,0": pi000,
        "0,1,1": pi011,
        "1,0,0,0": pi1000,
        "1,0,0,1": pi1001,
        "1,0,1,1": pi1011,
        "1,1,0,0": pi1000,
        "1,1,0,1": pi1001,
        "1,1,1,1": pi1011,
    }


def _ea_cost_rate(source, channel, qa1, qa2) -> float:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _ea_coefficients(source, channel, qa1, qa2)
    bracket = (
        3 * c.G_prime * p**2 * qa1 * (1 - qa2 * s2s)
        + qa1 * qa2**2 * s2s * (2 * s1s + s2s)
        + 2 * qa1**2 * qa2 * (1 - qa2) * s1s**2
        + (qa1 * qa2) ** 2 * s1s * (2 * s1j * (1 - s2j) + s2j)
        + (qa1 * qa2) ** 2 * s2s * (s1j * (1 - s2j) + s2j - s2s)
        + 2 * qa1**2 * qa2 * (1 - qa2) * s1s * s2s
        + 4 * q * qa2 * (1 - c.G_prime) * (1 - qa1 * s1s)
        + 4 * p * q * qa2 * (1 - qa2 * s2s)
        + 4 * p * qa1 * qa2 * (s1s + s2s) * (1 - qa2 * s2s)
        - 4 * p * qa1 * qa2**2 * (s1j * (1 - s2j) + s2j - s2s)
        - 8 * p * q * qa1 * qa2 * s1s
        - p * qa1**2 * qa2 * (s1j * (1 - s2j) + s2j - s2s) * (-3 + 4 * qa2 * s2s)
        + 4 * p * q * qa1 * qa2**2 * s1s * (1 + s2s)
        - 4 * p * (1 - q) * qa1**2 * qa2 * (1 - qa2) * s1s**2
        + 6 * p * qa1**2 * s1s
        - 3 * p * qa1**2 * qa2 * s1s
        - 7 * p * qa1**2 * qa2 * s1s * s2s
        - p * (qa1 * qa2) ** 2 * s1s * s2j
        - p
        * (qa1 * qa2) ** 2
        * s1s
        * (-5 * s2s + 4 * s1j * (1 - s2j) * (1 - q) - 4 * q * s2j)
        - 4 * p * q * (qa1 * qa2) ** 2 * s1s * s2s
    )
    return _div(2 * p * q * bracket, c.Z2, "Z2")


# ---------------------------------------------------------------------------
# semantics-aware

def _sa_ca_coefficients(source, channel) -> SACACoefficients:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    L1 = (p + 2 * q) * (
        2 * p * (1 - s1j) * (1 - s2j) * (q + (1 - q) * s1s)
        + (s1j * (1 - s2j) + s2j) * (2 * q + (1 - 2 * q) * s1s)
    )
    L2 = (3 * p - 3 * p * s2s + s2s) * L1
    Y1 = (p + 2 * q) * (1 + s1j + (1 - s1j) * (s2j + (1 - s2j) * s1s))
    Y2 = (3 - s2s) * Y1
    return SACACoefficients(L1=L1, L2=L2, Y1=Y1, Y2=Y2)


def _sa_pe(source, channel) -> float:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _sa_ca_coefficients(source, channel)
    bracket = (
        6 * q * p**3 * (1 - s1s) * (1 - s1j) * (1 - s2j) * (1 - s2s)
        + 2 * p * q * s2j
        + 2 * p * q * s1j * (1 - s2j) * (4 * q + (1 - 4 * q) * s2s)
        - 8 * p * q * s1s * s2s
        + 2 * p * q * s1s * s2j * (1 - 3 * s2s - 4 * q + 4 * q * s2s)
        + 2 * p * q * s1s * s1j * (1 - s2j) * (2 - 4 * q - (3 - 4 * q) * s2s)
        + 8 * p * q * s1s
        + 6 * p * q * s1j
        - 14 * p * q * s1s * s2j
        - 6 * p * q * s1j * s2j
        + 14 * p * q * s1s * s1j * s2j
        + 2 * p * q * s2s
        - 8 * p * q * s1j * s2s
        - 8 * p * q * s2j * s2s
        + 16 * p * q * s1s * s2j * s2s
        + 8 * p * q * s1j * s2j * s2s
        + 8 * p * q**2 * (1 - s1s) * (1 - s1j) * (1 - s2j) * (1 - s2s)
        + 6 * p * q * s2j
        - 14 * p * q * s1s * s1j
        + 16 * p * q * s1s * s1j * s2s * (1 - s2j)
    )
    return _div(bracket, c.L2, "L2")


def _sa_pi(source, channel) -> dict[str, float]:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _sa_ca_coefficients(source, channel)
    sync_bracket = s2j + (1 - s2j) * (2 * p + (1 - 2 * p) * s1j)
    pi000 = _div(p * s1s * sync_bracket, c.L1, "L1")
    pi011 = _div(2 * p * q * (1 - s1s) * sync_bracket, c.L1, "L1")
    pi1000 = _div(
        2 * q * p**2 * (1 - s1j) * (1 - s2j) * (1 - s2s) * (q + (1 - q) * s1s)
        + q * (s1j * (1 - s2j) + s2j) * (2 * q + (1 - 2 * q) * s1s) * s2s
        + 2 * p * q**2 * s2s
        + 2 * p * q**2 * (1 - 2 * s2s) * (s2j + s1j * (1 - s2j))
        + p
        * q
        * s1s
        * (s2s - 2 * q * s2s + (2 - 3 * s2s - 2 * q + 4 * q * s2s) * s2j)
        + p * q * s1s * s1j * (1 - s2j) * (1 - 2 * q - (3 - 4 * q) * s2s),
        c.L2,
        "L2",
    )
    pi1001 = _div(
        4 * p * q**2 * (s2j + (1 - s2j) * s1j) * (1 - s2s)
        + q * p**2 * (1 - s1j) * (1 - s2j) * (1 - s2s) * (4 * q + (1 - 4 * q) * s1s)
        + p * q * s1s * s1j * (1 - s2j) * (2 - 4 * q - (1 - 4 * q) * s2s)
        + p * q * s1s * s2j * (1 - s2s) * (1 - 4 * q),
        c.L2,
        "L2",
    )
    pi1011 = _div(p * q * s1s * (1 - s1j) * (1 - s2j), c.L1, "L1")
    return {
        "0,0,0": pi000,
        "0,1,1": pi011,
        "1,0,0,0": pi1000,
        "1,0,0,1": pi1001,
        "1,0,1,1": pi1011,
        "1,1,0,0": pi1000,
        "1,1,0,1": pi1001,
        "1,1,1,1": pi1011,
    }


def _sa_cost_rate(source, channel) -> float:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _sa_ca_coefficients(source, channel)
    bracket = (
        3 * p**2 * (1 - s1j) * (1 - s2j) * (1 - s2s)
        + 4 * p * s1s * s1j * s2j
        + (s2j + (1 - s2j) * s1j) * (s2s + 4 * q)
        + s1s * (s2j + 2 * s2s)
        + s1s * (-4 * q * s2j + 2 * s1j * (1 - 2 * q) * (1 - s2j))
        + 3 * p * s2j
        + p * s2s
        + 4 * p * q
        - 4 * p * s2j * (q + s2s)
        + p * s1j * (1 - s2j) * (3 - 4 * s2s - 4 * q)
        + p * s1s * (7 - s2j - 6 * s2s - 4 * q * (1 - s2j) - 4 * s1j)
        + 4 * p * q * s1s * s1j * (1 - s2j)
    )
    return _div(2 * p * q * bracket, c.L2, "L2")


# ---------------------------------------------------------------------------
# change-aware

def _ca_pe(source, channel) -> float:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _sa_ca_coefficients(source, channel)
    return (
        1
        - _div(2 * p * s1s, c.Y1, "Y1")
        - _div(2 * q * (1 + s2j), (p + 2 * q) * (3 - s2s), "the secondary factor")
    )


def _ca_pi(source, channel) -> dict[str, float]:
    p, q, s1s, s1j, s2s, s2j = _unpack(source, channel)
    c = _sa_ca_coefficients(source, channel)
    pi000 = _div(2 * p * s1s, c.Y1, "Y1")
    pi011 = _div(
        p * (1 - s1s) * (1 + s1j * (1 - s2j) + s2j), c.Y1, "Y1"
    )
    pi1000 = _div(
        q * (1 + s2j), (p + 2 * q) * (3 - s2s), "the secondary factor"
    )
    pi1001 = _div(
        q
        * (
            (1 + s1j * (1 - s2j) + s2j) * (2 - s2s - s2j)
            - s1s * (1 - s1j) * (1 - s2j**2)
        ),
        c.Y2,
        "Y2",
    )
    pi1011 = _div(q * s1s * (1 - s1j) * (1 - s2j), c.Y1, "Y1")
    return {
        "0,0,0": pi000,
        "0,1,1": pi011,
        "1,0,0,0": pi1000,
        "1,0,0,1": pi1001,
        "1,0,1,1": pi1011,
        "1,1,0,0": pi1000,
        "1,1,0,1": pi1001,
        "1,1,1,1": pi1011,
    }


def _ca_cost_rate(source) -> float:
    p, q = source.p, source.q
    return 8 * p * q / (p + 2 * q)


# ---------------------------------------------------------------------------
# public dispatch

Coefficients = Union[RSCoefficients, EACoefficients, SACACoefficients]


def _probs(policy: Policy) -> tuple[float, float]:
    if isinstance(policy, RandomSampling):
        return policy.pa1, policy.pa2
    if isinstance(policy, ErrorAware):
        return policy.qa1, policy.qa2
    raise TypeError(f"policy {policy!r} carries no probabilities")


def coefficients(
    policy: Policy, source: SourceParams, channel: ChannelParams
) -> Coefficients:
    """The coefficient set behind the policy's closed forms."""
    if isinstance(policy, RandomSampling):
        return _rs_coefficients(source, channel, policy.pa1, policy.pa2)
    if isinstance(policy, ErrorAware):
        return _ea_coefficients(source, channel, policy.qa1, policy.qa2)
    if isinstance(policy, (ChangeAware, SemanticsAware)):
        return _sa_ca_coefficients(source, channel)
    raise TypeError(f"unknown policy {policy!r}")


def _zero_sampling_note(policy: Policy) -> str:
    if isinstance(policy, (RandomSampling, ErrorAware)):
        p1, p2 = _probs(policy)
        if p1 == 0.0 and p2 == 0.0:
            return ZERO_SAMPLING_NOTE
    return ""


def pe_closed_form(
    policy: Policy, source: SourceParams, channel: ChannelParams
) -> FormulaValue:
    """Time-averaged reconstruction error by the policy's closed form."""
    note = _zero_sampling_note(policy)
    if isinstance(policy, RandomSampling):
        return _val(_rs_pe(source, channel, policy.pa1, policy.pa2), "RS", note)
    if isinstance(policy, ErrorAware):
        return _val(_ea_pe(source, channel, policy.qa1, policy.qa2), "EA", note)
    if isinstance(policy, SemanticsAware):
        return _val(_sa_pe(source, channel), "SA")
    if isinstance(policy, ChangeAware):
        return _val(_ca_pe(source, channel), "CA")
    raise TypeError(f"unknown policy {policy!r}")


def cost_closed_form(
    policy: Policy,
    source: SourceParams,
    channel: ChannelParams,
    delta: float = 1.0,
) -> FormulaValue:
    """Time-averaged sampling cost by the policy's closed form.

    The in_unit_interval flag refers to cost/delta: per-slot spend can
    legitimately reach 2*delta, so the flag is informational here.
    """
    if delta < 0:
        raise ParameterError(f"delta must be nonnegative, got {delta!r}")
    note = _zero_sampling_note(policy)
    if isinstance(policy, RandomSampling):
        rate = _rs_cost_rate(source, policy.pa1, policy.pa2)
        return _val(delta * rate, "RS", note)
    if isinstance(policy, ErrorAware):
        rate = _ea_cost_rate(source, channel, policy.qa1, policy.qa2)
        return _val(delta * rate, "EA", note)
    if isinstance(policy, SemanticsAware):
        return _val(delta * _sa_cost_rate(source, channel), "SA")
    if isinstance(policy, ChangeAware):
        return _val(delta * _ca_cost_rate(source), "CA")
    raise TypeError(f"unknown policy {policy!r}")


def stationary_closed_form(
    policy: Policy, source: SourceParams, channel: ChannelParams
) -> dict[str, float]:
    """Labeled stationary aggregates by the policy's closed forms.

    Keys are the eight (x1, x2, e1, e2) pattern labels; the two
    primary-active branches are filled symmetrically.
    """
    if isinstance(policy, RandomSampling):
        pi = _rs_pi(source, channel, policy.pa1, policy.pa2)
    elif isinstance(policy, ErrorAware):
        pi = _ea_pi(source, channel, policy.qa1, policy.qa2)
    elif isinstance(policy, SemanticsAware):
        pi = _sa_pi(source, channel)
    elif isinstance(policy, ChangeAware):
        pi = _ca_pi(source, channel)
    else:
        raise TypeError(f"unknown policy {policy!r}")
    assert set(pi) == set(PROJECTION_LABELS)
    return pi
