"""Exact-chain engine tests.

The kernel is checked entry-by-entry against a brute-force enumeration
of the per-slot outcome tuples, written here independently of the
vectorized assembly.  Scalar goldens (costs, the frozen stationary
vector) were hand-derived or recorded at bring-up.
"""

import numpy as np
import pytest

from corrtrack.chain import (
    ChainEvaluator,
    ReducibleChain,
    build_kernel,
    project_to_labels,
    source_marginal,
    stationary,
)
from corrtrack.model import (
    N_STATES,
    ChangeAware,
    ChannelParams,
    ErrorAware,
    MicroState,
    RandomSampling,
    SemanticsAware,
    SourceParams,
    SourceState,
    apply_reception,
    channel_distribution,
    decision_distribution,
    source_kernel,
    source_stationary,
    state_from_index,
    state_index,
)

CH = ChannelParams(0.8, 0.1, 0.8, 0.1)
SRC = SourceParams(0.2, 0.1)


def brute_force_row(policy, source, channel, m):
    """Kernel row by direct enumeration of (x_now, a1, a2, s1, s2)."""
    prev = state_from_index(m)
    row = np.zeros(N_STATES)
    k = source_kernel(source)
    for x in SourceState:
        px = k[int(prev.src), int(x)]
        if px == 0.0:
            continue
        acts = decision_distribution(policy, prev.src, x, prev.recon)
        for (a1, a2), pa in acts.items():
            for (s1, s2), ps in channel_distribution(a1, a2, channel).items():
                recon = apply_reception(x, prev.recon, s1, s2)
                row[state_index(MicroState(x, recon))] += px * pa * ps
    return row


def random_policy(rng):
    kind = rng.integers(0, 4)
    if kind == 0:
        return RandomSampling(rng.uniform(), rng.uniform())
    if kind == 1:
        return ChangeAware()
    if kind == 2:
        return ErrorAware(rng.uniform(), rng.uniform())
    return SemanticsAware()


def random_setup(rng):
    source = SourceParams(rng.uniform(0.01, 0.5), rng.uniform(0.01, 0.5))
    solo1, solo2 = rng.uniform(0.05, 1.0, size=2)
    channel = ChannelParams(
        solo1, rng.uniform(0.0, solo1), solo2, rng.uniform(0.0, solo2)
    )
    return random_policy(rng), source, channel


def test_kernel_rows_stochastic():
    rng = np.random.default_rng(7)
    for _ in range(200):
        policy, source, channel = random_setup(rng)
        kernel = build_kernel(policy, source, channel).kernel
        assert kernel.min() >= 0.0
        assert np.max(np.abs(kernel.sum(axis=1) - 1.0)) < 1e-12


def test_kernel_matches_outcome_enumeration():
    # 500 random setups x 20 random rows each = 10^4 single-row checks
    rng = np.random.default_rng(11)
    for _ in range(500):
        policy, source, channel = random_setup(rng)
        kernel = build_kernel(policy, source, channel).kernel
        for m in rng.integers(0, N_STATES, size=20):
            want = brute_force_row(policy, source, channel, int(m))
            assert np.max(np.abs(kernel[m] - want)) < 1e-14


def test_kernel_full_matrix_enumeration():
    rng = np.random.default_rng(13)
    for _ in range(20):
        policy, source, channel = random_setup(rng)
        kernel = build_kernel(policy, source, channel).kernel
        for m in range(N_STATES):
            want = brute_force_row(policy, source, channel, m)
            assert np.max(np.abs(kernel[m] - want)) < 1e-14


def test_source_marginal_matches_closed_form():
    for p, q in [(0.2, 0.1), (0.5, 0.5), (0.1, 0.4)]:
        source = SourceParams(p, q)
        res = stationary(build_kernel(RandomSampling(0.37, 0.62), source, CH))
        assert np.max(np.abs(source_marginal(res) - source_stationary(source))) < 1e-12


def test_ca_cost_goldens():
    # hand flow-balance: each sampler fires at rate 2pq/(p+2q) under CA
    res = stationary(build_kernel(ChangeAware(), SourceParams(0.25, 0.25), CH))
    assert abs(res.cost - 2.0 / 3.0) < 1e-12
    res = stationary(build_kernel(ChangeAware(), SRC, CH))
    assert abs(res.cost - 0.4) < 1e-12


def test_rs_cost_golden():
    # pa1 + pa2 * P[X1=1] = 0.5 + 0.5 * 0.5
    res = stationary(build_kernel(RandomSampling(0.5, 0.5), SRC, CH))
    assert abs(res.cost - 0.75) < 1e-12


# bring-up golden: RS{0.5,0.5}, p=0.2, q=0.1, channel (0.8,0.1,0.8,0.1);
# cross-checked against a long simulation (see test_simulate)
GOLDEN_RS_PI = np.array(
    [
        0.0, 0.0, 0.40303358613217782,
        0.03770949720670391, 0.03770949720670391, 0.02154741945441446,
        0.0, 0.0, 0.03990610328638500,
        0.12246478017974251, 0.04094304104930776, 0.04668607548456473,
        0.0, 0.0, 0.03990610328638499,
        0.04094304104930777, 0.12246478017974252, 0.04668607548456458,
    ]
)
GOLDEN_RS_PE = 0.35203685350833713


def test_rs_golden_stationary_vector():
    res = stationary(build_kernel(RandomSampling(0.5, 0.5), SRC, CH))
    assert np.max(np.abs(res.pi - GOLDEN_RS_PI)) < 1e-12
    assert abs(res.pe - GOLDEN_RS_PE) < 1e-12
    assert res.residual == 0.0
    assert not res.initial_component_only


def test_zero_sampling_is_reducible():
    # frozen reconstruction: each of the 6 recon values closes off
    for policy in (RandomSampling(0.0, 0.0), ErrorAware(0.0, 0.0)):
        model = build_kernel(policy, SRC, CH)
        with pytest.raises(ReducibleChain) as exc:
            stationary(model)
        assert len(exc.value.components) == 6


def test_zero_sampling_initial_component():
    model = build_kernel(RandomSampling(0.0, 0.0), SRC, CH)
    res = stationary(model, allow_initial_component=True)
    assert res.initial_component_only
    # recon frozen at the start value: wrong exactly while x1=1
    assert abs(res.pe - 2 * 0.1 / (0.2 + 2 * 0.1)) < 1e-12
    assert res.cost == 0.0


def test_single_zero_probability_is_not_reducible():
    # only the both-zero corner freezes the reconstruction entirely
    res = stationary(build_kernel(RandomSampling(0.4, 0.0), SRC, CH))
    assert not res.initial_component_only
    res = stationary(build_kernel(ErrorAware(0.0, 0.7), SRC, CH))
    assert not res.initial_component_only


def test_sa_perfect_channel():
    perfect = ChannelParams(1.0, 1.0, 1.0, 1.0)
    res = stationary(build_kernel(SemanticsAware(), SRC, perfect))
    assert res.pe == 0.0
    synced = {"0,0,0", "1,0,0,0", "1,1,0,0"}
    for label, mass in res.projection.items():
        if label not in synced:
            assert mass == 0.0
    assert abs(sum(res.projection.values()) - 1.0) < 1e-12


def test_ea_at_one_equals_sa():
    for channel in (CH, ChannelParams(0.2, 0.1, 0.2, 0.1)):
        r_ea = stationary(build_kernel(ErrorAware(1.0, 1.0), SRC, channel))
        r_sa = stationary(build_kernel(SemanticsAware(), SRC, channel))
        assert np.max(np.abs(r_ea.pi - r_sa.pi)) < 1e-14
        assert abs(r_ea.pe - r_sa.pe) < 1e-14
        assert abs(r_ea.cost - r_sa.cost) < 1e-14


def test_projection_residual_and_mirror():
    rng = np.random.default_rng(17)
    for _ in range(30):
        policy, source, channel = random_setup(rng)
        try:
            res = stationary(build_kernel(policy, source, channel))
        except ReducibleChain:
            continue
        assert res.residual < 1e-10
        proj = res.projection
        # the two primary-active branches play symmetric roles
        for suffix in ("0,0", "0,1", "1,1"):
            assert abs(proj[f"1,0,{suffix}"] - proj[f"1,1,{suffix}"]) < 1e-10


def test_projection_conserves_mass():
    res = stationary(build_kernel(ErrorAware(0.3, 0.9), SRC, CH))
    labels, residual = project_to_labels(res.pi)
    assert abs(sum(labels.values()) + residual - 1.0) < 1e-12


MIRROR_PERM = np.array(
    [
        6 * {0: 0, 1: 2, 2: 1}[m // 6] + 3 * ((m % 6) // 3) + {0: 1, 1: 0, 2: 2}[m % 3]
        for m in range(N_STATES)
    ]
)


def test_mirror_permutation_invariance():
    # swapping the two primary-active source values together with the
    # secondary reconstruction bits leaves the kernel unchanged
    rng = np.random.default_rng(23)
    for _ in range(20):
        policy, source, channel = random_setup(rng)
        kernel = build_kernel(policy, source, channel).kernel
        swapped = kernel[MIRROR_PERM][:, MIRROR_PERM]
        assert np.max(np.abs(swapped - kernel)) < 1e-15


def test_chain_evaluator_matches_stationary():
    ev = ChainEvaluator("RS", SRC, CH)
    for pa1, pa2 in [(0.5, 0.5), (0.3, 0.8), (1.0, 1.0), (0.05, 0.05)]:
        pe, rate = ev.pe_cost(pa1, pa2)
        res = stationary(build_kernel(RandomSampling(pa1, pa2), SRC, CH))
        assert abs(pe - res.pe) < 1e-12
        assert abs(rate - res.cost) < 1e-12
    ev = ChainEvaluator("EA", SRC, CH)
    for qa1, qa2 in [(1.0, 1.0), (0.4, 0.9), (0.05, 1.0)]:
        pe, rate = ev.pe_cost(qa1, qa2)
        res = stationary(build_kernel(ErrorAware(qa1, qa2), SRC, CH))
        assert abs(pe - res.pe) < 1e-12
        assert abs(rate - res.cost) < 1e-12
