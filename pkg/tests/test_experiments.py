"""Sweep and validation driver checks.

Mini-grids keep the oracle-backed sweeps fast; the full figure presets
are exercised by the acceptance tests.
"""

import numpy as np
import pytest

from corrtrack.experiments import (
    CHANNEL_STRONG,
    CHANNEL_WEAK,
    PRESETS,
    SWEEP_COLUMNS,
    VALIDATION_COLUMNS,
    ConcordanceRow,
    SweepSpec,
    concordance_row,
    identity_grid,
    render_sweep_csv,
    render_validation_csv,
    run_preset,
    run_sweep,
    run_validation,
)
from corrtrack.model import (
    ChannelParams,
    ParameterError,
    RandomSampling,
    SourceParams,
)
from corrtrack.simulate import SimConfig

MINI = SweepSpec("p", 0.15, 0.25, 0.05, q=0.1, eta=0.8, channel=CHANNEL_STRONG)


def test_spec_domain():
    with pytest.raises(ParameterError):
        SweepSpec("pa1", 0.1, 0.2, 0.05, q=0.1, eta=0.8, channel=CHANNEL_WEAK)
    with pytest.raises(ParameterError):
        SweepSpec("p", 0.1, 0.6, 0.05, q=0.1, eta=0.8, channel=CHANNEL_WEAK)
    with pytest.raises(ParameterError):
        SweepSpec("p", 0.1, 0.2, 0.05, q=0.1, channel=CHANNEL_WEAK)  # no eta
    with pytest.raises(ParameterError):
        SweepSpec("eta", 0.1, 0.9, 0.05, q=0.1, channel=CHANNEL_WEAK)  # no p
    with pytest.raises(ParameterError):
        SweepSpec("p", 0.1, 0.2, 0.05, q=0.1, eta=0.8, channel=CHANNEL_WEAK,
                  policies=("RS", "XX"))
    with pytest.raises(ParameterError):
        SweepSpec("p", 0.1, 0.2, 0.05, q=0.1, eta=0.8, channel=CHANNEL_WEAK,
                  backend="sim")


def test_grid_values():
    spec = SweepSpec("p", 0.05, 0.45, 0.05, q=0.1, eta=0.8, channel=CHANNEL_WEAK)
    grid = spec.grid()
    assert len(grid) == 9
    assert grid[0] == 0.05 and grid[-1] == 0.45
    assert all(abs(b - a - 0.05) < 1e-12 for a, b in zip(grid, grid[1:]))


def test_mini_sweep_rows():
    rows, summary = run_sweep(MINI)
    # 3 grid points x 4 policies
    assert len(rows) == 12
    assert [r.policy for r in rows[:4]] == ["RS", "CA", "EA", "SA"]
    assert [r.p for r in rows] == sorted(r.p for r in rows)
    for r in rows:
        assert r.backend == "exact-chain"
        if r.feasible and r.policy in ("RS", "EA"):
            assert r.cost <= 0.8 + 1e-9
            assert r.pa1 is not None and r.pa2 is not None
        if r.policy in ("CA", "SA"):
            assert r.pa1 is None and r.pa2 is None
    assert summary["points_compared"] == 3
    assert summary["ea_le_rs"] == 3, summary["exceptions"]


def test_sweep_csv_shape():
    rows, _ = run_sweep(MINI)
    text = render_sweep_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 13
    ca = next(l for l in lines[1:] if l.startswith("CA,"))
    fields = ca.split(",")
    # pa1 and pa2 stay empty for the parameter-free policies
    assert fields[8] == "" and fields[9] == ""
    assert fields[12] in ("true", "false")


def test_sweep_flags_infeasible_points():
    spec = SweepSpec("p", 0.45, 0.45, 0.05, q=0.45, eta=0.3, channel=CHANNEL_WEAK)
    rows, summary = run_sweep(spec)
    ca = next(r for r in rows if r.policy == "CA")
    sa = next(r for r in rows if r.policy == "SA")
    # 8pq/(p+2q) = 1.2 at p=q=0.45, far over the 0.3 budget
    assert not ca.feasible and ca.pe is None
    assert not sa.feasible and sa.pe is None
    assert {e["policy"] for e in summary["infeasible"]} == {"CA", "SA"}
    text = render_sweep_csv(rows)
    ca_line = next(l for l in text.splitlines() if l.startswith("CA,"))
    fields = ca_line.split(",")
    assert fields[10] == ""       # pe stays empty when infeasible
    assert fields[11] != ""       # the offending cost is still reported
    assert fields[12] == "false"


def test_sweep_closed_form_backend():
    spec = SweepSpec("p", 0.15, 0.25, 0.05, q=0.1, eta=0.8,
                     channel=CHANNEL_STRONG, backend="closed-form")
    rows, _ = run_sweep(spec)
    assert all(r.backend == "closed-form" for r in rows)
    rs = next(r for r in rows if r.policy == "RS")
    assert rs.cost <= 0.8 + 1e-9


def test_presets():
    assert set(PRESETS) == {"fig-p-sweep-q01", "fig-p-sweep-q04", "fig-eta-sweep"}
    for preset in PRESETS.values():
        assert preset.notes
        assert len(preset.specs) == 2
        channels = {s.channel for s in preset.specs}
        assert channels == {CHANNEL_WEAK, CHANNEL_STRONG}
    q01 = PRESETS["fig-p-sweep-q01"]
    assert all(s.q == 0.1 and s.eta == 0.8 and len(s.grid()) == 9 for s in q01.specs)
    assert all(s.q == 0.4 for s in PRESETS["fig-p-sweep-q04"].specs)
    eta = PRESETS["fig-eta-sweep"]
    assert all(s.swept == "eta" and s.p == 0.2 and s.q == 0.1 for s in eta.specs)
    assert all(len(s.grid()) == 20 for s in eta.specs)
    with pytest.raises(ParameterError):
        run_preset("fig-missing")


def test_validation_row_counts_and_determinism():
    rows_a, summary_a = run_validation(5, seed=11, include_identity_grid=False)
    rows_b, _ = run_validation(5, seed=11, include_identity_grid=False)
    assert rows_a == rows_b
    # 4 policies per tuple plus the forced corner row
    assert len(rows_a) == 4 * 5 + 1
    rows_c, _ = run_validation(5, seed=12, include_identity_grid=False)
    assert rows_a != rows_c
    assert summary_a["n_points"] == 5 and summary_a["seed"] == 11


def test_validation_corner_row():
    rows, _ = run_validation(1, seed=0, include_identity_grid=False)
    corner = rows[-1]
    assert corner.policy == "RS"
    assert corner.pa1 == 1.0 and corner.pa2 == 1.0
    assert corner.channel == ChannelParams(1.0, 1.0, 1.0, 1.0)
    # printed form gives (p-1)/(p+2q) = -2 at p=0.2, q=0.1; the chain is 0
    assert abs(corner.pe_formula - (-2.0)) < 1e-12
    assert corner.pe_chain == 0.0
    assert corner.classification == "mismatch"
    # the cost side still matches: it only depends on the source law
    assert corner.cost_diff < 1e-12


def test_validation_cost_rows_match():
    _, summary = run_validation(40, seed=3, include_identity_grid=False)
    for tag in ("RS", "CA"):
        assert summary["policies"][tag]["cost_match_rate"] == 1.0
        assert summary["policies"][tag]["max_cost_diff"] < 1e-9


def test_validation_identity_grid():
    assert len(identity_grid()) == 200
    rows, summary = run_validation(1, seed=0)
    ident = summary["ea_sa_identity"]
    assert ident["points"] == 200
    # the printed EA{1,1} and SA forms disagree everywhere on this grid;
    # the match rate makes that visible instead of hiding it
    assert ident["match_rate"] == 0.0
    assert ident["max_diff"] > 1.0
    # every grid tuple contributes an EA row and an SA row to the report
    ea_rows = [r for r in rows if r.policy == "EA" and r.pa1 == 1.0]
    sa_rows = [r for r in rows if r.policy == "SA"]
    assert len(ea_rows) >= 200 and len(sa_rows) >= 200


def test_validation_sim_column():
    sim = SimConfig(horizon=20_000, burn_in=1_000, replications=2, seed=5)
    rows, _ = run_validation(2, seed=3, sim=sim, include_identity_grid=False)
    assert all(r.pe_sim is not None for r in rows)
    rows_grid, _ = run_validation(1, seed=3, sim=None)
    assert all(r.pe_sim is None for r in rows_grid)


def test_validation_rejects_empty_run():
    with pytest.raises(ParameterError):
        run_validation(0)


def test_concordance_boundary_classification():
    row = concordance_row(RandomSampling(0.0, 0.0), SourceParams(0.2, 0.1),
                          CHANNEL_STRONG)
    assert row.classification == "boundary"
    assert row.pe_chain is None
    assert row.pe_diff is None


def test_validation_csv_shape():
    rows, _ = run_validation(2, seed=1, include_identity_grid=False)
    text = render_validation_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(VALIDATION_COLUMNS)
    assert len(lines) == len(rows) + 1
    # pe_sim column is empty when no simulation was requested
    assert all(l.split(",")[11] == "" for l in lines[1:])


def test_worker_env(monkeypatch):
    serial, _ = run_validation(3, seed=9, include_identity_grid=False)
    monkeypatch.setenv("CORRTRACK_WORKERS", "2")
    threaded, _ = run_validation(3, seed=9, include_identity_grid=False)
    assert serial == threaded
    monkeypatch.setenv("CORRTRACK_WORKERS", "0")
    with pytest.raises(ParameterError):
        run_validation(1, include_identity_grid=False)


def test_channel_draws_keep_solo_above_joint():
    rows, _ = run_validation(30, seed=21, include_identity_grid=False)
    for r in rows[:-1]:  # last row is the designed perfect-channel corner
        assert r.channel.ps1_solo > r.channel.ps1_joint
        assert r.channel.ps2_solo > r.channel.ps2_joint
