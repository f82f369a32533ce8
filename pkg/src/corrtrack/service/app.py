"""HTTP service exposing the evaluators, optimizer, and batch jobs.

Thin wrappers: every endpoint converts a validated payload into core
dataclasses, calls one library function, and returns plain JSON.
Domain failures map to stable error codes so clients (the CLI in
particular) can translate them into exit codes: domain-error,
reducible-chain, numerical-failure.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from corrtrack import __version__
from corrtrack.chain import NumericalFailure, ReducibleChain, build_kernel, stationary
from corrtrack.experiments import (
    PRESETS,
    SweepSpec,
    render_sweep_csv,
    render_validation_csv,
    run_preset,
    run_sweep,
    run_validation,
)
from corrtrack.formulas import BoundaryEvaluation, cost_closed_form, pe_closed_form
from corrtrack.model import ParameterError
from corrtrack.optimize import (
    backend_tag,
    feasibility,
    optimize_ea,
    optimize_rs,
    optimize_rs_equal,
)
from corrtrack.service.schemas import (
    ScenarioModel,
    SimModel,
    SweepRequest,
    SweepSpecModel,
    ValidateRequest,
)
from corrtrack.simulate import run


def _plain(obj):
    """Round-trip through JSON to coerce numpy scalars and tuples."""
    return json.loads(json.dumps(obj, default=lambda o: o.item()))


def _validation_message(exc: RequestValidationError) -> str:
    parts = []
    for err in exc.errors()[:3]:
        loc = ".".join(str(x) for x in err["loc"] if x != "body")
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def create_app() -> FastAPI:
    app = FastAPI(title="corrtrack", version=__version__)

    @app.exception_handler(ParameterError)
    def _domain(request: Request, exc: ParameterError):
        return JSONResponse(status_code=400,
                            content={"code": "domain-error", "message": str(exc)})

    @app.exception_handler(BoundaryEvaluation)
    def _boundary(request: Request, exc: BoundaryEvaluation):
        return JSONResponse(status_code=400,
                            content={"code": "domain-error", "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    def _invalid(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "domain-error", "message": _validation_message(exc)},
        )

    @app.exception_handler(ReducibleChain)
    def _reducible(request: Request, exc: ReducibleChain):
        return JSONResponse(
            status_code=409,
            content=_plain({
                "code": "reducible-chain",
                "message": str(exc),
                "components": [list(c) for c in exc.components],
            }),
        )

    @app.exception_handler(NumericalFailure)
    def _numerical(request: Request, exc: NumericalFailure):
        return JSONResponse(status_code=500,
                            content={"code": "numerical-failure", "message": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/presets")
    def presets():
        out = {}
        for name, preset in PRESETS.items():
            out[name] = {
                "notes": preset.notes,
                "specs": [_spec_dict(s) for s in preset.specs],
            }
        return _plain({"presets": out})

    @app.post("/evaluate")
    def evaluate(cfg: ScenarioModel):
        policy = cfg.policy.build()
        source, channel = cfg.source.build(), cfg.channel.build()
        delta = cfg.delta()
        names = [cfg.backend] if cfg.backend else ["closed-form", "chain"]
        rows = []
        for name in names:
            if name == "sim":
                sim_model = cfg.sim or SimModel(horizon=1_000_000)
                rep = run(policy, source, channel, sim_model.build(delta))
                rows.append({
                    "policy": policy.tag, "backend": "sim",
                    "pe": rep.pe_mean, "pe_stderr": rep.pe_stderr,
                    "cost": rep.cost_mean, "cost_stderr": rep.cost_stderr,
                    "slots_used": rep.slots_used,
                    "replications": rep.replications, "seed": rep.seed,
                })
            elif backend_tag(name) == "closed-form":
                pv = pe_closed_form(policy, source, channel)
                cv = cost_closed_form(policy, source, channel, delta=delta)
                rows.append({
                    "policy": policy.tag, "backend": "closed-form",
                    "pe": pv.value, "pe_in_unit_interval": pv.in_unit_interval,
                    "pe_note": pv.note,
                    "cost": cv.value, "cost_in_unit_interval": cv.in_unit_interval,
                    "cost_note": cv.note,
                })
            else:
                st = stationary(build_kernel(policy, source, channel), delta=delta)
                rows.append({
                    "policy": policy.tag, "backend": "exact-chain",
                    "pe": st.pe, "cost": st.cost, "residual": st.residual,
                })
        return _plain({"rows": rows})

    @app.post("/simulate")
    def simulate(cfg: ScenarioModel):
        if cfg.sim is None:
            raise ParameterError("simulate needs a sim block (horizon at least)")
        policy = cfg.policy.build()
        rep = run(policy, cfg.source.build(), cfg.channel.build(),
                  cfg.sim.build(cfg.delta()))
        return _plain({
            "policy": policy.tag,
            "pe_mean": rep.pe_mean, "pe_stderr": rep.pe_stderr,
            "cost_mean": rep.cost_mean, "cost_stderr": rep.cost_stderr,
            "slots_used": rep.slots_used,
            "replications": rep.replications, "seed": rep.seed,
        })

    @app.post("/solve")
    def solve(cfg: ScenarioModel):
        policy = cfg.policy.build()
        st = stationary(build_kernel(policy, cfg.source.build(), cfg.channel.build()),
                        delta=cfg.delta())
        return _plain({
            "policy": policy.tag,
            "pi": [float(x) for x in st.pi],
            "pe": st.pe, "cost": st.cost,
            "projection": st.projection,
            "residual": st.residual,
            "initial_component_only": st.initial_component_only,
        })

    @app.post("/optimize")
    def optimize(cfg: ScenarioModel):
        if cfg.budget is None:
            raise ParameterError("optimize needs a budget block")
        budget = cfg.budget.build()
        source, channel = cfg.source.build(), cfg.channel.build()
        backend = cfg.backend or "chain"
        if backend == "sim":
            raise ParameterError("the optimizer runs on closed-form or chain backends")
        tag = cfg.policy.tag
        if tag in ("CA", "SA"):
            fr = feasibility(cfg.policy.build(), source, channel, budget,
                             backend=backend)
            return _plain({
                "kind": "feasibility", "policy": fr.policy,
                "feasible": fr.feasible, "cost_per_delta": fr.cost_per_delta,
                "backend": fr.backend,
            })
        if tag == "RS":
            r = optimize_rs(source, channel, budget, backend=backend)
        elif tag == "RS-equal":
            r = optimize_rs_equal(source, channel, budget, backend=backend)
        else:
            r = optimize_ea(source, channel, budget, backend=backend)
        return _plain({
            "kind": "optimum", "policy": r.policy, "probs": list(r.probs),
            "pe": r.pe, "cost_per_delta": r.cost_per_delta,
            "feasible": r.feasible, "backend": r.backend,
            "diagnostics": r.diagnostics,
        })

    @app.post("/sweep")
    def sweep(req: SweepRequest):
        if (req.preset is None) == (req.spec is None):
            raise ParameterError("pass exactly one of preset or spec")
        if req.preset is not None:
            rows, summary = run_preset(req.preset, backend=req.backend)
        else:
            rows, summary = run_sweep(_to_spec(req.spec, req.backend))
        return _plain({
            "rows": [r.to_dict() for r in rows],
            "summary": summary,
            "csv": render_sweep_csv(rows),
        })

    @app.post("/validate")
    def validate(req: ValidateRequest):
        sim = req.sim.build() if req.sim is not None else None
        rows, summary = run_validation(req.n_points, seed=req.seed, sim=sim,
                                       include_identity_grid=req.include_identity_grid)
        return _plain({
            "rows": [r.to_dict() for r in rows],
            "summary": summary,
            "csv": render_validation_csv(rows),
        })

    return app


def _spec_dict(s: SweepSpec) -> dict:
    return {
        "swept": s.swept, "start": s.start, "stop": s.stop, "step": s.step,
        "p": s.p, "q": s.q, "eta": s.eta,
        "channel": {
            "ps1_solo": s.channel.ps1_solo, "ps1_joint": s.channel.ps1_joint,
            "ps2_solo": s.channel.ps2_solo, "ps2_joint": s.channel.ps2_joint,
        },
        "policies": list(s.policies), "backend": s.backend, "delta": s.delta,
    }


def _to_spec(model: SweepSpecModel, backend_override) -> SweepSpec:
    kwargs = {}
    if model.policies is not None:
        kwargs["policies"] = tuple(model.policies)
    backend = backend_override or model.backend
    if backend is not None:
        kwargs["backend"] = backend
    return SweepSpec(model.swept, model.start, model.stop, model.step,
                     q=model.q, channel=model.channel.build(), p=model.p,
                     eta=model.eta, delta=model.delta, **kwargs)


app = create_app()
