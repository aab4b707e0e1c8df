import logging
import math
from typing import Any, Dict, List, Optional, Tuple, Union

from fastapi import Body, FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from bellcheck.bell.chsh import MeasurementQuad, SourceKind
from bellcheck.cli.reports import (
    PRESETS, RunReport, cmd_chsh, cmd_moment_check, cmd_simulate, cmd_spectral_demo, cmd_verify_quantum,
    error_report, parse_setting,
)
from bellcheck.config.settings import settings
from bellcheck.errors import BellCheckError, MarginalFeasibilityError
from bellcheck.logging.audit import Auditor
from bellcheck.logging.events import fmt_error
from bellcheck.models.hidden_variables import ModelKind
from bellcheck.storage.instances import instance_from_document, list_bundled_instances, operators_from_document

logger = logging.getLogger("bellcheck.api")

app = FastAPI(title="bellcheck")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)

auditor = Auditor()

SettingIn = Union[str, float, List[float]]


class VerifyQuantumRequest(BaseModel):
    trials: int = Field(1000, ge=1)
    seed: Optional[int] = None
    tol: Optional[float] = None
    a: Optional[SettingIn] = None
    b: Optional[SettingIn] = None
    radians: bool = False


class ChshRequest(BaseModel):
    source: SourceKind = SourceKind.QUANTUM
    quad: Optional[Tuple[float, float, float, float]] = None
    table: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None
    search: bool = False
    tol: Optional[float] = None
    grid_steps: Optional[int] = None
    refine_iters: Optional[int] = None
    radians: bool = False


class SimulateRequest(BaseModel):
    model: ModelKind
    a: SettingIn
    b: SettingIn
    n: int = Field(100_000, ge=1)
    seed: Optional[int] = None
    lanes: Optional[int] = Field(None, ge=1)
    radians: bool = False


class SpectralDemoRequest(BaseModel):
    preset: Optional[str] = None
    document: Optional[Dict[str, Any]] = None
    tol: Optional[float] = None


def _degrees(radians: bool) -> bool:
    return settings.degrees and not radians


def _respond(command: str, parameters: Dict[str, Any], build) -> Union[Dict[str, Any], JSONResponse]:
    try:
        report: RunReport = build()
    except MarginalFeasibilityError as e:
        logger.warning(fmt_error(command, e))
        return JSONResponse(status_code=409, content=error_report(command, parameters, e).model_dump(by_alias=True))
    except (BellCheckError, ValueError) as e:
        logger.info(fmt_error(command, e))
        return JSONResponse(status_code=422, content=error_report(command, parameters, e).model_dump(by_alias=True))
    auditor.log("api", {"command": command, "overall_pass": report.overall_pass})
    return report.model_dump(by_alias=True)


@app.get("/health")
def health():
    return {"ok": True, "instances": list_bundled_instances(), "presets": list(PRESETS)}


@app.post("/verify-quantum")
def verify_quantum(req: VerifyQuantumRequest):
    deg = _degrees(req.radians)
    return _respond("verify-quantum", req.model_dump(), lambda: cmd_verify_quantum(
        trials=req.trials, seed=req.seed, tol=req.tol,
        a=None if req.a is None else parse_setting(req.a, deg),
        b=None if req.b is None else parse_setting(req.b, deg),
    ))


@app.post("/chsh")
def chsh(req: ChshRequest):
    def build():
        quad = None
        if req.quad is not None:
            angles = [math.radians(t) for t in req.quad] if _degrees(req.radians) else list(req.quad)
            quad = MeasurementQuad.from_angles(*angles)
        return cmd_chsh(req.source, quad, req.search, req.table, req.tol, req.grid_steps, req.refine_iters)

    return _respond("chsh", req.model_dump(), build)


@app.post("/moment-check")
def moment_check(
    document: Dict[str, Any] = Body(...),
    tol: Optional[float] = Query(None),
    expect: Optional[str] = Query(None, pattern="^(feasible|infeasible)$"),
):
    return _respond("moment-check", {"tol": tol, "expect": expect}, lambda: cmd_moment_check(
        instance_from_document(document), tol, expect, source=document.get("description"),
    ))


@app.post("/simulate")
def simulate(req: SimulateRequest):
    deg = _degrees(req.radians)
    return _respond("simulate", req.model_dump(), lambda: cmd_simulate(
        req.model, parse_setting(req.a, deg), parse_setting(req.b, deg), req.n, seed=req.seed, lanes=req.lanes,
    ))


@app.post("/spectral-demo")
def spectral_demo(req: SpectralDemoRequest):
    def build():
        if req.document is not None:
            ops, state = operators_from_document(req.document)
            return cmd_spectral_demo(operators=ops, state=state, tol=req.tol)
        return cmd_spectral_demo(preset=req.preset or "singlet-zz", tol=req.tol)

    return _respond("spectral-demo", req.model_dump(), build)
