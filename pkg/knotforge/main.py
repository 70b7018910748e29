"""
KnotForge - HTTP surface
FastAPI server mirroring the CLI: crossings, invariants, synthesis, reduction and plots
"""
import logging
import time
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from knotforge.config import RunConfig, allowed_origins, configure_logging
from knotforge.errors import DegenerateError, InfeasibleError, InputError, KnotForgeError
from knotforge.fixtures import CURVES, PATTERNS
from knotforge.services.curve import double_points, is_compact_embedding, pair_check
from knotforge.services.curve_files import CurveFile, PatternFile
from knotforge.services.diagram import (
    alexander,
    build_diagram,
    canonical_gauss,
    determinant,
    identify,
    tricolor_count,
)
from knotforge.services.plotting import render_svg
from knotforge.services.synth import reduce_to_minimal, synthesize_height

configure_logging()
logger = logging.getLogger("knotforge")

# --- Models ---

class DoublePointOut(BaseModel):
    index: int
    s: float
    t: float
    x: float
    y: float
    residual: float = Field(..., description="max(|f(s)-f(t)|, |g(s)-g(t)|)")


class CrossingsResponse(BaseModel):
    name: str
    double_points: List[DoublePointOut]
    processing_time_seconds: float = Field(..., description="Time taken by the solver")


class IdentifyResponse(BaseModel):
    name: str
    degree_sequence: str
    violations: List[str] = Field(default_factory=list)
    crossings: int
    gauss: str
    canonical_gauss: str
    pd: str
    tricolor_count: int
    determinant: int
    alexander: List[int] = Field(..., description="Normalized coefficients, ascending powers")
    knot: str
    embedded: bool


class SynthRequest(BaseModel):
    curve: CurveFile
    pattern: PatternFile
    seed: Optional[int] = Field(None, ge=0, description="Overrides KNOTFORGE_SEED")


class SynthResponse(BaseModel):
    curve: CurveFile
    margins: List[float] = Field(..., description="Relative crossing margins")
    trace: List[str]


class ReduceRequest(BaseModel):
    curve: CurveFile
    target: str = Field(..., description="unknot, 3_1, 4_1, 5_1 or 5_2")
    pattern: Optional[PatternFile] = Field(None, description="Needed when the curve has no z")
    seed: Optional[int] = Field(None, ge=0)


class PlotRequest(BaseModel):
    curve: CurveFile
    axes: str = Field("x,y", description="Two comma-separated axis names")
    color: bool = Field(False, description="Colour arcs by a 3-colouring")


# --- App Settings & Middleware ---

app = FastAPI(
    title="KnotForge",
    description="Crossings, invariants and minimal-degree synthesis for compact rational knots",
    version="1.0.0",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=allowed_origins(),
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


@app.middleware("http")
async def add_security_headers(request, call_next):
    response = await call_next(request)
    response.headers["X-Content-Type-Options"] = "nosniff"
    response.headers["X-Frame-Options"] = "DENY"
    return response


STATUS_BY_ERROR = ((InputError, 400), (DegenerateError, 422), (InfeasibleError, 409))


@app.exception_handler(KnotForgeError)
async def knotforge_exception_handler(request, exc: KnotForgeError):
    status = next((code for kind, code in STATUS_BY_ERROR if isinstance(exc, kind)), 400)
    logger.warning(f"⚠ {type(exc).__name__}: {exc}")
    return JSONResponse(status_code=status, content={"detail": str(exc), "error": type(exc).__name__})


@app.exception_handler(Exception)
async def global_exception_handler(request, exc):
    logger.error(f"Unhandled exception: {exc}", exc_info=True)
    return JSONResponse(
        status_code=500,
        content={"detail": "An internal server error occurred. Please try again later."}
    )

# --- Lifecycle ---

@app.on_event("startup")
async def startup_event():
    cfg = RunConfig()
    logger.info(f"✓ KnotForge ready: solver tol {cfg.solver_tol:g}, budget {cfg.budget}, seed {cfg.seed}")

# --- Endpoints ---

@app.get("/health")
async def health():
    return {"status": "ok"}


@app.get("/api/fixtures")
async def list_fixtures():
    return {"curves": sorted(CURVES), "patterns": sorted(PATTERNS)}


@app.get("/api/fixtures/{name}")
async def get_fixture(name: str) -> Dict[str, Any]:
    if name in CURVES:
        return CurveFile.from_parameterization(CURVES[name], {"source": "fixture"}).model_dump(exclude_none=True)
    if name in PATTERNS:
        return PatternFile.from_pattern(PATTERNS[name]).model_dump()
    raise HTTPException(status_code=404, detail=f"Unknown fixture '{name}'")


@app.post("/api/crossings", response_model=CrossingsResponse)
def crossings(curve: CurveFile):
    start = time.time()
    p = curve.to_parameterization()
    dps = double_points(p.x, p.y, RunConfig().solver_tol)
    points = [
        DoublePointOut(index=dp.index, s=dp.s, t=dp.t, x=dp.position[0], y=dp.position[1],
                       residual=pair_check(p.x, p.y, dp))
        for dp in dps
    ]
    return CrossingsResponse(name=p.name, double_points=points, processing_time_seconds=time.time() - start)


@app.post("/api/identify", response_model=IdentifyResponse)
def identify_curve(curve: CurveFile):
    p = curve.to_parameterization()
    z = p.coordinate("z")
    cfg = RunConfig()
    dps = double_points(p.x, p.y, cfg.solver_tol)
    d = build_diagram(p.x, p.y, z, dps)
    problems = p.violations(cfg.root_tol)
    return IdentifyResponse(
        name=p.name,
        degree_sequence=str(p.degree_sequence()),
        violations=problems,
        crossings=d.crossing_count,
        gauss=d.gauss,
        canonical_gauss=canonical_gauss(d),
        pd=d.pd_code,
        tricolor_count=tricolor_count(d),
        determinant=determinant(d),
        alexander=list(alexander(d)),
        knot=identify(d),
        embedded=not problems and is_compact_embedding(p, dps, cfg.solver_tol, root_tol=cfg.root_tol),
    )


@app.post("/api/synth", response_model=SynthResponse)
def synth(request: SynthRequest):
    cfg = RunConfig(**({"seed": request.seed} if request.seed is not None else {}))
    p = request.curve.to_parameterization()
    dps = double_points(p.x, p.y, cfg.solver_tol)
    result = synthesize_height(dps, request.pattern.to_pattern(), cfg.synth_options())
    out = CurveFile.from_parameterization(p.with_coordinate("z", result.h), {"source": "synth", "seed": cfg.seed})
    return SynthResponse(curve=out, margins=list(result.margins), trace=list(result.trace))


@app.post("/api/reduce", response_model=CurveFile, response_model_exclude_none=True)
def reduce(request: ReduceRequest):
    cfg = RunConfig(**({"seed": request.seed} if request.seed is not None else {}))
    pattern = request.pattern.to_pattern() if request.pattern is not None else None
    out = reduce_to_minimal(request.curve.to_parameterization(), request.target, cfg.synth_options(), pattern)
    logger.info(f"✓ Reduced {out.name} to {out.degree_sequence()}")
    return CurveFile.from_parameterization(out, {"source": "reduce", "target": request.target, "seed": cfg.seed})


@app.post("/api/plot")
def plot(request: PlotRequest):
    svg = render_svg(request.curve.to_parameterization(), tuple(request.axes.split(",")), color=request.color,
                     tol=RunConfig().solver_tol)
    return Response(content=svg, media_type="image/svg+xml")


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
