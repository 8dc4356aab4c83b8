"""FastAPI application exposing the analysis handlers over HTTP.

All endpoints take file paths, not payloads: the service is a local
front end over on-disk corpora, and embedding files are far too large to
ship through JSON.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import DataError, NumericalError, PerceptError, UsageError
from . import handlers
from .models import (
    BlurRequest,
    BlurResponse,
    FdRequest,
    FdResponse,
    LeaderboardRequest,
    LeaderboardResponse,
    PrRequest,
    PrResponse,
    RegionReportRequest,
    RegionReportResponse,
    RenderRequest,
    RenderResponse,
    StatsRequest,
    StatsResponse,
    SweepRequest,
    SweepResponse,
)

_STATUS_BY_ERROR = (
    (UsageError, 400),
    (NumericalError, 500),
    (DataError, 422),
    (PerceptError, 422),
)


def create_app() -> FastAPI:
    app = FastAPI(title="percept", version="0.1.0")

    @app.exception_handler(PerceptError)
    async def percept_error_handler(request: Request, exc: PerceptError):
        status = next(s for cls, s in _STATUS_BY_ERROR if isinstance(exc, cls))
        return JSONResponse(
            status_code=status,
            content={"detail": str(exc), "exit_code": exc.exit_code},
        )

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/stats", response_model=StatsResponse)
    def stats(req: StatsRequest):
        return handlers.stats(req.input, req.out)

    @app.post("/fd", response_model=FdResponse)
    def fd(req: FdRequest):
        return handlers.fd(req.a, req.b)

    @app.post("/pr", response_model=PrResponse)
    def pr(req: PrRequest):
        return handlers.pr(req.real, req.gen, req.k, threads=req.threads)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest):
        return handlers.run_sweep(
            req.manifest,
            size=req.size,
            draws=req.draws,
            seed=req.seed,
            grid=req.grid,
            out=req.out,
            threads=req.threads,
        )

    @app.post("/blur", response_model=BlurResponse)
    def blur(req: BlurRequest):
        return handlers.run_blur(
            req.images,
            req.masks,
            req.regions,
            req.out,
            kernel_size=req.kernel_size,
            sigma=req.sigma,
            threads=req.threads,
        )

    @app.post("/region-report", response_model=RegionReportResponse)
    def region_report(req: RegionReportRequest):
        return handlers.region_report(req.pairs, out=req.out)

    @app.post("/leaderboard", response_model=LeaderboardResponse)
    def leaderboard(req: LeaderboardRequest):
        return handlers.leaderboard(req.entries, k=req.k, out=req.out, threads=req.threads)

    @app.post("/render", response_model=RenderResponse)
    def render(req: RenderRequest):
        return handlers.render(req.input, req.out, title=req.title)

    return app


app = create_app()
