"""FastAPI application exposing the solvers over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .._version import __version__
from ..errors import PullinLabError
from . import handlers
from . import schemas as s


def create_app() -> FastAPI:
    app = FastAPI(title="pullin-lab", version=__version__)

    @app.exception_handler(PullinLabError)
    async def _domain_error(request: Request, exc: PullinLabError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content=s.ErrorBody(code=type(exc).__name__, message=str(exc)).model_dump(),
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content=s.ErrorBody(code=type(exc).__name__, message=str(exc)).model_dump(),
        )

    @app.exception_handler(NotImplementedError)
    async def _unsupported(request: Request, exc: NotImplementedError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content=s.ErrorBody(code="NotImplementedError", message=str(exc)).model_dump(),
        )

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/static", response_model=s.StaticResponse)
    def static(req: s.StaticRequest) -> s.StaticResponse:
        return handlers.handle_static(req)

    @app.post("/sweep", response_model=s.SweepResponse)
    def sweep(req: s.SweepRequest) -> s.SweepResponse:
        return handlers.handle_sweep(req)

    @app.post("/pullin", response_model=s.PullInResponse)
    def pullin(req: s.PullInRequest) -> s.PullInResponse:
        return handlers.handle_pullin(req)

    @app.post("/modal", response_model=s.ModalResponse)
    def modal(req: s.ModalRequest) -> s.ModalResponse:
        return handlers.handle_modal(req)

    @app.post("/dynamic", response_model=s.DynamicResponse)
    def dynamic(req: s.DynamicRequest) -> s.DynamicResponse:
        return handlers.handle_dynamic(req)

    @app.post("/lumped", response_model=s.LumpedResponse)
    def lumped(req: s.LumpedRequest) -> s.LumpedResponse:
        return handlers.handle_lumped(req)

    @app.post("/study", response_model=s.StudyResponse)
    def study(req: s.StudyRequest) -> s.StudyResponse:
        return handlers.handle_study(req)

    return app


app = create_app()
