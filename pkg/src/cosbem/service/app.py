"""FastAPI application wrapping :func:`cosbem.runner.run_command`."""

from __future__ import annotations

import math
import time

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from ..cli import _origin
from ..config import parse_config
from ..errors import ArgumentError, ConfigError, CosBemError, DomainError
from ..runner import manifest, run_command, versions
from .schemas import ErrorResponse, Health, RunRequest, RunResponse

app = FastAPI(title="cosbem", summary="COS-BEM barrier option pricing")


def _finite(obj):
    # JSON has no NaN or infinity; report them as null
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _error(status: int, body: ErrorResponse) -> JSONResponse:
    return JSONResponse(status_code=status, content=body.model_dump())


@app.get("/health", response_model=Health)
def health() -> Health:
    return Health(versions=versions())


@app.post(
    "/run",
    response_model=RunResponse,
    responses={400: {"model": ErrorResponse}, 500: {"model": ErrorResponse}},
)
def run(req: RunRequest):
    try:
        cfg = parse_config(req.config)
        started = time.time()
        t0 = time.perf_counter()
        table = run_command(req.command, cfg, req.threads, req.seed)
        man = manifest(req.command, cfg, table, req.threads, req.seed, started, time.perf_counter() - t0)
    except ConfigError as exc:
        return _error(400, ErrorResponse(kind="config", message=exc.reason, line=exc.line))
    except (ArgumentError, DomainError) as exc:
        return _error(400, ErrorResponse(kind="config", message=str(exc)))
    except (CosBemError, ArithmeticError) as exc:
        return _error(500, ErrorResponse(kind="numerical", message=str(exc), module=_origin(exc)))
    return RunResponse(
        header=list(table.header),
        rows=[list(r) for r in table.rows],
        text=table.text,
        manifest=_finite(man),
    )
