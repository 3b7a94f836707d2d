"""Request and response bodies of the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

CommandName = Literal["price", "vanilla", "mc", "estimate-nf", "error-bound"]
Cell = int | float | str | None


class RunRequest(BaseModel):
    command: CommandName
    config: str = Field(description="experiment config file contents")
    threads: int = Field(1, ge=1, le=256)
    seed: int | None = Field(None, ge=0, lt=2**64)


class RunResponse(BaseModel):
    header: list[str]
    rows: list[list[Cell]]
    text: str | None = None
    manifest: dict


class ErrorResponse(BaseModel):
    kind: Literal["config", "numerical"]
    message: str
    line: int | None = None
    module: str | None = None


class Health(BaseModel):
    status: Literal["ok"] = "ok"
    versions: dict[str, str]
