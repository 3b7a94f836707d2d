"""Thin HTTP client used by ``cosbem --server``."""

from __future__ import annotations

import httpx

from ..errors import ConfigError, CosBemError
from ..runner import RunTable


class ServiceError(CosBemError, ArithmeticError):
    """The remote run failed numerically."""


class ServiceUnavailableError(CosBemError, ConnectionError):
    """The service could not be reached or answered unexpectedly."""


def run_remote(
    url: str, command: str, config_text: str, threads: int = 1, seed: int | None = None,
    transport: httpx.BaseTransport | None = None,
) -> tuple[RunTable, dict]:
    """POST a run to ``url`` and rebuild the result table."""
    body = {"command": command, "config": config_text, "threads": threads, "seed": seed}
    try:
        with httpx.Client(base_url=url, timeout=None, transport=transport) as client:
            resp = client.post("/run", json=body)
    except httpx.HTTPError as exc:
        raise ServiceUnavailableError(f"cannot reach service at {url}: {exc}") from None
    data = resp.json() if resp.headers.get("content-type", "").startswith("application/json") else {}
    if resp.status_code == 200:
        rows = [tuple(r) for r in data["rows"]]
        return RunTable(tuple(data["header"]), rows, data.get("text")), data["manifest"]
    if data.get("kind") == "config":
        raise ConfigError(data["message"], data.get("line"))
    if data.get("kind") == "numerical":
        raise ServiceError(f"{data.get('module', 'cosbem')}: {data['message']}")
    raise ServiceUnavailableError(f"service answered {resp.status_code}: {resp.text[:200]}")
