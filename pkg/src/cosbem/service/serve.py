"""``cosbem-serve``: run the HTTP service with uvicorn."""

from __future__ import annotations

import argparse

import uvicorn


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(prog="cosbem-serve", description="serve the cosbem HTTP API")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8000)
    args = ap.parse_args(argv)
    uvicorn.run("cosbem.service.app:app", host=args.host, port=args.port)


if __name__ == "__main__":
    main()
