"""HTTP service and the remote command-line path."""

import socket
import threading
import time

import pytest
import uvicorn
from fastapi.testclient import TestClient

from cosbem import cli
from cosbem.service.app import app

from test_cli import BS_SMALL, HESTON_SMALL, strip_cpu, write

client = TestClient(app)


def test_health_reports_versions():
    resp = client.get("/health")
    assert resp.status_code == 200 and "numpy" in resp.json()["versions"]


def test_run_returns_table():
    resp = client.post("/run", json={"command": "price", "config": BS_SMALL})
    body = resp.json()
    assert resp.status_code == 200
    assert body["header"][:4] == ["S", "v", "t", "price"]
    assert len(body["rows"]) == 2 and body["manifest"]["command"] == "price"


def test_config_error_carries_line():
    resp = client.post("/run", json={"command": "price", "config": BS_SMALL.replace("0.105", "abc")})
    body = resp.json()
    assert resp.status_code == 400 and body["kind"] == "config" and body["line"] == 3


def test_unknown_command_rejected():
    resp = client.post("/run", json={"command": "explode", "config": BS_SMALL})
    assert resp.status_code == 422


def test_thread_cap_validated():
    resp = client.post("/run", json={"command": "price", "config": BS_SMALL, "threads": 0})
    assert resp.status_code == 422


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def server_url():
    port = free_port()
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 20
    while not server.started and time.time() < deadline:
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)


@pytest.mark.parametrize("command,text", [
    ("price", BS_SMALL), ("price", HESTON_SMALL), ("mc", HESTON_SMALL), ("vanilla", HESTON_SMALL),
], ids=["bs-price", "heston-price", "heston-mc", "heston-vanilla"])
def test_remote_run_matches_local(tmp_path, capsys, server_url, command, text):
    path = write(tmp_path, text)
    assert cli.main([command, path]) == 0
    local = capsys.readouterr().out
    assert cli.main([command, path, "--server", server_url]) == 0
    remote = capsys.readouterr().out
    assert strip_cpu(remote) == strip_cpu(local)


def test_remote_config_error_exit_code(tmp_path, capsys, server_url):
    path = write(tmp_path, BS_SMALL.replace("barrier = 40", "barrier = 30"))
    assert cli.main(["price", path, "--server", server_url]) == cli.EXIT_CONFIG
    assert "line 18" in capsys.readouterr().err


def test_remote_estimate_nf(tmp_path, capsys, server_url):
    from test_cli import CONFIGS

    assert cli.main(["estimate-nf", str(CONFIGS / "bs_call_nf.ini"), "--server", server_url]) == 0
    assert capsys.readouterr().out == "25\n"
