"""Shared fixtures: an in-process HTTP service and a subprocess launcher."""

import subprocess
import sys
import threading
import time
from dataclasses import dataclass

import pytest
import requests

from fairdraw.client import ServiceClient
from fairdraw.service import Registry, serve


@dataclass
class LiveService:
    registry: Registry
    data_dir: str
    base_url: str
    client: ServiceClient
    server: object


def start_inprocess(data_dir, **registry_kwargs) -> LiveService:
    registry = Registry(data_dir=str(data_dir), **registry_kwargs)
    server = serve(registry)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    base_url = f"http://{host}:{port}"
    live = LiveService(registry, str(data_dir), base_url, ServiceClient(base_url), server)
    live._thread = thread
    return live


def stop_inprocess(live: LiveService) -> None:
    live.server.shutdown()
    live.server.server_close()
    live._thread.join(timeout=5)


@pytest.fixture
def service(tmp_path):
    """HTTP service running in-process on a free port, backed by tmp storage."""
    live = start_inprocess(tmp_path / "data")
    yield live
    stop_inprocess(live)


@dataclass
class ServerProcess:
    """A fairdraw-server child process, for tests that must kill it."""

    proc: subprocess.Popen
    base_url: str
    data_dir: str

    def kill(self) -> None:
        self.proc.kill()
        self.proc.wait(timeout=10)

    def stop(self) -> None:
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait(timeout=10)


def spawn_server(data_dir, log_path, extra_args=(), timeout=15.0) -> ServerProcess:
    """Start fairdraw-server on a free port and wait until it answers."""
    cmd = [
        sys.executable,
        "-m",
        "fairdraw.service",
        "--listen",
        "127.0.0.1:0",
        "--data-dir",
        str(data_dir),
        *extra_args,
    ]
    log = open(log_path, "w", encoding="utf-8")
    proc = subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=log, text=True)
    try:
        line = proc.stdout.readline()
        if "listening on" not in line:
            raise RuntimeError(f"server did not start: {line!r}")
        base_url = line.strip().rsplit(" ", 1)[-1]
        deadline = time.monotonic() + timeout
        while True:
            try:
                if requests.get(base_url + "/healthz", timeout=1).status_code == 200:
                    break
            except requests.RequestException:
                pass
            if time.monotonic() > deadline:
                raise RuntimeError("server never answered /healthz")
            time.sleep(0.02)
    except Exception:
        proc.kill()
        proc.wait(timeout=10)
        raise
    finally:
        log.close()
    return ServerProcess(proc=proc, base_url=base_url, data_dir=str(data_dir))
