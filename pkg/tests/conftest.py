import threading
import time
from contextlib import contextmanager

import pytest
import uvicorn

from robodialog.server import SessionStore, create_app


@contextmanager
def run_live_server(transcript_dir=None):
    """A real uvicorn server on an ephemeral port, for concurrency tests."""
    store = SessionStore(transcript_dir=transcript_dir)
    config = uvicorn.Config(create_app(store), host="127.0.0.1", port=0,
                            log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    try:
        yield f"http://127.0.0.1:{port}", store
    finally:
        server.should_exit = True
        thread.join(timeout=5)


@pytest.fixture
def live_server():
    with run_live_server() as (url, store):
        yield url, store
