import pytest
from fastapi.testclient import TestClient

from earsim.config import EngineConfig
from earsim.engine import EarEngine
from earsim.protocol.control_panel import create_app


@pytest.fixture
def engine(growl_scene):
    return EarEngine(growl_scene, EngineConfig(seed=7, super_ear=True))


@pytest.fixture
def client(engine):
    return TestClient(create_app(engine))


def test_health(client):
    assert client.get("/health").json() == {"status": "ok", "t": 0.0, "finished": False}


def test_command_returns_the_ack(client):
    r = client.post("/command", params={"client": "ui"}, json={"seq": 1, "cmd": "SUBSCRIBE"})
    assert r.status_code == 200
    assert r.json() == {"seq": 1, "status": "ok", "payload": {"subscribed": True}, "t": 0.0}
    again = client.post("/command", params={"client": "ui"}, json={"seq": 1, "cmd": "SUBSCRIBE"}).json()
    assert again["error_code"] == "bad_seq"
    other = client.post("/command", params={"client": "other"}, json={"seq": 1, "cmd": "SUBSCRIBE"}).json()
    assert other["status"] == "ok"


def test_bad_command_is_an_error_ack(client):
    body = client.post("/command", json={"seq": 2, "cmd": "JUMP"}).json()
    assert body["status"] == "error"
    assert body["error_code"] == "bad_request"
    assert body["seq"] == 2


def test_events_page(client, engine):
    client.post("/command", json={"seq": 1, "cmd": "SUBSCRIBE"})
    engine.run()
    first = client.get("/events", params={"since": 0, "limit": 2}).json()
    assert [e["event_id"] for e in first["events"]] == [1, 2]
    assert first["last_event_id"] == 2
    rest = client.get("/events", params={"since": first["last_event_id"]}).json()
    assert rest["events"][0]["event_id"] == 3
    assert rest["last_event_id"] == len(engine.log.events)
    tail = client.get("/events", params={"since": rest["last_event_id"]}).json()
    assert tail == {"events": [], "last_event_id": rest["last_event_id"]}


def test_state_and_metrics(client):
    client.post("/command", json={"seq": 1, "cmd": "LISTEN_SECONDARY", "args": {"pattern": "Rex"}})
    state = client.get("/state").json()
    assert state["lists"]["short_term_secondary"][0]["pattern"] == "Rex"
    assert state["finished"] is False
    metrics = client.get("/metrics").json()
    assert metrics["commands"] == 1
    assert metrics["windows"] == 0


def test_stream_view(client, engine):
    assert client.get("/streams/s1").status_code == 404
    for _ in range(5):
        engine.step()
    body = client.get("/streams/s1").json()
    assert body["stream_id"] == "s1"
    assert body["category"]["id"] == "natural.mammals.dog"
    assert body["azimuth"] < 0
    assert body["birth"] == pytest.approx(0.2)
