import json

import numpy as np
import pytest

from earsim.config import EngineConfig
from earsim.engine import EarEngine
from earsim.event_log import EventLog, ack_event_pairs
from earsim.harness import ack_before_event, exactly_one_ack
from earsim.protocol import COMMANDS, AckMessage, EventMessage

from conftest import make_scene


@pytest.fixture
def engine(growl_scene):
    return EarEngine(growl_scene, EngineConfig(seed=7, super_ear=True))


def _collect(engine, client):
    inbox = []
    engine.connect(client, inbox.append)
    return inbox


def test_ack_is_stamped_with_the_current_time(engine):
    ack = engine.handle("cog", {"seq": 1, "cmd": "LISTEN_PRIMARY", "args": {"pattern": "natural.mammals.dog"}})
    assert ack.status == "ok"
    assert ack.seq == 1
    assert ack.t == 0.0
    assert ack.payload == {"entry_id": "e1", "list_kind": "short_term_primary"}


def test_seq_must_increase_per_client(engine):
    assert engine.handle("a", '{"seq": 4, "cmd": "SUBSCRIBE"}').status == "ok"
    repeat = engine.handle("a", '{"seq": 4, "cmd": "UNSUBSCRIBE"}')
    assert repeat.status == "error"
    assert repeat.error_code == "bad_seq"
    # another client has its own seq space
    assert engine.handle("b", '{"seq": 1, "cmd": "SUBSCRIBE"}').status == "ok"


def test_undecodable_command_keeps_its_seq(engine):
    ack = engine.handle("a", '{"seq": 5, "cmd": "DANCE"}')
    assert ack.status == "error"
    assert ack.error_code == "bad_request"
    assert ack.seq == 5
    garbage = engine.handle("a", "{{{")
    assert garbage.seq is None
    assert garbage.error_code == "bad_request"


def test_command_errors_carry_codes(engine):
    assert engine.handle("a", {"seq": 1, "cmd": "FOCUS", "args": {"stream_id": "s9"}}).error_code == "dead_stream"
    assert engine.handle("a", {"seq": 2, "cmd": "TURN_HEAD", "args": {"deg": "left"}}).error_code == "bad_request"
    removed = engine.handle("a", {"seq": 3, "cmd": "LIST_REMOVE", "args": {"list": "long_term", "pattern": "nothing"}})
    assert removed.error_code == "not_found"


def test_every_command_gets_exactly_one_ack(engine):
    acks = _collect(engine, "a")
    engine.submit("a", '{"seq": 1, "cmd": "SUBSCRIBE"}')
    engine.submit("a", '{"seq": 2, "cmd": "CURRENT_SOUND"}')
    engine.submit("a", "nonsense")
    engine.step()
    assert [m.seq for m in acks if isinstance(m, AckMessage)] == [1, 2, None]
    assert len(engine.log.acks) == 3


def test_sound_goes_to_subscribers_only(engine):
    listener = _collect(engine, "listener")
    bystander = _collect(engine, "bystander")
    engine.handle("listener", {"seq": 1, "cmd": "SUBSCRIBE"})
    engine.run()

    sounds = [m for m in listener if isinstance(m, EventMessage) and m.kind == "SOUND"]
    assert sounds
    assert {s.stream_id for s in sounds} == {"s1"}
    assert all(s.heard.category.id == "natural.mammals.dog" for s in sounds)
    assert all(s.heard.azimuth < 0 for s in sounds)
    assert sounds[0].t >= 0.2

    seen = [m for m in bystander if isinstance(m, EventMessage)]
    assert not [m for m in seen if m.kind == "SOUND"]
    assert [m.stream_id for m in seen if m.kind == "STREAM_ENDED"] == ["s1"]


def test_found_matches_the_loaded_entry(engine):
    engine.handle("cog", {"seq": 1, "cmd": "LISTEN_PRIMARY", "args": {"pattern": "natural.mammals.dog"}})
    log = engine.run()
    found = log.by_kind("FOUND")
    assert len(found) == 1
    assert found[0].matched_entry == "e1"
    assert found[0].heard.stream_id == "s1"
    pairs = ack_event_pairs(log)
    assert len(pairs) == 1
    assert pairs[0][0].ack.t <= pairs[0][1].t


def test_turn_head_finishes_at_eta(engine):
    inbox = _collect(engine, "cog")
    ack = engine.handle("cog", {"seq": 1, "cmd": "TURN_HEAD", "args": {"mode": "relative", "deg": 30}})
    assert ack.payload == {"target": 30.0, "eta": 0.15}
    engine.step()
    done = [m for m in inbox if isinstance(m, EventMessage) and m.kind == "HEAD_DONE"]
    assert len(done) == 1
    assert done[0].t == pytest.approx(0.15)
    assert done[0].head.cause_seq == 1
    assert done[0].head.heading == pytest.approx(30.0)
    # the ack reached the client before the event it caused
    assert inbox.index(ack) < inbox.index(done[0])


def test_second_turn_cancels_the_first(engine):
    engine.handle("cog", {"seq": 1, "cmd": "TURN_HEAD", "args": {"deg": 90}})
    engine.step()
    engine.handle("cog", {"seq": 2, "cmd": "TURN_HEAD", "args": {"mode": "absolute", "deg": 0}})
    log = engine.run()
    cancelled = log.by_kind("HEAD_CANCELLED")
    assert len(cancelled) == 1
    assert cancelled[0].head.cause_seq == 1
    done = log.by_kind("HEAD_DONE")
    assert [d.head.cause_seq for d in done] == [2]


def test_event_times_never_decrease(engine):
    engine.handle("cog", {"seq": 1, "cmd": "SUBSCRIBE"})
    engine.handle("cog", {"seq": 2, "cmd": "LISTEN_PRIMARY", "args": {"pattern": "natural.mammals"}})
    log = engine.run()
    times = [e.t for e in log.events]
    assert times == sorted(times)
    assert [e.event_id for e in log.events] == list(range(1, len(log.events) + 1))


def test_same_seed_same_run(growl_scene):
    def run_once():
        engine = EarEngine(growl_scene, EngineConfig(seed=3))
        engine.handle("cog", {"seq": 1, "cmd": "SUBSCRIBE"})
        return [e.model_dump_json() for e in engine.run().events]

    assert run_once() == run_once()


def test_silence_produces_no_events():
    engine = EarEngine(make_scene([], duration=1.0), EngineConfig(seed=1))
    engine.handle("cog", {"seq": 1, "cmd": "SUBSCRIBE"})
    log = engine.run()
    assert log.events == []
    assert engine.counters["silent_windows"] == engine.counters["windows"] == 5


def test_finished_engine_stops_stepping(engine):
    engine.run()
    assert engine.finished
    assert engine.step() == []
    assert engine.tracker.tracks == {}


def test_state_and_metrics_views(engine):
    engine.handle("cog", {"seq": 1, "cmd": "SUBSCRIBE"})
    engine.handle("cog", {"seq": 2, "cmd": "VIGILANCE", "args": {"pattern": "alarm"}})
    engine.run()
    view = engine.state()
    assert view["finished"] is True
    assert view["streams"] == []
    json.dumps(view)
    metrics = engine.metrics()
    assert metrics["commands"] == 2
    assert metrics["clients"] == 1
    assert metrics["events"]["STREAM_ENDED"] == 1
    assert metrics["events"]["SOUND"] > 0


def test_log_persists(engine, tmp_path):
    engine.handle("cog", {"seq": 1, "cmd": "SUBSCRIBE"})
    engine.run()
    engine.log.save(str(tmp_path))
    loaded = EventLog.load(str(tmp_path))
    assert loaded.events == engine.log.events
    assert [a.ack for a in loaded.acks] == [a.ack for a in engine.log.acks]
    assert [e.event_id for e in loaded.since(2, limit=3)] == [3, 4, 5]


def test_zero_length_turn_is_done_at_its_ack(engine):
    ack = engine.handle("cog", {"seq": 1, "cmd": "TURN_HEAD", "args": {"mode": "relative", "deg": 0}})
    assert ack.payload == {"target": 0.0, "eta": 0.0}
    engine.step()
    done = engine.log.by_kind("HEAD_DONE")
    assert [d.t for d in done] == [ack.t]
    assert ack_before_event(engine.log).ok


RANDOM_ARGS = [
    {},
    {"pattern": "natural.mammals.dog"},
    {"pattern": "HAL", "permanent": True},
    {"patterns": ["pump_alarm", "bird_call"]},
    {"list": "long_term", "pattern": "nothing"},
    {"list": "short_term_primary"},
    {"mode": "relative", "deg": 15},
    {"mode": "absolute", "deg": -400},
    {"deg": "left"},
    {"stream_id": "s1"},
    {"stream_id": 7},
    {"on": True},
    None,
]
GARBAGE = ['{"seq": 1', "[]", "null", '{"seq": "one", "cmd": "SUBSCRIBE"}', '{"cmd": "SUBSCRIBE"}', "", "ÿþ", "{}"]


def _random_line(rng, seq, last_seq):
    """``seq`` is fresh for this line; ``last_seq`` is the client's highest seq acked ok."""
    roll = rng.random()
    if roll < 0.5:
        doc = {"seq": seq, "cmd": str(rng.choice(COMMANDS))}
        args = RANDOM_ARGS[int(rng.integers(len(RANDOM_ARGS)))]
        if args is not None:
            doc["args"] = args
        return json.dumps(doc)
    if roll < 0.7:
        # stale or repeated seq
        return json.dumps({"seq": int(rng.integers(0, last_seq + 2)), "cmd": "CURRENT_SOUND"})
    if roll < 0.8:
        return json.dumps({"seq": seq, "cmd": "NOT_A_COMMAND", "args": {}})
    if roll < 0.9:
        return GARBAGE[int(rng.integers(len(GARBAGE)))]
    alphabet = list('{}[]":, seqcmdargs0123456789')
    return "".join(rng.choice(alphabet, size=int(rng.integers(1, 40))))


def test_random_command_lines_get_exactly_one_ack(engine):
    rng = np.random.default_rng(5)
    sent = {"a": 0, "b": 0}
    # the engine may have accepted a later seq whose command then failed
    last_seq = {"a": -1, "b": -1}
    for i in range(10_000):
        client = "a" if rng.random() < 0.5 else "b"
        ack = engine.handle(client, _random_line(rng, i + 1, last_seq[client]))
        sent[client] += 1
        assert ack.t == engine.now
        if ack.status == "ok":
            assert ack.seq > last_seq[client]
            last_seq[client] = ack.seq
        if i % 1000 == 999:
            engine.step()
    assert len(engine.log.acks) == 10_000
    result = exactly_one_ack(engine.log, sent)
    assert result.ok, result.detail
