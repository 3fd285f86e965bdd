import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from earsim.errors import BadRequestError, ConfigError
from earsim.perception import CategoryGuess, HeardObject
from earsim.protocol import COMMANDS, EVENT_KINDS, AckMessage, CommandMessage, EventMessage, decode, encode
from earsim.protocol.messages import peek_seq
from earsim.protocol.server import parse_address


def test_vocabulary():
    assert "TURN_HEAD" in COMMANDS
    assert len(COMMANDS) == 14
    assert set(EVENT_KINDS) == {"SOUND", "FOUND", "INTERRUPT", "ALARM", "HEAD_DONE", "HEAD_CANCELLED", "STREAM_ENDED"}


def test_encode_is_one_line_without_nulls():
    ack = AckMessage(seq=3, payload={"entry_id": "e1"}, t=0.2)
    line = encode(ack)
    assert line.endswith("\n")
    assert line.count("\n") == 1
    data = json.loads(line)
    assert data == {"seq": 3, "status": "ok", "payload": {"entry_id": "e1"}, "t": 0.2}


def test_decode_by_shape():
    assert isinstance(decode('{"seq": 1, "cmd": "SUBSCRIBE"}'), CommandMessage)
    assert isinstance(decode(b'{"status": "ok", "seq": 1, "t": 0}'), AckMessage)
    event = decode('{"event_id": 4, "kind": "STREAM_ENDED", "t": 2.0, "stream_id": "s1"}')
    assert isinstance(event, EventMessage)
    assert event.stream_id == "s1"


def test_event_with_heard_object_survives_the_wire():
    heard = HeardObject(
        id="h1",
        stream_id="s1",
        t=1.0,
        category=CategoryGuess(id="natural.birds", confidence=0.9),
        azimuth=12.0,
        azimuth_sigma=2.0,
        onset=0.5,
        duration=0.5,
        loudness=33.0,
        centroid_hz=4200.0,
    )
    event = EventMessage(event_id=9, kind="SOUND", t=1.0, heard=heard)
    assert decode(encode(event)) == event


@pytest.mark.parametrize(
    "line",
    [
        "",
        "not json",
        "[1, 2]",
        '{"seq": 1, "cmd": "DANCE"}',
        '{"seq": 1, "cmd": "SUBSCRIBE", "args": [1]}',
        '{"seq": "one", "cmd": "SUBSCRIBE"}',
        '{"seq": 1, "cmd": "SUBSCRIBE", "extra": true}',
        '{"hello": "world"}',
        b"\xff\xfe",
    ],
)
def test_decode_rejects(line):
    with pytest.raises(BadRequestError):
        decode(line)


@pytest.mark.parametrize(
    "line, seq",
    [('{"seq": 7, "cmd": "DANCE"}', 7), ("garbage", None), ('{"seq": true}', None), ('{"seq": "7"}', None), ("[7]", None)],
)
def test_peek_seq(line, seq):
    assert peek_seq(line) == seq


def test_parse_address():
    assert parse_address("127.0.0.1:7411") == ("127.0.0.1", 7411)
    assert parse_address("localhost") == ("localhost", 7411)
    assert parse_address("0.0.0.0:0") == ("0.0.0.0", 0)
    with pytest.raises(ConfigError):
        parse_address("host:port")


@given(st.one_of(st.text(), st.binary()))
def test_decode_is_total(line):
    try:
        message = decode(line)
    except BadRequestError as e:
        assert e.code == "bad_request"
    else:
        assert isinstance(message, (CommandMessage, AckMessage, EventMessage))


@given(st.integers(min_value=0, max_value=2**31), st.sampled_from(COMMANDS))
def test_commands_survive_the_wire(seq, cmd):
    message = CommandMessage(seq=seq, cmd=cmd, args={"pattern": "HAL"})
    assert decode(encode(message)) == message
