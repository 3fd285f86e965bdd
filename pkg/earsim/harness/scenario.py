"""Scenario scripts: a scene, timed commands, mock agents and expectations, run on the virtual clock."""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..config import EngineConfig, deep_merge
from ..engine import EarEngine
from ..errors import ScenarioError
from ..event_log import EventLog
from ..protocol.messages import COMMANDS, CommandMessage, EventMessage
from ..scene import AuditoryScene, load_scene
from .checks import CheckResult, run_checks
from .mock_agent import MockAgent, mock_agent

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_EXPECTATION = 1
EXIT_INPUT = 2

SCRIPT_CLIENT = "script"


class _Doc(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TimedCommand(_Doc):
    t_s: float = Field(ge=0)
    cmd: str
    args: Dict[str, Any] = Field(default_factory=dict)


class AgentSpec(_Doc):
    role: str
    params: Dict[str, Any] = Field(default_factory=dict)


class Expectation(_Doc):
    """Count of events of ``kind`` inside [t_min_s, t_max_s] whose fields match."""

    kind: str
    t_min_s: float = 0.0
    t_max_s: float = math.inf
    fields: Dict[str, Any] = Field(default_factory=dict)
    min_count: int = 1
    max_count: Optional[int] = None


class ScenarioScript(_Doc):
    name: str
    scene: str
    config: Dict[str, Any] = Field(default_factory=dict)
    agents: List[AgentSpec] = Field(default_factory=list)
    commands: List[TimedCommand] = Field(default_factory=list)
    expectations: List[Expectation] = Field(default_factory=list)
    # hints for the scorecard (which items this scenario exercises, check intervals, ...)
    truth: Dict[str, Any] = Field(default_factory=dict)
    # resolved path of the scene document; set by load_script
    scene_path: Optional[str] = None


class ExpectationVerdict(BaseModel):
    expectation: Expectation
    count: int
    met: bool
    evidence: List[int] = Field(default_factory=list)


class RunResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    log: EventLog
    exit_status: int
    verdicts: List[ExpectationVerdict] = Field(default_factory=list)
    checks: List[CheckResult] = Field(default_factory=list)
    out_dir: Optional[str] = None


def load_script(path: str) -> ScenarioScript:
    """Read a scenario document; the scene path is resolved relative to the script."""
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"scenario not found: {path}")
    try:
        script = ScenarioScript.model_validate_json(p.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ScenarioError(f"invalid scenario {path}: {e}")
    scene = Path(script.scene)
    if not scene.is_absolute():
        scene = p.parent / scene
    script.scene_path = str(scene.resolve())
    return script


def _lookup(data: Any, dotted: str) -> Any:
    for part in dotted.split("."):
        if isinstance(data, dict):
            data = data.get(part)
        elif isinstance(data, list) and part.isdigit() and int(part) < len(data):
            data = data[int(part)]
        else:
            return None
    return data


def field_matches(event: EventMessage, fields: Dict[str, Any]) -> bool:
    """Dotted-path equality; ``{"approx": x, "tol": d}`` for numbers, ``{"prefix": s}`` for strings."""
    data = event.model_dump(mode="json")
    for path, wanted in fields.items():
        got = _lookup(data, path)
        if isinstance(wanted, dict) and "approx" in wanted:
            if not isinstance(got, (int, float)) or abs(got - wanted["approx"]) > wanted.get("tol", 1e-6):
                return False
        elif isinstance(wanted, dict) and "prefix" in wanted:
            if not isinstance(got, str) or not got.startswith(wanted["prefix"]):
                return False
        elif isinstance(wanted, dict) and "contains" in wanted:
            if not isinstance(got, list) or wanted["contains"] not in [_lookup(g, "w") or g for g in got]:
                return False
        elif got != wanted:
            return False
    return True


def evaluate_expectations(events: List[EventMessage], expectations: List[Expectation]) -> List[ExpectationVerdict]:
    verdicts = []
    for x in expectations:
        hits = [
            e for e in events
            if x.kind in ("*", e.kind) and x.t_min_s - 1e-9 <= e.t <= x.t_max_s + 1e-9 and field_matches(e, x.fields)
        ]
        met = len(hits) >= x.min_count and (x.max_count is None or len(hits) <= x.max_count)
        verdicts.append(ExpectationVerdict(expectation=x, count=len(hits), met=met, evidence=[e.event_id for e in hits[:20]]))
    return verdicts


def _engine_config(script: ScenarioScript, config: Optional[EngineConfig], seed: Optional[int]) -> EngineConfig:
    base = (config or EngineConfig()).model_dump()
    merged = deep_merge(base, script.config)
    if seed is not None:
        merged["seed"] = seed
    try:
        return EngineConfig.model_validate(merged)
    except ValidationError as e:
        raise ScenarioError(f"scenario {script.name}: invalid config override: {e}")


def _check_commands(script: ScenarioScript, scene: AuditoryScene) -> None:
    for c in script.commands:
        if c.t_s > scene.duration_s:
            raise ScenarioError(f"command {c.cmd} at {c.t_s}s is past the scene end ({scene.duration_s}s)")
        if c.cmd not in COMMANDS:
            raise ScenarioError(f"unknown command {c.cmd!r} at {c.t_s}s")


def run_scenario(
    script: ScenarioScript,
    config: Optional[EngineConfig] = None,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
    realtime: bool = False,
) -> RunResult:
    """Run one scenario to the end of its scene and judge its expectations.

    Scene and config problems raise (SceneError / ScenarioError) before the run starts.
    """
    cfg = _engine_config(script, config, seed)
    scene = load_scene(script.scene_path or script.scene)
    _check_commands(script, scene)

    engine = EarEngine(scene, cfg)
    agents: List[MockAgent] = [mock_agent(a.role, a.params) for a in script.agents]
    sent: Dict[str, int] = {SCRIPT_CLIENT: 0}
    engine.connect(SCRIPT_CLIENT)
    for agent in agents:
        engine.connect(agent.client_id, sink=agent.receive)
        sent[agent.client_id] = 0
        agent.start()

    pending = sorted(script.commands, key=lambda c: c.t_s)
    seq = 0

    def on_window(eng: EarEngine, _released) -> None:
        nonlocal pending, seq
        if eng.finished:
            return
        now = eng.now
        while pending and pending[0].t_s <= now + 1e-9:
            c = pending.pop(0)
            seq += 1
            eng.submit(SCRIPT_CLIENT, CommandMessage(seq=seq, cmd=c.cmd, args=c.args))
            sent[SCRIPT_CLIENT] += 1
        for agent in agents:
            for command in agent.poll(now):
                eng.submit(agent.client_id, command)
                sent[agent.client_id] += 1

    # commands due at t=0 go in before the first window
    on_window(engine, [])
    engine.run(on_window=on_window, realtime=realtime)

    log = engine.log
    verdicts = evaluate_expectations(log.events, script.expectations)
    checks = run_checks(log, {k: v for k, v in sent.items() if v}, cfg.alarms.rate_cap_per_min)
    status = EXIT_OK if all(v.met for v in verdicts) and all(c.ok for c in checks) else EXIT_EXPECTATION
    log.run = {
        "scenario": script.name,
        "scene": script.scene_path or script.scene,
        "seed": cfg.seed,
        "super_ear": cfg.super_ear,
        "config": cfg.model_dump(mode="json"),
        "truth": script.truth,
        "expectations": [v.model_dump(mode="json") for v in verdicts],
        "checks": [c.model_dump() for c in checks],
        "metrics": engine.metrics(),
        "exit_status": status,
    }
    if out_dir:
        log.save(out_dir)
    for v in verdicts:
        if not v.met:
            logger.warning("[Harness] %s: expected %s, got %d", script.name, v.expectation.kind, v.count)
    return RunResult(name=script.name, log=log, exit_status=status, verdicts=verdicts, checks=checks, out_dir=out_dir)


def run_suite(paths: List[str], out_root: str, seed: Optional[int] = None, config: Optional[EngineConfig] = None) -> List[RunResult]:
    """Run several scenarios, each into ``out_root/<name>``."""
    results = []
    for path in paths:
        script = load_script(path)
        results.append(run_scenario(script, config, seed, str(Path(out_root) / script.name)))
    return results
