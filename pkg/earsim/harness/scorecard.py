"""Capability scorecard: judge saved run logs item by item against scene ground truth.

Each scenario names the items it exercises in ``truth.covers``; an item no run
covers is reported not_applicable, never pass.
"""

import logging
import statistics
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from ..config import EarConfig, EngineConfig
from ..errors import EarSimError, ScenarioError
from ..event_log import EventLog
from ..frontend import render_frame
from ..perception import sector_sigma
from ..protocol.messages import EventMessage
from ..scene import AuditoryScene, SoundSource, load_scene, source_state_at, wrap_degrees
from .checks import rate_cap

logger = logging.getLogger(__name__)

Verdict = Literal["pass", "fail", "not_applicable"]

ITEMS: List[Tuple[str, str]] = [
    ("1a", "Two microphones for binaural processing"),
    ("1b", "Sensitivity to frequency should be similar to a real ear"),
    ("1c", "Have a front and sides"),
    ("1d", "Different sensitivity curves for damaged, younger or older ears"),
    ("2a", "Recognize ambient sounds with approximate distance and bearing"),
    ("2b", "Lock on to a target speaker or auditory object and track it"),
    ("2c", "Recognize sounds on the primary target list"),
    ("2d", "Recognize sounds on the secondary target list"),
    ("2e", "Target lists decay: recognition less likely and slower"),
    ("2f", "Follow the target stream when the ear or the target moves"),
    ("2g", "Detect frequency changes and Doppler effects and track despite them"),
    ("3a", "Identify voice types, genders, accents"),
    ("3b", "Identify speaker"),
    ("3c", "Detect whispering, muttering and speech impediments"),
    ("4a", "Hear the listener's name or selected words in a stream"),
    ("4b", "Focus on one audio stream in a noisy background"),
    ("4c", "Switch focus on a target of interest, then re-focus"),
    ("5a", "ID each alarm sound for cognition to recognize it"),
    ("5b", "Recognize sound as new type or previously known type"),
    ("alarm-1", "Ignore alarms from other stations"),
    ("alarm-2", "Consolidate similar alarms and hold the alarm rate cap"),
    ("alarm-3", "Identify alarms that are not pre-programmed"),
]
OUT_OF_SCOPE = {"3a", "3b", "3c"}


class ScorecardRow(BaseModel):
    item: str
    title: str
    verdict: Verdict
    evidence: List[str] = Field(default_factory=list)
    detail: str = ""


class Scorecard(BaseModel):
    rows: List[ScorecardRow]
    runs: List[str] = Field(default_factory=list)

    @property
    def failed(self) -> List[str]:
        return [r.item for r in self.rows if r.verdict == "fail"]

    def row(self, item: str) -> ScorecardRow:
        for r in self.rows:
            if r.item == item:
                return r
        raise KeyError(item)


class RunView:
    """A loaded run directory together with its scene."""

    def __init__(self, path: str, log: EventLog, scene: AuditoryScene):
        self.path = path
        self.name = log.run.get("scenario") or Path(path).name
        self.log = log
        self.scene = scene
        self.truth: Dict[str, Any] = log.run.get("truth") or {}
        self.config = EngineConfig.model_validate(log.run.get("config") or {})

    @classmethod
    def load(cls, path: str) -> "RunView":
        log = EventLog.load(path)
        if not log.run:
            raise ScenarioError(f"{path} has no run.json")
        return cls(path, log, load_scene(log.run["scene"]))

    def ref(self, event: EventMessage) -> str:
        return f"{self.name}#{event.event_id}"

    def events(self, *kinds: str) -> List[EventMessage]:
        return [e for e in self.log.events if e.kind in kinds]

    def heard_from(self, source: SoundSource, kinds: Sequence[str] = ("SOUND",)) -> List[EventMessage]:
        """Events whose heard object matches the source's template while it sounds."""
        out = []
        for e in self.events(*kinds):
            if e.heard is None or e.heard.template != source.template:
                continue
            if source_state_at(self.scene, source.id, e.heard.t - 1e-6).active or source_state_at(
                self.scene, source.id, e.heard.t - self.scene.frame_hop_s * self.config.window_frames
            ).active:
                out.append(e)
        return out

    def sources(self, key: str) -> List[SoundSource]:
        ids = self.truth.get(key)
        if ids is None:
            return list(self.scene.sources)
        return [self.scene.source(i) for i in ([ids] if isinstance(ids, str) else ids)]


Check = Callable[[RunView], Tuple[Verdict, str, List[str]]]


# --- perception items ---


def _lateral(run: RunView):
    refs, misses = [], []
    for src in run.sources("lateral"):
        heard = run.heard_from(src)
        truth = [source_state_at(run.scene, src.id, e.heard.t).azimuth for e in heard]
        if truth and abs(statistics.median(truth)) < 20:
            continue
        right = [e for e, az in zip(heard, truth) if e.heard.azimuth * az > 0]
        if right:
            refs.append(run.ref(right[0]))
        else:
            misses.append(src.id)
    if misses:
        return "fail", f"wrong or missing side for {', '.join(misses)}", refs
    if not refs:
        return "not_applicable", "no lateral source", refs
    return "pass", f"{len(refs)} lateral sources on the right side", refs


def _broad_range(run: RunView):
    refs, missing = [], []
    for src in run.sources("detect"):
        heard = run.heard_from(src, ("SOUND", "ALARM", "FOUND"))
        if heard:
            refs.append(run.ref(heard[0]))
        else:
            missing.append(src.id)
    if missing:
        return "fail", f"never heard: {', '.join(missing)}", refs
    return "pass", f"all {len(refs)} sources heard", refs


def _front_and_sides(run: RunView):
    if "front_source" in run.truth:
        front = run.heard_from(run.scene.source(run.truth["front_source"]))
        side = run.heard_from(run.scene.source(run.truth["side_source"]))
        if not front or not side:
            return "fail", "front or side source not heard", []
        gain = statistics.median(e.heard.loudness for e in front) - statistics.median(e.heard.loudness for e in side)
        verdict = "pass" if gain >= 2.0 else "fail"
        return verdict, f"front minus side loudness {gain:.2f} dB", [run.ref(front[0]), run.ref(side[0])]
    if "rear_source" in run.truth:
        src = run.scene.source(run.truth["rear_source"])
        expected = float(run.truth["expected_azimuth"])
        resolved = [
            e for e in run.heard_from(src)
            if e.heard.front_back_resolved and abs(wrap_degrees(e.heard.azimuth - expected)) <= 30
        ]
        if resolved:
            return "pass", f"rear source resolved behind ({resolved[0].heard.azimuth:.1f} deg)", [run.ref(resolved[0])]
        return "fail", "rear source never resolved behind the head", []
    return "not_applicable", "no front/side truth", []


def _normal_ear_audible(run: RunView, src: SoundSource) -> bool:
    ear = EarConfig(**{**run.config.ear.model_dump(), "sensitivity_preset": "normal"})
    t = src.onset_s + src.duration_s / 2
    frame = render_frame(run.scene, ear, 0.0, t)
    level = 0.5 * (frame.left_energy + frame.right_energy)
    return float(level.max()) - run.scene.background_db >= run.config.segregation.cell_threshold_db


def _aged_curve(run: RunView):
    if run.config.ear.sensitivity_preset != "aged":
        return "not_applicable", "run is not on the aged preset", []
    high = run.scene.source(run.truth["high_source"])
    low = run.scene.source(run.truth["low_source"])
    if not _normal_ear_audible(run, high):
        return "fail", "high source is inaudible even to a normal ear", []
    heard_high = run.heard_from(high, ("SOUND", "FOUND", "ALARM"))
    heard_low = run.heard_from(low)
    if heard_high:
        return "fail", "high source still heard by the aged ear", [run.ref(heard_high[0])]
    if not heard_low:
        return "fail", "low source not heard", []
    return "pass", "high source lost, low source kept", [run.ref(heard_low[0])]


def _identify(run: RunView):
    refs, problems = [], []
    for src in run.sources("identify"):
        heard = run.heard_from(src)
        if not heard:
            problems.append(f"{src.id} not identified")
            continue
        errors, sigmas, ratios = [], [], []
        for e in heard:
            state = source_state_at(run.scene, src.id, e.heard.t)
            errors.append(abs(wrap_degrees(e.heard.azimuth - state.azimuth)))
            sigmas.append(sector_sigma(state.azimuth, run.config.localization))
            if e.heard.distance:
                ratios.append(e.heard.distance / state.distance)
        if statistics.median(errors) > 2 * statistics.median(sigmas) + 2:
            problems.append(f"{src.id} azimuth error {statistics.median(errors):.1f} deg")
        if ratios and not 1 / 1.5 <= statistics.median(ratios) <= 1.5:
            problems.append(f"{src.id} distance ratio {statistics.median(ratios):.2f}")
        refs.append(run.ref(heard[0]))
    if problems:
        return "fail", "; ".join(problems), refs
    return "pass", f"{len(refs)} sources identified and placed", refs


def _one_speaker(run: RunView):
    src = run.scene.source(run.truth["target"])
    heard = run.heard_from(src)
    streams = {e.heard.stream_id for e in heard}
    if len(streams) == 1:
        return "pass", f"{src.id} kept on stream {streams.pop()}", [run.ref(heard[0])]
    return "fail", f"{src.id} split over {len(streams)} streams", [run.ref(e) for e in heard[:3]]


def _list_found(list_kind: str) -> Check:
    def check(run: RunView):
        found = [e for e in run.events("FOUND") if e.list_kind == list_kind]
        if found:
            return "pass", f"{len(found)} FOUND on {list_kind}", [run.ref(found[0])]
        return "fail", f"no FOUND on {list_kind}", []

    return check


def _hit_rate(run: RunView, word: str, list_kind: str, start: float, end: float):
    chances = sum(
        sum(1 for w in e.heard.speech.words if w.w == word)
        for e in run.events("SOUND")
        if start <= e.t <= end and e.heard and e.heard.speech
    )
    found = [
        e for e in run.events("FOUND")
        if e.list_kind == list_kind and start <= e.heard.t <= end and e.heard.speech
        and any(w.w == word for w in e.heard.speech.words)
    ]
    rate = len(found) / chances if chances else 0.0
    latency = statistics.mean(e.t - e.heard.t for e in found) if found else None
    return rate, latency, found


def _decay(run: RunView):
    if run.config.super_ear:
        return "not_applicable", "super ear does not decay", []
    word, name = run.truth["word"], run.truth["name"]
    rates, latencies, names, refs = [], [], [], []
    for start, end in run.truth["intervals"]:
        rate, latency, found = _hit_rate(run, word, "short_term_primary", start, end)
        name_rate, _, _ = _hit_rate(run, name, "long_term", start, end)
        rates.append(rate)
        latencies.append(latency)
        names.append(name_rate)
        refs.extend(run.ref(e) for e in found[:1])
    detail = (
        f"{word} rates {', '.join(f'{r:.2f}' for r in rates)}; "
        f"{name} rates {', '.join(f'{r:.2f}' for r in names)}"
    )
    if None in latencies:
        return "fail", detail + "; an interval found nothing", refs
    decaying = all(a >= b for a, b in zip(rates, rates[1:])) and rates[0] > rates[-1]
    slower = all(a < b for a, b in zip(latencies, latencies[1:]))
    steady = max(names) - min(names) <= 0.1
    verdict = "pass" if decaying and slower and steady else "fail"
    return verdict, detail + f"; latencies {', '.join(f'{x:.2f}' for x in latencies)}", refs


def _continuity(run: RunView):
    src = run.scene.source(run.truth["target"])
    heard = run.heard_from(src)
    streams = {e.heard.stream_id for e in heard}
    if run.truth.get("turn") and not run.events("HEAD_DONE"):
        return "fail", "no head turn completed", []
    if len(streams) == 1:
        return "pass", f"{len(heard)} reports on one stream", [run.ref(heard[0]), run.ref(heard[-1])]
    return "fail", f"{src.id} heard on {len(streams)} streams", [run.ref(e) for e in heard[:3]]


def _doppler(run: RunView):
    refs, problems = [], []
    c = run.config.ear.speed_of_sound
    for sid, expected in run.truth["doppler"].items():
        src = run.scene.source(sid)
        heard = [e for e in run.heard_from(src) if abs(e.heard.doppler_ratio - 1.0) > 1e-6]
        if not heard:
            problems.append(f"{sid}: no shift measured")
            continue
        ratio = statistics.median(e.heard.doppler_ratio for e in heard)
        velocity = source_state_at(run.scene, sid, heard[0].heard.t).radial_velocity
        closed_form = c / (c + velocity)
        if abs(ratio / closed_form - 1.0) > 0.1 or abs(ratio / float(expected) - 1.0) > 0.1:
            problems.append(f"{sid}: ratio {ratio:.4f}, expected {expected:.4f}")
        elif (ratio - 1.0) * (expected - 1.0) <= 0:
            problems.append(f"{sid}: shift in the wrong direction")
        refs.append(run.ref(heard[0]))
    if problems:
        return "fail", "; ".join(problems), refs
    return "pass", f"{len(refs)} shifted sources measured and identified", refs


# --- attention items ---


def _name_interrupts(run: RunView) -> List[EventMessage]:
    return [e for e in run.events("INTERRUPT") if e.reason == "name"]


def _name_response(run: RunView):
    hits = _name_interrupts(run)
    if hits:
        return "pass", f"name heard on stream {hits[0].heard.stream_id}", [run.ref(hits[0])]
    return "fail", "no name interrupt", []


def _focus_timeline(run: RunView) -> List[Tuple[float, Optional[str]]]:
    timeline = []
    for a in run.log.acks:
        if a.cmd in ("FOCUS", "REFOCUS") and a.ack.status == "ok" and isinstance(a.ack.payload, dict):
            timeline.append((a.ack.t, a.ack.payload.get("focused")))
    return timeline


def _focused_at(timeline, t: float) -> Optional[str]:
    focused = None
    for at, stream in timeline:
        if at <= t:
            focused = stream
    return focused


def _word_events(run: RunView, name: str) -> List[EventMessage]:
    return [
        e for e in run.events("SOUND")
        if e.heard and e.heard.speech and any(w.w != name for w in e.heard.speech.words)
    ]


def _selective(run: RunView):
    name = run.truth.get("name", "HAL")
    timeline = _focus_timeline(run)
    words = _word_events(run, name)
    if not words:
        return "fail", "no word matches at all", []
    stray = [e for e in words if _focused_at(timeline, e.t) != e.heard.stream_id]
    if stray:
        return "fail", f"{len(stray)} word matches off the focused stream", [run.ref(e) for e in stray[:3]]
    return "pass", f"{len(words)} word reports, all from the focused stream", [run.ref(words[0])]


def _switch_and_return(run: RunView):
    name = run.truth.get("name", "HAL")
    interrupts = _name_interrupts(run)
    if not interrupts:
        return "fail", "no name interrupt", []
    call = interrupts[0]
    caller = call.heard.stream_id
    acks = [(a.ack.t, a.cmd, a.ack.payload or {}) for a in run.log.acks if a.ack.status == "ok"]
    focus = next((t for t, cmd, p in acks if cmd == "FOCUS" and p.get("focused") == caller and t >= call.t), None)
    if focus is None:
        return "fail", "never focused the caller", [run.ref(call)]
    back = next(((t, p.get("focused")) for t, cmd, p in acks if cmd == "REFOCUS" and t > focus), None)
    if back is None or back[1] in (None, caller):
        return "fail", "never returned to the previous speaker", [run.ref(call)]
    words = _word_events(run, name)
    from_caller = next((e for e in words if e.heard.stream_id == caller and focus <= e.t < back[0]), None)
    returned = next((e for e in words if e.heard.stream_id == back[1] and e.t >= back[0]), None)
    if from_caller is None or returned is None:
        return "fail", "missing words from the caller or after returning", [run.ref(call)]
    return "pass", f"{caller} then back to {back[1]}", [run.ref(call), run.ref(from_caller), run.ref(returned)]


def _alarm_key(e: EventMessage) -> str:
    return e.heard.template or f"unknown:{e.heard.peak_channel}"


def _alarm_ids(run: RunView):
    alarms = run.events("ALARM")
    ids = [e.heard.id for e in alarms]
    kinds = {_alarm_key(e) for e in alarms}
    wanted = int(run.truth.get("alarm_types", 1))
    if len(ids) != len(set(ids)):
        return "fail", "two alarms share an id", [run.ref(e) for e in alarms[:3]]
    if len(kinds) < wanted:
        return "fail", f"{len(kinds)} alarm types identified, expected {wanted}", []
    return "pass", f"{len(alarms)} alarms with distinct ids, {len(kinds)} types", [run.ref(alarms[0])]


def _novelty(run: RunView):
    alarms = run.events("ALARM")
    new = next((e for e in alarms if e.heard.novelty == "new_type"), None)
    known = next((e for e in alarms if e.heard.novelty == "known_type"), None)
    if new is None or known is None:
        return "fail", "need one new and one known alarm type", [run.ref(e) for e in alarms[:2]]
    return "pass", f"{_alarm_key(new)} new, {_alarm_key(known)} known", [run.ref(new), run.ref(known)]


def _station_filter(run: RunView):
    own = run.config.alarms.own_station
    alarms = run.events("ALARM")
    foreign = [e for e in alarms if e.heard.station_tag not in (None, own)]
    dropped = (run.log.run.get("metrics") or {}).get("alarms", {}).get("dropped_station", 0)
    if foreign:
        return "fail", "an off-station alarm got through", [run.ref(foreign[0])]
    if not alarms or not dropped:
        return "fail", f"{len(alarms)} delivered, {dropped} dropped", []
    return "pass", f"{dropped} off-station alarms dropped, {len(alarms)} delivered", [run.ref(alarms[0])]


def _consolidate(run: RunView):
    alarms = run.events("ALARM")
    if "consolidate" in run.truth:
        wanted = int(run.truth["consolidate"])
        merged = [e for e in alarms if e.heard.consolidation_count == wanted]
        if merged:
            return "pass", f"{wanted} duplicates merged into one alarm", [run.ref(merged[0])]
        return "fail", f"no alarm with consolidation_count {wanted}", []
    cap = run.config.alarms.rate_cap_per_min
    capped = rate_cap(run.log.events, cap, run.config.alarms.rate_window_s)
    deferred = (run.log.run.get("metrics") or {}).get("alarms", {}).get("deferred", 0)
    wanted = int(run.truth.get("alarms", 0))
    if not capped.ok:
        return "fail", capped.detail, [f"{run.name}#{i}" for i in capped.evidence]
    if not deferred:
        return "fail", "storm never hit the cap", []
    if wanted and len(alarms) != wanted:
        return "fail", f"{len(alarms)} of {wanted} alarms delivered", []
    return "pass", f"{capped.detail}; {deferred} deferred", [run.ref(alarms[-1])]


def _unknown_alarm(run: RunView):
    hits = [e for e in run.events("ALARM") if e.heard.category.id == "unknown" and e.heard.novelty == "new_type"]
    if hits:
        return "pass", f"unknown alarm delivered as new ({_alarm_key(hits[0])})", [run.ref(hits[0])]
    return "fail", "no unknown alarm delivered as new", []


CHECKS: Dict[str, Check] = {
    "1a": _lateral,
    "1b": _broad_range,
    "1c": _front_and_sides,
    "1d": _aged_curve,
    "2a": _identify,
    "2b": _one_speaker,
    "2c": _list_found("short_term_primary"),
    "2d": _list_found("short_term_secondary"),
    "2e": _decay,
    "2f": _continuity,
    "2g": _doppler,
    "4a": _name_response,
    "4b": _selective,
    "4c": _switch_and_return,
    "5a": _alarm_ids,
    "5b": _novelty,
    "alarm-1": _station_filter,
    "alarm-2": _consolidate,
    "alarm-3": _unknown_alarm,
}


def _combine(item: str, title: str, results: List[Tuple[str, Verdict, str, List[str]]]) -> ScorecardRow:
    judged = [r for r in results if r[1] != "not_applicable"]
    if not judged:
        detail = "; ".join(f"{n}: {d}" for n, _, d, _ in results) or "no scenario covers this item"
        return ScorecardRow(item=item, title=title, verdict="not_applicable", detail=detail)
    failed = [r for r in judged if r[1] == "fail"]
    shown = failed or judged
    return ScorecardRow(
        item=item,
        title=title,
        verdict="fail" if failed else "pass",
        evidence=[ref for r in shown for ref in r[3]][:6],
        detail="; ".join(f"{n}: {d}" for n, _, d, _ in shown),
    )


def evaluate_scorecard(run_dirs: Sequence[str]) -> Scorecard:
    """Judge every item over the given run directories."""
    runs = [RunView.load(d) for d in run_dirs]
    rows = []
    for item, title in ITEMS:
        if item in OUT_OF_SCOPE:
            rows.append(ScorecardRow(item=item, title=title, verdict="not_applicable", detail="outside this ear's scope"))
            continue
        results = []
        for run in runs:
            if item not in run.truth.get("covers", []):
                continue
            try:
                verdict, detail, refs = CHECKS[item](run)
            except (EarSimError, KeyError, statistics.StatisticsError) as e:
                verdict, detail, refs = "fail", f"check could not run: {e}", []
            results.append((run.name, verdict, detail, refs))
        rows.append(_combine(item, title, results))
    logger.info("[Scorecard] %d runs, %d failing items", len(runs), sum(r.verdict == "fail" for r in rows))
    return Scorecard(rows=rows, runs=[r.name for r in runs])


def find_runs(root: str) -> List[str]:
    """Run directories (those holding run.json) under ``root``, or ``root`` itself."""
    base = Path(root)
    if (base / "run.json").exists():
        return [str(base)]
    return sorted(str(p.parent) for p in base.glob("*/run.json"))


def to_markdown(card: Scorecard) -> str:
    lines = [
        "| Item | Capability | Verdict | Evidence | Detail |",
        "|---|---|---|---|---|",
    ]
    for r in card.rows:
        detail = r.detail.replace("|", "/")
        lines.append(f"| {r.item} | {r.title} | {r.verdict} | {', '.join(r.evidence)} | {detail} |")
    return "\n".join(lines) + "\n"
