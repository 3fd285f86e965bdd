"""LangGraph per-window pipeline: Render -> Segregate -> Localize -> Track -> Identify."""

import logging
from typing import Any, Dict, List, Literal, Mapping, Optional, TypedDict

import numpy as np
from langgraph.graph import END, StateGraph

from .config import EngineConfig
from .frontend import InterauralFeatures, render_window
from .ontology import OntologyRegistry, SoundTemplate
from .perception import (
    IdentificationContext,
    SegregationResult,
    StreamTracker,
    WordTarget,
    identify_all,
    localize,
    segregate_window,
)
from .scene import AuditoryScene, SoundSource

logger = logging.getLogger(__name__)


# State schema for LangGraph (mutable dict)
class WindowState(TypedDict, total=False):
    times: list
    headings: list
    frames: list
    segregation: Any
    estimates: list
    update: Any
    candidates: list
    word_targets: list
    focused_stream: Optional[str]


class PipelineDeps:
    """Long-lived collaborators the nodes close over."""

    def __init__(
        self,
        scene: AuditoryScene,
        config: EngineConfig,
        registry: OntologyRegistry,
        templates: Mapping[str, SoundTemplate],
        sources: Mapping[str, SoundSource],
        tracker: StreamTracker,
        rng: np.random.Generator,
    ):
        self.scene = scene
        self.config = config
        self.registry = registry
        self.templates = templates
        self.sources = dict(sources)
        self.tracker = tracker
        self.rng = rng


def render_node(state: Dict[str, Any], deps: PipelineDeps) -> Dict[str, Any]:
    frames = render_window(deps.scene, deps.config.ear, state["headings"], state["times"], deps.templates)
    return {**state, "frames": frames}


def segregation_node(state: Dict[str, Any], deps: PipelineDeps) -> Dict[str, Any]:
    result = segregate_window(state["frames"], deps.config.ear, deps.config.segregation, deps.config.seed)
    return {**state, "segregation": result}


def localization_node(state: Dict[str, Any], deps: PipelineDeps) -> Dict[str, Any]:
    estimates = []
    for cluster in state["segregation"].clusters:
        features = InterauralFeatures(
            t=cluster.t_last,
            itd=cluster.itd,
            ild=cluster.ild,
            summed_loudness=cluster.loudness_db,
        )
        estimates.append(
            localize(features, deps.config.ear, deps.config.localization, deps.rng, deps.config.super_ear)
        )
    return {**state, "estimates": estimates}


def tracking_node(state: Dict[str, Any], deps: PipelineDeps) -> Dict[str, Any]:
    clusters = state["segregation"].clusters if state.get("segregation") is not None else []
    update = deps.tracker.update(clusters, state.get("estimates", []), state["times"][-1], state["headings"][-1])
    return {**state, "update": update}


def identification_node(state: Dict[str, Any], deps: PipelineDeps) -> Dict[str, Any]:
    update = state["update"]
    tracks = [deps.tracker.get(sid) for sid in dict.fromkeys(update.updated)]
    ctx = IdentificationContext(
        ear=deps.config.ear,
        segregation=deps.config.segregation,
        background_db=deps.scene.background_db,
        window_start=state["times"][0],
        window_end=state["times"][-1],
        sources=deps.sources,
        word_targets=state.get("word_targets", []),
        focused_stream=state.get("focused_stream"),
        stream_levels={t.stream_id: t.loudness for t in tracks},
    )
    return {**state, "candidates": identify_all(tracks, deps.registry, ctx)}


def is_silent(frames: List[Any], threshold_db: float) -> bool:
    """True when no cell of the window rises ``threshold_db`` above the background."""
    for frame, _ in frames:
        level = 0.5 * (frame.left_energy + frame.right_energy) - frame.background_db
        if np.any(level >= threshold_db):
            return False
    return True


def build_window_graph(deps: PipelineDeps):
    """Build the per-window pipeline with its collaborators injected."""

    def render(state: Dict[str, Any]) -> Dict[str, Any]:
        return render_node(state, deps)

    def segregate(state: Dict[str, Any]) -> Dict[str, Any]:
        return segregation_node(state, deps)

    def locate(state: Dict[str, Any]) -> Dict[str, Any]:
        return localization_node(state, deps)

    def track(state: Dict[str, Any]) -> Dict[str, Any]:
        return tracking_node(state, deps)

    def identify(state: Dict[str, Any]) -> Dict[str, Any]:
        return identification_node(state, deps)

    def should_segregate(state: Dict[str, Any]) -> Literal["segregate", "silence"]:
        """Conditional routing: a window with nothing above the cell threshold skips clustering."""
        if is_silent(state["frames"], deps.config.segregation.cell_threshold_db):
            return "silence"
        return "segregate"

    def silence_node(state: Dict[str, Any]) -> Dict[str, Any]:
        labels = np.full((len(state["frames"]), deps.config.ear.channels), -1, dtype=int)
        return {**state, "segregation": SegregationResult(labels=labels), "estimates": []}

    graph = StateGraph(WindowState)

    graph.add_node("render", render)
    graph.add_node("segregate", segregate)
    graph.add_node("silence", silence_node)
    graph.add_node("localize", locate)
    graph.add_node("track", track)
    graph.add_node("identify", identify)

    graph.set_entry_point("render")
    graph.add_conditional_edges(
        "render",
        should_segregate,
        {
            "segregate": "segregate",
            "silence": "silence",
        },
    )
    graph.add_edge("segregate", "localize")
    graph.add_edge("localize", "track")
    graph.add_edge("silence", "track")
    graph.add_edge("track", "identify")
    graph.add_edge("identify", END)

    return graph.compile()


def word_targets_of(entries) -> List[WordTarget]:
    """Word patterns currently loaded on any listening list."""
    return [
        WordTarget(w=e.pattern, permanent=e.permanent)
        for e in entries
        if e.pattern_kind == "word" and e.list_kind != "ignored"
    ]
