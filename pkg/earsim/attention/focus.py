"""Focus stack: which stream gets word-matching privilege."""

import logging
from typing import Callable, Iterable, Optional, Tuple

from ..errors import DeadStreamError
from .state import AttentionState

logger = logging.getLogger(__name__)


def focus(state: AttentionState, stream_id: str, alive: Callable[[str], bool]) -> AttentionState:
    """Push the current focus and focus ``stream_id``. Refocusing the focused stream is a no-op."""
    if not alive(stream_id):
        raise DeadStreamError(f"stream {stream_id!r} is not alive")
    if state.focused == stream_id:
        return state
    if state.focused is not None:
        state.focus_stack.append(state.focused)
    state.focused = stream_id
    logger.info("[Focus] now on %s (stack %s)", stream_id, state.focus_stack)
    return state


def refocus_previous(state: AttentionState, alive: Callable[[str], bool]) -> Tuple[AttentionState, Optional[str]]:
    """Pop back to the most recent live stream. Returns (state, notice); notice is set on an empty stack."""
    while state.focus_stack:
        previous = state.focus_stack.pop()
        if alive(previous):
            state.focused = previous
            logger.info("[Focus] back on %s", previous)
            return state, None
    return state, "focus stack is empty"


def prune_dead(state: AttentionState, dead: Iterable[str], alive: Callable[[str], bool]) -> AttentionState:
    """Drop ended streams from the stack; a dead focus falls back to the previous live one."""
    dead = set(dead)
    if not dead:
        return state
    state.focus_stack = [s for s in state.focus_stack if s not in dead]
    if state.focused in dead:
        state.focused = None
        refocus_previous(state, alive)
    return state
