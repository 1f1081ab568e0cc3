"""Shared gait vocabulary: feet, leg phases, gait events, and the combined two-leg state."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Foot(Enum):
    LEFT = "left"
    RIGHT = "right"

    def other(self) -> Foot:
        return Foot.RIGHT if self is Foot.LEFT else Foot.LEFT


class Phase(Enum):
    STANCE = "stance"
    SWING = "swing"

    def other(self) -> Phase:
        return Phase.SWING if self is Phase.STANCE else Phase.STANCE


class EventKind(Enum):
    HEEL_STRIKE = "heel_strike"
    TOE_OFF = "toe_off"


# Phase entered by each event kind: heel strike starts stance, toe off starts swing.
PHASE_AFTER_EVENT = {EventKind.HEEL_STRIKE: Phase.STANCE, EventKind.TOE_OFF: Phase.SWING}


@dataclass(frozen=True)
class GaitEvent:
    """One detected or ground-truth gait event.

    For a single foot, events alternate between heel strike and toe off and
    are strictly increasing in time.
    """

    t: float
    foot: Foot
    kind: EventKind


class GaitState(Enum):
    """Combined state of both legs, used to distribute assistive torque."""

    DOUBLE_STANCE = "double_stance"
    LEFT_STANCE_RIGHT_SWING = "left_stance_right_swing"
    RIGHT_STANCE_LEFT_SWING = "right_stance_left_swing"
    DOUBLE_SWING = "double_swing"


def gait_state_from_phases(left: Phase, right: Phase) -> GaitState:
    """Classify the two-leg state from per-leg phases."""
    if left is Phase.STANCE:
        if right is Phase.STANCE:
            return GaitState.DOUBLE_STANCE
        return GaitState.LEFT_STANCE_RIGHT_SWING
    if right is Phase.STANCE:
        return GaitState.RIGHT_STANCE_LEFT_SWING
    return GaitState.DOUBLE_SWING


def phases_from_gait_state(state: GaitState) -> tuple[Phase, Phase]:
    """Inverse of :func:`gait_state_from_phases`, as (left, right)."""
    return {
        GaitState.DOUBLE_STANCE: (Phase.STANCE, Phase.STANCE),
        GaitState.LEFT_STANCE_RIGHT_SWING: (Phase.STANCE, Phase.SWING),
        GaitState.RIGHT_STANCE_LEFT_SWING: (Phase.SWING, Phase.STANCE),
        GaitState.DOUBLE_SWING: (Phase.SWING, Phase.SWING),
    }[state]


def check_event_stream(events: list[GaitEvent]) -> None:
    """Raise ValueError if per-foot events do not alternate with increasing time."""
    last: dict[Foot, GaitEvent] = {}
    for ev in events:
        prev = last.get(ev.foot)
        if prev is not None:
            if ev.t <= prev.t:
                raise ValueError(
                    f"events for {ev.foot.value} not strictly increasing: "
                    f"{ev.t} after {prev.t}"
                )
            if ev.kind is prev.kind:
                raise ValueError(
                    f"duplicated {ev.kind.value} for {ev.foot.value} at t={ev.t}"
                )
        last[ev.foot] = ev
