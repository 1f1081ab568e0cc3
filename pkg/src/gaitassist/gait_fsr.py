"""Gait phase detection from force-sensitive-resistor insoles.

Each insole carries eight sensors: indices 0-3 under the forefoot, 4-7 under
the heel. A leg enters stance when total contact force rises above the
contact threshold (heel strike) and enters swing when both sensor clusters
drop below the release threshold (toe off). The two thresholds form a
hysteresis band and a minimum-phase debounce rejects chatter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidSpecError
from .gait import EventKind, Foot, GaitEvent, GaitState, Phase, gait_state_from_phases

FRONT_SENSORS = slice(0, 4)
BACK_SENSORS = slice(4, 8)


@dataclass(frozen=True)
class InsoleFrame:
    """One insole sample: eight non-negative forces in newtons."""

    t: float
    foot: Foot
    forces_n: tuple[float, ...]

    def __post_init__(self) -> None:
        forces = tuple(float(f) for f in self.forces_n)
        if len(forces) != 8:
            raise InvalidSpecError(f"insole frame needs 8 forces, got {len(forces)}")
        if any(f < 0 or not math.isfinite(f) for f in forces):
            raise InvalidSpecError("insole forces must be finite and non-negative")
        object.__setattr__(self, "forces_n", forces)


def cluster_sums(frame: InsoleFrame) -> tuple[float, float]:
    """(front, back) cluster force sums in newtons."""
    forces = frame.forces_n
    return (float(np.sum(forces[FRONT_SENSORS])), float(np.sum(forces[BACK_SENSORS])))


@dataclass(frozen=True)
class FsrDetectorConfig:
    """Thresholds and debounce for the insole detector.

    contact_threshold_n: total force above which a swinging foot is in contact.
    release_threshold_n: per-cluster force below which a stance foot has left
        the ground; must sit below the contact threshold (hysteresis).
    min_phase_s: shortest accepted phase duration (debounce), at least two
        control periods.
    """

    contact_threshold_n: float = 20.0
    release_threshold_n: float = 10.0
    min_phase_s: float = 0.15

    def __post_init__(self) -> None:
        if not self.contact_threshold_n > 0:
            raise InvalidSpecError("contact_threshold_n must be positive")
        if not 0 < self.release_threshold_n < self.contact_threshold_n:
            raise InvalidSpecError(
                "release_threshold_n must be positive and below contact_threshold_n"
            )
        if not self.min_phase_s > 0:
            raise InvalidSpecError("min_phase_s must be positive")


@dataclass(frozen=True)
class LegPhaseState:
    """Per-leg detector state, stepped functionally one frame at a time."""

    foot: Foot
    phase: Phase = Phase.SWING
    since: float = -math.inf
    last_event: GaitEvent | None = None
    last_t: float = -math.inf

    @property
    def last_event_t(self) -> float:
        return self.last_event.t if self.last_event is not None else -math.inf


def fsr_step(
    state: LegPhaseState, cfg: FsrDetectorConfig, frame: InsoleFrame
) -> tuple[LegPhaseState, GaitEvent | None]:
    """Advance one leg's phase machine by one insole frame.

    Returns the new state and the emitted event, if any. Frames must arrive
    in non-decreasing time order for the leg.
    """
    if frame.foot is not state.foot:
        raise InvalidSpecError(
            f"frame for {frame.foot.value} fed to {state.foot.value} detector"
        )
    if frame.t < state.last_t:
        raise ValueError(
            f"out-of-order insole frame: t={frame.t} after t={state.last_t}"
        )
    front, back = cluster_sums(frame)
    total = front + back

    event: GaitEvent | None = None
    debounced = frame.t - state.last_event_t < cfg.min_phase_s
    if not debounced:
        if state.phase is Phase.SWING and total > cfg.contact_threshold_n:
            event = GaitEvent(frame.t, state.foot, EventKind.HEEL_STRIKE)
        elif (
            state.phase is Phase.STANCE
            and front < cfg.release_threshold_n
            and back < cfg.release_threshold_n
        ):
            event = GaitEvent(frame.t, state.foot, EventKind.TOE_OFF)

    if event is None:
        return replace(state, last_t=frame.t), None
    return (
        LegPhaseState(
            foot=state.foot,
            phase=state.phase.other(),
            since=frame.t,
            last_event=event,
            last_t=frame.t,
        ),
        event,
    )


def both_feet_phases(left: LegPhaseState, right: LegPhaseState) -> GaitState:
    """Combine the two per-leg states into the two-leg gait state."""
    return gait_state_from_phases(left.phase, right.phase)
