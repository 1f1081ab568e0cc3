"""Gait phase detection from hip angular velocities.

A leg's stance begins when the opposite hip's angular velocity crosses zero
(either direction, guarded by a hysteresis band), and its swing begins when
the leg's own angular velocity tops out: once the signal has exceeded a
minimum peak height and then declined for a fixed number of consecutive
samples, a toe-off is emitted backdated to the sample where the maximum
occurred. The confirmation lag is therefore exactly `peak_confirm_samples`
control periods.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InvalidSpecError
from .gait import EventKind, Foot, GaitEvent, GaitState, Phase, gait_state_from_phases


@dataclass(frozen=True)
class VelDetectorConfig:
    zero_hysteresis_rad_s: float = 0.05
    peak_min_rad_s: float = 0.5
    peak_confirm_samples: int = 3
    min_event_gap_s: float = 0.3

    def __post_init__(self) -> None:
        if not self.zero_hysteresis_rad_s > 0:
            raise InvalidSpecError("zero_hysteresis_rad_s must be positive")
        if not self.peak_min_rad_s > 0:
            raise InvalidSpecError("peak_min_rad_s must be positive")
        if self.peak_confirm_samples < 2:
            raise InvalidSpecError("peak_confirm_samples must be at least 2")
        if self.min_event_gap_s < 0:
            raise InvalidSpecError("min_event_gap_s must be non-negative")


@dataclass(frozen=True)
class _LegState:
    """One leg's phase plus its peak tracker and the contralateral crossing tracker."""

    foot: Foot
    phase: Phase = Phase.STANCE
    since: float = -math.inf
    last_event_t: float = -math.inf
    # running maximum of the leg's own angular velocity since the last event
    peak_max: float = -math.inf
    peak_max_t: float = math.nan
    decline_count: int = 0
    # hysteresis tracker for the contralateral signal: +1 above the band,
    # -1 below it, 0 before the signal first leaves the band
    cross_region: int = 0
    cross_pending_t: float = math.nan


@dataclass(frozen=True)
class VelDetectorState:
    """Both legs' detector state; step with :func:`vel_step`.

    Both legs start in stance, matching a standing posture before walking.
    """

    left: _LegState
    right: _LegState

    @classmethod
    def initial(cls) -> VelDetectorState:
        return cls(left=_LegState(Foot.LEFT), right=_LegState(Foot.RIGHT))


def _step_leg(
    leg: _LegState, cfg: VelDetectorConfig, t: float, own: float, contra: float
) -> tuple[_LegState, GaitEvent | None]:
    h = cfg.zero_hysteresis_rad_s
    event: GaitEvent | None = None

    # Heel strike: contralateral velocity passes through zero, confirmed when
    # it emerges on the far side of the hysteresis band. The event time is
    # the first sample past zero, not the confirmation sample.
    region = leg.cross_region
    pending = leg.cross_pending_t
    crossed = False
    if region == +1:
        if math.isnan(pending) and contra <= 0.0:
            pending = t
        elif not math.isnan(pending) and contra > 0.0:
            pending = math.nan
        if contra < -h:
            crossed = True
            region = -1
    elif region == -1:
        if math.isnan(pending) and contra >= 0.0:
            pending = t
        elif not math.isnan(pending) and contra < 0.0:
            pending = math.nan
        if contra > h:
            crossed = True
            region = +1
    else:
        if contra > h:
            region = +1
        elif contra < -h:
            region = -1

    phase = leg.phase
    since = leg.since
    last_event_t = leg.last_event_t
    peak_max, peak_max_t, decline = leg.peak_max, leg.peak_max_t, leg.decline_count

    if crossed:
        t_event = pending if not math.isnan(pending) else t
        pending = math.nan
        if (
            phase is Phase.SWING
            and t - last_event_t >= cfg.min_event_gap_s
            and t_event > last_event_t
        ):
            event = GaitEvent(t_event, leg.foot, EventKind.HEEL_STRIKE)

    # Toe off: causal peak confirmation on the leg's own velocity.
    if event is None:
        if own > peak_max:
            peak_max, peak_max_t, decline = own, t, 0
        else:
            decline += 1
        if decline >= cfg.peak_confirm_samples and peak_max >= cfg.peak_min_rad_s:
            if (
                phase is Phase.STANCE
                and t - last_event_t >= cfg.min_event_gap_s
                and peak_max_t > last_event_t
            ):
                event = GaitEvent(peak_max_t, leg.foot, EventKind.TOE_OFF)
            else:
                # stale or suppressed peak: start the tracker over
                peak_max, peak_max_t, decline = -math.inf, math.nan, 0

    if event is not None:
        phase = phase.other()
        since = event.t
        last_event_t = t
        peak_max, peak_max_t, decline = -math.inf, math.nan, 0

    return (
        replace(
            leg,
            phase=phase,
            since=since,
            last_event_t=last_event_t,
            peak_max=peak_max,
            peak_max_t=peak_max_t,
            decline_count=decline,
            cross_region=region,
            cross_pending_t=pending,
        ),
        event,
    )


def vel_step(
    state: VelDetectorState,
    cfg: VelDetectorConfig,
    t: float,
    omega_left: float,
    omega_right: float,
) -> tuple[VelDetectorState, list[GaitEvent]]:
    """Advance both legs by one control tick.

    Args:
        state: detector state from the previous tick.
        cfg: detector thresholds.
        t: tick time in seconds.
        omega_left, omega_right: hip angular velocities in rad/s.

    Returns:
        The new state and any events emitted this tick (at most one per leg).
        Toe-off events are backdated to the sample where the peak occurred.
    """
    if not (math.isfinite(omega_left) and math.isfinite(omega_right)):
        raise ValueError(
            f"non-finite angular velocity at t={t}: ({omega_left}, {omega_right})"
        )
    new_left, ev_left = _step_leg(state.left, cfg, t, omega_left, omega_right)
    new_right, ev_right = _step_leg(state.right, cfg, t, omega_right, omega_left)
    events = [ev for ev in (ev_left, ev_right) if ev is not None]
    return VelDetectorState(left=new_left, right=new_right), events


def vel_phases(state: VelDetectorState) -> GaitState:
    """Combine the two per-leg phases into the two-leg gait state."""
    return gait_state_from_phases(state.left.phase, state.right.phase)
