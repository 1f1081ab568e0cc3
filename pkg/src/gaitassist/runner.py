"""Offline control loop: replay a trial, detect gait, command torque.

The loop advances a simulated clock tick by tick at the control rate, so a
full trial processes as fast as the host allows while producing exactly the
samples a real-time run would. Either detection framework can drive the
controller: insole force sensors or hip angular velocities.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .controller import AssistState, ControllerConfig, TorqueCommand, controller_tick
from .errors import InvalidSpecError
from .gait import Foot, GaitEvent, Phase
from .gait_fsr import FsrDetectorConfig, LegPhaseState, both_feet_phases, fsr_step
from .gait_vel import VelDetectorConfig, VelDetectorState, vel_phases, vel_step
from .metrics import DetectionScore, phases_from_events, score_detection
from .signals import TimeSeries, decimate_to, emg_envelope
from .simgait import STATE_BY_CODE, TrialLog, replay


class DetectionMode(Enum):
    FOOT_SENSORS = "foot-sensors"
    ACTUATORS_VELOCITY = "actuators-velocity"


_PHASE_CODE = {Phase.STANCE: 0, Phase.SWING: 1}
_STATE_CODE = {state: code for code, state in enumerate(STATE_BY_CODE)}


@dataclass(eq=False)
class RunResult:
    """Everything one offline run produces, aligned on the control grid."""

    mode: DetectionMode
    t: np.ndarray
    tau_left: np.ndarray
    tau_right: np.ndarray
    tau_exo: np.ndarray
    emg_norm: TimeSeries
    events: list[GaitEvent]
    state_codes: np.ndarray  # causal two-leg state per tick
    causal_phases: dict[Foot, np.ndarray]
    event_phases: dict[Foot, np.ndarray]  # reconstructed from emitted events
    score: DetectionScore | None

    @property
    def commands(self) -> list[TorqueCommand]:
        return [
            TorqueCommand(float(t), float(l), float(r))
            for t, l, r in zip(self.t, self.tau_left, self.tau_right)
        ]


def control_envelope(log: TrialLog) -> TimeSeries:
    """Causal EMG envelope decimated to the control rate."""
    env = emg_envelope(log.emg)
    return decimate_to(env, log.rates.control_hz)


def run_trial(
    log: TrialLog,
    mode: DetectionMode,
    controller_cfg: ControllerConfig | None = None,
    fsr_cfg: FsrDetectorConfig | None = None,
    vel_cfg: VelDetectorConfig | None = None,
) -> RunResult:
    """Run detection plus torque control over a whole trial.

    Args:
        log: input trial; needs insole channels in FOOT_SENSORS mode and
            angular velocity channels in ACTUATORS_VELOCITY mode.
        mode: which detection framework drives the gait state.
        controller_cfg, fsr_cfg, vel_cfg: overrides; defaults otherwise.

    Returns:
        RunResult with torque, events, causal labels, labels reconstructed
        from the (possibly backdated) event stream, and, when the trial has
        ground truth, a DetectionScore of the event-reconstructed labels.
    """
    controller_cfg = controller_cfg or ControllerConfig()
    fsr_cfg = fsr_cfg or FsrDetectorConfig()
    vel_cfg = vel_cfg or VelDetectorConfig()
    if controller_cfg.rate_hz != log.rates.control_hz:
        raise InvalidSpecError(
            f"controller rate {controller_cfg.rate_hz} Hz does not match trial "
            f"control rate {log.rates.control_hz} Hz"
        )

    env = control_envelope(log)
    if len(env) < log.n_ticks:
        raise InvalidSpecError("EMG channel shorter than the trial")
    env_samples = env.samples

    n = log.n_ticks
    tau_left = np.zeros(n)
    tau_right = np.zeros(n)
    tau_exo = np.zeros(n)
    state_codes = np.zeros(n, dtype=np.int8)
    causal = {foot: np.zeros(n, dtype=np.int8) for foot in Foot}
    events: list[GaitEvent] = []

    fsr_left = LegPhaseState(Foot.LEFT)
    fsr_right = LegPhaseState(Foot.RIGHT)
    vel_state = VelDetectorState.initial()
    assist = AssistState.initial()
    initial_phase = {
        DetectionMode.FOOT_SENSORS: Phase.SWING,
        DetectionMode.ACTUATORS_VELOCITY: Phase.STANCE,
    }[mode]

    for tick in replay(log):
        if mode is DetectionMode.FOOT_SENSORS:
            fsr_left, ev_l = fsr_step(fsr_left, fsr_cfg, tick.insole_left)
            fsr_right, ev_r = fsr_step(fsr_right, fsr_cfg, tick.insole_right)
            events.extend(ev for ev in (ev_l, ev_r) if ev is not None)
            gait = both_feet_phases(fsr_left, fsr_right)
            phases = (fsr_left.phase, fsr_right.phase)
        else:
            vel_state, ticked = vel_step(
                vel_state, vel_cfg, tick.t, tick.omega_left, tick.omega_right
            )
            events.extend(ticked)
            gait = vel_phases(vel_state)
            phases = (vel_state.left.phase, vel_state.right.phase)

        k = tick.index
        state_codes[k] = _STATE_CODE[gait]
        causal[Foot.LEFT][k] = _PHASE_CODE[phases[0]]
        causal[Foot.RIGHT][k] = _PHASE_CODE[phases[1]]

        assist, command = controller_tick(
            tick.t, gait, float(env_samples[k]), assist, controller_cfg
        )
        tau_left[k] = command.tau_left_nm
        tau_right[k] = command.tau_right_nm
        tau_exo[k] = assist.tau_exo_nm

    event_phases = phases_from_events(
        events,
        n,
        log.rates.control_hz,
        initial={foot: initial_phase for foot in Foot},
    )

    score = None
    if log.truth is not None:
        score = score_detection(
            events,
            event_phases,
            log.truth.events,
            log.truth.phases,
            rate_hz=log.rates.control_hz,
        )

    return RunResult(
        mode=mode,
        t=log.times(),
        tau_left=tau_left,
        tau_right=tau_right,
        tau_exo=tau_exo,
        emg_norm=TimeSeries(env_samples[:n].copy(), log.rates.control_hz),
        events=events,
        state_codes=state_codes,
        causal_phases=causal,
        event_phases=event_phases,
        score=score,
    )
