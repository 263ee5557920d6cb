"""Hand-authored linear curriculum, the baseline the sequencer is judged
against.

The sequence is a fixed ladder of fully parameterized activities in
blocks of rising difficulty. Progression is gated by recent mastery: once
a learner has at least four attempts on the current step and three of the
last four succeeded, the sequence advances and the window resets. The
final step repeats for as long as the session runs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .space import Activity, ActivitySpace, assemble_activity

ADVANCE_WINDOW = 4
ADVANCE_NEEDED = 3


class PredefError(Exception):
    pass


@dataclass(frozen=True)
class PredefStep:
    """One ladder entry, in the domain's own vocabulary.

    cents_notation and remainder use "-" for absent, matching the source
    table. remainder distinguishes integer from decimal carrying and is
    kept verbatim in traces; for two-object exercise types it also maps
    onto the carried-numbers parameter.
    """
    label: str
    exercise_type: str
    difficulty: int
    cents_notation: str = "-"
    remainder: str = "-"
    money_type: str = "Real"


@dataclass(frozen=True)
class PredefSequence:
    steps: tuple[PredefStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def step(self, index: int) -> PredefStep:
        return self.steps[index]


@dataclass
class PredefState:
    index: int = 0
    window: deque = field(default_factory=lambda: deque(maxlen=ADVANCE_WINDOW))


def predef_next(sequence: PredefSequence, state: PredefState) -> PredefStep:
    return sequence.step(state.index)


def predef_record(sequence: PredefSequence, state: PredefState,
                  outcome: int) -> bool:
    """Store one outcome; advance and report True when the gate opens.

    The gate is evaluated on the sliding window of the last four attempts
    at the current step, so it can open on any attempt from the fourth
    on. Advancing clears the window; at the top of the ladder the index
    stays put and the final step simply restarts.
    """
    state.window.append(outcome)
    if len(state.window) == ADVANCE_WINDOW and sum(state.window) >= ADVANCE_NEEDED:
        state.index = min(state.index + 1, len(sequence) - 1)
        state.window.clear()
        return True
    return False


class PredefPolicy:
    """Drop-in counterpart of the adaptive policy: propose and record.

    Needs an activity space plus a mapper that turns a PredefStep into
    selections over that space, so the rest of the pipeline sees the same
    Activity objects regardless of who sequenced them.
    """

    def __init__(self, sequence: PredefSequence, space: ActivitySpace,
                 step_selector):
        if not sequence.steps:
            raise PredefError("empty sequence")
        self.sequence = sequence
        self.space = space
        self.step_selector = step_selector
        self.state = PredefState()
        self.t = 0

    @property
    def current_step(self) -> PredefStep:
        return predef_next(self.sequence, self.state)

    def propose(self) -> Activity:
        step = self.current_step
        return assemble_activity(
            self.space, lambda group, param: self.step_selector(step, group,
                                                                param))

    def record(self, activity: Activity, outcome: int) -> bool:
        self.t += 1
        return predef_record(self.sequence, self.state, outcome)
