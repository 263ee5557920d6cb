"""The money game: composing prices and change from euro denominations.

Four exercise families, named from the learner's side of the counter:
M   customer buying one object (compose the price)
MM  customer buying two objects (compose the sum)
R   merchant handing back change for one object
RM  merchant handing back change for two objects

Each family has a difficulty ladder (six levels for M, four for the
others). Levels shape the digits of the amounts: low levels use 1, 2 and
5, which map straight onto coins, higher levels use the awkward digits
and, late in the ladder, cents. Two-object exercises can force a carry by
making the unit digits of the two prices sum past nine. All amounts are
integer cents, composable exactly from the denomination set, and the
learner gets three trials per exercise.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from importlib import resources

from .config import load_space_config, read_json
from .predef import PredefPolicy, PredefSequence, PredefStep
from .space import Activity, ActivitySpace, SpaceError
from .zpdes import ZpdRules

log = logging.getLogger(__name__)

# Cent values of euro coins and notes up to 50 euros. Token money mirrors
# them one to one, so every amount composable in one shape is composable
# in the other.
EURO_CENTS = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000)
TOKEN_CENTS = EURO_CENTS

EXERCISE_TYPES = ("M", "MM", "R", "RM")
TYPE_FACTOR = {"M": 1, "MM": 2, "R": 3, "RM": 4}
LADDER_TOP = {"M": 6, "MM": 4, "R": 4, "RM": 4}
TRIALS_PER_EXERCISE = 3

# First ladder level at which an amount may carry cents; below it prices
# stay integer euros no matter how they are displayed.
CENTS_FROM_LEVEL = {"M": 4, "MM": 3, "R": 3, "RM": 3}

EASY_DIGITS = (1, 2, 5)
HARD_DIGITS = (3, 4, 6, 7, 8, 9)
EASY_CENTS = (10, 20, 50)
MID_CENTS = (30, 40, 60, 70, 80, 90)
HARD_CENTS = tuple(c for c in range(11, 100) if c % 10 in HARD_DIGITS)

# Per level: euro tens-digit pool, euro unit-digit pool, cents pool. For
# merchant families the pools describe the change to give back.
_LEVELS = {
    "M": {
        1: ((0,), EASY_DIGITS, ()),
        2: (EASY_DIGITS, (0,) + EASY_DIGITS, ()),
        3: (HARD_DIGITS, HARD_DIGITS, ()),
        4: (HARD_DIGITS, HARD_DIGITS, EASY_CENTS),
        5: (HARD_DIGITS, HARD_DIGITS, MID_CENTS),
        6: (HARD_DIGITS, HARD_DIGITS, HARD_CENTS),
    },
    "MM": {
        1: ((0,), EASY_DIGITS, ()),
        2: ((1, 2), (0,) + EASY_DIGITS, ()),
        3: ((1, 2, 3), HARD_DIGITS, EASY_CENTS),
        4: ((1, 2, 3, 4), HARD_DIGITS, MID_CENTS),
    },
    "R": {
        1: ((0,), EASY_DIGITS, ()),
        2: (EASY_DIGITS, (0,) + EASY_DIGITS, ()),
        3: (EASY_DIGITS, HARD_DIGITS, EASY_CENTS),
        4: ((3, 4), HARD_DIGITS, MID_CENTS),
    },
    "RM": {
        1: ((0,), EASY_DIGITS, ()),
        2: (EASY_DIGITS, (0,) + EASY_DIGITS, ()),
        3: (EASY_DIGITS, HARD_DIGITS, EASY_CENTS),
        4: ((3, 4), HARD_DIGITS, MID_CENTS),
    },
}

# Amounts a merchant is paid with: single note, or two fifties.
_PAID_OPTIONS = (500, 1000, 2000, 5000, 10000)


class ContentError(Exception):
    pass


def ladder_cells() -> list[tuple[str, int]]:
    """All (family, level) cells of the domain, in difficulty band order."""
    return [(t, lvl) for t in EXERCISE_TYPES
            for lvl in range(1, LADDER_TOP[t] + 1)]


@dataclass(frozen=True)
class ActivityView:
    """The domain-relevant selections of one activity."""
    exercise_type: str
    level: int
    carried: str            # "with" or "without"; single-object: "without"
    presentation: str
    shape: str

    @property
    def cell(self) -> str:
        return f"{self.exercise_type}{self.level}"


def activity_view(activity: Activity) -> ActivityView:
    etype = activity.value_of("types", "exercise_type")
    if etype is None:
        raise ContentError("activity selects no exercise type")
    level = activity.value_of(f"levels_{etype.lower()}", "level")
    if level is None:
        raise ContentError(f"activity selects no level for {etype}")
    carried = activity.value_of("carry", "carried_numbers") or "without"
    presentation = activity.value_of("format", "price_presentation")
    shape = activity.value_of("format", "money_shape")
    if presentation is None or shape is None:
        raise ContentError("activity selects no format")
    return ActivityView(etype, int(level), carried, presentation, shape)


def format_price(cents: int, presentation: str) -> str:
    euros, c = divmod(cents, 100)
    if c == 0:
        return f"{euros}€"
    if presentation == "comma_decimal":
        return f"{euros},{c:02d}€"
    return f"{euros}€{c:02d}"


@dataclass(frozen=True)
class ObjectInstance:
    id: str
    name: str
    price_cents: int


@dataclass(frozen=True)
class CatalogItem:
    id: str
    name: str
    min_cents: int
    max_cents: int


class Catalog:
    def __init__(self, items: tuple[CatalogItem, ...]):
        if not items:
            raise ContentError("empty catalog")
        self.items = items

    def covering(self, price: int, exclude: set[str] | None = None
                 ) -> list[CatalogItem]:
        out = [i for i in self.items if i.min_cents <= price <= i.max_cents]
        if exclude:
            out = [i for i in out if i.id not in exclude]
        return out

    def pick(self, price: int, rng, exclude: set[str] | None = None
             ) -> ObjectInstance:
        pool = self.covering(price, exclude)
        if not pool:
            pool = self.covering(price)
            if not pool:
                raise ContentError(f"no catalog item covers {price} cents")
            # Same item under another skin; tolerable, but worth noticing.
            log.warning("catalog too thin at %d cents, reusing an item",
                        price)
            item = pool[int(rng.integers(len(pool)))]
            return ObjectInstance(item.id, item.name + " (another one)",
                                  price)
        item = pool[int(rng.integers(len(pool)))]
        return ObjectInstance(item.id, item.name, price)


@dataclass(frozen=True)
class ExerciseContent:
    """A fully concrete exercise, ready to present.

    target_cents is the amount the learner must compose from the wallet:
    the price total for customer exercises, the change for merchant ones.
    """
    view: ActivityView
    role: str
    objects: tuple[ObjectInstance, ...]
    paid_cents: int | None
    target_cents: int
    wallet: tuple[int, ...]
    trials: int = TRIALS_PER_EXERCISE

    def price_total(self) -> int:
        return sum(o.price_cents for o in self.objects)


def _pick_digit(pool, rng) -> int:
    return int(pool[int(rng.integers(len(pool)))])


def _cents_for(view: ActivityView, pool, rng) -> int:
    if not pool:
        return 0
    if view.presentation == "integer":
        return 0
    if view.level < CENTS_FROM_LEVEL[view.exercise_type]:
        return 0
    return _pick_digit(pool, rng)


def _unit_pair(units, carried: str, rng) -> tuple[int, int]:
    """Two unit digits whose sum does or does not produce a carry.

    Forcing a carry widens the pool to every nonzero digit, otherwise low
    levels could not reach a ten at all.
    """
    if carried == "with":
        u1 = int(rng.integers(1, 10))
        u2 = int(rng.integers(max(1, 10 - u1), 10))
        return u1, u2
    valid = [u for u in units if any(u + v <= 9 for v in units)]
    if not valid:
        raise ContentError(f"unit pool {units} cannot avoid a carry")
    u1 = _pick_digit(valid, rng)
    partners = [v for v in units if u1 + v <= 9]
    return u1, _pick_digit(partners, rng)


def _amount(tens, units, cents, view, rng) -> int:
    t = _pick_digit(tens, rng)
    u = _pick_digit(units, rng)
    if t == 0 and u == 0:
        u = _pick_digit([x for x in units if x > 0], rng)
    return (t * 10 + u) * 100 + _cents_for(view, cents, rng)


def _paid_for(change: int, floor: int) -> int:
    for option in _PAID_OPTIONS:
        if option >= change + floor:
            return option
    raise ContentError(f"change of {change} cents exceeds every payment")


def _splittable(total: int, carried: str) -> bool:
    """Whether two one-euro-or-more prices can sum to ``total``.

    A forced carry needs unit digits summing to ten plus the total's unit
    digit, which tops out at eighteen, so a unit digit of nine or a total
    below eleven euros cannot carry. Without a carry only totals of
    exactly ten euros (or under two) fail: both prices would need a zero
    unit digit and there is only one ten to hand out.
    """
    euros = total // 100
    tens_t, u_t = divmod(euros, 10)
    if carried == "with":
        return tens_t >= 1 and u_t <= 8
    if euros < 2:
        return False
    return not (tens_t == 1 and u_t == 0)


def _split_total(total: int, carried: str, rng) -> tuple[int, int]:
    """Two prices summing to ``total`` respecting the carry flag.

    Splitting works on the euro digits; any cents ride on the first
    price. Callers check ``_splittable`` first.
    """
    euros, cents = divmod(total, 100)
    tens_t, u_t = divmod(euros, 10)
    pairs: list[tuple[int, int]] = []
    if carried == "with":
        if tens_t < 1:
            raise ContentError(f"{total} cents is too small to force a carry")
        for u1 in range(u_t + 1, 10):
            for t1 in range(0, tens_t):
                pairs.append((t1 * 10 + u1,
                              (tens_t - 1 - t1) * 10 + (10 + u_t - u1)))
    else:
        for u1 in range(0, u_t + 1):
            for t1 in range(0, tens_t + 1):
                p1 = t1 * 10 + u1
                p2 = (tens_t - t1) * 10 + (u_t - u1)
                if p1 >= 1 and p2 >= 1:
                    pairs.append((p1, p2))
    if not pairs:
        raise ContentError(f"cannot split {total} cents into two prices")
    e1, e2 = pairs[int(rng.integers(len(pairs)))]
    return e1 * 100 + cents, e2 * 100


def generate_content(activity: Activity, rng,
                     catalog: "Catalog | None" = None) -> ExerciseContent:
    """Instantiate one activity into a concrete exercise.

    Every generated amount is exactly composable from the wallet (the
    denomination set contains a one-cent coin, so this holds by
    construction, and the greedy solution is checked anyway).
    """
    view = activity_view(activity)
    cat = catalog if catalog is not None else default_catalog()
    try:
        tens, units, cents = _LEVELS[view.exercise_type][view.level]
    except KeyError:
        raise ContentError(
            f"no content scheme for {view.exercise_type} level {view.level}")
    wallet = TOKEN_CENTS if view.shape == "token" else EURO_CENTS

    if view.exercise_type == "M":
        price = _amount(tens, units, cents, view, rng)
        obj = cat.pick(price, rng)
        content = ExerciseContent(view, "customer", (obj,), None, price,
                                  wallet)
    elif view.exercise_type == "MM":
        u1, u2 = _unit_pair(units, view.carried, rng)
        p1 = (_pick_digit(tens, rng) * 10 + u1) * 100 \
            + _cents_for(view, cents, rng)
        p2 = (_pick_digit(tens, rng) * 10 + u2) * 100
        o1 = cat.pick(p1, rng)
        o2 = cat.pick(p2, rng, exclude={o1.id})
        content = ExerciseContent(view, "customer", (o1, o2), None, p1 + p2,
                                  wallet)
    elif view.exercise_type == "R":
        change = _amount(tens, units, cents, view, rng)
        paid = _paid_for(change, floor=100)
        obj = cat.pick(paid - change, rng)
        content = ExerciseContent(view, "merchant", (obj,), paid, change,
                                  wallet)
    elif view.exercise_type == "RM":
        floor = 1100 if view.carried == "with" else 200
        # Some changes leave a total whose digits cannot honor the carry
        # flag; redraw a bounded number of times before giving up.
        for _ in range(64):
            change = _amount(tens, units, cents, view, rng)
            paid = _paid_for(change, floor=floor)
            if _splittable(paid - change, view.carried):
                break
        else:
            raise ContentError(
                f"no splittable change for RM level {view.level}")
        p1, p2 = _split_total(paid - change, view.carried, rng)
        o1 = cat.pick(p1, rng)
        o2 = cat.pick(p2, rng, exclude={o1.id})
        content = ExerciseContent(view, "merchant", (o1, o2), paid, change,
                                  wallet)
    else:
        raise ContentError(f"unknown exercise family {view.exercise_type!r}")

    solution = greedy_solution(content.target_cents, content.wallet)
    if sum(solution) != content.target_cents:
        raise ContentError(
            f"target {content.target_cents} not composable from wallet")
    return content


def greedy_solution(target: int, wallet: tuple[int, ...]) -> tuple[int, ...]:
    """Largest-denomination-first decomposition of an amount."""
    if target < 0:
        raise ContentError("negative amount")
    out: list[int] = []
    remaining = target
    for denom in sorted(wallet, reverse=True):
        count, remaining = divmod(remaining, denom)
        out.extend([denom] * count)
    if remaining:
        raise ContentError(f"{target} not composable from {wallet}")
    return tuple(out)


@dataclass(frozen=True)
class TrialResult:
    correct: bool
    trials_used: int
    trials_left: int
    failed: bool
    solution: tuple[int, ...] | None = None

    @property
    def exercise_over(self) -> bool:
        return self.correct or self.failed


def verify_answer(content: ExerciseContent, submitted, trials_used: int
                  ) -> TrialResult:
    """Judge one trial's submission of denominations.

    The submission must draw on the wallet; anything else is a caller
    bug, not a wrong answer. After the third failed trial the exercise is
    over and the worked solution comes back for display.
    """
    if trials_used < 0 or trials_used >= content.trials:
        raise ContentError(f"trial {trials_used} out of range")
    allowed = set(content.wallet)
    for denom in submitted:
        if denom not in allowed:
            raise ContentError(f"denomination {denom} is not in the wallet")
    used = trials_used + 1
    if sum(submitted) == content.target_cents:
        return TrialResult(True, used, content.trials - used, False)
    failed = used >= content.trials
    return TrialResult(
        False, used, content.trials - used, failed,
        solution=greedy_solution(content.target_cents, content.wallet)
        if failed else None)


@dataclass(frozen=True)
class ObjectChoice:
    """Two object sets with the same prices, display order randomized.

    origin is the display position of the set the content was generated
    with, so position statistics stay auditable.
    """
    options: tuple[tuple[ObjectInstance, ...], tuple[ObjectInstance, ...]]
    origin: int


def offer_choice(content: ExerciseContent, rng,
                 catalog: "Catalog | None" = None) -> ObjectChoice:
    cat = catalog if catalog is not None else default_catalog()
    alternative = tuple(
        cat.pick(obj.price_cents, rng,
                 exclude={o.id for o in content.objects} | {obj.id})
        for obj in content.objects)
    if rng.random() < 0.5:
        return ObjectChoice((content.objects, alternative), 0)
    return ObjectChoice((alternative, content.objects), 1)


def apply_choice(content: ExerciseContent, choice: ObjectChoice,
                 selected: int) -> ExerciseContent:
    if selected not in (0, 1):
        raise ContentError(f"choice index {selected} out of range")
    picked = choice.options[selected]
    if tuple(o.price_cents for o in picked) != tuple(
            o.price_cents for o in content.objects):
        raise ContentError("choice options drifted from the content prices")
    return replace(content, objects=picked)


_NOTATION = {"-": "integer", "x€x": "euro_cents",
             "x,x€": "comma_decimal"}
_MONEY = {"Real": "real", "Token": "token"}


def predef_step_selector(step: PredefStep, group, param) -> str:
    """Map one ladder step onto space selections."""
    if param.id == "exercise_type":
        return step.exercise_type
    if param.id == "level":
        return str(step.difficulty)
    if param.id == "carried_numbers":
        return "with" if step.remainder in ("Int", "Dec") else "without"
    if param.id == "price_presentation":
        try:
            return _NOTATION[step.cents_notation]
        except KeyError:
            raise SpaceError(
                f"unknown cents notation {step.cents_notation!r}")
    if param.id == "money_shape":
        try:
            return _MONEY[step.money_type]
        except KeyError:
            raise SpaceError(f"unknown money type {step.money_type!r}")
    raise SpaceError(f"predefined step cannot fill parameter {param.id!r}")


def _data_text(name: str) -> str:
    return resources.files("kidlearn").joinpath(f"data/{name}").read_text(
        encoding="utf-8")


def load_kidlearn_space(path: str | None = None
                        ) -> tuple[ActivitySpace, ZpdRules]:
    """The packaged money-game space and rules, or a replacement file."""
    if path is None:
        data = json.loads(_data_text("kidlearn_space.json"))
    else:
        data = read_json(path)
    return load_space_config(data)


def load_predef_sequence(path: str | None = None) -> PredefSequence:
    if path is None:
        data = json.loads(_data_text("predef_sequence.json"))
    else:
        data = read_json(path)
    steps = tuple(
        PredefStep(label=s["label"], exercise_type=s["exercise_type"],
                   difficulty=int(s["difficulty"]),
                   cents_notation=s.get("cents_notation", "-"),
                   remainder=s.get("remainder", "-"),
                   money_type=s.get("money_type", "Real"))
        for s in data["steps"])
    return PredefSequence(steps)


def default_catalog() -> Catalog:
    global _CATALOG
    if _CATALOG is None:
        data = json.loads(_data_text("catalog.json"))
        _CATALOG = Catalog(tuple(
            CatalogItem(i["id"], i["name"], int(i["min_cents"]),
                        int(i["max_cents"]))
            for i in data["items"]))
    return _CATALOG


_CATALOG = None


def build_predef_policy(space: ActivitySpace,
                        sequence: PredefSequence | None = None
                        ) -> PredefPolicy:
    seq = sequence if sequence is not None else load_predef_sequence()
    policy = PredefPolicy(seq, space, predef_step_selector)
    # Every step must assemble into a legal activity before a session
    # starts, not on step 19 of a live one.
    for step in seq.steps:
        PredefPolicy(PredefSequence((step,)), space,
                     predef_step_selector).propose()
    return policy
