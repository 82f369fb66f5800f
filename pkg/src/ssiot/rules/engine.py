"""Rule evaluation and action dispatch.

Rules fire in file order; conditions read the triggering update's result
fields (``label``: string, ``score``: real in [0,1]); comparisons are strict
as written. Send-command actions go to the hub binding for the target item;
notifications go to the sink (a JSON-lines file and/or webhook).
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Union

from .ast import (
    Comparison,
    Condition,
    IfBlock,
    ItemUpdated,
    Rule,
    RuleSet,
    SendCommand,
    SendNotification,
    Statement,
    ThingChanged,
)

logger = logging.getLogger(__name__)


class RuleEvalError(Exception):
    pass


@dataclass(frozen=True)
class ThingChange:
    thing_id: str
    from_state: str
    to_state: str


@dataclass(frozen=True)
class ItemUpdate:
    item_id: str
    result: dict[str, Any]  # {label: str, score: float}


Event = Union[ThingChange, ItemUpdate]
Action = Union[SendCommand, SendNotification]


@dataclass
class ItemState:
    item_id: str
    last_result: Optional[dict[str, Any]] = None
    last_updated: Optional[float] = None


class ItemRegistry:
    """State backing item triggers; updates are atomic per item."""

    def __init__(self) -> None:
        self._items: dict[str, ItemState] = {}
        self._lock = threading.Lock()

    def update(self, item_id: str, result: dict[str, Any], now: float) -> ItemState:
        with self._lock:
            state = self._items.setdefault(item_id, ItemState(item_id=item_id))
            state.last_result = result
            state.last_updated = now
            return state

    def get(self, item_id: str) -> Optional[ItemState]:
        with self._lock:
            return self._items.get(item_id)


def _trigger_matches(rule: Rule, event: Event) -> bool:
    trigger = rule.trigger
    if isinstance(trigger, ThingChanged) and isinstance(event, ThingChange):
        return (
            trigger.thing_id == event.thing_id
            and trigger.from_state == event.from_state
            and trigger.to_state == event.to_state
        )
    if isinstance(trigger, ItemUpdated) and isinstance(event, ItemUpdate):
        return trigger.item_id == event.item_id
    return False


def _eval_atom(atom: Comparison, env: dict[str, Any]) -> bool:
    if atom.field not in env:
        raise RuleEvalError(f"condition references unknown field {atom.field!r}")
    actual = env[atom.field]
    if atom.op == "==":
        return actual == atom.value
    if not isinstance(actual, (int, float)):
        raise RuleEvalError(f"field {atom.field!r} is not numeric")
    threshold = float(atom.value)  # strict comparisons, no coercion games
    if atom.op == ">":
        return actual > threshold
    if atom.op == ">=":
        return actual >= threshold
    if atom.op == "<":
        return actual < threshold
    if atom.op == "<=":
        return actual <= threshold
    raise AssertionError(f"unknown operator {atom.op}")


def _eval_condition(condition: Condition, env: dict[str, Any]) -> bool:
    return all(_eval_atom(atom, env) for atom in condition.atoms)


def _run_body(body: tuple[Statement, ...], env: dict[str, Any], actions: list[Action]) -> None:
    for stmt in body:
        if isinstance(stmt, (SendCommand, SendNotification)):
            actions.append(stmt)
        elif isinstance(stmt, IfBlock):
            if _eval_condition(stmt.condition, env):
                _run_body(stmt.body, env, actions)


def evaluate(event: Event, ruleset: RuleSet) -> list[Action]:
    """All matching rules fire in file order; returns their actions in order."""
    env: dict[str, Any] = dict(event.result) if isinstance(event, ItemUpdate) else {}
    actions: list[Action] = []
    for rule in ruleset.rules:
        if _trigger_matches(rule, event):
            _run_body(rule.body, env, actions)
    return actions


class NotificationSink:
    """Collects notifications; optionally mirrors them to a JSON-lines file
    and a webhook callable."""

    def __init__(
        self,
        path: Optional[str | Path] = None,
        webhook: Optional[Callable[[dict[str, Any]], None]] = None,
    ) -> None:
        self.path = Path(path) if path else None
        self.webhook = webhook
        self.notifications: list[dict[str, Any]] = []

    def notify(self, text: str, now: float) -> None:
        entry = {"t_ms": now, "text": text}
        self.notifications.append(entry)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        if self.webhook is not None:
            self.webhook(entry)

    def __len__(self) -> int:
        return len(self.notifications)


# item_id, command, now -> enqueue work at the hub for the bound app
CommandHandler = Callable[[str, str, float], None]


@dataclass
class RulesRuntime:
    """Wires a parsed RuleSet to the hub: thing changes and item updates come
    in, commands and notifications go out."""

    ruleset: RuleSet
    sink: NotificationSink
    command_handler: Optional[CommandHandler] = None
    items: ItemRegistry = field(default_factory=ItemRegistry)
    dispatch_errors: int = 0

    def on_thing_change(self, thing_id: str, from_state: str, to_state: str, now: float) -> list[Action]:
        event = ThingChange(thing_id=thing_id, from_state=from_state, to_state=to_state)
        return self._dispatch_all(evaluate(event, self.ruleset), now)

    def on_item_update(self, item_id: str, result: dict[str, Any], now: float) -> list[Action]:
        self.items.update(item_id, result, now)
        event = ItemUpdate(item_id=item_id, result=result)
        return self._dispatch_all(evaluate(event, self.ruleset), now)

    def _dispatch_all(self, actions: list[Action], now: float) -> list[Action]:
        for action in actions:
            self.dispatch(action, now)
        return actions

    def dispatch(self, action: Action, now: float) -> None:
        if isinstance(action, SendNotification):
            self.sink.notify(action.text, now)
            return
        if self.command_handler is None:
            self.dispatch_errors += 1
            logger.error("no command handler; dropping command for %s", action.item_id)
            return
        try:
            self.command_handler(action.item_id, action.command, now)
        except KeyError:
            self.dispatch_errors += 1
            logger.error("command for unknown binding %s dropped", action.item_id)
