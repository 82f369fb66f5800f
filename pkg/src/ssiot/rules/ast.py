"""Rule AST and its canonical pretty-printed form.

The language is the minimal trigger-action shape: one trigger per rule,
send-command / send-notification statements, and conditionals over the
result fields (label equality, score thresholds) joined by ``&&``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class ThingChanged:
    thing_id: str
    from_state: str
    to_state: str


@dataclass(frozen=True)
class ItemUpdated:
    item_id: str


Trigger = Union[ThingChanged, ItemUpdated]


@dataclass(frozen=True)
class Comparison:
    field: str
    op: str  # == > >= < <=
    value: Union[str, float]


@dataclass(frozen=True)
class Condition:
    atoms: tuple[Comparison, ...]  # conjunction


@dataclass(frozen=True)
class SendCommand:
    item_id: str
    command: str


@dataclass(frozen=True)
class SendNotification:
    text: str


@dataclass(frozen=True)
class IfBlock:
    condition: Condition
    body: tuple["Statement", ...]


Statement = Union[SendCommand, SendNotification, IfBlock]


@dataclass(frozen=True)
class Rule:
    name: str
    trigger: Trigger
    body: tuple[Statement, ...]


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]

    def __len__(self) -> int:
        return len(self.rules)


def _format_value(value: Union[str, float]) -> str:
    if isinstance(value, str):
        return f'"{value}"'
    return f"{value:g}"


def _format_condition(condition: Condition) -> str:
    return " && ".join(f"{a.field} {a.op} {_format_value(a.value)}" for a in condition.atoms)


def _format_statement(stmt: Statement, indent: int) -> list[str]:
    pad = " " * indent
    if isinstance(stmt, SendCommand):
        return [f'{pad}{stmt.item_id}.sendCommand("{stmt.command}")']
    if isinstance(stmt, SendNotification):
        return [f'{pad}sendNotification("{stmt.text}")']
    lines = [f"{pad}if {_format_condition(stmt.condition)} {{"]
    for inner in stmt.body:
        lines.extend(_format_statement(inner, indent + 4))
    lines.append(f"{pad}}}")
    return lines


def _format_trigger(trigger: Trigger) -> str:
    if isinstance(trigger, ThingChanged):
        return f'Thing "{trigger.thing_id}" changed from "{trigger.from_state}" to "{trigger.to_state}"'
    return f'Item "{trigger.item_id}" received update'


def format_rules(ruleset: RuleSet) -> str:
    """Canonical text form; parsing it back yields an equal RuleSet."""
    chunks = []
    for rule in ruleset.rules:
        lines = [f'rule "{rule.name}"', "when", f"    {_format_trigger(rule.trigger)}", "then"]
        for stmt in rule.body:
            lines.extend(_format_statement(stmt, 4))
        lines.append("end")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
