"""Recursive-descent parser for rule files.

Grammar (everything beyond it is rejected):

    ruleset := rule*
    rule    := 'rule' STRING 'when' trigger 'then' stmt* 'end'
    trigger := 'Thing' STRING 'changed' 'from' STRING 'to' STRING
             | 'Item' STRING 'received' 'update'
    stmt    := IDENT '.' 'sendCommand' '(' STRING ')'
             | 'sendNotification' '(' STRING ')'
             | 'if' cond '{' stmt* '}'
    cond    := atom ('&&' atom)*
    atom    := IDENT '==' STRING | IDENT ('>'|'>='|'<'|'<=') NUMBER

Errors carry 1-based line and column positions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

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
    Trigger,
)


class RuleParseError(Exception):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class _Token:
    kind: str  # STRING NUMBER IDENT OP EOF
    value: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<string>"(?:[^"\\]|\\.)*")
    | (?P<number>\d+(?:\.\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>&&|==|>=|<=|[{}().><])
    """,
    re.VERBOSE,
)


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, column = 1, 1
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise RuleParseError(f"unexpected character {source[pos]!r}", line, column)
        text = match.group(0)
        if match.lastgroup == "string":
            tokens.append(_Token("STRING", text[1:-1].replace('\\"', '"'), line, column))
        elif match.lastgroup == "number":
            tokens.append(_Token("NUMBER", text, line, column))
        elif match.lastgroup == "ident":
            tokens.append(_Token("IDENT", text, line, column))
        elif match.lastgroup == "op":
            tokens.append(_Token("OP", text, line, column))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            column = len(text) - text.rfind("\n")
        else:
            column += len(text)
        pos = match.end()
    tokens.append(_Token("EOF", "", line, column))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]) -> None:
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> _Token:
        return self._tokens[self._pos]

    def _next(self) -> _Token:
        token = self._tokens[self._pos]
        self._pos += 1
        return token

    def _error(self, message: str, token: Optional[_Token] = None) -> RuleParseError:
        token = token or self._peek()
        return RuleParseError(message, token.line, token.column)

    def _expect_ident(self, word: str) -> _Token:
        token = self._next()
        if token.kind != "IDENT" or token.value != word:
            raise self._error(f"expected {word!r}, got {token.value!r}", token)
        return token

    def _expect(self, kind: str, value: Optional[str] = None) -> _Token:
        token = self._next()
        if token.kind != kind or (value is not None and token.value != value):
            want = value if value is not None else kind
            raise self._error(f"expected {want!r}, got {token.value!r}", token)
        return token

    def parse_ruleset(self) -> RuleSet:
        rules: list[Rule] = []
        names: set[str] = set()
        while self._peek().kind != "EOF":
            rule = self._parse_rule()
            if rule.name in names:
                raise self._error(f"duplicate rule name {rule.name!r}")
            names.add(rule.name)
            rules.append(rule)
        return RuleSet(rules=tuple(rules))

    def _parse_rule(self) -> Rule:
        self._expect_ident("rule")
        name = self._expect("STRING").value
        self._expect_ident("when")
        trigger = self._parse_trigger()
        self._expect_ident("then")
        body: list[Statement] = []
        while True:
            token = self._peek()
            if token.kind == "EOF":
                raise self._error(f"rule {name!r} not terminated: expected 'end'", token)
            if token.kind == "IDENT" and token.value == "end":
                self._next()
                break
            body.append(self._parse_statement())
        return Rule(name=name, trigger=trigger, body=tuple(body))

    def _parse_trigger(self) -> Trigger:
        token = self._next()
        if token.kind == "IDENT" and token.value == "Thing":
            thing_id = self._expect("STRING").value
            self._expect_ident("changed")
            self._expect_ident("from")
            from_state = self._expect("STRING").value
            self._expect_ident("to")
            to_state = self._expect("STRING").value
            if not thing_id:
                raise self._error("thing id must be nonempty", token)
            return ThingChanged(thing_id=thing_id, from_state=from_state, to_state=to_state)
        if token.kind == "IDENT" and token.value == "Item":
            item_id = self._expect("STRING").value
            self._expect_ident("received")
            self._expect_ident("update")
            if not item_id:
                raise self._error("item id must be nonempty", token)
            return ItemUpdated(item_id=item_id)
        raise self._error(f"expected 'Thing' or 'Item', got {token.value!r}", token)

    def _parse_statement(self) -> Statement:
        token = self._next()
        if token.kind != "IDENT":
            raise self._error(f"expected a statement, got {token.value!r}", token)
        if token.value == "if":
            condition = self._parse_condition()
            self._expect("OP", "{")
            body: list[Statement] = []
            while not (self._peek().kind == "OP" and self._peek().value == "}"):
                if self._peek().kind == "EOF":
                    raise self._error("unterminated 'if' block: expected '}'")
                body.append(self._parse_statement())
            self._next()  # consume }
            return IfBlock(condition=condition, body=tuple(body))
        if token.value == "sendNotification":
            self._expect("OP", "(")
            text = self._expect("STRING").value
            self._expect("OP", ")")
            return SendNotification(text=text)
        # IDENT '.' sendCommand '(' STRING ')'
        self._expect("OP", ".")
        self._expect_ident("sendCommand")
        self._expect("OP", "(")
        command = self._expect("STRING").value
        self._expect("OP", ")")
        return SendCommand(item_id=token.value, command=command)

    def _parse_condition(self) -> Condition:
        atoms = [self._parse_atom()]
        while self._peek().kind == "OP" and self._peek().value == "&&":
            self._next()
            atoms.append(self._parse_atom())
        return Condition(atoms=tuple(atoms))

    def _parse_atom(self) -> Comparison:
        field = self._expect("IDENT").value
        op_token = self._next()
        if op_token.kind != "OP" or op_token.value not in ("==", ">", ">=", "<", "<="):
            raise self._error(f"expected a comparison operator, got {op_token.value!r}", op_token)
        if op_token.value == "==":
            value_token = self._expect("STRING")
            return Comparison(field=field, op="==", value=value_token.value)
        value_token = self._expect("NUMBER")
        return Comparison(field=field, op=op_token.value, value=float(value_token.value))


def parse_rules(source: str) -> RuleSet:
    """Parse rule text into a RuleSet; errors carry line/column."""
    return _Parser(_tokenize(source)).parse_ruleset()
