"""Scope chain and the deep-clone machinery behind forced branches.

Scopes sit at function boundaries only: one global scope per page context
plus one scope per call. The global scope's binding table IS the global
object's property table (the same dict), so `window.x` and bare `x` stay
in sync for free; cloning keeps that aliasing via a shared memo.
"""
from __future__ import annotations

from typing import Optional

from .values import DOMElement, HostFunction, JSArray, JSFunction, JSObject


class UnboundName(Exception):
    def __init__(self, name: str) -> None:
        super().__init__(name)
        self.name = name


class Environment:
    __slots__ = ("bindings", "parent")

    def __init__(self, parent: Optional["Environment"] = None,
                 bindings: Optional[dict] = None) -> None:
        self.bindings = bindings if bindings is not None else {}
        self.parent = parent

    def lookup(self, name: str):
        env: Optional[Environment] = self
        while env is not None:
            if name in env.bindings:
                return env.bindings[name]
            env = env.parent
        raise UnboundName(name)

    def has(self, name: str) -> bool:
        env: Optional[Environment] = self
        while env is not None:
            if name in env.bindings:
                return True
            env = env.parent
        return False

    def declare(self, name: str, value) -> None:
        self.bindings[name] = value

    def declare_if_absent(self, name: str, value) -> None:
        if name not in self.bindings:
            self.bindings[name] = value

    def assign(self, name: str, value) -> None:
        env: Optional[Environment] = self
        while env is not None:
            if name in env.bindings:
                env.bindings[name] = value
                return
            env = env.parent
        # sloppy-mode leak: assignment to an undeclared name lands on the
        # global object
        self.root().bindings[name] = value

    def root(self) -> "Environment":
        env = self
        while env.parent is not None:
            env = env.parent
        return env


def clone_value(value, memo: dict):
    """Deep copy reachable values. Host functions keep their identity;
    everything mutable is duplicated exactly once per clone operation."""
    if isinstance(value, HostFunction):
        return value
    if isinstance(value, (JSObject, JSArray, JSFunction, Environment)):
        existing = memo.get(id(value))
        if existing is not None:
            return existing
    if isinstance(value, DOMElement):
        copy = DOMElement.__new__(DOMElement)
        memo[id(value)] = copy
        copy.tag_name = value.tag_name
        copy.properties = _clone_dict(value.properties, memo)
        return copy
    if isinstance(value, JSObject):
        copy = JSObject.__new__(JSObject)
        memo[id(value)] = copy
        copy.properties = _clone_dict(value.properties, memo)
        return copy
    if isinstance(value, JSArray):
        copy = JSArray.__new__(JSArray)
        memo[id(value)] = copy
        copy.elements = [clone_value(v, memo) for v in value.elements]
        return copy
    if isinstance(value, JSFunction):
        copy = JSFunction.__new__(JSFunction)
        memo[id(value)] = copy
        copy.name = value.name
        copy.params = value.params
        copy.body = value.body            # AST is immutable at runtime
        copy.is_arrow = value.is_arrow
        copy.script_id = value.script_id
        copy.env = clone_environment(value.env, memo)
        copy.properties = _clone_dict(value.properties, memo)
        return copy
    if isinstance(value, Environment):
        return clone_environment(value, memo)
    return value   # primitives are immutable


def _clone_dict(table: dict, memo: dict) -> dict:
    # keyed by the dict's own id so a binding table shared with a global
    # object's property table stays shared in the clone
    existing = memo.get(id(table))
    if existing is not None:
        return existing
    copy: dict = {}
    memo[id(table)] = copy
    for key, value in table.items():
        copy[key] = clone_value(value, memo)
    return copy


def clone_environment(env: Environment, memo: dict) -> Environment:
    existing = memo.get(id(env))
    if existing is not None:
        return existing
    copy = Environment.__new__(Environment)
    memo[id(env)] = copy
    copy.parent = clone_environment(env.parent, memo) if env.parent is not None else None
    copy.bindings = _clone_dict(env.bindings, memo)
    return copy
