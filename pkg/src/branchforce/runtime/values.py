"""Value model for the interpreted JavaScript subset.

Python natives stand in where the semantics line up: bool, float (all
numbers are doubles), str, and None for null. `undefined` is a dedicated
singleton so that absent-property reads are distinguishable from null.
Host functions carry a stable identity name; calls through an alias
(`var f = eval; f(x)`) therefore still log under the original API name.
"""
from __future__ import annotations

import json
import math
from typing import Callable, Optional


class JSUndefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "undefined"


UNDEFINED = JSUndefined()


class JSObject:
    __slots__ = ("properties",)

    def __init__(self, properties: Optional[dict] = None) -> None:
        self.properties = properties if properties is not None else {}

    def get(self, name: str):
        return self.properties.get(name, UNDEFINED)

    def set(self, name: str, value) -> None:
        self.properties[name] = value

    def __repr__(self) -> str:
        return "<JSObject %s>" % list(self.properties)[:4]


class DOMElement(JSObject):
    __slots__ = ("tag_name",)

    def __init__(self, tag_name: str, properties: Optional[dict] = None) -> None:
        super().__init__(properties)
        self.tag_name = tag_name

    def __repr__(self) -> str:
        return "<element %s>" % self.tag_name


class JSArray:
    __slots__ = ("elements",)

    def __init__(self, elements: Optional[list] = None) -> None:
        self.elements = elements if elements is not None else []

    def __repr__(self) -> str:
        return "<JSArray len=%d>" % len(self.elements)


class JSFunction:
    """User closure: parameter names, body AST, and the defining scope."""

    __slots__ = ("name", "params", "body", "env", "is_arrow", "script_id", "properties")

    def __init__(self, name, params, body, env, is_arrow, script_id) -> None:
        self.name = name
        self.params = params
        self.body = body
        self.env = env
        self.is_arrow = is_arrow
        self.script_id = script_id
        self.properties: dict = {}

    def __repr__(self) -> str:
        return "<JSFunction %s>" % (self.name or "<anon>")


class HostFunction:
    """Native function; `fn(this_value, args) -> value`. Identity is shared
    across environment clones, never copied."""

    __slots__ = ("name", "fn", "properties")

    def __init__(self, name: str, fn: Callable, properties: Optional[dict] = None) -> None:
        self.name = name
        self.fn = fn
        self.properties = properties if properties is not None else {}

    def __repr__(self) -> str:
        return "<HostFunction %s>" % self.name


class JSThrow(Exception):
    """A thrown JS value unwinding through the interpreter."""

    def __init__(self, value) -> None:
        super().__init__(js_brief(value))
        self.value = value


def make_error(name: str, message: str) -> JSObject:
    return JSObject({"name": name, "message": message, "stack": ""})


def throw_type_error(message: str) -> "JSThrow":
    return JSThrow(make_error("TypeError", message))


def is_callable(value) -> bool:
    return isinstance(value, (JSFunction, HostFunction))


def js_truthy(value) -> bool:
    if value is UNDEFINED or value is None or value is False:
        return False
    if value is True:
        return True
    if isinstance(value, float):
        return value != 0.0 and not math.isnan(value)
    if isinstance(value, str):
        return value != ""
    return True


def js_typeof(value) -> str:
    if value is UNDEFINED:
        return "undefined"
    if value is None:
        return "object"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, float):
        return "number"
    if isinstance(value, str):
        return "string"
    if is_callable(value):
        return "function"
    return "object"


def _shortest_digits(value: float) -> tuple[str, str, int]:
    # (sign, significant digits, point position): value = sign 0.digits * 10^n.
    # repr() is shortest round-trip, the same digit choice the spec asks for.
    text = repr(value)
    sign = ""
    if text.startswith("-"):
        sign, text = "-", text[1:]
    mantissa, _, exp = text.partition("e")
    int_part, _, frac = mantissa.partition(".")
    stripped = int_part.lstrip("0")
    n = len(stripped) if stripped else -(len(frac) - len(frac.lstrip("0")))
    digits = (int_part + frac).lstrip("0").rstrip("0") or "0"
    return sign, digits, n + (int(exp) if exp else 0)


def js_number_to_string(value: float) -> str:
    if math.isnan(value):
        return "NaN"
    if value == math.inf:
        return "Infinity"
    if value == -math.inf:
        return "-Infinity"
    if value == 0.0:
        return "0"
    sign, digits, n = _shortest_digits(value)
    k = len(digits)
    if k <= n <= 21:
        return sign + digits + "0" * (n - k)
    if 0 < n <= 21:
        return sign + digits[:n] + "." + digits[n:]
    if -6 < n <= 0:
        return sign + "0." + "0" * (-n) + digits
    head = digits[0] + ("." + digits[1:] if k > 1 else "")
    return "%s%se%s%d" % (sign, head, "+" if n > 0 else "-", abs(n - 1))


def js_to_number(value) -> float:
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if isinstance(value, float):
        return value
    if value is None:
        return 0.0
    if value is UNDEFINED:
        return math.nan
    if isinstance(value, str):
        text = value.strip()
        if text == "":
            return 0.0
        try:
            if text[:2].lower() == "0x":
                return float(int(text, 16))
            return float(text)
        except ValueError:
            return math.nan
    if isinstance(value, JSArray):
        if not value.elements:
            return 0.0
        if len(value.elements) == 1:
            return js_to_number(value.elements[0])
        return math.nan
    return math.nan


def js_to_string(value) -> str:
    if value is UNDEFINED:
        return "undefined"
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return js_number_to_string(value)
    if isinstance(value, str):
        return value
    if isinstance(value, JSArray):
        parts = []
        for item in value.elements:
            parts.append("" if item is UNDEFINED or item is None else js_to_string(item))
        return ",".join(parts)
    if isinstance(value, JSFunction):
        return "function %s() { [code] }" % (value.name or "")
    if isinstance(value, HostFunction):
        return "function %s() { [native code] }" % value.name
    return "[object Object]"


def js_brief(value, depth: int = 2) -> str:
    """Compact display form for logs: strings quoted, structures shallow."""
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, JSArray):
        if depth <= 0:
            return "[...]"
        return "[%s]" % ", ".join(js_brief(v, depth - 1) for v in value.elements[:8])
    if is_callable(value):
        name = value.name or "<anon>"
        return "function %s" % name
    if isinstance(value, DOMElement):
        src = value.properties.get("src")
        if isinstance(src, str) and src:
            return "<%s src=%s>" % (value.tag_name, json.dumps(src))
        return "<%s>" % value.tag_name
    if isinstance(value, JSObject):
        if depth <= 0:
            return "{...}"
        items = list(value.properties.items())[:6]
        return "{%s}" % ", ".join("%s: %s" % (k, js_brief(v, depth - 1)) for k, v in items)
    return js_to_string(value)


def js_arg_summary(args: list) -> str:
    return ", ".join(js_brief(a) for a in args)


def _is_number_like(value) -> bool:
    return isinstance(value, float) and not isinstance(value, bool)


def js_strict_equals(a, b) -> bool:
    if a is UNDEFINED or b is UNDEFINED:
        return a is b
    if a is None or b is None:
        return a is b
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, float) and isinstance(b, float):
        return a == b
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    return a is b


def js_equals(a, b) -> bool:
    # null and undefined are mutually loose-equal and equal nothing else
    a_nullish = a is None or a is UNDEFINED
    b_nullish = b is None or b is UNDEFINED
    if a_nullish or b_nullish:
        return a_nullish and b_nullish
    if isinstance(a, bool):
        return js_equals(js_to_number(a), b)
    if isinstance(b, bool):
        return js_equals(a, js_to_number(b))
    if isinstance(a, float) and isinstance(b, float):
        return a == b
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    if isinstance(a, float) and isinstance(b, str):
        return a == js_to_number(b)
    if isinstance(a, str) and isinstance(b, float):
        return js_to_number(a) == b
    if isinstance(a, (JSObject, JSArray)) and isinstance(b, (float, str)):
        return js_equals(js_primitive(a), b)
    if isinstance(a, (float, str)) and isinstance(b, (JSObject, JSArray)):
        return js_equals(a, js_primitive(b))
    return a is b


def js_primitive(value):
    """ToPrimitive for comparison contexts; arrays join, objects tag."""
    if isinstance(value, (JSObject, JSArray)):
        return js_to_string(value)
    return value


def js_add(a, b):
    pa, pb = js_primitive(a), js_primitive(b)
    if isinstance(pa, str) or isinstance(pb, str):
        return js_to_string(pa) + js_to_string(pb)
    return js_to_number(pa) + js_to_number(pb)


def js_compare(op: str, a, b):
    pa, pb = js_primitive(a), js_primitive(b)
    if isinstance(pa, str) and isinstance(pb, str):
        if op == "<":
            return pa < pb
        if op == ">":
            return pa > pb
        if op == "<=":
            return pa <= pb
        return pa >= pb
    na, nb = js_to_number(pa), js_to_number(pb)
    if math.isnan(na) or math.isnan(nb):
        return False
    if op == "<":
        return na < nb
    if op == ">":
        return na > nb
    if op == "<=":
        return na <= nb
    return na >= nb


_TWO32 = 2 ** 32
_TWO31 = 2 ** 31


def js_to_int32(value) -> int:
    n = js_to_number(value)
    if math.isnan(n) or math.isinf(n):
        return 0
    n = int(n) % _TWO32
    return n - _TWO32 if n >= _TWO31 else n


def js_to_uint32(value) -> int:
    n = js_to_number(value)
    if math.isnan(n) or math.isinf(n):
        return 0
    return int(n) % _TWO32
