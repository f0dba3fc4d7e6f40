from .environment import Environment, UnboundName, clone_environment, clone_value
from .host import (
    DEFAULT_MAX_DEPTH,
    DEFAULT_STEP_BUDGET,
    FIXED_EPOCH_MS,
    HostWorld,
    ResourceResolver,
    StepBudgetExhausted,
    json_to_js,
)
from .interpreter import Interpreter, throw_text
from .values import (
    UNDEFINED,
    DOMElement,
    HostFunction,
    JSArray,
    JSFunction,
    JSObject,
    JSThrow,
    is_callable,
    js_brief,
    js_equals,
    js_strict_equals,
    js_to_number,
    js_to_string,
    js_truthy,
    js_typeof,
    make_error,
)

__all__ = [
    "Environment",
    "UnboundName",
    "clone_environment",
    "clone_value",
    "DEFAULT_MAX_DEPTH",
    "DEFAULT_STEP_BUDGET",
    "FIXED_EPOCH_MS",
    "HostWorld",
    "ResourceResolver",
    "StepBudgetExhausted",
    "json_to_js",
    "Interpreter",
    "throw_text",
    "UNDEFINED",
    "DOMElement",
    "HostFunction",
    "JSArray",
    "JSFunction",
    "JSObject",
    "JSThrow",
    "is_callable",
    "js_brief",
    "js_equals",
    "js_strict_equals",
    "js_to_number",
    "js_to_string",
    "js_truthy",
    "js_typeof",
    "make_error",
]
