"""Sandboxed host surface: resources, DOM sliver, browser/node globals.

Nothing here touches the network, filesystem, or a shell. URLs resolve
against an in-memory fixture table; shell commands resolve against a
command fixture table and are logged verbatim. Every world-installed API
logs its call before acting. Timers run their callback immediately, once,
when timer firing is enabled; with it disabled they are logged only.

The world knows nothing about any particular interpreter: whoever runs
code plugs in `call_fn` (invoke a user function) and `spawn_fn` (compile
and run injected source), and keeps `current_*` fields pointed at the
active call site so logs attribute correctly.
"""
from __future__ import annotations

import base64
import binascii
import json
import random
import re
import urllib.parse
from typing import Callable, Optional

from ..tracking import Eval, Injected, Local, Provenance, RunLog
from .environment import Environment
from .values import (
    UNDEFINED,
    DOMElement,
    HostFunction,
    JSArray,
    JSFunction,
    JSObject,
    JSThrow,
    is_callable,
    js_arg_summary,
    js_number_to_string,
    js_to_number,
    js_to_string,
    js_truthy,
    make_error,
)

FIXED_EPOCH_MS = 1600000000000.0
DEFAULT_STEP_BUDGET = 1_000_000
DEFAULT_MAX_DEPTH = 16

NOT_FOUND_COMMAND = ("", "command not found", 127)


class ResourceResolver:
    """Deterministic URL and command fixtures.

    Resource keys are exact URLs, origin-relative paths (leading "/"), or
    prefix patterns ending in "*" (longest prefix wins). Unknown URLs are
    NotFound; unknown commands synthesize a 127 exit.
    """

    def __init__(self, resources: Optional[dict] = None,
                 commands: Optional[dict] = None) -> None:
        self.resources: dict[str, tuple[str, str]] = dict(resources or {})
        self.commands: dict[str, tuple[str, str, int]] = dict(commands or {})

    @classmethod
    def from_dict(cls, doc: dict) -> "ResourceResolver":
        resources = {}
        for url, entry in (doc.get("resources") or {}).items():
            kind = entry.get("kind", "text")
            if kind not in ("script", "text", "404"):
                raise ValueError("unknown resource kind %r for %r" % (kind, url))
            resources[url] = (kind, entry.get("body", ""))
        commands = {}
        for cmd, entry in (doc.get("commands") or {}).items():
            commands[cmd] = (
                entry.get("stdout", ""),
                entry.get("stderr", ""),
                int(entry.get("code", 0)),
            )
        return cls(resources, commands)

    @classmethod
    def from_file(cls, path: str) -> "ResourceResolver":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def resolve(self, url: str, origin: str = "") -> Optional[tuple[str, str]]:
        hit = self.resources.get(url)
        if hit is not None:
            return None if hit[0] == "404" else hit
        if origin and url.startswith(origin):
            # fixtures may key the sample's own files by bare path
            rest = url[len(origin):]
            for key in ("/" + rest, rest):
                hit = self.resources.get(key)
                if hit is not None:
                    return None if hit[0] == "404" else hit
        best = None
        for key, entry in self.resources.items():
            if key.endswith("*") and url.startswith(key[:-1]):
                if best is None or len(key) > len(best[0]):
                    best = (key, entry)
        if best is not None:
            return None if best[1][0] == "404" else best[1]
        return None

    def run_command(self, cmd: str) -> tuple[str, str, int]:
        return self.commands.get(cmd, NOT_FOUND_COMMAND)


class StepBudgetExhausted(RuntimeError):
    """The global interpreter step counter hit its cap."""


class HostWorld:
    def __init__(self, mode: str, resolver: Optional[ResourceResolver] = None,
                 sample_id: str = "sample", seed: int = 0,
                 fire_timers: bool = True,
                 step_budget: int = DEFAULT_STEP_BUDGET,
                 max_depth: int = DEFAULT_MAX_DEPTH,
                 log: Optional[RunLog] = None, id_prefix: str = "") -> None:
        if mode not in ("browser", "npm"):
            raise ValueError("mode must be 'browser' or 'npm', got %r" % mode)
        self.mode = mode
        self.resolver = resolver if resolver is not None else ResourceResolver()
        self.sample_id = sample_id
        # a supplied log is authoritative for the origin, so resource
        # resolution and third-party accounting agree
        self.origin = log.origin if log is not None else "ext://%s/" % sample_id
        self.fire_timers = fire_timers
        self.step_budget = step_budget
        self.max_depth = max_depth
        self.steps = 0
        self.rng = random.Random(seed)
        self.now_ms = FIXED_EPOCH_MS
        self.log = log if log is not None else RunLog(self.origin, id_prefix)

        # wired in by the interpreter that owns this world
        self.call_fn: Optional[Callable] = None
        self.spawn_fn: Optional[Callable] = None
        self.current_script_id = "s0"
        self.current_line = 0
        self.current_env: Optional[Environment] = None

        # fetch-taint: ids of values that came out of a network-shaped API;
        # strong refs pin them so CPython cannot recycle a tracked id
        self._tainted: set[int] = set()
        self._taint_refs: list = []
        self.guard_depth = 0
        self.guard_saw_taint = False

        self.listeners: list = []
        self._timer_seq = 0
        self._modules: dict[str, JSObject] = {}
        self.depth_skips = 0
        self.global_object: Optional[JSObject] = None

    # -- bookkeeping ---------------------------------------------------------

    def count_step(self) -> None:
        if self.steps >= self.step_budget:
            raise StepBudgetExhausted("step budget of %d exhausted" % self.step_budget)
        self.steps += 1

    def log_api(self, name: str, args: list) -> None:
        self.log.log_api(self.current_script_id, name,
                         js_arg_summary(args), self.current_line)

    def taint(self, value) -> None:
        if isinstance(value, (JSObject, JSArray, str)):
            self._tainted.add(id(value))
            self._taint_refs.append(value)

    def is_tainted(self, value) -> bool:
        return id(value) in self._tainted

    def note_read(self, value) -> None:
        if self.guard_depth > 0 and id(value) in self._tainted:
            self.guard_saw_taint = True

    def resolve_url(self, url: str) -> str:
        if "://" in url:
            return url
        return self.origin + url.lstrip("/")

    def add_listener(self, fn) -> None:
        self.listeners.append(fn)

    def fire_listeners(self) -> None:
        """Invoke every registered listener once, in registration order,
        with one fresh empty object per declared parameter. Runs in both
        baseline and forced modes; listener errors are swallowed."""
        i = 0
        while i < len(self.listeners):
            fn = self.listeners[i]
            i += 1
            count = len(fn.params) if isinstance(fn, JSFunction) else 0
            args = [JSObject() for _ in range(count)]
            try:
                self.call_fn(fn, UNDEFINED, args)
            except JSThrow:
                pass

    def _spawn(self, text: str, provenance: Provenance, env=None):
        if self.spawn_fn is None:
            return None
        return self.spawn_fn(text, provenance, env)

    # -- shared host functions -------------------------------------------------

    def _fn(self, name: str, impl: Callable, properties: Optional[dict] = None) -> HostFunction:
        def wrapper(this, args, _name=name, _impl=impl):
            self.log_api(_name, args)
            return _impl(this, args)

        return HostFunction(name, wrapper, properties)

    def _quiet_fn(self, name: str, impl: Callable) -> HostFunction:
        return HostFunction(name, impl)

    def _call_user(self, fn, args: list):
        if is_callable(fn):
            return self.call_fn(fn, UNDEFINED, list(args))
        return UNDEFINED

    # timers

    def _set_timer(self, this, args):
        fn = args[0] if args else UNDEFINED
        self._timer_seq += 1
        if self.fire_timers and is_callable(fn):
            extra = list(args[2:])
            self.call_fn(fn, UNDEFINED, extra)
        return float(self._timer_seq)

    def _noop(self, this, args):
        return UNDEFINED

    # network

    def _make_response(self, body: Optional[str]) -> JSObject:
        """Response with a synchronous then/catch/json surface.

        Every then callback receives the response itself and the chain value
        stays the response; nothing ever rejects, so catch callbacks never
        fire. Enough for side-effecting handler chains, which is what fetched
        code actually does with these.
        """
        ok = body is not None
        text = body if ok else ""
        response = JSObject({"status": 200.0 if ok else 404.0, "ok": ok, "text": text})

        def then_impl(this, args):
            cb = args[0] if args else UNDEFINED
            if is_callable(cb):
                self._call_user(cb, [response])
            return response

        def json_impl(this, args):
            try:
                parsed = json_to_js(json.loads(text))
            except ValueError:
                raise JSThrow(make_error("SyntaxError", "Unexpected token in JSON"))
            self.taint(parsed)
            return parsed

        response.properties["then"] = HostFunction("then", then_impl)
        response.properties["catch"] = HostFunction("catch", lambda this, args: response)
        response.properties["json"] = HostFunction("json", json_impl)
        self.taint(response)
        if ok:
            self.taint(text)
        return response

    def _fetch(self, this, args):
        url = self.resolve_url(js_to_string(args[0] if args else UNDEFINED))
        hit = self.resolver.resolve(url, self.origin)
        if hit is None:
            self.log.log_resource_404(url)
            return self._make_response(None)
        kind, body = hit
        if kind == "script":
            self._spawn(body, Injected(self.current_script_id, url))
        return self._make_response(body)

    def _urlopen(self, this, args):
        # node-side fetch analog: script bodies execute, text is data
        url = self.resolve_url(js_to_string(args[0] if args else UNDEFINED))
        hit = self.resolver.resolve(url, self.origin)
        if hit is None:
            self.log.log_resource_404(url)
            return self._make_response(None)
        kind, body = hit
        if kind == "script":
            self._spawn(body, Injected(self.current_script_id, url))
        return self._make_response(body)

    def _jq_get(self, this, args):
        url = self.resolve_url(js_to_string(args[0] if args else UNDEFINED))
        callback = args[1] if len(args) > 1 else UNDEFINED
        hit = self.resolver.resolve(url, self.origin)
        if hit is None:
            self.log.log_resource_404(url)
            return UNDEFINED
        kind, body = hit
        if kind == "script":
            self._spawn(body, Injected(self.current_script_id, url))
        path = url.split("?", 1)[0]
        if path.endswith(".json"):
            try:
                data = json_to_js(json.loads(body))
            except ValueError:
                data = body
        else:
            data = body
        self.taint(data)
        self._call_user(callback, [data])
        return UNDEFINED

    # dynamic code

    def _eval(self, this, args):
        code = args[0] if args else UNDEFINED
        if not isinstance(code, str):
            return code
        self._spawn(code, Eval(self.current_script_id), env=self.current_env)
        return UNDEFINED

    def _function_ctor(self, this, args):
        body = js_to_string(args[-1]) if args else ""
        params: list[str] = []
        for arg in args[:-1]:
            params.extend(p.strip() for p in js_to_string(arg).split(",") if p.strip())
        self._spawn(body, Eval(self.current_script_id))
        compiled = self._compile_fn(params, body)
        return compiled

    def _global_scope(self) -> Environment:
        # the active run's outermost scope; inside a forced clone this is
        # the clone's global, keeping clone writes out of the live world
        if self.current_env is not None:
            return self.current_env.root()
        if self.global_object is not None:
            return Environment(parent=None, bindings=self.global_object.properties)
        return Environment()

    def _compile_fn(self, params: list[str], body: str):
        from ..frontend import LexError, ParseError, UnsupportedSyntax, parse

        try:
            program = parse(body)
        except (LexError, ParseError, UnsupportedSyntax):
            return self._quiet_fn("anonymous", self._noop)
        return JSFunction("anonymous", params, program, self._global_scope(),
                          False, self.current_script_id)

    # DOM

    def _make_dom_methods(self) -> dict:
        methods = {}
        for name in ("appendChild", "append", "prepend", "insertBefore", "insertAfter"):
            methods[name] = self._fn(name, self._make_inserter())
        methods["removeChild"] = self._fn("removeChild", lambda this, args: args[0] if args else UNDEFINED)
        methods["remove"] = self._fn("remove", self._noop)
        methods["setAttribute"] = self._fn("setAttribute", self._set_attribute)
        methods["getAttribute"] = self._fn("getAttribute", self._get_attribute)
        methods["addEventListener"] = self._fn("addEventListener", self._add_event_listener)
        methods["removeEventListener"] = self._fn("removeEventListener", self._noop)
        return methods

    def _make_inserter(self):
        def insert(this, args):
            child = args[0] if args else UNDEFINED
            if isinstance(child, DOMElement):
                child.properties["parentNode"] = this
                self._maybe_run_script_element(child)
            return child

        return insert

    def _maybe_run_script_element(self, element: DOMElement) -> None:
        if element.tag_name != "script":
            return
        src = element.get("src")
        if isinstance(src, str) and src:
            url = self.resolve_url(src)
            hit = self.resolver.resolve(url, self.origin)
            if hit is None:
                self.log.log_resource_404(url)
                return
            kind, body = hit
            if kind == "script":
                self._spawn(body, Injected(self.current_script_id, url))
            return
        for prop in ("text", "textContent", "innerHTML"):
            inline = element.get(prop)
            if isinstance(inline, str) and inline:
                self._spawn(inline, Eval(self.current_script_id))
                return

    def _set_attribute(self, this, args):
        if isinstance(this, JSObject) and len(args) >= 2:
            this.properties[js_to_string(args[0])] = args[1]
        return UNDEFINED

    def _get_attribute(self, this, args):
        if isinstance(this, JSObject) and args:
            return this.get(js_to_string(args[0]))
        return UNDEFINED

    def _add_event_listener(self, this, args):
        fn = args[1] if len(args) > 1 else UNDEFINED
        if is_callable(fn):
            self.add_listener(fn)
        return UNDEFINED

    def _add_listener(self, this, args):
        fn = args[0] if args else UNDEFINED
        if is_callable(fn):
            self.add_listener(fn)
        return UNDEFINED

    def make_element(self, tag: str) -> DOMElement:
        element = DOMElement(js_to_string(tag).lower())
        element.properties.update(self._dom_methods)
        return element

    def _create_element(self, this, args):
        return self.make_element(js_to_string(args[0]) if args else "div")

    def _get_elements_by_tag_name(self, this, args):
        tag = js_to_string(args[0]).lower() if args else ""
        if tag == "script":
            return JSArray([self._seed_script])
        if tag == "head":
            return JSArray([self._head])
        if tag == "body":
            return JSArray([self._body])
        return JSArray()

    def _build_document(self) -> JSObject:
        self._dom_methods = self._make_dom_methods()
        html = self.make_element("html")
        head = self.make_element("head")
        body = self.make_element("body")
        seed_script = self.make_element("script")
        head.properties["parentNode"] = html
        body.properties["parentNode"] = html
        seed_script.properties["parentNode"] = head
        self._head, self._body, self._seed_script = head, body, seed_script

        document = JSObject()
        document.properties.update({
            "createElement": self._fn("document.createElement", self._create_element),
            "getElementsByTagName": self._fn("document.getElementsByTagName",
                                             self._get_elements_by_tag_name),
            "getElementById": self._fn("document.getElementById",
                                       lambda this, args: None),
            "querySelector": self._fn("document.querySelector", lambda this, args: None),
            "querySelectorAll": self._fn("document.querySelectorAll",
                                         lambda this, args: JSArray()),
            "addEventListener": self._fn("document.addEventListener",
                                         self._add_event_listener),
            "removeEventListener": self._quiet_fn("document.removeEventListener",
                                                  self._noop),
            "documentElement": html,
            "head": head,
            "body": body,
            "cookie": "",
        })
        return document

    # jQuery sliver

    def _build_jquery(self) -> HostFunction:
        wrapper_methods = {
            "hasClass": self._fn("hasClass", lambda this, args: False),
            "addClass": self._fn("addClass", lambda this, args: this),
            "removeClass": self._fn("removeClass", lambda this, args: this),
            "remove": self._fn("remove", self._noop),
            "attr": self._fn("attr", lambda this, args: UNDEFINED),
            "css": self._fn("css", lambda this, args: this),
            "val": self._fn("val", lambda this, args: ""),
            "on": self._fn("on", self._add_event_listener),
            "click": self._fn("click", self._jq_click),
            "ready": self._fn("ready", self._jq_ready),
        }

        def jq(this, args):
            wrapped = JSObject({"length": 1.0, "selector": args[0] if args else UNDEFINED})
            wrapped.properties.update(wrapper_methods)
            return wrapped

        return self._fn("$", jq, properties={
            "get": self._fn("$.get", self._jq_get),
            "post": self._fn("$.post", self._jq_get),
            "ajax": self._fn("$.ajax", self._jq_ajax),
        })

    def _jq_click(self, this, args):
        if args and is_callable(args[0]):
            self.add_listener(args[0])
        return this

    def _jq_ready(self, this, args):
        self._call_user(args[0] if args else UNDEFINED, [])
        return this

    def _jq_ajax(self, this, args):
        settings = args[0] if args else UNDEFINED
        if isinstance(settings, JSObject):
            url = settings.get("url")
            success = settings.get("success")
            if isinstance(url, str):
                return self._jq_get(this, [url, success])
        return UNDEFINED

    # chrome extension sliver

    def _make_storage_area(self, prefix: str) -> JSObject:
        def get(this, args):
            callback = args[-1] if args and is_callable(args[-1]) else UNDEFINED
            self._call_user(callback, [JSObject()])
            return UNDEFINED

        def put(this, args):
            callback = args[-1] if args and is_callable(args[-1]) else UNDEFINED
            self._call_user(callback, [])
            return UNDEFINED

        return JSObject({
            "get": self._fn(prefix + ".get", get),
            "set": self._fn(prefix + ".set", put),
            "remove": self._fn(prefix + ".remove", put),
        })

    def _make_event(self, name: str) -> JSObject:
        return JSObject({
            "addListener": self._fn(name + ".addListener", self._add_listener),
            "removeListener": self._quiet_fn(name + ".removeListener", self._noop),
        })

    def _build_chrome(self) -> JSObject:
        def get_url(this, args):
            return self.origin + js_to_string(args[0] if args else "").lstrip("/")

        def get_manifest(this, args):
            return JSObject({"version": "1.0.0", "name": self.sample_id,
                             "manifest_version": 3.0})

        def tabs_query(this, args):
            callback = args[-1] if args and is_callable(args[-1]) else UNDEFINED
            self._call_user(callback, [JSArray()])
            return UNDEFINED

        return JSObject({
            "runtime": JSObject({
                "id": self.sample_id,
                "getURL": self._fn("chrome.runtime.getURL", get_url),
                "getManifest": self._fn("chrome.runtime.getManifest", get_manifest),
                "onMessage": self._make_event("chrome.runtime.onMessage"),
                "onInstalled": self._make_event("chrome.runtime.onInstalled"),
                "sendMessage": self._fn("chrome.runtime.sendMessage", self._noop),
            }),
            "storage": JSObject({
                "local": self._make_storage_area("chrome.storage.local"),
                "sync": self._make_storage_area("chrome.storage.sync"),
            }),
            "cookies": self._make_storage_area("chrome.cookies"),
            "tabs": JSObject({
                "onUpdated": self._make_event("chrome.tabs.onUpdated"),
                "onActivated": self._make_event("chrome.tabs.onActivated"),
                "onCreated": self._make_event("chrome.tabs.onCreated"),
                "query": self._fn("chrome.tabs.query", tabs_query),
                "create": self._fn("chrome.tabs.create", self._noop),
            }),
            "webNavigation": JSObject({
                "onCompleted": self._make_event("chrome.webNavigation.onCompleted"),
            }),
        })

    # node sliver

    def _exec_family(self, name: str, browser_noop: bool) -> HostFunction:
        def run(this, args):
            if browser_noop:
                return UNDEFINED
            cmd = js_to_string(args[0] if args else UNDEFINED)
            self.log.log_command(cmd)
            stdout, stderr, code = self.resolver.run_command(cmd)
            callback = args[-1] if args and is_callable(args[-1]) else UNDEFINED
            if name == "execSync":
                return stdout
            if name == "spawnSync":
                return JSObject({"stdout": stdout, "stderr": stderr,
                                 "status": float(code)})
            error = None if code == 0 else make_error(
                "Error", "Command failed: %s" % cmd)
            if isinstance(error, JSObject):
                error.properties["code"] = float(code)
            self._call_user(callback, [error, stdout, stderr])
            return UNDEFINED

        return self._fn(name, run)

    def _build_child_process(self) -> JSObject:
        return JSObject({
            "exec": self._exec_family("exec", browser_noop=False),
            "execFile": self._exec_family("execFile", browser_noop=False),
            "execSync": self._exec_family("execSync", browser_noop=False),
            "spawnSync": self._exec_family("spawnSync", browser_noop=False),
        })

    def _build_fs(self) -> JSObject:
        def access(this, args):
            callback = args[-1] if args and is_callable(args[-1]) else UNDEFINED
            self._call_user(callback, [None])
            return UNDEFINED

        def read_file_sync(this, args):
            path = js_to_string(args[0] if args else UNDEFINED)
            hit = self.resolver.resolve(self.resolve_url(path), self.origin)
            return hit[1] if hit is not None else ""

        return JSObject({
            "access": self._fn("fs.access", access),
            "accessSync": self._fn("fs.accessSync", self._noop),
            "chmod": self._fn("fs.chmod", access),
            "chmodSync": self._fn("fs.chmodSync", self._noop),
            "existsSync": self._fn("fs.existsSync", lambda this, args: False),
            "readFileSync": self._fn("fs.readFileSync", read_file_sync),
            "constants": JSObject({"F_OK": 0.0, "X_OK": 1.0, "W_OK": 2.0, "R_OK": 4.0}),
        })

    def _require(self, this, args):
        name = js_to_string(args[0] if args else UNDEFINED)
        if name in self._modules:
            return self._modules[name]
        if name == "child_process":
            module = self._build_child_process()
        elif name == "fs":
            module = self._build_fs()
        elif name == "os":
            module = JSObject({
                "platform": self._fn("os.platform", lambda this, args: "linux"),
                "hostname": self._fn("os.hostname", lambda this, args: "host"),
                "homedir": self._fn("os.homedir", lambda this, args: "/home/user"),
            })
        elif name == "path":
            module = JSObject({
                "join": self._quiet_fn("path.join", lambda this, args: "/".join(
                    js_to_string(a) for a in args)),
            })
        elif name.startswith((".", "/")):
            return self._require_local(name)
        else:
            module = JSObject()
        self._modules[name] = module
        return module

    def _require_local(self, name: str):
        path = name
        url = self.resolve_url(path.lstrip("./"))
        hit = self.resolver.resolve(url, self.origin)
        if hit is None:
            self.log.log_resource_404(url)
            return JSObject()
        kind, body = hit
        if kind != "script":
            return body
        module_obj = JSObject({"exports": JSObject()})
        module_env = Environment(parent=self._global_scope())
        module_env.declare("module", module_obj)
        module_env.declare("exports", module_obj.get("exports"))
        self._spawn(body, Local(self.current_script_id, path), env=module_env)
        return module_obj.get("exports")

    # language-level globals

    def _build_json(self) -> JSObject:
        def parse(this, args):
            text = args[0] if args else UNDEFINED
            try:
                parsed = json_to_js(json.loads(js_to_string(text)))
            except ValueError:
                raise JSThrow(make_error("SyntaxError", "Unexpected token in JSON"))
            if isinstance(text, str) and self.is_tainted(text):
                self.taint(parsed)
            return parsed

        def stringify(this, args):
            return js_json_stringify(args[0] if args else UNDEFINED)

        return JSObject({
            "parse": self._fn("JSON.parse", parse),
            "stringify": self._fn("JSON.stringify", stringify),
        })

    def _build_math(self) -> JSObject:
        import math as _math

        def unary(fn):
            return lambda this, args: float(fn(js_to_number(args[0] if args else UNDEFINED)))

        def spread(fn, empty):
            def impl(this, args):
                nums = [js_to_number(a) for a in args]
                return float(fn(nums)) if nums else empty
            return impl

        return JSObject({
            "random": self._quiet_fn("Math.random", lambda this, args: self.rng.random()),
            "floor": self._quiet_fn("Math.floor", unary(_math.floor)),
            "ceil": self._quiet_fn("Math.ceil", unary(_math.ceil)),
            "round": self._quiet_fn("Math.round", unary(lambda n: _math.floor(n + 0.5))),
            "abs": self._quiet_fn("Math.abs", unary(abs)),
            "sqrt": self._quiet_fn("Math.sqrt", unary(_math.sqrt)),
            "max": self._quiet_fn("Math.max", spread(max, -_math.inf)),
            "min": self._quiet_fn("Math.min", spread(min, _math.inf)),
            "pow": self._quiet_fn("Math.pow", lambda this, args: float(
                js_to_number(args[0] if args else UNDEFINED)
                ** js_to_number(args[1] if len(args) > 1 else UNDEFINED))),
            "PI": 3.141592653589793,
            "E": 2.718281828459045,
        })

    def _date_ctor(self, this, args):
        ms = js_to_number(args[0]) if args else self.now_ms
        return JSObject({
            "getTime": self._quiet_fn("Date.getTime", lambda t, a: ms),
            "valueOf": self._quiet_fn("Date.valueOf", lambda t, a: ms),
            "getFullYear": self._quiet_fn("Date.getFullYear", lambda t, a: 2020.0),
            "getMonth": self._quiet_fn("Date.getMonth", lambda t, a: 8.0),
            "getDate": self._quiet_fn("Date.getDate", lambda t, a: 13.0),
            "getDay": self._quiet_fn("Date.getDay", lambda t, a: 0.0),
            "getHours": self._quiet_fn("Date.getHours", lambda t, a: 12.0),
            "getMinutes": self._quiet_fn("Date.getMinutes", lambda t, a: 26.0),
            "getSeconds": self._quiet_fn("Date.getSeconds", lambda t, a: 40.0),
            "toISOString": self._quiet_fn("Date.toISOString",
                                          lambda t, a: "2020-09-13T12:26:40.000Z"),
            "toString": self._quiet_fn("Date.toString",
                                       lambda t, a: "Sun Sep 13 2020 12:26:40 GMT+0000"),
        })

    def _build_console(self) -> JSObject:
        table = {}
        for level in ("log", "info", "warn", "error", "debug"):
            table[level] = self._fn("console." + level, self._noop)
        return JSObject(table)

    def _install_common(self, g: dict) -> None:
        def parse_int(this, args):
            text = js_to_string(args[0] if args else UNDEFINED).strip()
            radix = int(js_to_number(args[1])) if len(args) > 1 and \
                js_truthy(args[1]) else 10
            m = re.match(r"([+-]?)(0[xX][0-9a-fA-F]+|\d+)", text)
            if not m:
                return float("nan")
            sign, token = m.group(1), m.group(2)
            base = 16 if token[:2].lower() == "0x" else radix
            try:
                return float(int(sign + token, base))
            except ValueError:
                return float("nan")

        def parse_float(this, args):
            text = js_to_string(args[0] if args else UNDEFINED).strip()
            m = re.match(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?", text)
            return float(m.group(0)) if m else float("nan")

        def atob_impl(this, args):
            data = js_to_string(args[0] if args else UNDEFINED)
            try:
                return base64.b64decode(data.encode("ascii"), validate=False).decode("latin-1")
            except (binascii.Error, ValueError, UnicodeEncodeError):
                raise JSThrow(make_error("InvalidCharacterError", "bad base64 input"))

        def btoa_impl(this, args):
            data = js_to_string(args[0] if args else UNDEFINED)
            try:
                return base64.b64encode(data.encode("latin-1")).decode("ascii")
            except UnicodeEncodeError:
                raise JSThrow(make_error("InvalidCharacterError", "bad btoa input"))

        g.update({
            "undefined": UNDEFINED,
            "NaN": float("nan"),
            "Infinity": float("inf"),
            "globalThis": None,   # patched to the global object after build
            "console": self._build_console(),
            "JSON": self._build_json(),
            "Math": self._build_math(),
            "Date": HostFunction("Date", self._date_ctor, {
                "now": self._fn("Date.now", lambda this, args: self.now_ms),
            }),
            "parseInt": self._quiet_fn("parseInt", parse_int),
            "parseFloat": self._quiet_fn("parseFloat", parse_float),
            "isNaN": self._quiet_fn("isNaN", lambda this, args: js_to_number(
                args[0] if args else UNDEFINED) != js_to_number(args[0] if args else UNDEFINED)),
            "String": HostFunction("String", lambda this, args: js_to_string(
                args[0] if args else ""), {
                "fromCharCode": self._quiet_fn("String.fromCharCode", lambda this, args: "".join(
                    chr(int(js_to_number(a)) & 0xFFFF) for a in args)),
            }),
            "Number": self._quiet_fn("Number", lambda this, args: js_to_number(
                args[0] if args else 0.0)),
            "Boolean": self._quiet_fn("Boolean", lambda this, args: js_truthy(
                args[0] if args else UNDEFINED)),
            "Array": HostFunction("Array", lambda this, args: JSArray(list(args)), {
                "isArray": self._quiet_fn("Array.isArray", lambda this, args: isinstance(
                    args[0] if args else UNDEFINED, JSArray)),
            }),
            "Object": HostFunction("Object", lambda this, args: JSObject(), {
                "keys": self._quiet_fn("Object.keys", lambda this, args: JSArray(
                    list((args[0].properties if args and isinstance(args[0], JSObject)
                          else {}).keys()))),
                "values": self._quiet_fn("Object.values", lambda this, args: JSArray(
                    list((args[0].properties if args and isinstance(args[0], JSObject)
                          else {}).values()))),
            }),
            "encodeURIComponent": self._quiet_fn(
                "encodeURIComponent",
                lambda this, args: urllib.parse.quote(
                    js_to_string(args[0] if args else UNDEFINED), safe="")),
            "decodeURIComponent": self._quiet_fn(
                "decodeURIComponent",
                lambda this, args: urllib.parse.unquote(
                    js_to_string(args[0] if args else UNDEFINED))),
            "atob": self._fn("atob", atob_impl),
            "btoa": self._fn("btoa", btoa_impl),
            "RegExp": self._quiet_fn("RegExp", lambda this, args: JSObject({
                "__regex__": True,
                "source": js_to_string(args[0] if args else ""),
                "flags": js_to_string(args[1]) if len(args) > 1 else "",
                "global": len(args) > 1 and "g" in js_to_string(args[1]),
                "lastIndex": 0.0,
            })),
            "setTimeout": self._fn("setTimeout", self._set_timer),
            "setInterval": self._fn("setInterval", self._set_timer),
            "clearTimeout": self._fn("clearTimeout", self._noop),
            "clearInterval": self._fn("clearInterval", self._noop),
            "eval": self._fn("eval", self._eval),
            "Function": self._fn("Function", self._function_ctor),
            "fetch": self._fn("fetch", self._fetch),
        })
        for err_name in ("Error", "TypeError", "RangeError", "SyntaxError",
                         "ReferenceError", "EvalError", "URIError"):
            def build_error(this, args, _n=err_name):
                return make_error(_n, js_to_string(args[0]) if args else "")
            g[err_name] = self._quiet_fn(err_name, build_error)
        # exec family exists in both modes; in the browser it is a logged no-op
        browser_noop = self.mode == "browser"
        for name in ("exec", "execFile", "execSync", "spawnSync"):
            g[name] = self._exec_family(name, browser_noop=browser_noop)

    def _install_browser(self, g: dict) -> None:
        document = self._build_document()
        g.update({
            "document": document,
            "chrome": self._build_chrome(),
            "$": self._build_jquery(),
            "navigator": JSObject({
                "userAgent": "Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36 "
                             "(KHTML, like Gecko) Chrome/120.0.0.0 Safari/537.36",
                "platform": "Linux x86_64",
                "language": "en-US",
                "languages": JSArray(["en-US", "en"]),
                "webdriver": False,
                "appVersion": "5.0 (X11)",
                "hardwareConcurrency": 4.0,
                "geolocation": JSObject({
                    "getCurrentPosition": self._fn(
                        "navigator.geolocation.getCurrentPosition",
                        self._geo_position),
                }),
            }),
            "screen": JSObject({"width": 1280.0, "height": 800.0,
                                "availWidth": 1280.0, "availHeight": 800.0}),
            "location": JSObject({"href": "https://example.com/",
                                  "hostname": "example.com",
                                  "protocol": "https:", "pathname": "/"}),
            "innerWidth": 1280.0,
            "innerHeight": 800.0,
            "outerWidth": 1280.0,
            "outerHeight": 800.0,
            "localStorage": JSObject({
                "getItem": self._fn("localStorage.getItem", lambda this, args: None),
                "setItem": self._fn("localStorage.setItem", self._noop),
                "removeItem": self._fn("localStorage.removeItem", self._noop),
                "clear": self._fn("localStorage.clear", self._noop),
            }),
            "Notification": JSObject({
                "permission": "default",
                "requestPermission": self._fn("Notification.requestPermission",
                                              self._noop),
            }),
            "addEventListener": self._fn("addEventListener", self._add_event_listener),
            "removeEventListener": self._quiet_fn("removeEventListener", self._noop),
            "alert": self._fn("alert", self._noop),
            "confirm": self._fn("confirm", lambda this, args: False),
            "prompt": self._fn("prompt", lambda this, args: ""),
        })
        g["browser"] = g["chrome"]

    def _geo_position(self, this, args):
        position = JSObject({"coords": JSObject({"latitude": 0.0, "longitude": 0.0,
                                                 "accuracy": 1.0})})
        self._call_user(args[0] if args else UNDEFINED, [position])
        return UNDEFINED

    def _install_npm(self, g: dict) -> None:
        g.update({
            "require": self._fn("require", self._require),
            "process": JSObject({
                "env": JSObject({"NODE_ENV": "production", "HOME": "/home/user",
                                 "PATH": "/usr/bin:/bin"}),
                "platform": "linux",
                "argv": JSArray(["node", "index.js"]),
                "version": "v18.0.0",
                "cwd": self._quiet_fn("process.cwd", lambda this, args: "/app"),
                "exit": self._fn("process.exit", self._noop),
            }),
            "module": JSObject({"exports": JSObject()}),
            "exports": JSObject(),
            "__dirname": "/app",
            "__filename": "/app/index.js",
            "urlopen": self._fn("urlopen", self._urlopen),
            "global": None,   # patched below
        })

    def build_global_env(self) -> Environment:
        """Fresh global scope with the mode's full host surface installed."""
        global_object = JSObject()
        g = global_object.properties
        self._install_common(g)
        if self.mode == "browser":
            self._install_browser(g)
            g["window"] = global_object
            g["self"] = global_object
            g["top"] = global_object
        else:
            self._install_npm(g)
            g["global"] = global_object
        g["globalThis"] = global_object
        self.global_object = global_object
        return Environment(parent=None, bindings=g)


def json_to_js(doc):
    """Parsed-JSON → interpreter values (dict/list → object/array wrappers)."""
    if isinstance(doc, bool) or doc is None:
        return doc
    if isinstance(doc, (int, float)):
        return float(doc)
    if isinstance(doc, str):
        return doc
    if isinstance(doc, list):
        return JSArray([json_to_js(v) for v in doc])
    if isinstance(doc, dict):
        return JSObject({k: json_to_js(v) for k, v in doc.items()})
    raise ValueError("unsupported JSON payload %r" % type(doc))


def js_json_stringify(value, depth: int = 32):
    if depth <= 0 or value is UNDEFINED or isinstance(value, (JSFunction, HostFunction)):
        return UNDEFINED
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        import math as _math
        if _math.isnan(value) or _math.isinf(value):
            return "null"
        return js_number_to_string(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, JSArray):
        parts = []
        for item in value.elements:
            inner = js_json_stringify(item, depth - 1)
            parts.append("null" if inner is UNDEFINED else inner)
        return "[%s]" % ",".join(parts)
    if isinstance(value, JSObject):
        parts = []
        for key, item in value.properties.items():
            inner = js_json_stringify(item, depth - 1)
            if inner is not UNDEFINED:
                parts.append("%s:%s" % (json.dumps(key), inner))
        return "{%s}" % ",".join(parts)
    return UNDEFINED


# -- builtin members on primitives ---------------------------------------------


def regex_parts(source_text: str) -> tuple[str, str]:
    """Split a /pattern/flags literal into (pattern, flags)."""
    end = source_text.rfind("/")
    return source_text[1:end], source_text[end + 1:]


def _compile_js_regex(pattern: str, flags: str):
    py_flags = 0
    if "i" in flags:
        py_flags |= re.IGNORECASE
    if "m" in flags:
        py_flags |= re.MULTILINE
    if "s" in flags:
        py_flags |= re.DOTALL
    try:
        return re.compile(pattern, py_flags)
    except re.error:
        return None


def _as_regex(value) -> Optional[tuple[str, str]]:
    if isinstance(value, JSObject) and value.properties.get("__regex__") is True:
        return js_to_string(value.get("source")), js_to_string(value.get("flags"))
    return None


def make_regex_object(source_text: str) -> JSObject:
    pattern, flags = regex_parts(source_text)
    return JSObject({"__regex__": True, "source": pattern, "flags": flags,
                     "global": "g" in flags, "lastIndex": 0.0})


def string_member(world: HostWorld, text: str, name: str):
    if name == "length":
        return float(len(text))
    if name.isdigit():
        index = int(name)
        return text[index] if index < len(text) else UNDEFINED

    def method(impl):
        return HostFunction("String." + name, impl)

    if name == "indexOf":
        return method(lambda this, args: float(text.find(js_to_string(args[0] if args else UNDEFINED))))
    if name == "lastIndexOf":
        return method(lambda this, args: float(text.rfind(js_to_string(args[0] if args else UNDEFINED))))
    if name == "includes":
        return method(lambda this, args: js_to_string(args[0] if args else UNDEFINED) in text)
    if name == "startsWith":
        return method(lambda this, args: text.startswith(js_to_string(args[0] if args else UNDEFINED)))
    if name == "endsWith":
        return method(lambda this, args: text.endswith(js_to_string(args[0] if args else UNDEFINED)))
    if name == "toLowerCase":
        return method(lambda this, args: text.lower())
    if name == "toUpperCase":
        return method(lambda this, args: text.upper())
    if name == "trim":
        return method(lambda this, args: text.strip())
    if name == "charAt":
        def char_at(this, args):
            i = int(js_to_number(args[0])) if args else 0
            return text[i] if 0 <= i < len(text) else ""
        return method(char_at)
    if name == "charCodeAt":
        def char_code_at(this, args):
            i = int(js_to_number(args[0])) if args else 0
            return float(ord(text[i])) if 0 <= i < len(text) else float("nan")
        return method(char_code_at)
    if name == "slice":
        def do_slice(this, args):
            start = int(js_to_number(args[0])) if args else 0
            end = int(js_to_number(args[1])) if len(args) > 1 else len(text)
            return text[slice(*_js_slice_bounds(start, end, len(text)))]
        return method(do_slice)
    if name == "substring":
        def substring(this, args):
            start = max(0, int(js_to_number(args[0]))) if args else 0
            end = max(0, int(js_to_number(args[1]))) if len(args) > 1 else len(text)
            lo, hi = sorted((min(start, len(text)), min(end, len(text))))
            return text[lo:hi]
        return method(substring)
    if name == "split":
        def split(this, args):
            if not args or args[0] is UNDEFINED:
                return JSArray([text])
            sep = js_to_string(args[0])
            if sep == "":
                return JSArray(list(text))
            return JSArray(text.split(sep))
        return method(split)
    if name == "concat":
        return method(lambda this, args: text + "".join(js_to_string(a) for a in args))
    if name == "repeat":
        return method(lambda this, args: text * max(0, int(js_to_number(args[0] if args else 0.0))))
    if name == "match":
        def match(this, args):
            pattern = args[0] if args else UNDEFINED
            rx = _as_regex(pattern)
            source, flags = rx if rx else (js_to_string(pattern), "")
            compiled = _compile_js_regex(source, flags)
            if compiled is None:
                return None
            if "g" in flags:
                found = compiled.findall(text)
                return JSArray([f if isinstance(f, str) else f[0] for f in found]) \
                    if found else None
            m = compiled.search(text)
            if m is None:
                return None
            return JSArray([m.group(0)] + [g if g is not None else UNDEFINED
                                           for g in m.groups()])
        return method(match)
    if name == "replace":
        def replace(this, args):
            pattern = args[0] if args else UNDEFINED
            repl = js_to_string(args[1] if len(args) > 1 else UNDEFINED)
            rx = _as_regex(pattern)
            if rx:
                compiled = _compile_js_regex(rx[0], rx[1])
                if compiled is None:
                    return text
                return compiled.sub(repl.replace("\\", "\\\\"), text,
                                    count=0 if "g" in rx[1] else 1)
            return text.replace(js_to_string(pattern), repl, 1)
        return method(replace)
    if name == "toString":
        return method(lambda this, args: text)
    return UNDEFINED


def _js_slice_bounds(start: int, end: int, length: int) -> tuple[int, int]:
    if start < 0:
        start = max(0, length + start)
    if end < 0:
        end = max(0, length + end)
    return min(start, length), min(end, length)


_RADIX_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def number_member(world: HostWorld, num: float, name: str):
    if name == "toString":
        def to_string(this, args):
            radix = int(js_to_number(args[0])) if args else 10
            if radix == 10 or num != num or num in (float("inf"), float("-inf")) \
                    or num != int(num):
                return js_number_to_string(num)
            n = int(num)
            if n == 0:
                return "0"
            sign = "-" if n < 0 else ""
            n = abs(n)
            digits = []
            while n:
                digits.append(_RADIX_DIGITS[n % radix])
                n //= radix
            return sign + "".join(reversed(digits))
        return HostFunction("Number.toString", to_string)
    if name == "toFixed":
        def to_fixed(this, args):
            places = int(js_to_number(args[0])) if args else 0
            return "%.*f" % (places, num)
        return HostFunction("Number.toFixed", to_fixed)
    return UNDEFINED


def array_member(world: HostWorld, array: JSArray, name: str):
    items = array.elements
    if name == "length":
        return float(len(items))
    if name.isdigit():
        index = int(name)
        return items[index] if index < len(items) else UNDEFINED

    def method(impl):
        return HostFunction("Array." + name, impl)

    if name == "push":
        def push(this, args):
            items.extend(args)
            return float(len(items))
        return method(push)
    if name == "pop":
        return method(lambda this, args: items.pop() if items else UNDEFINED)
    if name == "shift":
        return method(lambda this, args: items.pop(0) if items else UNDEFINED)
    if name == "unshift":
        def unshift(this, args):
            items[:0] = args
            return float(len(items))
        return method(unshift)
    if name == "indexOf":
        def index_of(this, args):
            from .values import js_strict_equals
            target = args[0] if args else UNDEFINED
            for i, item in enumerate(items):
                if js_strict_equals(item, target):
                    return float(i)
            return -1.0
        return method(index_of)
    if name == "includes":
        def includes(this, args):
            from .values import js_strict_equals
            target = args[0] if args else UNDEFINED
            return any(js_strict_equals(item, target) for item in items)
        return method(includes)
    if name == "join":
        def join(this, args):
            sep = js_to_string(args[0]) if args and args[0] is not UNDEFINED else ","
            return sep.join("" if v is None or v is UNDEFINED else js_to_string(v)
                            for v in items)
        return method(join)
    if name == "slice":
        def do_slice(this, args):
            start = int(js_to_number(args[0])) if args else 0
            end = int(js_to_number(args[1])) if len(args) > 1 else len(items)
            lo, hi = _js_slice_bounds(start, end, len(items))
            return JSArray(items[lo:hi])
        return method(do_slice)
    if name == "concat":
        def concat(this, args):
            merged = list(items)
            for arg in args:
                if isinstance(arg, JSArray):
                    merged.extend(arg.elements)
                else:
                    merged.append(arg)
            return JSArray(merged)
        return method(concat)
    if name == "reverse":
        def reverse(this, args):
            items.reverse()
            return array
        return method(reverse)
    if name == "forEach":
        def for_each(this, args):
            fn = args[0] if args else UNDEFINED
            for i, item in enumerate(list(items)):
                world.call_fn(fn, UNDEFINED, [item, float(i), array])
            return UNDEFINED
        return method(for_each)
    if name == "map":
        def do_map(this, args):
            fn = args[0] if args else UNDEFINED
            return JSArray([world.call_fn(fn, UNDEFINED, [item, float(i), array])
                            for i, item in enumerate(list(items))])
        return method(do_map)
    if name == "filter":
        def do_filter(this, args):
            fn = args[0] if args else UNDEFINED
            return JSArray([item for i, item in enumerate(list(items))
                            if js_truthy(world.call_fn(fn, UNDEFINED,
                                                       [item, float(i), array]))])
        return method(do_filter)
    if name == "find":
        def find(this, args):
            fn = args[0] if args else UNDEFINED
            for i, item in enumerate(list(items)):
                if js_truthy(world.call_fn(fn, UNDEFINED, [item, float(i), array])):
                    return item
            return UNDEFINED
        return method(find)
    if name == "toString":
        return method(lambda this, args: js_to_string(array))
    return UNDEFINED
