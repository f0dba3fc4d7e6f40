"""Tree-walking interpreter with branch forcing.

Programs run normally except at conditions the scan plan marked: there the
guard is evaluated once, the taken branch runs against the live environment,
and after it completes every non-taken branch runs against a deep clone of
the then-current environment. One ForcedExecEvent is emitted per dynamic
encounter of a marked condition, even when the live branch throws.

Dynamically produced code (eval, Function, DOM script insertion, fetched
script bodies, local requires) is parsed, planned, and executed recursively;
each child script gets its own record and provenance link.
"""
from __future__ import annotations

import math
from typing import Optional

from ..catalog import ApiCatalog, default_catalog
from ..frontend import LexError, NodeKind, ParseError, UnsupportedSyntax, parse
from ..scanner import (
    DEFAULT_SCAN_LIMIT,
    ForcedPlan,
    condition_kind,
    guard_expression,
    mark_forced_blocks,
)
from ..taxonomy import collect_terms
from ..tracking import (
    BranchOutcome,
    ForcedExecEvent,
    Provenance,
    Root,
    ScriptRecord,
)
from .environment import Environment, UnboundName, clone_environment
from .host import HostWorld, StepBudgetExhausted, make_regex_object
from .values import (
    UNDEFINED,
    HostFunction,
    JSArray,
    JSFunction,
    JSObject,
    JSThrow,
    is_callable,
    js_add,
    js_brief,
    js_compare,
    js_equals,
    js_number_to_string,
    js_strict_equals,
    js_to_int32,
    js_to_number,
    js_to_string,
    js_to_uint32,
    js_truthy,
    js_typeof,
    make_error,
)

MAX_CALL_DEPTH = 200

_LOGICAL_OPS = ("&&", "||", "??")


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Return(Exception):
    def __init__(self, value) -> None:
        super().__init__()
        self.value = value


def throw_text(value) -> str:
    """Human-oriented one-liner for a thrown value."""
    if isinstance(value, JSObject):
        name = value.get("name")
        message = value.get("message")
        if isinstance(name, str):
            if isinstance(message, str) and message:
                return "%s: %s" % (name, message)
            return name
    return js_brief(value)


class Interpreter:
    """One engine instance per analysis job; shares nothing mutable."""

    def __init__(self, world: HostWorld, catalog: Optional[ApiCatalog] = None,
                 force: bool = True,
                 scan_limit: int = DEFAULT_SCAN_LIMIT) -> None:
        self.world = world
        self.catalog = catalog if catalog is not None else default_catalog(world.mode)
        self.force = force
        self.scan_limit = scan_limit
        self.plans: dict[str, Optional[ForcedPlan]] = {}
        self._ctx: list[tuple[ScriptRecord, Optional[ForcedPlan]]] = []
        self._line_sinks: list[set] = []
        self._call_depth = 0
        self._global_env: Optional[Environment] = None
        world.call_fn = self.call_function
        world.spawn_fn = self.spawn_child

    # -- entry points --------------------------------------------------------

    def run(self, text: str, path: str = "input.js") -> ScriptRecord:
        env = self.world.build_global_env()
        self._global_env = env
        try:
            record = self.spawn_child(text, Root(path), env=env)
            self.world.fire_listeners()
        except StepBudgetExhausted:
            # attribute exhaustion to the root this call created, not to a
            # sibling entry point that ran earlier in the same world
            roots = [r for r in self.world.log.scripts.values()
                     if isinstance(r.provenance, Root)]
            record = roots[-1] if roots else None
            if record is not None and record.error is None:
                record.error = "step budget exhausted"
        return record

    def spawn_child(self, text: str, provenance: Provenance,
                    env: Optional[Environment] = None) -> Optional[ScriptRecord]:
        if not isinstance(provenance, Root):
            parent_depth = self._chain_depth(provenance.parent_id)
            if parent_depth + 1 > self.world.max_depth:
                self.world.depth_skips += 1
                return None
        record = self.world.log.new_script(provenance, text.count("\n") + 1)
        if not isinstance(provenance, Root):
            parent = self.world.log.scripts.get(provenance.parent_id)
            if parent is not None:
                parent.children.append(record.script_id)
        try:
            program = parse(text)
        except (LexError, ParseError, UnsupportedSyntax) as exc:
            record.parse_failed = True
            record.error = str(exc)
            return record
        plan = mark_forced_blocks(program, self.catalog, self.scan_limit) \
            if self.force else None
        self.plans[record.script_id] = plan
        if env is None:
            env = self.world.current_env.root() \
                if self.world.current_env is not None else self._global_env
        self._execute_program(program, record, plan, env)
        return record

    def _chain_depth(self, script_id: str) -> int:
        depth = 1
        record = self.world.log.scripts.get(script_id)
        while record is not None and not isinstance(record.provenance, Root):
            depth += 1
            record = self.world.log.scripts.get(record.provenance.parent_id)
        return depth

    def _execute_program(self, program, record: ScriptRecord,
                         plan: Optional[ForcedPlan], env: Environment) -> None:
        self._ctx.append((record, plan))
        prev_sid = self.world.current_script_id
        prev_env = self.world.current_env
        self.world.current_script_id = record.script_id
        self.world.current_env = env
        try:
            self._hoist(program, env, record.script_id)
            try:
                for stmt in program.children:
                    self._exec(stmt, env)
            except _Return:
                pass                      # top-level return: graceful end
            except (_Break, _Continue):
                pass
            except JSThrow as exc:
                record.error = throw_text(exc.value)
        finally:
            self.world.current_script_id = prev_sid
            self.world.current_env = prev_env
            self._ctx.pop()

    # -- function calls --------------------------------------------------------

    def call_function(self, fn, this, args: list):
        if isinstance(fn, HostFunction):
            return fn.fn(this, args)
        if not isinstance(fn, JSFunction):
            raise JSThrow(make_error("TypeError",
                                     "%s is not a function" % js_brief(fn)))
        if self._call_depth >= MAX_CALL_DEPTH:
            raise JSThrow(make_error("RangeError",
                                     "Maximum call stack size exceeded"))
        scope = Environment(parent=fn.env)
        for i, param in enumerate(fn.params):
            scope.declare(param, args[i] if i < len(args) else UNDEFINED)
        if not fn.is_arrow:
            receiver = this if this is not UNDEFINED and this is not None \
                else (self.world.global_object or UNDEFINED)
            scope.declare("this", receiver)
            scope.declare("arguments", JSArray(list(args)))
        self._hoist(fn.body, scope, fn.script_id)
        record = self.world.log.scripts[fn.script_id]
        plan = self.plans.get(fn.script_id)
        self._ctx.append((record, plan))
        prev_sid = self.world.current_script_id
        self.world.current_script_id = fn.script_id
        self._call_depth += 1
        try:
            try:
                for stmt in fn.body.children:
                    self._exec(stmt, scope)
            except _Return as sig:
                return sig.value
            return UNDEFINED
        finally:
            self._call_depth -= 1
            self.world.current_script_id = prev_sid
            self._ctx.pop()

    # -- scaffolding -------------------------------------------------------------

    def _step(self, node) -> None:
        self.world.count_step()
        line = node.span.start_line
        self.world.current_line = line
        self._ctx[-1][0].executed_lines.add(line)
        for sink in self._line_sinks:
            sink.add(line)

    def _hoist(self, root, env: Environment, script_id: str) -> None:
        """Bind function declarations and var names before execution.

        Descends through statements and blocks but never into nested
        function literals; their bodies hoist at call time.
        """
        for node in root.children:
            kind = node.kind
            if kind is NodeKind.FUNCTION_DECLARATION:
                literal = node.children[0]
                fn = JSFunction(node.payload["name"], literal.payload["params"],
                                literal.children[0], env, False, script_id)
                env.declare(node.payload["name"], fn)
                continue
            if kind is NodeKind.FUNCTION_LITERAL:
                continue
            if kind is NodeKind.VARIABLE_DECLARATION:
                if node.payload.get("decl_kind") == "var":
                    for decl in node.children:
                        if decl.kind is NodeKind.IDENTIFIER:
                            env.declare_if_absent(decl.payload["name"], UNDEFINED)
                        else:
                            env.declare_if_absent(
                                decl.children[0].payload["name"], UNDEFINED)
                continue
            self._hoist(node, env, script_id)

    def _marked_result(self, node):
        plan = self._ctx[-1][1]
        if plan is None:
            return None
        return plan.result_for(node)

    def _begin_event(self, node, scan_result) -> ForcedExecEvent:
        guard_node = guard_expression(node)
        terms = collect_terms(guard_node) if guard_node is not None else set()
        return ForcedExecEvent(
            script_id=self._ctx[-1][0].script_id,
            line=node.span.start_line,
            kind=condition_kind(node),
            apis=tuple(sorted(scan_result.api_names())),
            guard="(unevaluated)",
            guard_terms=frozenset(terms),
        )

    def _eval_guard(self, node, env):
        """Evaluate a marked condition's guard, watching for fetch taint."""
        world = self.world
        world.guard_depth += 1
        saved = world.guard_saw_taint
        world.guard_saw_taint = False
        try:
            value = self._eval(node, env)
            tainted = world.guard_saw_taint or world.is_tainted(value)
        finally:
            inner = world.guard_saw_taint
            world.guard_depth -= 1
            world.guard_saw_taint = saved or inner
        return value, tainted

    def _run_live(self, event: ForcedExecEvent, name: str, thunk):
        outcome = BranchOutcome(name, "live")
        self._line_sinks.append(outcome.lines)
        try:
            return thunk()
        except JSThrow as exc:
            outcome.threw = throw_text(exc.value)
            raise
        finally:
            self._line_sinks.pop()
            event.branches.append(outcome)

    def _run_clone(self, event: ForcedExecEvent, name: str,
                   env: Environment, runner) -> None:
        outcome = BranchOutcome(name, "clone")
        rng_state = self.world.rng.getstate()
        clone_env = clone_environment(env, {})
        self._line_sinks.append(outcome.lines)
        try:
            runner(clone_env)
        except JSThrow as exc:
            outcome.threw = throw_text(exc.value)
        except (_Break, _Continue, _Return):
            pass                     # control flow may not escape a clone
        finally:
            self._line_sinks.pop()
            self.world.rng.setstate(rng_state)
            event.branches.append(outcome)

    # -- statements ---------------------------------------------------------------

    def _exec(self, node, env: Environment) -> None:
        self._step(node)
        kind = node.kind
        if kind is NodeKind.EXPRESSION_STATEMENT:
            self._eval(node.children[0], env)
        elif kind is NodeKind.VARIABLE_DECLARATION:
            self._exec_var_decl(node, env)
        elif kind is NodeKind.BLOCK or kind is NodeKind.PROGRAM:
            for child in node.children:
                self._exec(child, env)
        elif kind is NodeKind.IF_STATEMENT:
            self._exec_if(node, env)
        elif kind is NodeKind.WHILE_STATEMENT:
            self._exec_while(node, env)
        elif kind is NodeKind.DO_WHILE_STATEMENT:
            self._exec_do_while(node, env)
        elif kind is NodeKind.FOR_STATEMENT:
            self._exec_for(node, env)
        elif kind is NodeKind.FOR_IN_STATEMENT:
            self._exec_for_in(node, env)
        elif kind is NodeKind.FOR_OF_STATEMENT:
            self._exec_for_of(node, env)
        elif kind is NodeKind.SWITCH_STATEMENT:
            self._exec_switch(node, env)
        elif kind is NodeKind.TRY_CATCH_STATEMENT:
            self._exec_try(node, env)
        elif kind is NodeKind.RETURN:
            value = self._eval(node.children[0], env) if node.children else UNDEFINED
            raise _Return(value)
        elif kind is NodeKind.BREAK:
            raise _Break()
        elif kind is NodeKind.CONTINUE:
            raise _Continue()
        elif kind is NodeKind.THROW:
            raise JSThrow(self._eval(node.children[0], env))
        elif kind is NodeKind.FUNCTION_DECLARATION:
            pass                               # bound during hoisting
        elif kind is NodeKind.EMPTY_STATEMENT:
            pass
        else:
            self._eval(node, env)

    def _exec_var_decl(self, node, env: Environment) -> None:
        for decl in node.children:
            if decl.kind is NodeKind.IDENTIFIER:
                env.declare_if_absent(decl.payload["name"], UNDEFINED)
            else:
                name = decl.children[0].payload["name"]
                env.declare(name, self._eval(decl.children[1], env))

    def _exec_if(self, node, env: Environment) -> None:
        kids = node.children
        result = self._marked_result(node)
        if result is None:
            if js_truthy(self._eval(kids[0], env)):
                self._exec(kids[1], env)
            elif len(kids) > 2:
                self._exec(kids[2], env)
            return
        event = self._begin_event(node, result)
        try:
            value, tainted = self._eval_guard(kids[0], env)
            event.guard = js_brief(value)
            event.guard_fetch_tainted = tainted
            taken = js_truthy(value)
            if taken:
                self._run_live(event, "consequent",
                               lambda: self._exec(kids[1], env))
            elif len(kids) > 2:
                self._run_live(event, "alternate",
                               lambda: self._exec(kids[2], env))
            if not taken:
                self._run_clone(event, "consequent", env,
                                lambda cenv: self._exec(kids[1], cenv))
            elif len(kids) > 2:
                self._run_clone(event, "alternate", env,
                                lambda cenv: self._exec(kids[2], cenv))
        finally:
            self.world.log.log_forced(event)

    def _exec_while(self, node, env: Environment) -> None:
        test, body = node.children
        result = self._marked_result(node)
        if result is None:
            while js_truthy(self._eval(test, env)):
                try:
                    self._exec(body, env)
                except _Break:
                    break
                except _Continue:
                    continue
            return
        event = self._begin_event(node, result)
        try:
            value, tainted = self._eval_guard(test, env)
            event.guard = js_brief(value)
            event.guard_fetch_tainted = tainted
            if js_truthy(value):
                def live_loop():
                    while True:
                        try:
                            self._exec(body, env)
                        except _Break:
                            break
                        except _Continue:
                            pass
                        if not js_truthy(self._eval(test, env)):
                            break
                self._run_live(event, "body", live_loop)
            else:
                self._run_clone(event, "body", env,
                                lambda cenv: self._exec(body, cenv))
        finally:
            self.world.log.log_forced(event)

    def _exec_do_while(self, node, env: Environment) -> None:
        body, test = node.children
        result = self._marked_result(node)
        if result is None:
            while True:
                try:
                    self._exec(body, env)
                except _Break:
                    break
                except _Continue:
                    pass
                if not js_truthy(self._eval(test, env)):
                    break
            return
        # the body always runs at least once live, so nothing is forced;
        # the encounter is still recorded
        event = self._begin_event(node, result)
        try:
            def live_loop():
                first = True
                while True:
                    try:
                        self._exec(body, env)
                    except _Break:
                        break
                    except _Continue:
                        pass
                    if first:
                        value, tainted = self._eval_guard(test, env)
                        event.guard = js_brief(value)
                        event.guard_fetch_tainted = tainted
                        first = False
                    else:
                        value = self._eval(test, env)
                    if not js_truthy(value):
                        break
            self._run_live(event, "body", live_loop)
        finally:
            self.world.log.log_forced(event)

    def _unpack_for(self, node):
        kids = node.children
        idx = 0
        init = test = update = None
        if node.payload["has_init"]:
            init = kids[idx]
            idx += 1
        if node.payload["has_test"]:
            test = kids[idx]
            idx += 1
        if node.payload["has_update"]:
            update = kids[idx]
            idx += 1
        return init, test, update, kids[-1]

    def _exec_for(self, node, env: Environment) -> None:
        init, test, update, body = self._unpack_for(node)
        result = self._marked_result(node)
        if init is not None:
            if init.kind is NodeKind.VARIABLE_DECLARATION:
                self._exec(init, env)
            else:
                self._eval(init, env)
        if result is None:
            while True:
                if test is not None and not js_truthy(self._eval(test, env)):
                    break
                try:
                    self._exec(body, env)
                except _Break:
                    break
                except _Continue:
                    pass
                if update is not None:
                    self._eval(update, env)
            return
        event = self._begin_event(node, result)
        try:
            if test is not None:
                value, tainted = self._eval_guard(test, env)
                event.guard = js_brief(value)
                event.guard_fetch_tainted = tainted
                entered = js_truthy(value)
            else:
                event.guard = "(none)"
                entered = True
            if entered:
                def live_loop():
                    while True:
                        try:
                            self._exec(body, env)
                        except _Break:
                            break
                        except _Continue:
                            pass
                        if update is not None:
                            self._eval(update, env)
                        if test is not None and not js_truthy(self._eval(test, env)):
                            break
                self._run_live(event, "body", live_loop)
            else:
                self._run_clone(event, "body", env,
                                lambda cenv: self._exec(body, cenv))
        finally:
            self.world.log.log_forced(event)

    def _enum_keys(self, value) -> list:
        if isinstance(value, JSArray):
            return [js_number_to_string(float(i)) for i in range(len(value.elements))]
        if isinstance(value, JSObject):
            return list(value.properties.keys())
        if isinstance(value, str):
            return [js_number_to_string(float(i)) for i in range(len(value))]
        return []

    def _iter_values(self, value, node) -> list:
        if isinstance(value, JSArray):
            return list(value.elements)
        if isinstance(value, str):
            return list(value)
        raise JSThrow(make_error("TypeError", "%s is not iterable" % js_brief(value)))

    def _bind_loop_target(self, target, value, env: Environment,
                          decl_kind: Optional[str]) -> None:
        if target.kind is NodeKind.IDENTIFIER:
            name = target.payload["name"]
            if decl_kind:
                env.declare(name, value)
            else:
                env.assign(name, value)
        else:
            self._assign_to(target, value, env)

    def _exec_loop_over(self, node, env: Environment, items_of) -> None:
        target, source, body = node.children
        decl_kind = node.payload.get("decl_kind")
        result = self._marked_result(node)
        if result is None:
            items = items_of(self._eval(source, env), node)
            for item in items:
                self._bind_loop_target(target, item, env, decl_kind)
                try:
                    self._exec(body, env)
                except _Break:
                    break
                except _Continue:
                    continue
            return
        event = self._begin_event(node, result)
        try:
            value, tainted = self._eval_guard(source, env)
            event.guard = js_brief(value)
            event.guard_fetch_tainted = tainted
            items = items_of(value, node)
            if items:
                def live_loop():
                    for item in items:
                        self._bind_loop_target(target, item, env, decl_kind)
                        try:
                            self._exec(body, env)
                        except _Break:
                            break
                        except _Continue:
                            continue
                self._run_live(event, "body", live_loop)
            else:
                def forced_body(cenv):
                    self._bind_loop_target(target, UNDEFINED, cenv, decl_kind)
                    self._exec(body, cenv)
                self._run_clone(event, "body", env, forced_body)
        finally:
            self.world.log.log_forced(event)

    def _exec_for_in(self, node, env: Environment) -> None:
        self._exec_loop_over(node, env, lambda v, n: self._enum_keys(v))

    def _exec_for_of(self, node, env: Environment) -> None:
        self._exec_loop_over(node, env, self._iter_values)

    def _case_statements(self, case) -> list:
        if case.payload["is_default"]:
            return case.children
        return case.children[1:]

    def _run_switch_live(self, disc, cases, env: Environment,
                         executed: Optional[set]) -> None:
        entry = None
        for i, case in enumerate(cases):
            if not case.payload["is_default"]:
                if js_strict_equals(disc, self._eval(case.children[0], env)):
                    entry = i
                    break
        if entry is None:
            for i, case in enumerate(cases):
                if case.payload["is_default"]:
                    entry = i
                    break
        if entry is None:
            return
        try:
            for i in range(entry, len(cases)):
                if executed is not None:
                    executed.add(i)
                for stmt in self._case_statements(cases[i]):
                    self._exec(stmt, env)
        except _Break:
            pass

    def _exec_switch(self, node, env: Environment) -> None:
        disc_node = node.children[0]
        cases = node.children[1:]
        result = self._marked_result(node)
        if result is None:
            disc = self._eval(disc_node, env)
            self._run_switch_live(disc, cases, env, None)
            return
        event = self._begin_event(node, result)
        try:
            disc, tainted = self._eval_guard(disc_node, env)
            event.guard = js_brief(disc)
            event.guard_fetch_tainted = tainted
            executed: set = set()
            self._run_live(event, "cases",
                           lambda: self._run_switch_live(disc, cases, env, executed))
            for i, case in enumerate(cases):
                if i in executed:
                    continue
                def forced_case(cenv, c=case):
                    for stmt in self._case_statements(c):
                        self._exec(stmt, cenv)
                self._run_clone(event, "case%d" % i, env, forced_case)
        finally:
            self.world.log.log_forced(event)

    def _exec_catch(self, block, param: Optional[str], error_value,
                    env: Environment) -> None:
        if not param:
            self._exec(block, env)
            return
        had = param in env.bindings
        saved = env.bindings.get(param)
        env.bindings[param] = error_value
        try:
            self._exec(block, env)
        finally:
            if had:
                env.bindings[param] = saved
            else:
                env.bindings.pop(param, None)

    def _exec_try(self, node, env: Environment) -> None:
        has_catch = node.payload["has_catch"]
        has_finally = node.payload["has_finally"]
        param = node.payload.get("catch_param")
        try_block = node.children[0]
        catch_block = node.children[1] if has_catch else None
        finally_block = node.children[-1] if has_finally else None
        result = self._marked_result(node)
        if result is None:
            try:
                try:
                    self._exec(try_block, env)
                except JSThrow as exc:
                    if catch_block is None:
                        raise
                    self._exec_catch(catch_block, param, exc.value, env)
            finally:
                if finally_block is not None:
                    self._exec(finally_block, env)
            return
        event = self._begin_event(node, result)
        event.guard = "no-exception"
        try:
            try:
                caught = False
                try:
                    self._run_live(event, "try",
                                   lambda: self._exec(try_block, env))
                except JSThrow as exc:
                    caught = True
                    event.guard = "exception"
                    if catch_block is None:
                        raise
                    self._run_live(
                        event, "catch",
                        lambda: self._exec_catch(catch_block, param, exc.value, env))
                if not caught and catch_block is not None:
                    synthetic = make_error("Error", "forced exception")
                    self._run_clone(
                        event, "catch", env,
                        lambda cenv: self._exec_catch(catch_block, param,
                                                      synthetic, cenv))
            finally:
                if finally_block is not None:
                    self._exec(finally_block, env)
        finally:
            self.world.log.log_forced(event)

    # -- expressions ---------------------------------------------------------------

    def _eval(self, node, env: Environment):
        self._step(node)
        kind = node.kind
        if kind is NodeKind.LITERAL:
            return self._eval_literal(node)
        if kind is NodeKind.IDENTIFIER:
            return self._eval_identifier(node, env)
        if kind is NodeKind.CALL:
            return self._eval_call(node, env)
        if kind is NodeKind.MEMBER_ACCESS:
            base = self._eval(node.children[0], env)
            return self._member_get(base, self._member_name(node, env))
        if kind is NodeKind.ASSIGNMENT:
            value = self._eval(node.children[1], env)
            self._assign_to(node.children[0], value, env)
            return value
        if kind is NodeKind.BINARY_OPERATION:
            return self._eval_binary(node, env)
        if kind is NodeKind.COMPARE_OPERATION:
            return self._eval_compare(node, env)
        if kind is NodeKind.UNARY_OPERATION:
            return self._eval_unary(node, env)
        if kind is NodeKind.NARY_OPERATION:
            return self._eval_nary(node, env)
        if kind is NodeKind.CONDITIONAL:
            return self._eval_conditional(node, env)
        if kind is NodeKind.FUNCTION_LITERAL:
            return JSFunction(node.payload.get("name") or "",
                              node.payload["params"], node.children[0], env,
                              node.payload["arrow"],
                              self._ctx[-1][0].script_id)
        if kind is NodeKind.ARRAY_LITERAL:
            return JSArray([self._eval(child, env) for child in node.children])
        if kind is NodeKind.OBJECT_LITERAL:
            return self._eval_object_literal(node, env)
        if kind is NodeKind.TEMPLATE_LITERAL:
            return self._eval_template(node, env)
        if kind is NodeKind.COMPOUND_ASSIGNMENT:
            return self._eval_compound(node, env)
        if kind is NodeKind.COUNT_OPERATION:
            return self._eval_count(node, env)
        if kind is NodeKind.NEW:
            return self._eval_new(node, env)
        raise JSThrow(make_error("SyntaxError",
                                 "cannot evaluate %s" % node.kind.value))

    def _eval_literal(self, node):
        lit_kind = node.payload["kind"]
        if lit_kind == "regex":
            return make_regex_object(node.payload["value"])
        if lit_kind == "undefined":
            return UNDEFINED
        return node.payload["value"]

    def _eval_identifier(self, node, env: Environment):
        name = node.payload["name"]
        try:
            return env.lookup(name)
        except UnboundName:
            if name == "this":
                return self.world.global_object or UNDEFINED
            raise JSThrow(make_error("ReferenceError",
                                     "%s is not defined" % name))

    def _eval_template(self, node, env: Environment) -> str:
        quasis = node.payload["quasis"]
        parts = [quasis[0]]
        for i, expr in enumerate(node.children):
            parts.append(js_to_string(self._eval(expr, env)))
            parts.append(quasis[i + 1])
        return "".join(parts)

    def _eval_object_literal(self, node, env: Environment) -> JSObject:
        obj = JSObject()
        for (key_kind, key_value), child in zip(node.payload["keys"], node.children):
            if key_kind == "num":
                name = js_number_to_string(key_value)
            else:
                name = key_value
            obj.properties[name] = self._eval(child, env)
        return obj

    def _member_name(self, node, env: Environment) -> str:
        if node.payload["computed"]:
            return js_to_string(self._eval(node.children[1], env))
        return node.payload["name"]

    def _member_get(self, base, name: str):
        from .host import array_member, number_member, string_member

        world = self.world
        if base is UNDEFINED or base is None:
            raise JSThrow(make_error(
                "TypeError",
                "Cannot read properties of %s (reading '%s')"
                % ("undefined" if base is UNDEFINED else "null", name)))
        world.note_read(base)
        if isinstance(base, str):
            value = string_member(world, base, name)
        elif isinstance(base, JSArray):
            value = array_member(world, base, name)
        elif isinstance(base, bool):
            value = UNDEFINED
        elif isinstance(base, float):
            value = number_member(world, base, name)
        elif isinstance(base, JSFunction):
            if name == "name":
                value = base.name
            elif name == "length":
                value = float(len(base.params))
            else:
                value = base.properties.get(name, UNDEFINED)
        elif isinstance(base, (JSObject, HostFunction)):
            value = base.properties.get(name, UNDEFINED)
        else:
            value = UNDEFINED
        if world.is_tainted(base) and isinstance(value, (JSObject, JSArray, str)):
            world.taint(value)
        return value

    def _assign_to(self, target, value, env: Environment) -> None:
        if target.kind is NodeKind.IDENTIFIER:
            env.assign(target.payload["name"], value)
            return
        if target.kind is NodeKind.MEMBER_ACCESS:
            base = self._eval(target.children[0], env)
            name = self._member_name(target, env)
            self._assign_member(base, name, value)
            return
        raise JSThrow(make_error("SyntaxError", "invalid assignment target"))

    def _assign_member(self, base, name: str, value) -> None:
        if base is UNDEFINED or base is None:
            raise JSThrow(make_error(
                "TypeError",
                "Cannot set properties of %s (setting '%s')"
                % ("undefined" if base is UNDEFINED else "null", name)))
        if isinstance(base, JSArray):
            if name == "length":
                length = max(0, int(js_to_number(value)))
                current = base.elements
                if length < len(current):
                    del current[length:]
                else:
                    current.extend(UNDEFINED for _ in range(length - len(current)))
            elif name.isdigit():
                index = int(name)
                if index >= len(base.elements):
                    base.elements.extend(
                        UNDEFINED for _ in range(index + 1 - len(base.elements)))
                base.elements[index] = value
            return
        if isinstance(base, (JSObject, JSFunction, HostFunction)):
            base.properties[name] = value

    def _read_target(self, target, env: Environment):
        if target.kind is NodeKind.IDENTIFIER:
            return self._eval_identifier(target, env)
        base = self._eval(target.children[0], env)
        return self._member_get(base, self._member_name(target, env))

    def _eval_compound(self, node, env: Environment):
        op = node.payload["op"][:-1]
        current = self._read_target(node.children[0], env)
        rhs = self._eval(node.children[1], env)
        value = self._apply_binary(op, current, rhs)
        self._assign_to(node.children[0], value, env)
        return value

    def _eval_count(self, node, env: Environment):
        target = node.children[0]
        old = js_to_number(self._read_target(target, env))
        new = old + 1.0 if node.payload["op"] == "++" else old - 1.0
        self._assign_to(target, new, env)
        return new if node.payload["prefix"] else old

    def _eval_call(self, node, env: Environment):
        callee = node.children[0]
        if callee.kind is NodeKind.MEMBER_ACCESS:
            self._step(callee)
            base = self._eval(callee.children[0], env)
            name = self._member_name(callee, env)
            if isinstance(base, JSFunction) and name in ("call", "apply"):
                args = [self._eval(a, env) for a in node.children[1:]]
                this = args[0] if args else UNDEFINED
                if name == "call":
                    return self.call_function(base, this, args[1:])
                rest = args[1].elements if len(args) > 1 and \
                    isinstance(args[1], JSArray) else []
                return self.call_function(base, this, list(rest))
            if isinstance(base, JSFunction) and name == "bind":
                args = [self._eval(a, env) for a in node.children[1:]]
                bound_this = args[0] if args else UNDEFINED
                lead = args[1:]

                def bound(this, call_args, _fn=base, _bt=bound_this, _lead=lead):
                    return self.call_function(_fn, _bt, list(_lead) + list(call_args))

                return HostFunction("bound " + (base.name or ""), bound)
            fn = self._member_get(base, name)
            this = base
        else:
            fn = self._eval(callee, env)
            this = UNDEFINED
        args = [self._eval(a, env) for a in node.children[1:]]
        return self._invoke(fn, this, args, env, node)

    def _invoke(self, fn, this, args: list, env: Environment, node):
        if isinstance(fn, HostFunction):
            self.world.current_env = env
            self.world.current_line = node.span.start_line
            return fn.fn(this, args)
        if isinstance(fn, JSFunction):
            return self.call_function(fn, this, args)
        raise JSThrow(make_error("TypeError",
                                 "%s is not a function" % js_brief(fn)))

    def _eval_new(self, node, env: Environment):
        callee = self._eval(node.children[0], env)
        args = [self._eval(a, env) for a in node.children[1:]]
        if isinstance(callee, HostFunction):
            self.world.current_env = env
            self.world.current_line = node.span.start_line
            return callee.fn(UNDEFINED, args)
        if isinstance(callee, JSFunction):
            this = JSObject()
            result = self.call_function(callee, this, args)
            if isinstance(result, (JSObject, JSArray, JSFunction)):
                return result
            return this
        raise JSThrow(make_error("TypeError",
                                 "%s is not a constructor" % js_brief(callee)))

    def _eval_binary(self, node, env: Environment):
        op = node.payload["op"]
        if op in _LOGICAL_OPS:
            return self._eval_logical(node, env)
        if op == ",":
            self._eval(node.children[0], env)
            return self._eval(node.children[1], env)
        left = self._eval(node.children[0], env)
        right = self._eval(node.children[1], env)
        return self._apply_binary(op, left, right)

    def _logical_takes_right(self, op: str, left) -> bool:
        if op == "&&":
            return js_truthy(left)
        if op == "||":
            return not js_truthy(left)
        return left is None or left is UNDEFINED

    def _eval_logical(self, node, env: Environment):
        op = node.payload["op"]
        result = self._marked_result(node)
        if result is None:
            left = self._eval(node.children[0], env)
            if self._logical_takes_right(op, left):
                return self._eval(node.children[1], env)
            return left
        event = self._begin_event(node, result)
        try:
            left, tainted = self._eval_guard(node.children[0], env)
            event.guard = js_brief(left)
            event.guard_fetch_tainted = tainted
            if self._logical_takes_right(op, left):
                return self._run_live(event, "right",
                                      lambda: self._eval(node.children[1], env))
            self._run_clone(event, "right", env,
                            lambda cenv: self._eval(node.children[1], cenv))
            return left
        finally:
            self.world.log.log_forced(event)

    def _eval_nary(self, node, env: Environment):
        op = node.payload["op"]
        operands = node.children
        result = self._marked_result(node)
        if result is None:
            value = self._eval(operands[0], env)
            for operand in operands[1:]:
                if not self._logical_takes_right(op, value):
                    break
                value = self._eval(operand, env)
            return value
        event = self._begin_event(node, result)
        try:
            value, tainted = self._eval_guard(operands[0], env)
            event.guard = js_brief(value)
            event.guard_fetch_tainted = tainted
            index = 1
            while index < len(operands) and self._logical_takes_right(op, value):
                operand = operands[index]
                value = self._run_live(
                    event, "operand%d" % index,
                    lambda operand=operand: self._eval(operand, env))
                index += 1
            for skipped in range(index, len(operands)):
                operand = operands[skipped]
                self._run_clone(
                    event, "operand%d" % skipped, env,
                    lambda cenv, operand=operand: self._eval(operand, cenv))
            return value
        finally:
            self.world.log.log_forced(event)

    def _eval_conditional(self, node, env: Environment):
        test, consequent, alternate = node.children
        result = self._marked_result(node)
        if result is None:
            if js_truthy(self._eval(test, env)):
                return self._eval(consequent, env)
            return self._eval(alternate, env)
        event = self._begin_event(node, result)
        try:
            value, tainted = self._eval_guard(test, env)
            event.guard = js_brief(value)
            event.guard_fetch_tainted = tainted
            taken = js_truthy(value)
            live_node, live_name = (consequent, "consequent") if taken \
                else (alternate, "alternate")
            other_node, other_name = (alternate, "alternate") if taken \
                else (consequent, "consequent")
            out = self._run_live(event, live_name,
                                 lambda: self._eval(live_node, env))
            self._run_clone(event, other_name, env,
                            lambda cenv: self._eval(other_node, cenv))
            return out
        finally:
            self.world.log.log_forced(event)

    def _eval_unary(self, node, env: Environment):
        op = node.payload["op"]
        operand = node.children[0]
        if op == "!":
            result = self._marked_result(node)
            if result is None:
                return not js_truthy(self._eval(operand, env))
            # the operand always evaluates, so nothing is forced; the
            # encounter is still recorded
            event = self._begin_event(node, result)
            try:
                value, tainted = self._eval_guard(operand, env)
                event.guard = js_brief(value)
                event.guard_fetch_tainted = tainted
                return not js_truthy(value)
            finally:
                self.world.log.log_forced(event)
        if op == "typeof":
            if operand.kind is NodeKind.IDENTIFIER and \
                    not env.has(operand.payload["name"]):
                return "undefined"
            return js_typeof(self._eval(operand, env))
        if op == "delete":
            if operand.kind is NodeKind.MEMBER_ACCESS:
                self._step(operand)
                base = self._eval(operand.children[0], env)
                name = self._member_name(operand, env)
                if isinstance(base, (JSObject, JSFunction, HostFunction)):
                    base.properties.pop(name, None)
                elif isinstance(base, JSArray) and name.isdigit():
                    index = int(name)
                    if index < len(base.elements):
                        base.elements[index] = UNDEFINED
            return True
        value = self._eval(operand, env)
        if op == "-":
            return -js_to_number(value)
        if op == "+":
            return js_to_number(value)
        if op == "~":
            return float(_int32(~js_to_int32(value)))
        if op == "void":
            return UNDEFINED
        raise JSThrow(make_error("SyntaxError", "unsupported unary %r" % op))

    def _eval_compare(self, node, env: Environment):
        op = node.payload["op"]
        left = self._eval(node.children[0], env)
        right = self._eval(node.children[1], env)
        if op == "==":
            return js_equals(left, right)
        if op == "!=":
            return not js_equals(left, right)
        if op == "===":
            return js_strict_equals(left, right)
        if op == "!==":
            return not js_strict_equals(left, right)
        if op in ("<", ">", "<=", ">="):
            return js_compare(op, left, right)
        if op == "in":
            key = js_to_string(left)
            if isinstance(right, JSArray):
                return key.isdigit() and int(key) < len(right.elements)
            if isinstance(right, (JSObject, JSFunction, HostFunction)):
                return key in right.properties
            raise JSThrow(make_error(
                "TypeError", "Cannot use 'in' operator on %s" % js_brief(right)))
        if op == "instanceof":
            if isinstance(right, HostFunction):
                if right.name == "Array":
                    return isinstance(left, JSArray)
                if right.name == "Object":
                    return isinstance(left, (JSObject, JSArray))
                if right.name in ("Function", "Date") or right.name.endswith("Error"):
                    if right.name.endswith("Error") and isinstance(left, JSObject):
                        return left.get("name") == right.name or \
                            right.name == "Error" and \
                            js_to_string(left.get("name")).endswith("Error")
                    if right.name == "Function":
                        return is_callable(left)
            return False
        raise JSThrow(make_error("SyntaxError", "unsupported comparison %r" % op))

    def _apply_binary(self, op: str, left, right):
        if op == "+":
            return js_add(left, right)
        if op == "-":
            return js_to_number(left) - js_to_number(right)
        if op == "*":
            return js_to_number(left) * js_to_number(right)
        if op == "/":
            return _js_divide(js_to_number(left), js_to_number(right))
        if op == "%":
            return _js_modulo(js_to_number(left), js_to_number(right))
        if op == "**":
            try:
                result = js_to_number(left) ** js_to_number(right)
                return float(result)
            except (OverflowError, ZeroDivisionError):
                return float("inf")
        if op == "|":
            return float(_int32(js_to_int32(left) | js_to_int32(right)))
        if op == "&":
            return float(_int32(js_to_int32(left) & js_to_int32(right)))
        if op == "^":
            return float(_int32(js_to_int32(left) ^ js_to_int32(right)))
        if op == "<<":
            return float(_int32(js_to_int32(left) << (js_to_uint32(right) & 31)))
        if op == ">>":
            return float(js_to_int32(left) >> (js_to_uint32(right) & 31))
        if op == ">>>":
            return float(js_to_uint32(left) >> (js_to_uint32(right) & 31))
        if op == ",":
            return right
        if op in _LOGICAL_OPS:
            if self._logical_takes_right(op, left):
                return right
            return left
        raise JSThrow(make_error("SyntaxError", "unsupported operator %r" % op))


def _int32(value: int) -> int:
    value &= 0xFFFFFFFF
    return value - 0x100000000 if value >= 0x80000000 else value


def _js_divide(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or a != a or b != b:
            return float("nan")
        negative = (a < 0) != (math.copysign(1.0, b) < 0)
        return float("-inf") if negative else float("inf")
    return a / b


def _js_modulo(a: float, b: float) -> float:
    if b == 0.0 or a != a or b != b or a in (float("inf"), float("-inf")):
        return float("nan")
    if a == 0.0:
        return a
    return math.fmod(a, b)
