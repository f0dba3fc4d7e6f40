"""Parser shapes pinned by hand, plus tree invariants over the fixtures."""
from __future__ import annotations

import pytest

from branchforce.frontend import (
    NodeKind,
    ParseError,
    UnsupportedSyntax,
    iter_tree,
    node_count,
    parse,
)
from support import fixture_text

K = NodeKind

FIXTURES = [
    "listing1_timebomb.js",
    "listing1_matomo_client.js",
    "listing2_return_first.js",
    "listing3_blocked_sites.js",
    "listing4_dev_eval.js",
    "listing5_passwd_npm.js",
]

HAND_COUNTED = """\
var total = 0;
for (var i = 0; i < 3; i++) {
  total += i * 2;
}
if (total > 5) {
  log("big");
} else {
  log(total);
}
"""


def test_node_count_hand_oracle():
    # counted on paper against the documented child layout: 36 nodes
    assert node_count(parse(HAND_COUNTED)) == 36


def kinds(node):
    return [c.kind for c in node.children]


def test_hand_oracle_shape():
    program = parse(HAND_COUNTED)
    assert kinds(program) == [K.VARIABLE_DECLARATION, K.FOR_STATEMENT, K.IF_STATEMENT]
    for_stmt = program.children[1]
    assert for_stmt.payload == {"has_init": True, "has_test": True, "has_update": True}
    assert kinds(for_stmt) == [K.VARIABLE_DECLARATION, K.COMPARE_OPERATION, K.COUNT_OPERATION, K.BLOCK]
    if_stmt = program.children[2]
    assert kinds(if_stmt) == [K.COMPARE_OPERATION, K.BLOCK, K.BLOCK]


def test_listing5_shape():
    program = parse(fixture_text("listing5_passwd_npm.js"))
    assert kinds(program) == [K.VARIABLE_DECLARATION, K.VARIABLE_DECLARATION, K.EXPRESSION_STATEMENT]
    first = program.children[0]
    assert first.payload["decl_kind"] == "const"
    declarator = first.children[0]
    assert declarator.kind is K.ASSIGNMENT
    target, init = declarator.children
    assert target.payload["name"] == "exec"
    # require('child_process').exec
    assert init.kind is K.MEMBER_ACCESS
    assert init.payload == {"computed": False, "name": "exec"}
    inner_call = init.children[0]
    assert inner_call.kind is K.CALL
    assert inner_call.children[0].payload["name"] == "require"
    assert inner_call.children[1].payload == {"kind": "string", "value": "child_process"}
    # exec(command, (error, stdout, _) => { ... })
    outer_call = program.children[2].children[0]
    assert outer_call.kind is K.CALL
    callback = outer_call.children[2]
    assert callback.kind is K.FUNCTION_LITERAL
    assert callback.payload["arrow"] is True
    assert callback.payload["params"] == ["error", "stdout", "_"]
    body = callback.children[0]
    assert kinds(body) == [K.IF_STATEMENT, K.IF_STATEMENT]


def test_listing1_shape():
    program = parse(fixture_text("listing1_timebomb.js"))
    # trailing IIFE: (function () { ... })();
    iife_stmt = program.children[-1]
    assert iife_stmt.kind is K.EXPRESSION_STATEMENT
    call = iife_stmt.children[0]
    assert call.kind is K.CALL
    fn = call.children[0]
    assert fn.kind is K.FUNCTION_LITERAL and fn.payload["arrow"] is False
    timer_call = fn.children[0].children[0].children[0]
    assert timer_call.kind is K.CALL
    assert timer_call.children[0].payload["name"] == "setTimeout"
    arrow = timer_call.children[1]
    assert arrow.kind is K.FUNCTION_LITERAL and arrow.payload["arrow"] is True
    delay = timer_call.children[2]
    assert delay.payload == {"kind": "number", "value": 93445000.0}


def test_listing2_guarded_return():
    program = parse(fixture_text("listing2_return_first.js"))
    guard = program.children[0]
    assert guard.kind is K.IF_STATEMENT
    # bare top-level return in the consequent (scripts allow it)
    consequent = guard.children[1]
    assert consequent.kind is K.RETURN and consequent.children == []
    # the payload statement is one comma expression
    payload_stmt = program.children[1]
    assert payload_stmt.kind is K.EXPRESSION_STATEMENT
    comma = payload_stmt.children[0]
    assert comma.kind is K.BINARY_OPERATION and comma.payload["op"] == ","


def test_logical_chain_folding():
    two = parse("x = a || b;").children[0].children[0].children[1]
    assert two.kind is K.BINARY_OPERATION and two.payload["op"] == "||"
    three = parse("x = a || b || c;").children[0].children[0].children[1]
    assert three.kind is K.NARY_OPERATION and three.payload["op"] == "||"
    assert len(three.children) == 3
    # mixed precedence keeps levels separate
    mixed = parse("x = a && b || c && d;").children[0].children[0].children[1]
    assert mixed.kind is K.BINARY_OPERATION and mixed.payload["op"] == "||"
    assert all(c.payload["op"] == "&&" for c in mixed.children)


def test_comma_is_binary_operation():
    expr = parse("a(), b();").children[0].children[0]
    assert expr.kind is K.BINARY_OPERATION and expr.payload["op"] == ","


def test_asi_and_restricted_productions():
    # return with a line break returns nothing
    fn = parse("function f() { return\n1; }").children[0].children[0]
    body = fn.children[0]
    assert body.children[0].kind is K.RETURN
    assert body.children[0].children == []
    # postfix may not attach across a newline
    program = parse("a = b\n++c")
    assert kinds(program) == [K.EXPRESSION_STATEMENT, K.EXPRESSION_STATEMENT]
    assert program.children[1].children[0].kind is K.COUNT_OPERATION
    with pytest.raises(ParseError):
        parse("throw\nnew Error('x');")


def test_arrow_expression_body_wraps_in_return():
    fn = parse("var f = x => x + 1;").children[0].children[0].children[1]
    assert fn.kind is K.FUNCTION_LITERAL
    block = fn.children[0]
    assert block.kind is K.BLOCK
    ret = block.children[0]
    assert ret.kind is K.RETURN
    assert ret.children[0].kind is K.BINARY_OPERATION


def test_function_bodies_parse_eagerly():
    # a broken body fails at parse time even though the function is never called
    with pytest.raises(ParseError):
        parse("function f() { var x = unbalanced(; }")


def test_this_is_an_identifier():
    expr = parse("this.x = 1;").children[0].children[0]
    target = expr.children[0]
    assert target.kind is K.MEMBER_ACCESS
    assert target.children[0].payload == {"name": "this"}


def test_try_payload():
    node = parse("try { a(); } catch (e) { b(); } finally { c(); }").children[0]
    assert node.payload == {"has_catch": True, "has_finally": True, "catch_param": "e"}
    assert len(node.children) == 3
    node = parse("try { a(); } catch { b(); }").children[0]
    assert node.payload == {"has_catch": True, "has_finally": False, "catch_param": None}


def test_for_in_of_payload():
    node = parse("for (var k in obj) {}").children[0]
    assert node.kind is K.FOR_IN_STATEMENT
    assert node.payload == {"decl_kind": "var"}
    assert kinds(node) == [K.IDENTIFIER, K.IDENTIFIER, K.BLOCK]
    node = parse("for (x of xs) {}").children[0]
    assert node.kind is K.FOR_OF_STATEMENT
    assert node.payload == {"decl_kind": None}


def test_switch_case_layout():
    node = parse("switch (x) { case 1: a(); break; default: b(); }").children[0]
    assert node.kind is K.SWITCH_STATEMENT
    disc, case1, default = node.children
    assert disc.kind is K.IDENTIFIER
    assert case1.payload == {"is_default": False}
    assert kinds(case1) == [K.LITERAL, K.EXPRESSION_STATEMENT, K.BREAK]
    assert default.payload == {"is_default": True}
    assert kinds(default) == [K.EXPRESSION_STATEMENT]


def test_object_literal_keys():
    node = parse("o = { 1: 'a', 'b c': 2, d: 3, e };").children[0].children[0].children[1]
    assert node.kind is K.OBJECT_LITERAL
    assert node.payload["keys"] == [("num", 1.0), ("str", "b c"), ("id", "d"), ("id", "e")]
    assert node.children[3].payload == {"name": "e"}


def test_member_access_forms():
    dot = parse("a.b;").children[0].children[0]
    assert dot.payload == {"computed": False, "name": "b"}
    assert len(dot.children) == 1
    computed = parse("a['b'];").children[0].children[0]
    assert computed.payload == {"computed": True, "name": None}
    assert len(computed.children) == 2
    keyword_prop = parse("g.async = true;").children[0].children[0].children[0]
    assert keyword_prop.payload == {"computed": False, "name": "async"}


@pytest.mark.parametrize(
    "src,construct",
    [
        ("class A {}", "class"),
        ("async function f() {}", "async function"),
        ("var {a} = obj;", "destructuring declaration"),
        ("var [a] = xs;", "destructuring declaration"),
        ("function f(...xs) {}", "rest parameter"),
        ("function f(a = 1) {}", "default parameter"),
        ("x = a?.b;", "optional chaining"),
        ("import x from 'y';", "import"),
        ("export var x = 1;", "export"),
        ("x = [1, , 2];", "array hole"),
        ("x = [...a];", "spread element"),
        ("f(...a);", "spread argument"),
        ("function* g() {}", "generator function"),
        ("label: while (1) {}", "labeled statement"),
        ("while (1) { break out; }", "labeled break"),
        ("with (o) {}", "with statement"),
        ("debugger;", "debugger"),
        ("x = { [k]: 1 };", "computed property key"),
        ("x = { get a() {} };", "accessor property"),
        ("try { a(); } catch ({m}) {}", "destructuring catch parameter"),
        ("x = tag`t`;", "tagged template"),
    ],
)
def test_unsupported_constructs_are_named(src, construct):
    with pytest.raises(UnsupportedSyntax) as info:
        parse(src)
    assert info.value.construct == construct


@pytest.mark.parametrize("src", ["x = ;", "if (x {", "1 = 2;", "x++ ++;", "a b;", "do a(); while x;"])
def test_plain_parse_errors(src):
    with pytest.raises(ParseError):
        parse(src)


@pytest.mark.parametrize("name", FIXTURES)
def test_span_nesting(name):
    program = parse(fixture_text(name))
    for node in iter_tree(program):
        for child in node.children:
            assert node.span.contains(child.span), (node, child)


@pytest.mark.parametrize("name", FIXTURES)
def test_ids_are_preorder_and_parents_linked(name):
    program = parse(fixture_text(name))
    seen = [n.node_id for n in iter_tree(program)]
    assert seen == list(range(len(seen)))
    for node in iter_tree(program):
        for child in node.children:
            assert child.parent is node
    assert program.parent is None
