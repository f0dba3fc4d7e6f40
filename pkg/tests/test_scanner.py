"""Condition discovery, bounded scan, and catalog behavior."""
from __future__ import annotations

import json

import pytest

from branchforce.catalog import (
    ApiCatalog,
    ApiSignature,
    catalog_from_dict,
    catalog_to_dict,
    default_catalog,
    load_catalog,
)
from branchforce.frontend import NodeKind, node_count, parse
from branchforce.scanner import (
    ForcedPlan,
    condition_kind,
    find_condition_nodes,
    guard_expression,
    mark_forced_blocks,
    program_injection_apis,
    scan_block_for_apis,
    scan_region,
    scan_regions,
)
from support import boundary_program, fixture_text

BROWSER = default_catalog("browser")
NPM = default_catalog("npm")


# -- catalog ------------------------------------------------------------------

def test_default_browser_catalog_contents():
    names = {(s.name, s.match_kind) for s in BROWSER.injection_apis}
    assert ("setTimeout", "bare-call") in names
    assert ("setInterval", "bare-call") in names
    assert ("fetch", "bare-call") in names
    assert ("eval", "bare-call") in names
    for member in ("append", "prepend", "insertAfter", "insertBefore", "appendChild"):
        assert (member, "member-terminal") in names
    assert ("Function", "constructor") in names
    assert ("exec", "bare-call") not in names


def test_default_npm_catalog_adds_exec_family():
    names = {(s.name, s.match_kind) for s in NPM.injection_apis}
    for api in ("exec", "execFile", "execSync", "spawnSync"):
        assert (api, "bare-call") in names
        assert (api, "member-terminal") in names
    assert ("urlopen", "bare-call") in names
    # still a superset of the browser set
    assert {(s.name, s.match_kind) for s in BROWSER.injection_apis} <= names


def test_catalog_config_roundtrip(tmp_path):
    doc = catalog_to_dict(NPM)
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps(doc))
    loaded = load_catalog(str(path))
    assert loaded == NPM


def test_catalog_loads_custom_api_without_code_change():
    doc = {
        "mode": "browser",
        "injection_apis": [{"name": "injectScript", "match_kind": "bare-call"}],
        "evasion_apis": {"custom-cat": ["mySignal"]},
    }
    cat = catalog_from_dict(doc)
    assert cat.bare_call_names() == {"injectScript"}
    assert cat.evasion_apis["custom-cat"] == frozenset({"mysignal"})
    plan = mark_forced_blocks(parse("if (c) { injectScript(u); }"), cat)
    assert len(plan) == 1


def test_catalog_rejects_bad_values():
    with pytest.raises(ValueError):
        ApiSignature("x", "weird-kind")
    with pytest.raises(ValueError):
        default_catalog("desktop")
    with pytest.raises(ValueError):
        catalog_from_dict({"mode": "desktop", "injection_apis": []})


# -- condition discovery --------------------------------------------------------

CONDITION_SNIPPETS = [
    ("if (a) { b(); }", "IfStatement"),
    ("x = a ? b : c;", "Conditional"),
    ("switch (a) { case 1: b(); }", "SwitchStatement"),
    ("do { b(); } while (a);", "DoWhileStatement"),
    ("while (a) { b(); }", "WhileStatement"),
    ("for (;;) { b(); }", "ForStatement"),
    ("for (var k in o) { b(); }", "ForInStatement"),
    ("for (var v of xs) { b(); }", "ForOfStatement"),
    ("try { a(); } catch (e) { b(); }", "TryCatchStatement"),
    ("x = a && b;", "BinaryOperation"),
    ("x = !a;", "UnaryOperation"),
    ("x = a || b || c;", "NaryOperation"),
]


@pytest.mark.parametrize("src,label", CONDITION_SNIPPETS)
def test_all_twelve_condition_kinds_recognized(src, label):
    found = find_condition_nodes(parse(src))
    assert label in [condition_kind(n) for n in found]


def test_non_conditions_are_not_conditions():
    # comma and arithmetic binaries, plain unaries, compares
    for src in ["a(), b();", "x = a + b;", "x = -a;", "x = a == b;", "x = a | b;"]:
        assert find_condition_nodes(parse(src)) == []


def test_find_condition_nodes_source_order():
    assert find_condition_nodes(parse("x = 1;")) == []
    program = parse("while (a) { if (b) { c(); } }")
    kinds = [condition_kind(n) for n in find_condition_nodes(program)]
    assert kinds == ["WhileStatement", "IfStatement"]
    spans = [n.span.key() for n in find_condition_nodes(program)]
    assert spans == sorted(spans)


def test_listing3_condition_inventory():
    program = parse(fixture_text("listing3_blocked_sites.js"))
    conditions = find_condition_nodes(program)
    labels = [condition_kind(n) for n in conditions]
    assert "IfStatement" in labels
    assert "ForStatement" in labels
    # the guard-return if sits inside the tab-update listener
    guard_ifs = [n for n in conditions if condition_kind(n) == "IfStatement"]
    assert any(guard_expression(n) is not None for n in guard_ifs)


# -- regions and guards ----------------------------------------------------------

def test_regions_never_include_the_guard():
    cond = find_condition_nodes(parse("if (setTimeout(f, 0)) {}"))[0]
    result = scan_block_for_apis(cond, BROWSER)
    assert result.apis_found == set()
    assert result.nodes_visited == 1  # just the empty Block


def test_switch_regions_are_case_bodies_only():
    program = parse("switch (eval(x)) { case eval(y): a(); default: b(); }")
    switch = find_condition_nodes(program)[0]
    roots = scan_regions(switch)
    # two case bodies: a(); and b();
    assert [r.kind for r in roots] == [NodeKind.EXPRESSION_STATEMENT, NodeKind.EXPRESSION_STATEMENT]
    result = scan_block_for_apis(switch, BROWSER)
    assert result.apis_found == set()


def test_try_regions_exclude_finally():
    program = parse("try { a(); } catch (e) { b(); } finally { eval(x); }")
    cond = find_condition_nodes(program)[0]
    result = scan_block_for_apis(cond, BROWSER)
    assert result.apis_found == set()
    # visited = try block + catch block subtrees
    try_node = program.children[0]
    expected = node_count(try_node.children[0]) + node_count(try_node.children[1])
    assert result.nodes_visited == expected


def test_logical_regions_are_short_circuit_operands():
    program = parse("x = flag && eval(code);")
    conditions = find_condition_nodes(program)
    binary = [n for n in conditions if condition_kind(n) == "BinaryOperation"][0]
    result = scan_block_for_apis(binary, BROWSER)
    assert result.api_names() == {"eval"}
    # nary scans operands 2..n
    program = parse("x = a || b || eval(c);")
    nary = [n for n in conditions if condition_kind(n) == "NaryOperation"]
    nary = [n for n in find_condition_nodes(program) if condition_kind(n) == "NaryOperation"][0]
    assert scan_block_for_apis(nary, BROWSER).api_names() == {"eval"}
    assert guard_expression(nary).payload["name"] == "a"


def test_unary_not_scans_operand():
    program = parse("x = !(flag && eval(code));")
    conditions = find_condition_nodes(program)
    unary = [n for n in conditions if condition_kind(n) == "UnaryOperation"][0]
    assert scan_block_for_apis(unary, BROWSER).api_names() == {"eval"}


# -- matching ---------------------------------------------------------------------

def test_member_terminal_matches_dot_and_computed_string():
    for src in ["if (c) { el.appendChild(s); }",
                "if (c) { a.b.c.appendChild(s); }",
                "if (c) { el['appendChild'](s); }"]:
        plan = mark_forced_blocks(parse(src), BROWSER)
        assert len(plan) == 1, src
    # computed with a non-literal index cannot match
    plan = mark_forced_blocks(parse("if (c) { el[name](s); }"), BROWSER)
    assert len(plan) == 0


def test_constructor_matches_only_new_identifier():
    assert len(mark_forced_blocks(parse("if (c) { new Function(s)(); }"), BROWSER)) == 1
    # a plain call to Function is not the constructor signature
    assert len(mark_forced_blocks(parse("if (c) { Function(s); }"), BROWSER)) == 0
    # member-new does not match the constructor form
    assert len(mark_forced_blocks(parse("if (c) { new win.Function(s); }"), BROWSER)) == 0


def test_bare_call_does_not_match_member_position():
    # eval is bare-call only: obj.eval(...) must not match
    assert len(mark_forced_blocks(parse("if (c) { obj.eval(s); }"), BROWSER)) == 0
    assert len(mark_forced_blocks(parse("if (c) { eval(s); }"), BROWSER)) == 1


def test_aliased_api_not_statically_matched():
    src = "var f = eval; if (c) { f(s); }"
    assert len(mark_forced_blocks(parse(src), BROWSER)) == 0


def test_scan_descends_into_function_literals():
    src = "if (c) { var g = function () { eval(s); }; }"
    plan = mark_forced_blocks(parse(src), BROWSER)
    assert len(plan) == 1
    src = "if (c) { var g = () => eval(s); }"
    assert len(mark_forced_blocks(parse(src), BROWSER)) == 1


# -- fixtures against the plan -----------------------------------------------------

def test_listing1_iife_body_scan():
    program = parse(fixture_text("listing1_timebomb.js"))
    iife_call = program.children[-1].children[0]
    fn_body = iife_call.children[0].children[0]
    apis, visited, truncated = scan_region([fn_body], BROWSER)
    assert {s.name for s in apis} == {"setTimeout", "insertBefore"}
    assert not truncated
    assert visited == node_count(fn_body)


def test_listing5_marks_the_stdout_guard():
    program = parse(fixture_text("listing5_passwd_npm.js"))
    plan = mark_forced_blocks(program, NPM)
    assert len(plan) == 1
    [result] = plan.marked_blocks.values()
    assert condition_kind(result.condition_node) == "IfStatement"
    assert result.api_names() == {"exec"}
    # under the browser catalog nothing marks
    assert len(mark_forced_blocks(program, BROWSER)) == 0


def test_listing4_marks_the_dev_ternary():
    program = parse(fixture_text("listing4_dev_eval.js"))
    plan = mark_forced_blocks(program, BROWSER)
    assert len(plan) == 1
    [result] = plan.marked_blocks.values()
    assert condition_kind(result.condition_node) == "Conditional"
    assert result.api_names() == {"eval"}


def test_benign_program_has_empty_plan():
    src = "if (a) { log(1); } while (b) { log(2); }"
    plan = mark_forced_blocks(parse(src), BROWSER)
    assert len(plan) == 0


# -- budget ------------------------------------------------------------------------

def test_empty_block_scan():
    cond = find_condition_nodes(parse("if (c) {}"))[0]
    result = scan_block_for_apis(cond, BROWSER)
    assert result.apis_found == set()
    assert result.nodes_visited == 1
    assert result.truncated is False


def test_budget_soundness_on_fixtures():
    for name in ["listing1_timebomb.js", "listing3_blocked_sites.js", "listing4_dev_eval.js"]:
        program = parse(fixture_text(name))
        for cond in find_condition_nodes(program):
            result = scan_block_for_apis(cond, BROWSER, limit=500)
            assert result.nodes_visited <= 500
            if not result.truncated:
                expected = sum(node_count(r) for r in scan_regions(cond))
                assert result.nodes_visited == expected


def test_boundary_500th_node_is_marked():
    src = boundary_program(500)
    program = parse(src)
    cond = find_condition_nodes(program)[0]
    # oracle: Call position = Block(1) + filler nodes + ExpressionStatement(1) + 1
    block = cond.children[1]
    filler = sum(node_count(s) for s in block.children[:-1])
    api_stmt = block.children[-1]
    call_position = 1 + filler + 2
    assert call_position == 500
    assert api_stmt.children[0].kind is NodeKind.CALL
    result = scan_block_for_apis(cond, BROWSER, limit=500)
    assert result.api_names() == {"setTimeout"}
    assert result.nodes_visited == 500
    # the call's own children were still unvisited when the budget ran out
    assert result.truncated is True
    assert len(mark_forced_blocks(program, BROWSER, limit=500)) == 1


def test_boundary_501st_node_is_not_marked():
    src = boundary_program(501)
    program = parse(src)
    cond = find_condition_nodes(program)[0]
    block = cond.children[1]
    filler = sum(node_count(s) for s in block.children[:-1])
    assert 1 + filler + 2 == 501
    result = scan_block_for_apis(cond, BROWSER, limit=500)
    assert result.apis_found == set()
    assert result.truncated is True
    assert result.nodes_visited == 500
    assert len(mark_forced_blocks(program, BROWSER, limit=500)) == 0


def test_per_condition_budget_reset():
    # two disjoint conditions of ~400 nodes each must both mark
    big = boundary_program(400)
    src = big + "\n" + big
    program = parse(src)
    plan = mark_forced_blocks(program, BROWSER, limit=500)
    assert len(plan) == 2


def test_limit_monotonicity():
    src = "if (c) { a; b; eval(x); d; el.appendChild(s); }"
    cond = find_condition_nodes(parse(src))[0]
    total = sum(node_count(r) for r in scan_regions(cond))
    previous: set = set()
    for limit in range(1, total + 2):
        result = scan_block_for_apis(cond, BROWSER, limit=limit)
        assert result.nodes_visited <= limit
        assert previous <= result.apis_found
        assert result.truncated == (limit < total)
        previous = result.apis_found
    assert {s.name for s in previous} == {"eval", "appendChild"}


def test_catalog_monotonicity():
    src = "if (a) { eval(x); } if (b) { exec(y); }"
    program = parse(src)
    browser_marked = set(mark_forced_blocks(program, BROWSER).marked_blocks)
    npm_marked = set(mark_forced_blocks(program, NPM).marked_blocks)
    assert browser_marked <= npm_marked
    assert len(npm_marked) == 2 and len(browser_marked) == 1


def test_plan_determinism():
    program = parse(fixture_text("listing4_dev_eval.js"))
    a = mark_forced_blocks(program, BROWSER)
    b = mark_forced_blocks(program, BROWSER)
    assert set(a.marked_blocks) == set(b.marked_blocks)
    for key in a.marked_blocks:
        ra, rb = a.marked_blocks[key], b.marked_blocks[key]
        assert ra.apis_found == rb.apis_found
        assert ra.nodes_visited == rb.nodes_visited
        assert ra.truncated == rb.truncated


def test_program_injection_apis_whole_tree():
    program = parse(fixture_text("listing1_timebomb.js"))
    names = {s.name for s in program_injection_apis(program, BROWSER)}
    assert names == {"setTimeout", "insertBefore"}
    assert program_injection_apis(parse("var x = 1;"), BROWSER) == set()
