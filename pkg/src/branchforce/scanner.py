"""Condition discovery and the bounded block scan that marks forcing targets.

A condition node owns one or more dependent regions (the code that runs
or not depending on the guard). Each condition gets one node-visit
budget across all of its regions; a region scan that finds a catalog
injection API marks the condition for forced execution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .catalog import ApiCatalog, ApiSignature
from .frontend import AstNode, NodeKind

DEFAULT_SCAN_LIMIT = 500

_LOGICAL_OPS = ("&&", "||", "??")

_KIND_LABELS = {
    NodeKind.IF_STATEMENT: "IfStatement",
    NodeKind.CONDITIONAL: "Conditional",
    NodeKind.SWITCH_STATEMENT: "SwitchStatement",
    NodeKind.DO_WHILE_STATEMENT: "DoWhileStatement",
    NodeKind.WHILE_STATEMENT: "WhileStatement",
    NodeKind.FOR_STATEMENT: "ForStatement",
    NodeKind.FOR_IN_STATEMENT: "ForInStatement",
    NodeKind.FOR_OF_STATEMENT: "ForOfStatement",
    NodeKind.TRY_CATCH_STATEMENT: "TryCatchStatement",
    NodeKind.NARY_OPERATION: "NaryOperation",
}


def condition_kind(node: AstNode) -> Optional[str]:
    """The condition-kind label of a node, or None when it is not one."""
    label = _KIND_LABELS.get(node.kind)
    if label is not None:
        return label
    if node.kind is NodeKind.BINARY_OPERATION and node.payload.get("op") in _LOGICAL_OPS:
        return "BinaryOperation"
    if node.kind is NodeKind.UNARY_OPERATION and node.payload.get("op") == "!":
        return "UnaryOperation"
    return None


def scan_regions(node: AstNode) -> list[AstNode]:
    """Root nodes of the condition's dependent regions, in source order.

    The guard expression is never part of a region. For switch, only
    case bodies; for try/catch, the try and catch blocks but not
    finally; for logical operators, the short-circuited operands.
    """
    kind = node.kind
    if kind is NodeKind.IF_STATEMENT:
        return list(node.children[1:])
    if kind is NodeKind.CONDITIONAL:
        return [node.children[1], node.children[2]]
    if kind is NodeKind.SWITCH_STATEMENT:
        roots = []
        for case in node.children[1:]:
            stmts = case.children if case.payload["is_default"] else case.children[1:]
            roots.extend(stmts)
        return roots
    if kind is NodeKind.DO_WHILE_STATEMENT:
        return [node.children[0]]
    if kind is NodeKind.WHILE_STATEMENT:
        return [node.children[1]]
    if kind is NodeKind.FOR_STATEMENT:
        return [node.children[-1]]
    if kind in (NodeKind.FOR_IN_STATEMENT, NodeKind.FOR_OF_STATEMENT):
        return [node.children[2]]
    if kind is NodeKind.TRY_CATCH_STATEMENT:
        roots = [node.children[0]]
        if node.payload["has_catch"]:
            roots.append(node.children[1])
        return roots
    if kind is NodeKind.BINARY_OPERATION:
        return [node.children[1]]
    if kind is NodeKind.NARY_OPERATION:
        return list(node.children[1:])
    if kind is NodeKind.UNARY_OPERATION:
        return [node.children[0]]
    raise ValueError("Not a condition node: %s" % node.kind.value)


def guard_expression(node: AstNode) -> Optional[AstNode]:
    """The expression whose value selects among the regions, if any."""
    kind = node.kind
    if kind in (NodeKind.IF_STATEMENT, NodeKind.CONDITIONAL, NodeKind.WHILE_STATEMENT,
                NodeKind.SWITCH_STATEMENT):
        return node.children[0]
    if kind is NodeKind.DO_WHILE_STATEMENT:
        return node.children[1]
    if kind is NodeKind.FOR_STATEMENT:
        if not node.payload["has_test"]:
            return None
        return node.children[1 if node.payload["has_init"] else 0]
    if kind in (NodeKind.FOR_IN_STATEMENT, NodeKind.FOR_OF_STATEMENT):
        return node.children[1]
    if kind is NodeKind.TRY_CATCH_STATEMENT:
        return None
    if kind in (NodeKind.BINARY_OPERATION, NodeKind.NARY_OPERATION):
        return node.children[0]
    if kind is NodeKind.UNARY_OPERATION:
        return node.children[0]
    raise ValueError("Not a condition node: %s" % node.kind.value)


@dataclass
class ScanResult:
    condition_node: AstNode
    apis_found: set[ApiSignature] = field(default_factory=set)
    nodes_visited: int = 0
    truncated: bool = False

    def api_names(self) -> set[str]:
        return {s.name for s in self.apis_found}


@dataclass
class ForcedPlan:
    """Marked conditions keyed by node id; every entry found >= 1 API."""

    marked_blocks: dict[int, ScanResult] = field(default_factory=dict)

    def is_marked(self, node: AstNode) -> bool:
        return node.node_id in self.marked_blocks

    def result_for(self, node: AstNode) -> Optional[ScanResult]:
        return self.marked_blocks.get(node.node_id)

    def __len__(self) -> int:
        return len(self.marked_blocks)


def find_condition_nodes(program: AstNode) -> list[AstNode]:
    """All condition nodes in source order (pre-order traversal)."""
    found = []
    stack = [program]
    while stack:
        node = stack.pop()
        if condition_kind(node) is not None:
            found.append(node)
        stack.extend(reversed(node.children))
    return found


def _match_injection(node: AstNode, catalog: ApiCatalog) -> Optional[ApiSignature]:
    """Catalog signature matched by a Call/New node, inspected in place.

    Inspection reads the callee's payload without consuming scan budget;
    the callee nodes are still counted when the walk reaches them.
    """
    if node.kind is NodeKind.CALL:
        callee = node.children[0]
        if callee.kind is NodeKind.IDENTIFIER:
            name = callee.payload["name"]
            if name in catalog.bare_call_names():
                return ApiSignature(name, "bare-call")
        elif callee.kind is NodeKind.MEMBER_ACCESS:
            terminal = _terminal_member_name(callee)
            if terminal is not None and terminal in catalog.member_terminal_names():
                return ApiSignature(terminal, "member-terminal")
    elif node.kind is NodeKind.NEW:
        callee = node.children[0]
        if callee.kind is NodeKind.IDENTIFIER:
            name = callee.payload["name"]
            if name in catalog.constructor_names():
                return ApiSignature(name, "constructor")
    return None


def _terminal_member_name(member: AstNode) -> Optional[str]:
    if not member.payload["computed"]:
        return member.payload["name"]
    index = member.children[1]
    if index.kind is NodeKind.LITERAL and index.payload["kind"] == "string":
        return index.payload["value"]
    return None


def scan_region(roots: Iterable[AstNode], catalog: ApiCatalog,
                limit: int = DEFAULT_SCAN_LIMIT) -> tuple[set[ApiSignature], int, bool]:
    """Bounded pre-order scan over region roots.

    Returns (apis found, nodes visited, truncated). Every node costs one
    budget unit, function literal bodies included; the scan stops the
    moment the budget is spent, and truncated means nodes were left
    unvisited at that point.
    """
    apis: set[ApiSignature] = set()
    visited = 0
    stack: list[AstNode] = list(reversed(list(roots)))
    while stack:
        if visited >= limit:
            return apis, visited, True
        node = stack.pop()
        visited += 1
        sig = _match_injection(node, catalog)
        if sig is not None:
            apis.add(sig)
        stack.extend(reversed(node.children))
    return apis, visited, False


def scan_block_for_apis(condition: AstNode, catalog: ApiCatalog,
                        limit: int = DEFAULT_SCAN_LIMIT) -> ScanResult:
    """Scan one condition's regions under a single shared budget."""
    if condition_kind(condition) is None:
        raise ValueError("Not a condition node: %s" % condition.kind.value)
    apis, visited, truncated = scan_region(scan_regions(condition), catalog, limit)
    return ScanResult(condition, apis, visited, truncated)


def mark_forced_blocks(program: AstNode, catalog: ApiCatalog,
                       limit: int = DEFAULT_SCAN_LIMIT) -> ForcedPlan:
    """Independent per-condition scans; budget resets for each condition."""
    plan = ForcedPlan()
    for condition in find_condition_nodes(program):
        result = scan_block_for_apis(condition, catalog, limit)
        if result.apis_found:
            plan.marked_blocks[condition.node_id] = result
    return plan


def program_injection_apis(program: AstNode, catalog: ApiCatalog) -> set[ApiSignature]:
    """Unbounded whole-tree match; used by the ingest prefilter."""
    apis: set[ApiSignature] = set()
    stack = [program]
    while stack:
        node = stack.pop()
        sig = _match_injection(node, catalog)
        if sig is not None:
            apis.add(sig)
        stack.extend(node.children)
    return apis
