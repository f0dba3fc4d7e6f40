"""AST node model for the JavaScript subset.

Nodes carry a kind, a source span, a payload dict of kind-specific
attributes, and an ordered child list. The kind roster is closed: the
parser refuses anything it cannot express with these kinds.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, unique
from typing import Any, Iterator, Optional


@unique
class NodeKind(Enum):
    PROGRAM = "Program"
    BLOCK = "Block"
    VARIABLE_DECLARATION = "VariableDeclaration"
    FUNCTION_DECLARATION = "FunctionDeclaration"
    FUNCTION_LITERAL = "FunctionLiteral"
    IF_STATEMENT = "IfStatement"
    CONDITIONAL = "Conditional"
    SWITCH_STATEMENT = "SwitchStatement"
    SWITCH_CASE = "SwitchCase"
    DO_WHILE_STATEMENT = "DoWhileStatement"
    WHILE_STATEMENT = "WhileStatement"
    FOR_STATEMENT = "ForStatement"
    FOR_IN_STATEMENT = "ForInStatement"
    FOR_OF_STATEMENT = "ForOfStatement"
    TRY_CATCH_STATEMENT = "TryCatchStatement"
    BINARY_OPERATION = "BinaryOperation"
    UNARY_OPERATION = "UnaryOperation"
    NARY_OPERATION = "NaryOperation"
    COMPARE_OPERATION = "CompareOperation"
    ASSIGNMENT = "Assignment"
    COMPOUND_ASSIGNMENT = "CompoundAssignment"
    COUNT_OPERATION = "CountOperation"
    CALL = "Call"
    NEW = "New"
    MEMBER_ACCESS = "MemberAccess"
    IDENTIFIER = "Identifier"
    LITERAL = "Literal"
    TEMPLATE_LITERAL = "TemplateLiteral"
    ARRAY_LITERAL = "ArrayLiteral"
    OBJECT_LITERAL = "ObjectLiteral"
    RETURN = "Return"
    BREAK = "Break"
    CONTINUE = "Continue"
    THROW = "Throw"
    EXPRESSION_STATEMENT = "ExpressionStatement"
    EMPTY_STATEMENT = "EmptyStatement"


@dataclass(frozen=True)
class Span:
    """1-based, inclusive source range."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def contains(self, other: "Span") -> bool:
        """True when `other` lies entirely within this span."""
        if (other.start_line, other.start_col) < (self.start_line, self.start_col):
            return False
        return (other.end_line, other.end_col) <= (self.end_line, self.end_col)

    def key(self) -> tuple:
        return (self.start_line, self.start_col, self.end_line, self.end_col)


class AstNode:
    """A single node of the parsed tree.

    Payload keys are kind-specific (operator text, identifier names,
    literal values and so on). Children are ordered; the meaning of each
    position is fixed per kind and documented in the parser.
    """

    __slots__ = ("kind", "span", "payload", "children", "parent", "node_id")

    def __init__(
        self,
        kind: NodeKind,
        span: Span,
        payload: Optional[dict] = None,
        children: Optional[list] = None,
    ) -> None:
        self.kind = kind
        self.span = span
        self.payload: dict[str, Any] = payload or {}
        self.children: list[AstNode] = children or []
        self.parent: Optional[AstNode] = None
        self.node_id: int = -1

    def __repr__(self) -> str:
        return "AstNode(%s, id=%d, span=%s)" % (self.kind.value, self.node_id, self.span.key())


@dataclass
class SourceFile:
    """A script to analyze: its path, raw text, and parsed program."""

    path: str
    text: str
    program: Optional[AstNode] = None


def iter_tree(node: AstNode) -> Iterator[AstNode]:
    """Yield the subtree rooted at `node` in pre-order, left to right."""
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(cur.children))


def node_count(node: AstNode) -> int:
    """Number of nodes in the subtree, the node itself included."""
    total = 0
    for _ in iter_tree(node):
        total += 1
    return total


def finalize_tree(root: AstNode) -> AstNode:
    """Assign pre-order node ids and parent links; returns the root."""
    next_id = 0
    for node in iter_tree(root):
        node.node_id = next_id
        next_id += 1
        for child in node.children:
            child.parent = node
    return root


def structurally_equal(a: AstNode, b: AstNode) -> bool:
    """Compare two trees by kind, payload and children, ignoring spans and ids."""
    if a.kind is not b.kind or a.payload != b.payload:
        return False
    if len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))
