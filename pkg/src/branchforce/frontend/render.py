"""Source renderer for parsed trees.

The contract is reparse-equality, not byte fidelity: parse(render(tree))
must be structurally equal to tree. Parentheses are inserted from
operator precedence plus a few lexical rules (statement-leading braces
and function keywords, call of a function literal, same-operator
logical operands, `in` inside a for header).
"""
from __future__ import annotations

from .nodes import AstNode, NodeKind

_COMMA, _ASSIGN, _COND, _NULLISH, _OR, _AND = 1, 2, 3, 4, 5, 6
_BITOR, _BITXOR, _BITAND, _EQ, _REL, _SHIFT = 7, 8, 9, 10, 11, 12
_ADD, _MUL, _EXP, _UNARY, _POSTFIX, _CALL, _PRIMARY = 13, 14, 15, 16, 17, 18, 20

_BINARY_PREC = {
    ",": _COMMA, "??": _NULLISH, "||": _OR, "&&": _AND,
    "|": _BITOR, "^": _BITXOR, "&": _BITAND,
    "<<": _SHIFT, ">>": _SHIFT, ">>>": _SHIFT,
    "+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "%": _MUL, "**": _EXP,
}
_LOGICAL_OPERAND_PREC = {"??": _OR, "||": _AND, "&&": _BITOR}
_WORD_UNARY = ("typeof", "void", "delete")

_STATEMENT_KINDS = frozenset(
    [
        NodeKind.PROGRAM, NodeKind.BLOCK, NodeKind.VARIABLE_DECLARATION,
        NodeKind.FUNCTION_DECLARATION, NodeKind.IF_STATEMENT, NodeKind.SWITCH_STATEMENT,
        NodeKind.SWITCH_CASE, NodeKind.DO_WHILE_STATEMENT, NodeKind.WHILE_STATEMENT,
        NodeKind.FOR_STATEMENT, NodeKind.FOR_IN_STATEMENT, NodeKind.FOR_OF_STATEMENT,
        NodeKind.TRY_CATCH_STATEMENT, NodeKind.RETURN, NodeKind.BREAK, NodeKind.CONTINUE,
        NodeKind.THROW, NodeKind.EXPRESSION_STATEMENT, NodeKind.EMPTY_STATEMENT,
    ]
)


def render(node: AstNode) -> str:
    """Render a node back to parseable source text."""
    r = _Renderer()
    if node.kind is NodeKind.PROGRAM:
        return "\n".join(r.stmt(s, 0) for s in node.children)
    if node.kind in _STATEMENT_KINDS:
        return r.stmt(node, 0)
    return r.expr(node, _COMMA)


def _escape_string(value: str) -> str:
    out = ['"']
    for ch in value:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _render_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e21:
        return "%d" % int(value)
    return repr(value)


def _contains_in_operator(node: AstNode) -> bool:
    """True when a bare `in` could leak into a for header."""
    if node.kind is NodeKind.FUNCTION_LITERAL:
        return False
    if node.kind is NodeKind.COMPARE_OPERATION and node.payload.get("op") == "in":
        return True
    return any(_contains_in_operator(c) for c in node.children)


def _starts_ambiguously(node: AstNode) -> bool:
    """True when the expression's first token would be `{` or `function`."""
    while True:
        kind = node.kind
        if kind is NodeKind.OBJECT_LITERAL:
            return True
        if kind is NodeKind.FUNCTION_LITERAL:
            return not node.payload.get("arrow")
        if kind in (
            NodeKind.BINARY_OPERATION,
            NodeKind.COMPARE_OPERATION,
            NodeKind.NARY_OPERATION,
            NodeKind.CONDITIONAL,
            NodeKind.ASSIGNMENT,
            NodeKind.COMPOUND_ASSIGNMENT,
            NodeKind.CALL,
            NodeKind.MEMBER_ACCESS,
        ):
            node = node.children[0]
            continue
        if kind is NodeKind.COUNT_OPERATION and not node.payload.get("prefix"):
            node = node.children[0]
            continue
        return False


class _Renderer:
    # -- statements --------------------------------------------------------

    def stmt(self, node: AstNode, indent: int) -> str:
        pad = "  " * indent
        kind = node.kind
        if kind is NodeKind.BLOCK:
            return pad + self.block(node, indent)
        if kind is NodeKind.EMPTY_STATEMENT:
            return pad + ";"
        if kind is NodeKind.EXPRESSION_STATEMENT:
            expr = node.children[0]
            text = self.expr(expr, _COMMA)
            if _starts_ambiguously(expr):
                text = "(%s)" % text
            return pad + text + ";"
        if kind is NodeKind.VARIABLE_DECLARATION:
            return pad + self.var_decl(node) + ";"
        if kind is NodeKind.FUNCTION_DECLARATION:
            return pad + self.function(node.children[0], indent)
        if kind is NodeKind.IF_STATEMENT:
            out = pad + "if (%s) " % self.expr(node.children[0], _COMMA)
            out += self.nested(node.children[1], indent)
            if len(node.children) == 3:
                out += " else " + self.nested(node.children[2], indent)
            return out
        if kind is NodeKind.WHILE_STATEMENT:
            return pad + "while (%s) %s" % (
                self.expr(node.children[0], _COMMA),
                self.nested(node.children[1], indent),
            )
        if kind is NodeKind.DO_WHILE_STATEMENT:
            return pad + "do %s while (%s);" % (
                self.nested(node.children[0], indent),
                self.expr(node.children[1], _COMMA),
            )
        if kind is NodeKind.FOR_STATEMENT:
            return self.for_stmt(node, indent)
        if kind in (NodeKind.FOR_IN_STATEMENT, NodeKind.FOR_OF_STATEMENT):
            word = "in" if kind is NodeKind.FOR_IN_STATEMENT else "of"
            decl = node.payload.get("decl_kind")
            prefix = (decl + " ") if decl else ""
            return pad + "for (%s%s %s %s) %s" % (
                prefix,
                self.expr(node.children[0], _CALL),
                word,
                self.expr(node.children[1], _ASSIGN),
                self.nested(node.children[2], indent),
            )
        if kind is NodeKind.SWITCH_STATEMENT:
            return self.switch(node, indent)
        if kind is NodeKind.TRY_CATCH_STATEMENT:
            return self.try_stmt(node, indent)
        if kind is NodeKind.RETURN:
            if node.children:
                return pad + "return %s;" % self.expr(node.children[0], _COMMA)
            return pad + "return;"
        if kind is NodeKind.THROW:
            return pad + "throw %s;" % self.expr(node.children[0], _COMMA)
        if kind is NodeKind.BREAK:
            return pad + "break;"
        if kind is NodeKind.CONTINUE:
            return pad + "continue;"
        raise ValueError("Not a statement kind: %s" % kind.value)

    def nested(self, node: AstNode, indent: int) -> str:
        """Render a statement used as a loop/if body, without leading pad."""
        if node.kind is NodeKind.BLOCK:
            return self.block(node, indent)
        return self.stmt(node, indent).lstrip()

    def block(self, node: AstNode, indent: int) -> str:
        if not node.children:
            return "{}"
        inner = "\n".join(self.stmt(s, indent + 1) for s in node.children)
        return "{\n%s\n%s}" % (inner, "  " * indent)

    def var_decl(self, node: AstNode, in_for_header: bool = False) -> str:
        parts = []
        for decl in node.children:
            if decl.kind is NodeKind.IDENTIFIER:
                parts.append(decl.payload["name"])
            else:
                target, init = decl.children
                text = self.expr(init, _ASSIGN)
                if in_for_header and _contains_in_operator(init):
                    text = "(%s)" % text
                parts.append("%s = %s" % (target.payload["name"], text))
        return "%s %s" % (node.payload["decl_kind"], ", ".join(parts))

    def for_stmt(self, node: AstNode, indent: int) -> str:
        pad = "  " * indent
        payload = node.payload
        idx = 0
        init = test = update = None
        if payload["has_init"]:
            init = node.children[idx]
            idx += 1
        if payload["has_test"]:
            test = node.children[idx]
            idx += 1
        if payload["has_update"]:
            update = node.children[idx]
            idx += 1
        body = node.children[idx]
        if init is None:
            init_text = ""
        elif init.kind is NodeKind.VARIABLE_DECLARATION:
            init_text = self.var_decl(init, in_for_header=True)
        else:
            init_text = self.expr(init, _COMMA)
            if _contains_in_operator(init):
                init_text = "(%s)" % init_text
        test_text = self.expr(test, _COMMA) if test is not None else ""
        update_text = self.expr(update, _COMMA) if update is not None else ""
        return pad + "for (%s; %s; %s) %s" % (init_text, test_text, update_text, self.nested(body, indent))

    def switch(self, node: AstNode, indent: int) -> str:
        pad = "  " * indent
        lines = [pad + "switch (%s) {" % self.expr(node.children[0], _COMMA)]
        for case in node.children[1:]:
            if case.payload["is_default"]:
                lines.append("  " * (indent + 1) + "default:")
                stmts = case.children
            else:
                lines.append("  " * (indent + 1) + "case %s:" % self.expr(case.children[0], _COMMA))
                stmts = case.children[1:]
            for s in stmts:
                lines.append(self.stmt(s, indent + 2))
        lines.append(pad + "}")
        return "\n".join(lines)

    def try_stmt(self, node: AstNode, indent: int) -> str:
        pad = "  " * indent
        payload = node.payload
        out = pad + "try " + self.block(node.children[0], indent)
        idx = 1
        if payload["has_catch"]:
            param = payload.get("catch_param")
            out += " catch " if param is None else " catch (%s) " % param
            out += self.block(node.children[idx], indent)
            idx += 1
        if payload["has_finally"]:
            out += " finally " + self.block(node.children[idx], indent)
        return out

    def function(self, literal: AstNode, indent: int) -> str:
        name = literal.payload.get("name")
        params = ", ".join(literal.payload["params"])
        header = "function %s(%s) " % (name, params) if name else "function (%s) " % params
        return header + self.block(literal.children[0], indent)

    # -- expressions ---------------------------------------------------------

    def expr(self, node: AstNode, min_prec: int) -> str:
        text, prec = self.raw_expr(node)
        if prec < min_prec:
            return "(%s)" % text
        return text

    def raw_expr(self, node: AstNode) -> tuple[str, int]:
        kind = node.kind
        if kind is NodeKind.IDENTIFIER:
            return node.payload["name"], _PRIMARY
        if kind is NodeKind.LITERAL:
            return self.literal(node), _PRIMARY
        if kind is NodeKind.TEMPLATE_LITERAL:
            return self.template(node), _PRIMARY
        if kind is NodeKind.ARRAY_LITERAL:
            return "[%s]" % ", ".join(self.expr(el, _ASSIGN) for el in node.children), _PRIMARY
        if kind is NodeKind.OBJECT_LITERAL:
            return self.object_literal(node), _PRIMARY
        if kind is NodeKind.FUNCTION_LITERAL:
            if node.payload.get("arrow"):
                params = ", ".join(node.payload["params"])
                return "(%s) => %s" % (params, self.block(node.children[0], 0)), _PRIMARY
            return self.function(node, 0), _PRIMARY
        if kind in (NodeKind.BINARY_OPERATION, NodeKind.COMPARE_OPERATION):
            return self.binary(node)
        if kind is NodeKind.NARY_OPERATION:
            return self.nary(node)
        if kind is NodeKind.UNARY_OPERATION:
            return self.unary(node)
        if kind is NodeKind.COUNT_OPERATION:
            target = self.expr(node.children[0], _CALL)
            if node.payload["prefix"]:
                return node.payload["op"] + target, _UNARY
            return target + node.payload["op"], _POSTFIX
        if kind is NodeKind.CONDITIONAL:
            test, cons, alt = node.children
            text = "%s ? %s : %s" % (
                self.expr(test, _NULLISH),
                self.expr(cons, _ASSIGN),
                self.expr(alt, _ASSIGN),
            )
            return text, _COND
        if kind in (NodeKind.ASSIGNMENT, NodeKind.COMPOUND_ASSIGNMENT):
            op = node.payload["op"]
            target, value = node.children
            return "%s %s %s" % (self.expr(target, _CALL), op, self.expr(value, _ASSIGN)), _ASSIGN
        if kind is NodeKind.CALL:
            return self.call(node), _CALL
        if kind is NodeKind.NEW:
            return self.new(node), _CALL
        if kind is NodeKind.MEMBER_ACCESS:
            return self.member(node), _CALL
        raise ValueError("Not an expression kind: %s" % kind.value)

    def literal(self, node: AstNode) -> str:
        lit_kind = node.payload["kind"]
        value = node.payload["value"]
        if lit_kind == "number":
            return _render_number(value)
        if lit_kind == "string":
            return _escape_string(value)
        if lit_kind == "boolean":
            return "true" if value else "false"
        if lit_kind == "null":
            return "null"
        if lit_kind == "regex":
            # always parenthesized: the lexer's regex-vs-division heuristic
            # looks one token back, and a bare regex after `)`, `}` or `--`
            # would re-lex as division
            return "(%s)" % value
        raise ValueError("Unknown literal kind %r" % lit_kind)

    def template(self, node: AstNode) -> str:
        quasis = node.payload["quasis"]
        out = ["`"]
        for i, quasi in enumerate(quasis):
            out.append(quasi.replace("\\", "\\\\").replace("`", "\\`").replace("${", "\\${"))
            if i < len(node.children):
                out.append("${%s}" % self.expr(node.children[i], _COMMA))
        out.append("`")
        return "".join(out)

    def object_literal(self, node: AstNode) -> str:
        parts = []
        for (key_kind, key), value in zip(node.payload["keys"], node.children):
            if key_kind == "id":
                key_text = key
            elif key_kind == "str":
                key_text = _escape_string(key)
            else:
                key_text = _render_number(key)
            parts.append("%s: %s" % (key_text, self.expr(value, _ASSIGN)))
        return "{%s}" % ", ".join(parts)

    def binary(self, node: AstNode) -> tuple[str, int]:
        op = node.payload["op"]
        left, right = node.children
        if op in _LOGICAL_OPERAND_PREC:
            operand_min = _LOGICAL_OPERAND_PREC[op]
            left_text = self.logical_operand(left, op, operand_min)
            right_text = self.logical_operand(right, op, operand_min)
            return "%s %s %s" % (left_text, op, right_text), _BINARY_PREC[op]
        if op == ",":
            return "%s, %s" % (self.expr(left, _COMMA), self.expr(right, _ASSIGN)), _COMMA
        if node.kind is NodeKind.COMPARE_OPERATION:
            prec = _REL if op in ("<", ">", "<=", ">=", "instanceof", "in") else _EQ
        else:
            prec = _BINARY_PREC[op]
        if op == "**":
            return "%s ** %s" % (self.expr(left, _POSTFIX), self.expr(right, _EXP)), _EXP
        sep = " %s " % op
        return self.expr(left, prec) + sep + self.expr(right, prec + 1), prec

    def logical_operand(self, operand: AstNode, op: str, operand_min: int) -> str:
        same_op = (
            operand.kind in (NodeKind.BINARY_OPERATION, NodeKind.NARY_OPERATION)
            and operand.payload.get("op") == op
        )
        if same_op:
            return "(%s)" % self.raw_expr(operand)[0]
        return self.expr(operand, operand_min)

    def nary(self, node: AstNode) -> tuple[str, int]:
        op = node.payload["op"]
        operand_min = _LOGICAL_OPERAND_PREC[op]
        parts = [self.logical_operand(c, op, operand_min) for c in node.children]
        return (" %s " % op).join(parts), _BINARY_PREC[op]

    def unary(self, node: AstNode) -> tuple[str, int]:
        op = node.payload["op"]
        operand = self.expr(node.children[0], _UNARY)
        if op in _WORD_UNARY:
            return "%s %s" % (op, operand), _UNARY
        if op in ("+", "-") and operand.startswith(op):
            return "%s %s" % (op, operand), _UNARY
        return op + operand, _UNARY

    def call(self, node: AstNode) -> str:
        callee = node.children[0]
        args = ", ".join(self.expr(a, _ASSIGN) for a in node.children[1:])
        callee_text = self.expr(callee, _CALL)
        if callee.kind is NodeKind.FUNCTION_LITERAL:
            callee_text = "(%s)" % self.raw_expr(callee)[0]
        return "%s(%s)" % (callee_text, args)

    def new(self, node: AstNode) -> str:
        callee = node.children[0]
        args = ", ".join(self.expr(a, _ASSIGN) for a in node.children[1:])
        callee_text = self.expr(callee, _CALL)
        if self._callee_spine_has_call(callee):
            callee_text = "(%s)" % self.raw_expr(callee)[0]
        return "new %s(%s)" % (callee_text, args)

    def member(self, node: AstNode) -> str:
        obj = node.children[0]
        obj_text = self.expr(obj, _CALL)
        if obj.kind is NodeKind.FUNCTION_LITERAL or (
            obj.kind is NodeKind.LITERAL and obj.payload["kind"] == "number"
        ):
            obj_text = "(%s)" % self.raw_expr(obj)[0]
        if node.payload["computed"]:
            return "%s[%s]" % (obj_text, self.expr(node.children[1], _COMMA))
        return "%s.%s" % (obj_text, node.payload["name"])

    def _callee_spine_has_call(self, node: AstNode) -> bool:
        while True:
            if node.kind is NodeKind.CALL:
                return True
            if node.kind is NodeKind.MEMBER_ACCESS:
                node = node.children[0]
                continue
            return False
