"""Recursive-descent parser for the JavaScript subset.

Every function body is parsed eagerly, so by the time a program is
returned there is no deferred syntax left anywhere in the tree. Syntax
outside the subset raises UnsupportedSyntax naming the construct.

Child layout per kind (positions are fixed):
  Program/Block            [*statements]
  VariableDeclaration      [*declarators] where each is Assignment(target, init) or a bare Identifier
  FunctionDeclaration      [FunctionLiteral]
  FunctionLiteral          [body Block]
  IfStatement              [test, consequent] or [test, consequent, alternate]
  Conditional              [test, consequent, alternate]
  SwitchStatement          [discriminant, *SwitchCase]
  SwitchCase               [test, *statements] or [*statements] when default
  WhileStatement           [test, body]
  DoWhileStatement         [body, test]
  ForStatement             [init?, test?, update?, body] per payload flags
  ForIn/ForOfStatement     [target, object, body]
  TryCatchStatement        [try Block, catch Block?, finally Block?] per payload flags
  Binary/Compare           [left, right]
  NaryOperation            [*operands] (3 or more, one logical operator)
  Unary/Count/Throw/Return [operand?]
  Assignment/Compound      [target, value]
  Call/New                 [callee, *arguments]
  MemberAccess             [object] or [object, index] when computed
  TemplateLiteral          [*expressions] with payload quasis around them
  ArrayLiteral             [*elements]
  ObjectLiteral            [*values] with payload keys aligned
  ExpressionStatement      [expression]
"""
from __future__ import annotations

from typing import Optional

from .lexer import (
    EOF,
    IDENT,
    KEYWORD,
    NUMBER,
    PUNCT,
    REGEX,
    STRING,
    TEMPLATE,
    Token,
    tokenize,
)
from .nodes import AstNode, NodeKind, Span, finalize_tree


class ParseError(Exception):
    """Raised on input outside the grammar, with the offending position."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__("%s (line %d, column %d)" % (message, line, col))
        self.line = line
        self.col = col


class UnsupportedSyntax(ParseError):
    """Raised for recognized-but-unsupported constructs, naming the construct."""

    def __init__(self, construct: str, line: int, col: int) -> None:
        ParseError.__init__(self, "Unsupported syntax: %s" % construct, line, col)
        self.construct = construct


_ASSIGN_OPS = frozenset(["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=", "**="])
_EQUALITY_OPS = ("==", "!=", "===", "!==")
_RELATIONAL_OPS = ("<", ">", "<=", ">=")
_UNSUPPORTED_KEYWORDS = {
    "class": "class",
    "async": "async function",
    "await": "await",
    "yield": "yield",
    "import": "import",
    "export": "export",
    "super": "super",
    "extends": "extends",
    "with": "with statement",
    "debugger": "debugger",
}


class Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    # -- cursor helpers ----------------------------------------------------

    def _cur(self) -> Token:
        return self.tokens[self.pos]

    def _prev(self) -> Token:
        return self.tokens[self.pos - 1]

    def _peek_tok(self, offset: int) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def _advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != EOF:
            self.pos += 1
        return tok

    def _at_punct(self, text: str) -> bool:
        return self._cur().is_punct(text)

    def _at_keyword(self, text: str) -> bool:
        return self._cur().is_keyword(text)

    def _eat_punct(self, text: str) -> bool:
        if self._at_punct(text):
            self._advance()
            return True
        return False

    def _expect_punct(self, text: str) -> Token:
        if not self._at_punct(text):
            raise self._error("Expected '%s'" % text)
        return self._advance()

    def _expect_keyword(self, text: str) -> Token:
        if not self._at_keyword(text):
            raise self._error("Expected '%s'" % text)
        return self._advance()

    def _error(self, message: str) -> ParseError:
        tok = self._cur()
        return ParseError(message, tok.line, tok.col)

    def _unsupported(self, construct: str, tok: Optional[Token] = None) -> UnsupportedSyntax:
        tok = tok or self._cur()
        return UnsupportedSyntax(construct, tok.line, tok.col)

    def _expect_semicolon(self) -> None:
        """Consume ';', or auto-insert one at '}', EOF, or a line break."""
        if self._eat_punct(";"):
            return
        cur = self._cur()
        if cur.type == EOF or cur.is_punct("}") or cur.nl_before:
            return
        raise self._error("Expected ';'")

    def _node(self, kind: NodeKind, start, payload=None, children=None) -> AstNode:
        """Build a node spanning from `start` (a Token or AstNode) to the last consumed token."""
        end = self._prev()
        if isinstance(start, AstNode):
            start_line, start_col = start.span.start_line, start.span.start_col
        else:
            start_line, start_col = start.line, start.col
        span = Span(start_line, start_col, end.end_line, end.end_col)
        return AstNode(kind, span, payload, children)

    # -- program and statements ---------------------------------------------

    def parse_program(self) -> AstNode:
        start = self._cur()
        stmts = []
        while self._cur().type != EOF:
            stmts.append(self.parse_statement())
        if stmts:
            span = Span(start.line, start.col, self._prev().end_line, self._prev().end_col)
        else:
            span = Span(1, 1, 1, 1)
        return AstNode(NodeKind.PROGRAM, span, None, stmts)

    def parse_statement(self) -> AstNode:
        tok = self._cur()
        if tok.type == PUNCT:
            if tok.value == "{":
                return self.parse_block()
            if tok.value == ";":
                self._advance()
                return self._node(NodeKind.EMPTY_STATEMENT, tok)
        if tok.type == KEYWORD:
            word = tok.value
            if word in ("var", "let", "const"):
                return self.parse_variable_statement()
            if word == "function":
                return self.parse_function_declaration()
            if word == "if":
                return self.parse_if()
            if word == "switch":
                return self.parse_switch()
            if word == "while":
                return self.parse_while()
            if word == "do":
                return self.parse_do_while()
            if word == "for":
                return self.parse_for()
            if word == "try":
                return self.parse_try()
            if word == "return":
                return self.parse_return()
            if word == "throw":
                return self.parse_throw()
            if word in ("break", "continue"):
                return self.parse_break_continue()
            if word in _UNSUPPORTED_KEYWORDS:
                raise self._unsupported(_UNSUPPORTED_KEYWORDS[word])
        if tok.type == IDENT and self._peek_tok(1).is_punct(":"):
            raise self._unsupported("labeled statement")
        expr = self.parse_expression()
        self._expect_semicolon()
        stmt = AstNode(NodeKind.EXPRESSION_STATEMENT, expr.span, None, [expr])
        return stmt

    def parse_block(self) -> AstNode:
        start = self._expect_punct("{")
        stmts = []
        while not self._at_punct("}"):
            if self._cur().type == EOF:
                raise self._error("Unterminated block")
            stmts.append(self.parse_statement())
        self._expect_punct("}")
        return self._node(NodeKind.BLOCK, start, None, stmts)

    def parse_variable_statement(self) -> AstNode:
        start = self._advance()
        decls = [self._parse_declarator(no_in=False)]
        while self._eat_punct(","):
            decls.append(self._parse_declarator(no_in=False))
        self._expect_semicolon()
        return self._node(NodeKind.VARIABLE_DECLARATION, start, {"decl_kind": start.value}, decls)

    def _parse_declarator(self, no_in: bool) -> AstNode:
        tok = self._cur()
        if tok.is_punct("{") or tok.is_punct("["):
            raise self._unsupported("destructuring declaration")
        if tok.type != IDENT:
            raise self._error("Expected variable name")
        self._advance()
        target = self._node(NodeKind.IDENTIFIER, tok, {"name": tok.value})
        if self._eat_punct("="):
            init = self.parse_assignment(no_in=no_in)
            return self._node(NodeKind.ASSIGNMENT, tok, {"op": "="}, [target, init])
        return target

    def parse_function_declaration(self) -> AstNode:
        start = self._cur()
        literal = self.parse_function_literal()
        name = literal.payload.get("name")
        if not name:
            raise ParseError("Function declaration requires a name", start.line, start.col)
        return self._node(NodeKind.FUNCTION_DECLARATION, start, {"name": name}, [literal])

    def parse_function_literal(self) -> AstNode:
        start = self._expect_keyword("function")
        if self._at_punct("*"):
            raise self._unsupported("generator function")
        name = None
        if self._cur().type == IDENT:
            name = self._advance().value
        params = self._parse_params()
        body = self.parse_block()
        payload = {"name": name, "params": params, "arrow": False}
        return self._node(NodeKind.FUNCTION_LITERAL, start, payload, [body])

    def _parse_params(self) -> list[str]:
        self._expect_punct("(")
        params: list[str] = []
        while not self._at_punct(")"):
            tok = self._cur()
            if tok.is_punct("{") or tok.is_punct("["):
                raise self._unsupported("destructuring parameter")
            if tok.is_punct("..."):
                raise self._unsupported("rest parameter")
            if tok.type != IDENT:
                raise self._error("Expected parameter name")
            self._advance()
            if self._at_punct("="):
                raise self._unsupported("default parameter")
            params.append(tok.value)
            if not self._eat_punct(","):
                break
        self._expect_punct(")")
        return params

    def parse_if(self) -> AstNode:
        start = self._advance()
        self._expect_punct("(")
        test = self.parse_expression()
        self._expect_punct(")")
        consequent = self.parse_statement()
        children = [test, consequent]
        if self._at_keyword("else"):
            self._advance()
            children.append(self.parse_statement())
        return self._node(NodeKind.IF_STATEMENT, start, None, children)

    def parse_switch(self) -> AstNode:
        start = self._advance()
        self._expect_punct("(")
        disc = self.parse_expression()
        self._expect_punct(")")
        self._expect_punct("{")
        cases = []
        seen_default = False
        while not self._at_punct("}"):
            case_tok = self._cur()
            if self._at_keyword("case"):
                self._advance()
                test = self.parse_expression()
                self._expect_punct(":")
                stmts = self._parse_case_body()
                cases.append(self._node(NodeKind.SWITCH_CASE, case_tok, {"is_default": False}, [test] + stmts))
            elif self._at_keyword("default"):
                if seen_default:
                    raise self._error("Multiple default clauses")
                seen_default = True
                self._advance()
                self._expect_punct(":")
                stmts = self._parse_case_body()
                cases.append(self._node(NodeKind.SWITCH_CASE, case_tok, {"is_default": True}, stmts))
            else:
                raise self._error("Expected 'case' or 'default'")
        self._expect_punct("}")
        return self._node(NodeKind.SWITCH_STATEMENT, start, None, [disc] + cases)

    def _parse_case_body(self) -> list[AstNode]:
        stmts = []
        while not (self._at_keyword("case") or self._at_keyword("default") or self._at_punct("}")):
            if self._cur().type == EOF:
                raise self._error("Unterminated switch")
            stmts.append(self.parse_statement())
        return stmts

    def parse_while(self) -> AstNode:
        start = self._advance()
        self._expect_punct("(")
        test = self.parse_expression()
        self._expect_punct(")")
        body = self.parse_statement()
        return self._node(NodeKind.WHILE_STATEMENT, start, None, [test, body])

    def parse_do_while(self) -> AstNode:
        start = self._advance()
        body = self.parse_statement()
        self._expect_keyword("while")
        self._expect_punct("(")
        test = self.parse_expression()
        self._expect_punct(")")
        self._expect_semicolon()
        return self._node(NodeKind.DO_WHILE_STATEMENT, start, None, [body, test])

    def parse_for(self) -> AstNode:
        start = self._advance()
        self._expect_punct("(")
        init: Optional[AstNode] = None
        if self._cur().type == KEYWORD and self._cur().value in ("var", "let", "const"):
            decl_tok = self._advance()
            first = self._parse_declarator(no_in=True)
            iter_kind = self._iteration_keyword()
            if iter_kind is not None and first.kind is NodeKind.IDENTIFIER:
                return self._parse_for_iteration(start, iter_kind, first, decl_tok.value)
            decls = [first]
            while self._eat_punct(","):
                decls.append(self._parse_declarator(no_in=True))
            init = self._node(NodeKind.VARIABLE_DECLARATION, decl_tok, {"decl_kind": decl_tok.value}, decls)
        elif not self._at_punct(";"):
            init_expr = self.parse_expression(no_in=True)
            iter_kind = self._iteration_keyword()
            if iter_kind is not None:
                if init_expr.kind not in (NodeKind.IDENTIFIER, NodeKind.MEMBER_ACCESS):
                    raise self._error("Invalid loop target")
                return self._parse_for_iteration(start, iter_kind, init_expr, None)
            init = init_expr
        self._expect_punct(";")
        test = None if self._at_punct(";") else self.parse_expression()
        self._expect_punct(";")
        update = None if self._at_punct(")") else self.parse_expression()
        self._expect_punct(")")
        body = self.parse_statement()
        payload = {"has_init": init is not None, "has_test": test is not None, "has_update": update is not None}
        children = [c for c in (init, test, update) if c is not None] + [body]
        return self._node(NodeKind.FOR_STATEMENT, start, payload, children)

    def _iteration_keyword(self) -> Optional[str]:
        if self._at_keyword("in"):
            return "in"
        cur = self._cur()
        if cur.type == IDENT and cur.value == "of":
            return "of"
        return None

    def _parse_for_iteration(self, start: Token, kind: str, target: AstNode, decl_kind: Optional[str]) -> AstNode:
        self._advance()
        obj = self.parse_assignment(no_in=False)
        self._expect_punct(")")
        body = self.parse_statement()
        node_kind = NodeKind.FOR_IN_STATEMENT if kind == "in" else NodeKind.FOR_OF_STATEMENT
        return self._node(node_kind, start, {"decl_kind": decl_kind}, [target, obj, body])

    def parse_try(self) -> AstNode:
        start = self._advance()
        try_block = self.parse_block()
        catch_block = None
        catch_param = None
        finally_block = None
        if self._at_keyword("catch"):
            self._advance()
            if self._eat_punct("("):
                tok = self._cur()
                if tok.is_punct("{") or tok.is_punct("["):
                    raise self._unsupported("destructuring catch parameter")
                if tok.type != IDENT:
                    raise self._error("Expected catch parameter name")
                self._advance()
                catch_param = tok.value
                self._expect_punct(")")
            catch_block = self.parse_block()
        if self._at_keyword("finally"):
            self._advance()
            finally_block = self.parse_block()
        if catch_block is None and finally_block is None:
            raise self._error("Expected 'catch' or 'finally'")
        payload = {
            "has_catch": catch_block is not None,
            "has_finally": finally_block is not None,
            "catch_param": catch_param,
        }
        children = [try_block] + [b for b in (catch_block, finally_block) if b is not None]
        return self._node(NodeKind.TRY_CATCH_STATEMENT, start, payload, children)

    def parse_return(self) -> AstNode:
        start = self._advance()
        cur = self._cur()
        children = []
        if not (cur.type == EOF or cur.is_punct(";") or cur.is_punct("}") or cur.nl_before):
            children.append(self.parse_expression())
        self._expect_semicolon()
        return self._node(NodeKind.RETURN, start, None, children)

    def parse_throw(self) -> AstNode:
        start = self._advance()
        if self._cur().nl_before:
            raise self._error("Illegal newline after 'throw'")
        expr = self.parse_expression()
        self._expect_semicolon()
        return self._node(NodeKind.THROW, start, None, [expr])

    def parse_break_continue(self) -> AstNode:
        start = self._advance()
        kind = NodeKind.BREAK if start.value == "break" else NodeKind.CONTINUE
        cur = self._cur()
        if cur.type == IDENT and not cur.nl_before:
            raise self._unsupported("labeled %s" % start.value)
        self._expect_semicolon()
        return self._node(kind, start)

    # -- expressions ---------------------------------------------------------

    def parse_expression(self, no_in: bool = False) -> AstNode:
        start = self._cur()
        expr = self.parse_assignment(no_in)
        while self._at_punct(","):
            self._advance()
            right = self.parse_assignment(no_in)
            expr = self._node(NodeKind.BINARY_OPERATION, start, {"op": ","}, [expr, right])
        return expr

    def parse_assignment(self, no_in: bool = False) -> AstNode:
        start = self._cur()
        left = self.parse_conditional(no_in)
        cur = self._cur()
        if cur.type == PUNCT and cur.value in _ASSIGN_OPS:
            if left.kind not in (NodeKind.IDENTIFIER, NodeKind.MEMBER_ACCESS):
                raise ParseError("Invalid assignment target", cur.line, cur.col)
            self._advance()
            right = self.parse_assignment(no_in)
            if cur.value == "=":
                return self._node(NodeKind.ASSIGNMENT, start, {"op": "="}, [left, right])
            return self._node(NodeKind.COMPOUND_ASSIGNMENT, start, {"op": cur.value}, [left, right])
        return left

    def parse_conditional(self, no_in: bool) -> AstNode:
        start = self._cur()
        test = self._parse_logical_chain(no_in, "??")
        if not self._at_punct("?"):
            return test
        self._advance()
        consequent = self.parse_assignment(False)
        self._expect_punct(":")
        alternate = self.parse_assignment(no_in)
        return self._node(NodeKind.CONDITIONAL, start, None, [test, consequent, alternate])

    _LOGICAL_NEXT = {"??": "||", "||": "&&"}

    def _parse_logical_chain(self, no_in: bool, op: str) -> AstNode:
        start = self._cur()
        below = self._LOGICAL_NEXT.get(op)
        parse_operand = (
            (lambda: self._parse_logical_chain(no_in, below)) if below else (lambda: self.parse_bitwise_or(no_in))
        )
        operands = [parse_operand()]
        while self._at_punct(op):
            self._advance()
            operands.append(parse_operand())
        if len(operands) == 1:
            return operands[0]
        if len(operands) == 2:
            return self._node(NodeKind.BINARY_OPERATION, start, {"op": op}, operands)
        return self._node(NodeKind.NARY_OPERATION, start, {"op": op}, operands)

    def _binary_level(self, no_in: bool, ops: tuple, next_parser, kind: NodeKind = NodeKind.BINARY_OPERATION) -> AstNode:
        start = self._cur()
        left = next_parser(no_in)
        while True:
            cur = self._cur()
            if cur.type == PUNCT and cur.value in ops:
                self._advance()
                right = next_parser(no_in)
                left = self._node(kind, start, {"op": cur.value}, [left, right])
            else:
                return left

    def parse_bitwise_or(self, no_in: bool) -> AstNode:
        return self._binary_level(no_in, ("|",), self.parse_bitwise_xor)

    def parse_bitwise_xor(self, no_in: bool) -> AstNode:
        return self._binary_level(no_in, ("^",), self.parse_bitwise_and)

    def parse_bitwise_and(self, no_in: bool) -> AstNode:
        return self._binary_level(no_in, ("&",), self.parse_equality)

    def parse_equality(self, no_in: bool) -> AstNode:
        return self._binary_level(no_in, _EQUALITY_OPS, self.parse_relational, NodeKind.COMPARE_OPERATION)

    def parse_relational(self, no_in: bool) -> AstNode:
        start = self._cur()
        left = self.parse_shift(no_in)
        while True:
            cur = self._cur()
            is_rel = cur.type == PUNCT and cur.value in _RELATIONAL_OPS
            is_word = cur.is_keyword("instanceof") or (cur.is_keyword("in") and not no_in)
            if not (is_rel or is_word):
                return left
            self._advance()
            right = self.parse_shift(no_in)
            left = self._node(NodeKind.COMPARE_OPERATION, start, {"op": cur.value}, [left, right])

    def parse_shift(self, no_in: bool) -> AstNode:
        return self._binary_level(no_in, ("<<", ">>", ">>>"), self.parse_additive)

    def parse_additive(self, no_in: bool) -> AstNode:
        return self._binary_level(no_in, ("+", "-"), self.parse_multiplicative)

    def parse_multiplicative(self, no_in: bool) -> AstNode:
        return self._binary_level(no_in, ("*", "/", "%"), self.parse_exponent)

    def parse_exponent(self, no_in: bool) -> AstNode:
        start = self._cur()
        base = self.parse_unary(no_in)
        if self._at_punct("**"):
            self._advance()
            exp = self.parse_exponent(no_in)
            return self._node(NodeKind.BINARY_OPERATION, start, {"op": "**"}, [base, exp])
        return base

    def parse_unary(self, no_in: bool) -> AstNode:
        tok = self._cur()
        if tok.type == PUNCT and tok.value in ("!", "~", "+", "-"):
            self._advance()
            operand = self.parse_unary(no_in)
            return self._node(NodeKind.UNARY_OPERATION, tok, {"op": tok.value}, [operand])
        if tok.type == PUNCT and tok.value in ("++", "--"):
            self._advance()
            operand = self.parse_unary(no_in)
            self._check_count_target(operand, tok)
            return self._node(NodeKind.COUNT_OPERATION, tok, {"op": tok.value, "prefix": True}, [operand])
        if tok.type == KEYWORD and tok.value in ("typeof", "void", "delete"):
            self._advance()
            operand = self.parse_unary(no_in)
            return self._node(NodeKind.UNARY_OPERATION, tok, {"op": tok.value}, [operand])
        return self.parse_postfix(no_in)

    def _check_count_target(self, node: AstNode, tok: Token) -> None:
        if node.kind not in (NodeKind.IDENTIFIER, NodeKind.MEMBER_ACCESS):
            raise ParseError("Invalid increment/decrement target", tok.line, tok.col)

    def parse_postfix(self, no_in: bool) -> AstNode:
        start = self._cur()
        expr = self.parse_call_member()
        cur = self._cur()
        if cur.type == PUNCT and cur.value in ("++", "--") and not cur.nl_before:
            self._advance()
            self._check_count_target(expr, cur)
            return self._node(NodeKind.COUNT_OPERATION, start, {"op": cur.value, "prefix": False}, [expr])
        return expr

    def parse_call_member(self) -> AstNode:
        if self._at_keyword("new"):
            return self._parse_new()
        expr = self.parse_primary()
        return self._member_call_chain(expr, expr, allow_call=True)

    def _parse_new(self) -> AstNode:
        start = self._expect_keyword("new")
        if self._at_keyword("new"):
            callee: AstNode = self._parse_new()
        else:
            callee = self.parse_primary()
            callee = self._member_call_chain(callee, start, allow_call=False)
        args: list[AstNode] = []
        if self._at_punct("("):
            args = self._parse_arguments()
        new_node = self._node(NodeKind.NEW, start, None, [callee] + args)
        return self._member_call_chain(new_node, start, allow_call=True)

    def _member_call_chain(self, expr: AstNode, start: Token, allow_call: bool) -> AstNode:
        while True:
            cur = self._cur()
            if cur.is_punct("."):
                self._advance()
                prop = self._cur()
                if prop.type not in (IDENT, KEYWORD):
                    raise self._error("Expected property name")
                self._advance()
                payload = {"computed": False, "name": prop.value}
                expr = self._node(NodeKind.MEMBER_ACCESS, start, payload, [expr])
            elif cur.is_punct("["):
                self._advance()
                index = self.parse_expression(False)
                self._expect_punct("]")
                expr = self._node(NodeKind.MEMBER_ACCESS, start, {"computed": True, "name": None}, [expr, index])
            elif cur.is_punct("(") and allow_call:
                args = self._parse_arguments()
                expr = self._node(NodeKind.CALL, start, None, [expr] + args)
            elif cur.is_punct("?."):
                raise self._unsupported("optional chaining")
            elif cur.type == TEMPLATE:
                raise self._unsupported("tagged template")
            else:
                return expr

    def _parse_arguments(self) -> list[AstNode]:
        self._expect_punct("(")
        args = []
        while not self._at_punct(")"):
            if self._at_punct("..."):
                raise self._unsupported("spread argument")
            args.append(self.parse_assignment(False))
            if not self._eat_punct(","):
                break
        self._expect_punct(")")
        return args

    # -- primaries -------------------------------------------------------------

    def parse_primary(self) -> AstNode:
        tok = self._cur()
        if tok.type == PUNCT:
            if tok.value == "(":
                if self._arrow_ahead():
                    return self._parse_arrow()
                self._advance()
                expr = self.parse_expression(False)
                self._expect_punct(")")
                return expr
            if tok.value == "[":
                return self._parse_array_literal()
            if tok.value == "{":
                return self._parse_object_literal()
        if tok.type == IDENT:
            if self.tokens[self.pos + 1].is_punct("=>"):
                return self._parse_arrow()
            self._advance()
            return self._node(NodeKind.IDENTIFIER, tok, {"name": tok.value})
        if tok.type == NUMBER:
            self._advance()
            return self._node(NodeKind.LITERAL, tok, {"kind": "number", "value": tok.value})
        if tok.type == STRING:
            self._advance()
            return self._node(NodeKind.LITERAL, tok, {"kind": "string", "value": tok.value})
        if tok.type == REGEX:
            self._advance()
            return self._node(NodeKind.LITERAL, tok, {"kind": "regex", "value": tok.value})
        if tok.type == TEMPLATE:
            return self._parse_template(tok)
        if tok.type == KEYWORD:
            word = tok.value
            if word == "function":
                return self.parse_function_literal()
            if word == "this":
                self._advance()
                return self._node(NodeKind.IDENTIFIER, tok, {"name": "this"})
            if word in ("true", "false"):
                self._advance()
                return self._node(NodeKind.LITERAL, tok, {"kind": "boolean", "value": word == "true"})
            if word == "null":
                self._advance()
                return self._node(NodeKind.LITERAL, tok, {"kind": "null", "value": None})
            if word in _UNSUPPORTED_KEYWORDS:
                raise self._unsupported(_UNSUPPORTED_KEYWORDS[word])
        raise self._error("Unexpected token")

    def _arrow_ahead(self) -> bool:
        """At '(' decide whether it opens an arrow parameter list."""
        depth = 0
        i = self.pos
        while i < len(self.tokens):
            tok = self.tokens[i]
            if tok.type == PUNCT and tok.value in ("(", "[", "{"):
                depth += 1
            elif tok.type == PUNCT and tok.value in (")", "]", "}"):
                depth -= 1
                if depth == 0:
                    nxt = self.tokens[i + 1] if i + 1 < len(self.tokens) else None
                    return nxt is not None and nxt.is_punct("=>")
            elif tok.type == EOF:
                return False
            i += 1
        return False

    def _parse_arrow(self) -> AstNode:
        start = self._cur()
        if start.type == IDENT:
            self._advance()
            params = [start.value]
        else:
            params = self._parse_params()
        self._expect_punct("=>")
        if self._at_punct("{"):
            body = self.parse_block()
        else:
            expr = self.parse_assignment(False)
            ret = AstNode(NodeKind.RETURN, expr.span, None, [expr])
            body = AstNode(NodeKind.BLOCK, expr.span, None, [ret])
        payload = {"name": None, "params": params, "arrow": True}
        return self._node(NodeKind.FUNCTION_LITERAL, start, payload, [body])

    def _parse_template(self, tok: Token) -> AstNode:
        self._advance()
        quasis: list[str] = []
        exprs: list[AstNode] = []
        for part in tok.value:
            if part[0] == "str":
                quasis.append(part[1])
            else:
                _, src, line, col = part
                sub = Parser(tokenize(src, line=line, col=col))
                expr = sub.parse_expression(False)
                if sub._cur().type != EOF:
                    raise sub._error("Unexpected token in template expression")
                exprs.append(expr)
        return self._node(NodeKind.TEMPLATE_LITERAL, tok, {"quasis": quasis}, exprs)

    def _parse_array_literal(self) -> AstNode:
        start = self._expect_punct("[")
        elements = []
        while not self._at_punct("]"):
            if self._at_punct(","):
                raise self._unsupported("array hole")
            if self._at_punct("..."):
                raise self._unsupported("spread element")
            elements.append(self.parse_assignment(False))
            if not self._eat_punct(","):
                break
        self._expect_punct("]")
        return self._node(NodeKind.ARRAY_LITERAL, start, None, elements)

    def _parse_object_literal(self) -> AstNode:
        start = self._expect_punct("{")
        keys: list[tuple] = []
        values: list[AstNode] = []
        while not self._at_punct("}"):
            tok = self._cur()
            if tok.is_punct("["):
                raise self._unsupported("computed property key")
            if tok.is_punct("..."):
                raise self._unsupported("object spread")
            if tok.type in (IDENT, KEYWORD):
                if tok.value in ("get", "set") and self.tokens[self.pos + 1].type in (IDENT, KEYWORD, STRING, NUMBER):
                    raise self._unsupported("accessor property")
                self._advance()
                key = ("id", tok.value)
            elif tok.type == STRING:
                self._advance()
                key = ("str", tok.value)
            elif tok.type == NUMBER:
                self._advance()
                key = ("num", tok.value)
            else:
                raise self._error("Expected property key")
            if self._eat_punct(":"):
                value = self.parse_assignment(False)
            elif self._at_punct("("):
                params = self._parse_params()
                body = self.parse_block()
                payload = {"name": None, "params": params, "arrow": False}
                value = self._node(NodeKind.FUNCTION_LITERAL, tok, payload, [body])
            elif key[0] == "id" and (self._at_punct(",") or self._at_punct("}")):
                value = self._node(NodeKind.IDENTIFIER, tok, {"name": key[1]})
            else:
                raise self._error("Expected ':' after property key")
            keys.append(key)
            values.append(value)
            if not self._eat_punct(","):
                break
        self._expect_punct("}")
        return self._node(NodeKind.OBJECT_LITERAL, start, {"keys": keys}, values)


def parse(text: str) -> AstNode:
    """Parse source text into a finalized Program node."""
    parser = Parser(tokenize(text))
    program = parser.parse_program()
    return finalize_tree(program)
