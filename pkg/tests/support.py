"""Helpers shared across test modules."""
from __future__ import annotations

import pathlib

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


def fixture_path(name: str) -> pathlib.Path:
    return FIXTURES / name


def boundary_program(api_position: int) -> str:
    """An `if` whose block places a catalog API call at a chosen scan position.

    The scanned region's pre-order is: Block (1 node), filler statements
    (`x;` costs 2 nodes, `;` costs 1), one ExpressionStatement, then the
    Call node itself. Filler is sized so the Call is visited exactly
    `api_position`-th; tests verify the arithmetic with node_count.
    """
    filler_budget = api_position - 3
    assert filler_budget >= 0
    pairs, singles = divmod(filler_budget, 2)
    lines = ["if (c) {"]
    lines += ["  x;"] * pairs
    lines += ["  ;"] * singles
    lines += ["  setTimeout(f, 0);", "}"]
    return "\n".join(lines)
