"""Lossless front end: lex and parse the supported C99 subset, emit it back.

parse() builds a token-faithful tree; emit() reproduces the input
byte-for-byte as long as the tree was not modified. count_sloc() counts
logical source lines (one per declaration, statement, signature and
control-flow header).
"""

from .lexer import Token, tokenize
from .nodes import (
    CompoundNode, DeclStmtNode, Declarator, DirectiveNode, FunctionNode,
    GeneratedNode, IfNode, LoopNode, Node, ParamNode, PragmaNode, ReturnNode,
    SourceUnit, SwitchNode, emit, walk,
)
from .parser import parse, parse_fragment
from .sloc import count_sloc, count_sloc_text

__all__ = [
    "Token", "tokenize", "parse", "parse_fragment", "emit",
    "count_sloc", "count_sloc_text", "walk",
    "SourceUnit", "Node", "FunctionNode", "CompoundNode", "DeclStmtNode",
    "Declarator", "DirectiveNode", "GeneratedNode", "IfNode", "LoopNode",
    "ParamNode", "PragmaNode", "ReturnNode", "SwitchNode",
]
