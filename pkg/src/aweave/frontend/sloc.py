"""Logical source line counting.

One logical line per declaration, statement, function signature and
control-flow header. Braces, blank lines, comments, labels and
preprocessor lines count zero, so the measure is invariant under
formatting and comment edits.
"""

from .nodes import (
    CompoundNode, DeclStmtNode, DirectiveNode, FunctionNode, GeneratedNode,
    IfNode, LabelNode, LoopNode, OpaqueStmtNode, PragmaNode, ReturnNode,
    SourceUnit, SwitchNode, TypedefNode,
)


def count_sloc(unit):
    total = 0
    for node in unit.children():
        if isinstance(node, FunctionNode):
            total += 1 + stmt_sloc(node.body)
        elif isinstance(node, (TypedefNode, DeclStmtNode)):
            total += 1
        elif isinstance(node, GeneratedNode):
            total += node.sloc
        elif isinstance(node, (DirectiveNode, PragmaNode)):
            pass
        else:
            # opaque top-level runs (prototypes, struct definitions)
            total += 1
    return total


def stmt_sloc(node):
    if isinstance(node, CompoundNode):
        return sum(stmt_sloc(c) for c in node.children())
    if isinstance(node, LoopNode):
        return 1 + stmt_sloc(node.body)
    if isinstance(node, IfNode):
        n = 1 + stmt_sloc(node.then_node)
        if node.else_node is not None:
            n += stmt_sloc(node.else_node)
        return n
    if isinstance(node, SwitchNode):
        return 1 + stmt_sloc(node.body)
    if isinstance(node, GeneratedNode):
        return node.sloc
    if isinstance(node, (PragmaNode, LabelNode, DirectiveNode)):
        return 0
    if isinstance(node, OpaqueStmtNode):
        if node.body is not None:     # do-while carries its body
            return 1 + stmt_sloc(node.body)
        return 1
    if isinstance(node, (ReturnNode, DeclStmtNode)):
        return 1
    return 1


def count_sloc_text(text, file_name="<text>"):
    from .parser import parse
    return count_sloc(parse(text, file_name))
