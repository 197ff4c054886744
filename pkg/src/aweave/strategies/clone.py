"""Call-tree cloning: duplicate a function and everything it transitively
calls inside the unit, redirecting calls inside the clones."""

from ..errors import DuplicateName, FunctionNotFound
from ..frontend import scan


def call_graph(ast):
    """name -> callees defined in this unit, in source order."""
    defined = {fn.name for fn in ast.functions()}
    graph = {}
    for fn in ast.functions():
        seen = []
        for call in scan.calls_under(fn.body):
            if call.name in defined and call.name not in seen:
                seen.append(call.name)
        graph[fn.name] = seen
    return graph


def reachable_functions(ast, root):
    """Depth-first discovery order of root plus its defined callees."""
    graph = call_graph(ast)
    if root not in graph:
        raise FunctionNotFound(f"no function {root!r}")
    order = []
    seen = set()

    def visit(name):
        if name in seen:
            return
        seen.add(name)
        order.append(name)
        for callee in graph[name]:
            visit(callee)

    visit(root)
    return order


def clone_call_tree(session, root_function, suffix):
    """Clone root and every transitively called defined function, naming each
    original+suffix and redirecting calls inside the clones to the clones.
    External (library) calls are untouched; a recursive function's clone calls
    itself. Returns the clone names in discovery order."""
    ast = session.ast
    order = reachable_functions(ast, root_function)
    for name in order:
        target = name + suffix
        if ast.function(target) is not None:
            raise DuplicateName(f"{target!r} is already defined")
    cloned = set(order)
    clones = []
    for name in order:
        jp = session.function_jp(name)
        clone_jp = session.clone_function(jp, name + suffix)
        clones.append(clone_jp)
    for clone_jp in clones:
        for call in scan.calls_under(clone_jp.node.body):
            if call.name in cloned:
                call.name_tok.text = call.name + suffix
    return [name + suffix for name in order]


def create_typed_version(session, function_name, suffix, pmap):
    """Clone the call tree, then retype every clone; originals untouched."""
    from .precision import change_precision
    names = clone_call_tree(session, function_name, suffix)
    for name in names:
        change_precision(session, name, pmap)
    return names
