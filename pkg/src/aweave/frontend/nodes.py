"""Tree nodes over the token stream.

A node's ``parts`` list interleaves raw tokens (trivia and structural
punctuation) with child nodes; flattening the tree in order yields the
original token sequence. Emission is therefore plain concatenation, and
mutations are list surgery on ``parts``. Synthesized nodes carry
``generated=True`` and no original tokens of their own.
"""

import copy

from .lexer import Token, is_trivia


class Node:
    kind = "node"

    def __init__(self, parts=None):
        self.parts = list(parts) if parts else []
        self.generated = False
        self.detached = False
        self.parent = None
        for p in self.parts:
            if isinstance(p, Node):
                p.parent = self

    def adopt(self):
        for p in self.parts:
            if isinstance(p, Node):
                p.parent = self
                p.adopt()

    def children(self):
        return [p for p in self.parts if isinstance(p, Node)]

    def own_tokens(self):
        """Tokens held directly by this node (not inside child nodes)."""
        return [p for p in self.parts if isinstance(p, Token)]

    def all_tokens(self):
        out = []
        for p in self.parts:
            if isinstance(p, Token):
                out.append(p)
            else:
                out.extend(p.all_tokens())
        return out

    def text(self):
        return emit(self)

    def start_line(self):
        for tok in self.all_tokens():
            if not is_trivia(tok):
                return tok.line
        toks = self.all_tokens()
        return toks[0].line if toks else 0

    def lead_trivia(self):
        out = []
        for p in self.parts:
            if isinstance(p, Token) and is_trivia(p):
                out.append(p)
            else:
                break
        return out

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()

    def replace_part(self, old, new):
        idx = _part_index(self.parts, old)
        self.parts[idx] = new
        if isinstance(new, Node):
            new.parent = self
        if isinstance(old, Node):
            old.detached = True

    def insert_part_before(self, anchor, new):
        self.parts.insert(_part_index(self.parts, anchor), new)
        if isinstance(new, Node):
            new.parent = self

    def insert_part_after(self, anchor, new):
        self.parts.insert(_part_index(self.parts, anchor) + 1, new)
        if isinstance(new, Node):
            new.parent = self

    def __repr__(self):
        return f"<{self.kind} {self.text()[:40]!r}>"


def _part_index(parts, wanted):
    for i, p in enumerate(parts):
        if p is wanted:
            return i
    raise ValueError("part not found in parent")


class SourceUnit(Node):
    kind = "file"

    def __init__(self, file_name, parts=None):
        super().__init__(parts)
        self.file_name = file_name
        self.typedefs = {}   # alias name -> underlying textual type

    def functions(self):
        return [n for n in self.children() if isinstance(n, FunctionNode)]

    def function(self, name):
        for fn in self.functions():
            if fn.name == name:
                return fn
        return None


class DirectiveNode(Node):
    """One opaque preprocessor line (#include, #define, ...)."""
    kind = "directive"


class TypedefNode(Node):
    kind = "typedef"

    def __init__(self, parts, alias, underlying):
        super().__init__(parts)
        self.alias = alias
        self.underlying = underlying


class PragmaNode(Node):
    kind = "pragma"

    def __init__(self, parts, pragma_tok):
        super().__init__(parts)
        self.pragma_tok = pragma_tok

    @property
    def pragma_text(self):
        return self.pragma_tok.text

    def to_comment(self):
        """Disable the pragma by turning its line into an inline comment."""
        self.pragma_tok.text = "// " + self.pragma_tok.text
        self.pragma_tok.kind = "comment"


class Declarator:
    """One declared name inside a declaration statement."""

    def __init__(self, name_tok, ptr_toks, array_runs, init_toks):
        self.name_tok = name_tok
        self.ptr_toks = ptr_toks        # '*' tokens left of the name
        self.array_runs = array_runs    # list of [ '[', ..., ']' ] token runs
        self.init_toks = init_toks      # tokens after '=', or []

    @property
    def name(self):
        return self.name_tok.text

    @property
    def has_init(self):
        return bool(self.init_toks)


class DeclStmtNode(Node):
    """A declaration: storage/qualifiers, base type tokens, declarators."""
    kind = "decl-stmt"

    def __init__(self, parts, storage_toks, base_toks, declarators):
        super().__init__(parts)
        self.storage_toks = storage_toks
        self.base_toks = base_toks
        self.declarators = declarators

    @property
    def base_text(self):
        return " ".join(t.text for t in self.base_toks)


class ParamNode(Node):
    """A function parameter; exposed as a decl join point."""
    kind = "param"

    def __init__(self, parts, base_toks, ptr_toks, name_tok, array_runs):
        super().__init__(parts)
        self.base_toks = base_toks
        self.ptr_toks = ptr_toks
        self.name_tok = name_tok
        self.array_runs = array_runs

    @property
    def base_text(self):
        return " ".join(t.text for t in self.base_toks)

    @property
    def name(self):
        return self.name_tok.text if self.name_tok else ""


class FunctionNode(Node):
    kind = "function"

    def __init__(self, parts, name_tok, ret_base_toks, ret_ptr_toks, params, body):
        super().__init__(parts)
        self.name_tok = name_tok
        self.ret_base_toks = ret_base_toks
        self.ret_ptr_toks = ret_ptr_toks
        self.params = params
        self.body = body

    @property
    def name(self):
        return self.name_tok.text

    @property
    def ret_base_text(self):
        return " ".join(t.text for t in self.ret_base_toks)

    def return_type_text(self):
        return self.ret_base_text + "*" * len(self.ret_ptr_toks)


class CompoundNode(Node):
    kind = "compound"

    def statements(self):
        return self.children()


class LoopNode(Node):
    kind = "loop"

    def __init__(self, parts, kw_tok, header_toks, body):
        super().__init__(parts)
        self.kw_tok = kw_tok
        self.header_toks = header_toks   # tokens inside ( ), parens excluded
        self.body = body
        self.pragmas = []                # attached PragmaNodes

    @property
    def loop_kind(self):
        return self.kw_tok.text


class IfNode(Node):
    kind = "if"

    def __init__(self, parts, cond_toks, then_node, else_node):
        super().__init__(parts)
        self.cond_toks = cond_toks
        self.then_node = then_node
        self.else_node = else_node


class SwitchNode(Node):
    kind = "switch"

    def __init__(self, parts, expr_toks, body):
        super().__init__(parts)
        self.expr_toks = expr_toks
        self.body = body


class ReturnNode(Node):
    kind = "return"


class LabelNode(Node):
    kind = "label"


class OpaqueStmtNode(Node):
    """Any statement we keep only token-faithfully (expressions, do-while...)."""
    kind = "opaque"

    def __init__(self, parts, body=None):
        super().__init__(parts)
        self.body = body    # do-while carries a child statement


class GlobalDeclNode(DeclStmtNode):
    kind = "global-decl"


class OpaqueTopNode(Node):
    """Top-level run we do not interpret (prototypes, struct defs...)."""
    kind = "opaque-top"


class GeneratedNode(Node):
    """Synthesized code. ``parts`` may hold inherited trivia (replace case);
    the payload is pre-indented text emitted after it."""
    kind = "generated"

    def __init__(self, text, parts=None, sloc=0):
        super().__init__(parts)
        self.generated = True
        self.gen_text = text
        self.sloc = sloc

    def all_tokens(self):
        return [p for p in self.parts if isinstance(p, Token)]


def emit(node):
    """Emit source text: verbatim tokens plus generated payloads."""
    out = []
    _emit_into(node, out)
    return "".join(out)


def _emit_into(node, out):
    for p in node.parts:
        if isinstance(p, Token):
            out.append(p.text)
        else:
            _emit_into(p, out)
    if isinstance(node, GeneratedNode):
        out.append(node.gen_text)


def walk(node):
    yield from node.walk()


def deep_copy_node(node):
    """Copy a subtree with fresh tokens; the copy is marked generated."""
    parent = node.parent
    node.parent = None
    try:
        dup = copy.deepcopy(node)
    finally:
        node.parent = parent
    dup.generated = True
    dup.adopt()
    return dup


def make_ws(text):
    return Token("whitespace", text)


def indent_of(stmt):
    """Indentation of a statement, from the last line of its leading trivia."""
    lead = "".join(t.text for t in stmt.lead_trivia())
    if "\n" in lead:
        tail = lead.rsplit("\n", 1)[-1]
        if tail.strip() == "":
            return tail
    if isinstance(stmt.parent, SourceUnit):
        return ""
    return "    "
