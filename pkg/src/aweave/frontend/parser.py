"""Recursive-descent parser for the C subset.

Structure is recovered only where weaving needs it: functions, declarations,
for/while/if/switch/return/compound statements and pragmas. Everything else
is kept as opaque token runs. Every consumed token (trivia included) lands in
exactly one node's parts, which is what makes emit(parse(s)) == s.
"""

from ..errors import CSyntaxError, UnsupportedConstruct
from .lexer import Token, is_trivia, tokenize
from .nodes import (
    CompoundNode, DeclStmtNode, Declarator, DirectiveNode, FunctionNode,
    GlobalDeclNode, IfNode, LabelNode, LoopNode, OpaqueStmtNode,
    OpaqueTopNode, ParamNode, PragmaNode, ReturnNode, SourceUnit, SwitchNode,
    TypedefNode,
)

STORAGE_WORDS = {"static", "extern", "register", "auto", "inline"}
QUAL_WORDS = {"const", "volatile", "restrict"}
PRIM_WORDS = {
    "void", "char", "short", "int", "long", "float", "double",
    "signed", "unsigned", "_Bool",
}
TAG_WORDS = {"struct", "union", "enum"}

_OPENERS = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = {")", "]", "}"}


class _DeclFail(Exception):
    """Internal: statement looked like a declaration but is not one."""


class Cursor:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def at_end(self):
        return self.i >= len(self.toks)

    def save(self):
        return self.i

    def restore(self, pos):
        self.i = pos

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def take_trivia(self):
        out = []
        while not self.at_end() and is_trivia(self.toks[self.i]):
            out.append(self.take())
        return out

    def peek(self, k=0):
        """k-th significant token ahead, or None."""
        j = self.i
        seen = 0
        while j < len(self.toks):
            if not is_trivia(self.toks[j]):
                if seen == k:
                    return self.toks[j]
                seen += 1
            j += 1
        return None

    def take_significant(self, parts):
        """Consume trivia into parts, then return the next token (consumed)."""
        parts.extend(self.take_trivia())
        if self.at_end():
            raise CSyntaxError(self._eof_line(), 0, "more input")
        return self.take()

    def expect(self, text, parts):
        tok = self.take_significant(parts)
        if tok.text != text:
            raise CSyntaxError(tok.line, tok.col, f"{text!r} (got {tok.text!r})")
        return tok

    def _eof_line(self):
        return self.toks[-1].line if self.toks else 1


def parse(source_text, file_name="<source>"):
    """Parse source text into a lossless SourceUnit."""
    if isinstance(source_text, bytes):
        source_text = source_text.decode("utf-8")
    unit = SourceUnit(file_name)
    cur = Cursor(tokenize(source_text))
    while True:
        mark = cur.save()
        lead = cur.take_trivia()
        if cur.at_end():
            unit.parts.extend(lead)
            break
        tok = cur.peek()
        if tok.kind == "pragma-text":
            ptok = cur.take()
            unit.parts.append(PragmaNode(lead + [ptok], ptok))
        elif tok.text == "#":
            unit.parts.append(_parse_directive(cur, lead))
        elif tok.text == "typedef":
            unit.parts.append(_parse_typedef(cur, lead, unit))
        else:
            cur.restore(mark)
            unit.parts.append(_parse_external(cur, unit))
    unit.adopt()
    return unit


def parse_fragment(text, context="stmts"):
    """Parse a code fragment for validation; returns (nodes, logical_lines).

    context 'stmts' treats the fragment as block items; 'top' as a whole
    translation unit.
    """
    from .sloc import count_sloc, stmt_sloc
    if context == "top":
        unit = parse(text, "<fragment>")
        return unit.children(), count_sloc(unit)
    wrapped = "void __aw_fragment(void)\n{\n" + text + "\n}\n"
    unit = parse(wrapped, "<fragment>")
    fns = unit.functions()
    if len(fns) != 1 or fns[0].name != "__aw_fragment":
        raise CSyntaxError(1, 1, "a statement fragment")
    body = fns[0].body
    nodes = body.children()
    return nodes, sum(stmt_sloc(n) for n in nodes)


# ---------------------------------------------------------------- top level

def _parse_directive(cur, lead):
    parts = list(lead)
    while not cur.at_end():
        tok = cur.toks[cur.i]
        if tok.kind == "whitespace" and "\n" in tok.text:
            # backslash continuation keeps the directive going
            if parts and isinstance(parts[-1], Token) and parts[-1].text == "\\":
                parts.append(cur.take())
                continue
            break
        parts.append(cur.take())
    return DirectiveNode(parts)


def _parse_typedef(cur, lead, unit):
    parts = list(lead)
    kw = cur.expect("typedef", parts)
    parts.append(kw)
    body = []
    while True:
        tok = cur.take_significant(parts)
        parts.append(tok)
        if tok.text == ";":
            break
        body.append(tok)
    if len(body) >= 2 and body[-1].kind == "identifier":
        alias = body[-1].text
        underlying = " ".join(t.text for t in body[:-1])
        unit.typedefs[alias] = underlying
    else:
        alias, underlying = "", ""
    return TypedefNode(parts, alias, underlying)


def _classify_external(cur, unit):
    """Look ahead: 'function', 'proto', 'decl' or 'unsupported'."""
    k = 0
    tok = cur.peek(k)
    while tok is not None and (tok.text in STORAGE_WORDS or tok.text in QUAL_WORDS
                               or tok.text in PRIM_WORDS):
        k += 1
        tok = cur.peek(k)
    if tok is not None and tok.text in TAG_WORDS:
        k += 2
        tok = cur.peek(k)
    elif tok is not None and tok.kind == "identifier" and cur.peek(k + 1) is not None \
            and cur.peek(k + 1).kind in ("identifier", "punctuator") \
            and cur.peek(k + 1).text not in ("(", ";", "=", ",", "["):
        # identifier used as a (possibly unknown, header-provided) base type
        k += 1
        tok = cur.peek(k)
    while tok is not None and tok.text == "*":
        k += 1
        tok = cur.peek(k)
    if tok is None or tok.kind != "identifier":
        return "opaque"
    k += 1
    tok = cur.peek(k)
    if tok is None:
        return "opaque"
    if tok.text != "(":
        return "decl"
    depth = 0
    while tok is not None:
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
            if depth == 0:
                break
        k += 1
        tok = cur.peek(k)
    after = cur.peek(k + 1)
    if after is None:
        return "opaque"
    if after.text == "{":
        return "function"
    if after.text == ";":
        return "proto"
    return "unsupported"


def _parse_external(cur, unit):
    kind = _classify_external(cur, unit)
    lead = cur.take_trivia()
    first = cur.peek()
    if kind == "function":
        return _parse_function(cur, lead, unit)
    if kind == "decl":
        try:
            return _parse_decl(cur, lead, unit, is_global=True)
        except _DeclFail:
            kind = "opaque"
    if kind == "unsupported":
        raise UnsupportedConstruct(
            first.line, "function declarator not followed by '{' or ';' "
            "(K&R definitions are not supported)")
    # proto and anything unrecognized: opaque run through ';'
    return OpaqueTopNode(lead + _scan_balanced_through(cur, ";"))


def _take_base_tokens(cur, parts, unit, need_known_typedef):
    """Consume storage/qualifier/base-type tokens; returns (storage, base)."""
    storage = []
    base = []
    while True:
        tok = cur.peek()
        if tok is None:
            break
        if tok.text in STORAGE_WORDS:
            t = cur.take_significant(parts)
            parts.append(t)
            storage.append(t)
        elif tok.text in QUAL_WORDS or tok.text in PRIM_WORDS:
            t = cur.take_significant(parts)
            parts.append(t)
            base.append(t)
        elif tok.text in TAG_WORDS:
            t = cur.take_significant(parts)
            parts.append(t)
            base.append(t)
            nxt = cur.peek()
            if nxt is None or nxt.kind != "identifier":
                raise _DeclFail()
            t2 = cur.take_significant(parts)
            parts.append(t2)
            base.append(t2)
        elif tok.kind == "identifier" and not any(b.text in PRIM_WORDS for b in base):
            is_alias = tok.text in unit.typedefs
            if base and not all(b.text in QUAL_WORDS for b in base):
                break
            if not is_alias and need_known_typedef:
                break
            # a base word only when a declarator clearly follows
            nxt = cur.peek(1)
            if nxt is None or (nxt.kind != "identifier" and nxt.text != "*"):
                break
            t = cur.take_significant(parts)
            parts.append(t)
            base.append(t)
        else:
            break
    return storage, base


def _parse_function(cur, lead, unit):
    parts = list(lead)
    storage, base = _take_base_tokens(cur, parts, unit, need_known_typedef=False)
    if not base:
        tok = cur.peek()
        raise UnsupportedConstruct(
            tok.line if tok else 0, "function definition without a return type")
    ret_ptrs = []
    while cur.peek() is not None and cur.peek().text == "*":
        t = cur.take_significant(parts)
        parts.append(t)
        ret_ptrs.append(t)
    name_tok = cur.take_significant(parts)
    if name_tok.kind != "identifier":
        raise CSyntaxError(name_tok.line, name_tok.col, "function name")
    parts.append(name_tok)
    open_tok = cur.expect("(", parts)
    parts.append(open_tok)
    params = _parse_params(cur, parts, unit)
    body_lead = cur.take_trivia()
    parts.extend(body_lead)
    body = _parse_compound(cur, [], unit)
    parts.append(body)
    fn = FunctionNode(parts, name_tok, base, ret_ptrs, params, body)
    return fn


def _parse_params(cur, parts, unit):
    """Parse tokens up to and including the closing ')'."""
    params = []
    while True:
        run = []
        depth = 0
        while True:
            tok = cur.peek()
            if tok is None:
                raise CSyntaxError(cur._eof_line(), 0, "')'")
            if depth == 0 and tok.text in (",", ")"):
                run.extend(cur.take_trivia())
                sep = cur.take()
                break
            run.extend(cur.take_trivia())
            tok = cur.take()
            run.append(tok)
            if tok.text in _OPENERS:
                depth += 1
            elif tok.text in _CLOSERS:
                depth -= 1
        param = _parse_one_param(run, unit)
        if param is not None:
            parts.append(param)
            params.append(param)
        else:
            parts.extend(run)
        parts.append(sep)
        if sep.text == ")":
            return params


def _parse_one_param(run, unit):
    sig = [t for t in run if not is_trivia(t)]
    if not sig:
        return None
    if len(sig) == 1 and sig[0].text in ("void", "..."):
        return None
    base = []
    i = 0
    while i < len(sig):
        t = sig[i]
        if t.text in QUAL_WORDS or t.text in PRIM_WORDS:
            base.append(t)
            i += 1
        elif t.text in TAG_WORDS and i + 1 < len(sig):
            base.append(t)
            base.append(sig[i + 1])
            i += 2
        elif (t.kind == "identifier" and i + 1 < len(sig)
              and not any(b.kind == "identifier" or b.text in PRIM_WORDS for b in base)):
            # typedef (possibly header-provided) base word; a declarator follows
            base.append(t)
            i += 1
        else:
            break
    ptrs = []
    while i < len(sig) and sig[i].text == "*":
        ptrs.append(sig[i])
        i += 1
    name_tok = None
    if i < len(sig) and sig[i].kind == "identifier":
        name_tok = sig[i]
        i += 1
    arrays = []
    while i < len(sig) and sig[i].text == "[":
        arun = [sig[i]]
        i += 1
        while i < len(sig) and sig[i].text != "]":
            arun.append(sig[i])
            i += 1
        if i < len(sig):
            arun.append(sig[i])
            i += 1
        arrays.append(arun)
    if not base:
        return None
    return ParamNode(list(run), base, ptrs, name_tok, arrays)


def _parse_compound(cur, lead, unit):
    parts = list(lead)
    open_tok = cur.expect("{", parts)
    parts.append(open_tok)
    node = CompoundNode(parts)
    pending_pragmas = []
    while True:
        mark = cur.save()
        trivia = cur.take_trivia()
        tok = cur.peek()
        if tok is None:
            raise CSyntaxError(cur._eof_line(), 0, "'}'")
        if tok.text == "}":
            node.parts.extend(trivia)
            node.parts.append(cur.take())
            return node
        cur.restore(mark)
        stmt = _parse_stmt(cur, unit)
        node.parts.append(stmt)
        if isinstance(stmt, PragmaNode):
            pending_pragmas.append(stmt)
        else:
            if isinstance(stmt, LoopNode) and pending_pragmas:
                stmt.pragmas = list(pending_pragmas)
            pending_pragmas = []


def _parse_stmt(cur, unit):
    lead = cur.take_trivia()
    tok = cur.peek()
    if tok is None:
        raise CSyntaxError(cur._eof_line(), 0, "a statement")
    if tok.kind == "pragma-text":
        ptok = cur.take()
        return PragmaNode(lead + [ptok], ptok)
    if tok.text == "#":
        return _parse_directive(cur, lead)
    if tok.text == "{":
        return _parse_compound(cur, lead, unit)
    if tok.text in ("for", "while"):
        return _parse_loop(cur, lead, unit)
    if tok.text == "if":
        return _parse_if(cur, lead, unit)
    if tok.text == "switch":
        return _parse_switch(cur, lead, unit)
    if tok.text == "do":
        return _parse_do(cur, lead, unit)
    if tok.text == "return":
        return ReturnNode(lead + _scan_balanced_through(cur, ";"))
    if tok.text in ("break", "continue", "goto"):
        return OpaqueStmtNode(lead + _scan_balanced_through(cur, ";"))
    if tok.text in ("case", "default"):
        return LabelNode(lead + _scan_balanced_through(cur, ":"))
    if tok.kind == "identifier" and cur.peek(1) is not None and cur.peek(1).text == ":":
        return LabelNode(lead + _scan_balanced_through(cur, ":"))
    if tok.text == ";":
        semi = []
        t = cur.take_significant(semi)
        semi.append(t)
        return OpaqueStmtNode(lead + semi)
    if _is_decl_start(tok, unit):
        mark = cur.save()
        try:
            return _parse_decl(cur, lead, unit, is_global=False)
        except _DeclFail:
            cur.restore(mark)
    return OpaqueStmtNode(lead + _scan_balanced_through(cur, ";"))


def _is_decl_start(tok, unit):
    if tok.text in STORAGE_WORDS or tok.text in QUAL_WORDS or tok.text in PRIM_WORDS \
            or tok.text in TAG_WORDS:
        return True
    return tok.kind == "identifier" and tok.text in unit.typedefs


def _parse_loop(cur, lead, unit):
    parts = list(lead)
    kw = cur.take_significant(parts)
    parts.append(kw)
    open_tok = cur.expect("(", parts)
    parts.append(open_tok)
    header = _scan_to_matching_paren(cur, parts)
    body = _parse_stmt(cur, unit)
    parts.append(body)
    return LoopNode(parts, kw, header, body)


def _parse_if(cur, lead, unit):
    parts = list(lead)
    kw = cur.take_significant(parts)
    parts.append(kw)
    open_tok = cur.expect("(", parts)
    parts.append(open_tok)
    cond = _scan_to_matching_paren(cur, parts)
    then_node = _parse_stmt(cur, unit)
    parts.append(then_node)
    else_node = None
    mark = cur.save()
    trivia = cur.take_trivia()
    nxt = cur.peek()
    if nxt is not None and nxt.text == "else":
        parts.extend(trivia)
        parts.append(cur.take())
        else_node = _parse_stmt(cur, unit)
        parts.append(else_node)
    else:
        cur.restore(mark)
    return IfNode(parts, cond, then_node, else_node)


def _parse_switch(cur, lead, unit):
    parts = list(lead)
    kw = cur.take_significant(parts)
    parts.append(kw)
    open_tok = cur.expect("(", parts)
    parts.append(open_tok)
    expr = _scan_to_matching_paren(cur, parts)
    body = _parse_stmt(cur, unit)
    parts.append(body)
    return SwitchNode(parts, expr, body)


def _parse_do(cur, lead, unit):
    parts = list(lead)
    kw = cur.take_significant(parts)
    parts.append(kw)
    body = _parse_stmt(cur, unit)
    parts.append(body)
    while_tok = cur.expect("while", parts)
    parts.append(while_tok)
    open_tok = cur.expect("(", parts)
    parts.append(open_tok)
    _scan_to_matching_paren(cur, parts)
    semi = cur.expect(";", parts)
    parts.append(semi)
    return OpaqueStmtNode(parts, body=body)


def _parse_decl(cur, lead, unit, is_global):
    parts = list(lead)
    storage, base = _take_base_tokens(cur, parts, unit,
                                      need_known_typedef=not is_global)
    if not base:
        raise _DeclFail()
    declarators = []
    while True:
        ptrs = []
        while cur.peek() is not None and cur.peek().text == "*":
            t = cur.take_significant(parts)
            parts.append(t)
            ptrs.append(t)
        name_tok = cur.peek()
        if name_tok is None or name_tok.kind != "identifier":
            raise _DeclFail()
        name_tok = cur.take_significant(parts)
        parts.append(name_tok)
        arrays = []
        while cur.peek() is not None and cur.peek().text == "[":
            run = []
            t = cur.take_significant(parts)
            parts.append(t)
            run.append(t)
            depth = 1
            while depth > 0:
                t = cur.take_significant(parts)
                parts.append(t)
                run.append(t)
                if t.text == "[":
                    depth += 1
                elif t.text == "]":
                    depth -= 1
            arrays.append(run)
        init = []
        nxt = cur.peek()
        if nxt is None:
            raise _DeclFail()
        if nxt.text == "(":
            raise _DeclFail()    # function declarator: not a simple decl
        if nxt.text == "=":
            t = cur.take_significant(parts)
            parts.append(t)
            depth = 0
            while True:
                tok = cur.peek()
                if tok is None:
                    raise _DeclFail()
                if depth == 0 and tok.text in (",", ";"):
                    break
                t = cur.take_significant(parts)
                parts.append(t)
                init.append(t)
                if t.text in _OPENERS:
                    depth += 1
                elif t.text in _CLOSERS:
                    depth -= 1
            if not init:
                # '= ;' is invalid whether read as a decl or an expression
                raise CSyntaxError(tok.line, tok.col, "an initializer expression")
        declarators.append(Declarator(name_tok, ptrs, arrays, init))
        sep = cur.peek()
        if sep is not None and sep.text == ",":
            t = cur.take_significant(parts)
            parts.append(t)
            continue
        if sep is not None and sep.text == ";":
            t = cur.take_significant(parts)
            parts.append(t)
            break
        raise _DeclFail()
    cls = GlobalDeclNode if is_global else DeclStmtNode
    return cls(parts, storage, base, declarators)


# ------------------------------------------------------------------ scanning

def _scan_balanced_through(cur, terminator):
    """Tokens up to and including terminator at depth 0 (trivia included)."""
    parts = []
    depth = 0
    while True:
        tok = cur.peek()
        if tok is None:
            raise CSyntaxError(cur._eof_line(), 0, f"{terminator!r}")
        if depth == 0 and tok.text == "}":
            raise CSyntaxError(tok.line, tok.col, f"{terminator!r} before '}}'")
        t = cur.take_significant(parts)
        parts.append(t)
        if t.text in _OPENERS:
            depth += 1
        elif t.text in _CLOSERS:
            depth -= 1
        elif depth == 0 and t.text == terminator:
            return parts


def _scan_to_matching_paren(cur, parts):
    """Consume through the ')' matching an already-consumed '('; returns the
    significant tokens strictly inside."""
    inner = []
    depth = 1
    while True:
        tok = cur.peek()
        if tok is None:
            raise CSyntaxError(cur._eof_line(), 0, "')'")
        t = cur.take_significant(parts)
        parts.append(t)
        if t.text == "(":
            depth += 1
        elif t.text == ")":
            depth -= 1
            if depth == 0:
                return inner
        inner.append(t)
