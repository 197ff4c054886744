"""Tokenizer for the C subset.

Every input byte lands in exactly one token (whitespace and comments
included), so concatenating token texts reproduces the file. A #pragma
line becomes a single pragma-text token; other preprocessor lines are
left as ordinary tokens for the parser to fold into opaque directives.
"""

import re
from dataclasses import dataclass

from ..errors import CSyntaxError

KEYWORDS = frozenset("""
auto break case char const continue default do double else enum extern
float for goto if inline int long register restrict return short signed
sizeof static struct switch typedef union unsigned void volatile _Bool
""".split())

# longest-match-first punctuators
_PUNCTS = [
    "<<=", ">>=", "...",
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=",
    "[", "]", "(", ")", "{", "}", ".", "&", "*", "+", "-", "~", "!",
    "/", "%", "<", ">", "^", "|", "?", ":", ";", "=", ",", "#", "\\",
]

_TOKEN_RE = re.compile(
    "|".join([
        r"(?P<newline>\r?\n)",
        r"(?P<ws>[ \t\f\v]+)",
        r"(?P<comment>//[^\n]*|/\*(?:[^*]|\*(?!/))*\*/)",
        r"(?P<ident>[A-Za-z_]\w*)",
        # floats before ints so 1.5 does not lex as 1 then .5
        r"(?P<num>(?:(?:\d+\.\d*|\.\d+)(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+"
        r"|0[xX][0-9a-fA-F]+|\d+)[fFlLuU]*)",
        r'(?P<str>"(?:[^"\\\n]|\\.)*")',
        r"(?P<char>'(?:[^'\\\n]|\\.)*')",
        r"(?P<punct>" + "|".join(re.escape(p) for p in _PUNCTS) + ")",
    ])
)

_PRAGMA_RE = re.compile(r"#[ \t]*pragma\b[^\n]*")


@dataclass(eq=False)
class Token:
    kind: str   # identifier | keyword | literal | punctuator | pragma-text | comment | whitespace
    text: str
    line: int = 0
    col: int = 0

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(source):
    """Tokenize source text; raises CSyntaxError on an unrecognizable byte."""
    tokens = []
    pos = 0
    line = 1
    col = 1
    at_line_start = True
    n = len(source)
    while pos < n:
        if at_line_start:
            m = _PRAGMA_RE.match(source, pos)
            if m is not None:
                tokens.append(Token("pragma-text", m.group(0), line, col))
                col += len(m.group(0))
                pos = m.end()
                at_line_start = False
                continue
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise CSyntaxError(line, col, f"a token (got {source[pos]!r})")
        text = m.group(0)
        group = m.lastgroup
        if group == "newline":
            tokens.append(Token("whitespace", text, line, col))
            line += 1
            col = 1
            at_line_start = True
            pos = m.end()
            continue
        if group == "ws":
            kind = "whitespace"
        elif group == "comment":
            kind = "comment"
        elif group == "ident":
            kind = "keyword" if text in KEYWORDS else "identifier"
        elif group in ("num", "str", "char"):
            kind = "literal"
        else:
            kind = "punctuator"
        tokens.append(Token(kind, text, line, col))
        if group == "comment" and "\n" in text:
            line += text.count("\n")
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
            if group == "ws":
                pass
        if group not in ("ws", "comment"):
            at_line_start = False
        pos = m.end()
    return tokens


def is_trivia(tok):
    return tok.kind in ("whitespace", "comment")


def is_float_literal(text):
    """True for a floating constant (suffixed or not), false for hex/ints."""
    if text[:2].lower() == "0x":
        return False
    body = text.rstrip("fFlL")
    if not body or not (body[0].isdigit() or body.startswith(".")):
        return False
    return "." in body or "e" in body.lower()
