"""Formula layout trees.

Parses LaTeX math (and Presentation MathML, via conversion to an equivalent
LaTeX token stream) into a semantic layout tree, extracts hierarchical
original/generalized terms from it, and scores layout similarity between two
term sets.  Everything here is pure and deterministic.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass

from .errors import ParseError

OPERATOR = "operator"
FUNCTION = "function"
VARIABLE = "variable"
CONSTANT = "constant"
GROUP = "group"

ORIGINAL = "original"
GENERALIZED = "generalized"

VARIABLE_WILDCARD = "*_v"
CONSTANT_WILDCARD = "*_c"


@dataclass(frozen=True)
class TreeNode:
    kind: str
    label: str
    children: tuple["TreeNode", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class SemanticTree:
    """Layout tree of one formula; the root sits at level 1."""

    root: TreeNode

    def walk(self):
        """Yield (node, level) pairs in pre-order."""
        stack = [(self.root, 1)]
        while stack:
            node, level = stack.pop()
            yield node, level
            for child in reversed(node.children):
                stack.append((child, level + 1))

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.walk())


@dataclass(frozen=True)
class FormulaTerm:
    serialization: str
    kind: str  # ORIGINAL or GENERALIZED
    level: int


@dataclass
class TermSet:
    """Multiset of terms extracted from one tree (duplicates preserved)."""

    terms: list[FormulaTerm]
    source_node_count: int

    def __len__(self) -> int:
        return len(self.terms)

    def serializations(self) -> Counter:
        return Counter(t.serialization for t in self.terms)

    def levels_by_serialization(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for t in self.terms:
            out.setdefault(t.serialization, []).append(t.level)
        return out


# ---------------------------------------------------------------------------
# Lexicons.  The source material never pins down the variable/constant split,
# so these sets are the package's canonical reading and are configurable.
# ---------------------------------------------------------------------------

GREEK_COMMANDS = {
    "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta",
    "theta", "vartheta", "iota", "kappa", "lambda", "mu", "nu", "xi", "rho",
    "varrho", "sigma", "varsigma", "tau", "upsilon", "phi", "varphi", "chi",
    "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma",
    "Upsilon", "Phi", "Psi", "Omega", "ell",
}

CONSTANT_COMMANDS = {"pi", "infty", "emptyset", "hbar", "nabla", "partial"}

DEFAULT_CONSTANT_LETTERS = frozenset({"e"})

FUNCTION_COMMANDS = {
    "sin", "cos", "tan", "cot", "sec", "csc", "arcsin", "arccos", "arctan",
    "sinh", "cosh", "tanh", "coth", "log", "ln", "lg", "exp", "min", "max",
    "sup", "inf", "arg", "det", "dim", "deg", "gcd", "ker", "Pr",
}

BIG_OPERATOR_COMMANDS = {
    "sum", "prod", "int", "oint", "iint", "iiint", "lim", "limsup", "liminf",
    "bigcup", "bigcap", "bigoplus", "bigotimes", "bigvee", "bigwedge",
    "coprod",
}

# Infix operator commands mapped to canonical labels.  Multiplication
# spellings collapse onto "*" so x\cdot y, x\times y and xy match as terms.
OPERATOR_COMMANDS = {
    "times": "*", "cdot": "*", "ast": "*", "star": "*", "bullet": "*",
    "div": "/",
    "pm": "pm", "mp": "mp",
    "leq": "<=", "le": "<=", "geq": ">=", "ge": ">=",
    "neq": "!=", "ne": "!=",
    "equiv": "equiv", "approx": "approx", "sim": "sim", "simeq": "simeq",
    "cong": "cong", "propto": "propto",
    "cup": "cup", "cap": "cap", "setminus": "setminus",
    "vee": "vee", "wedge": "wedge",
    "oplus": "oplus", "ominus": "ominus", "otimes": "otimes", "odot": "odot",
    "subset": "subset", "supset": "supset",
    "subseteq": "subseteq", "supseteq": "supseteq",
    "in": "in", "ni": "ni", "notin": "notin",
    "ll": "ll", "gg": "gg", "prec": "prec", "succ": "succ",
    "mid": "mid", "parallel": "parallel", "perp": "perp",
    "rightarrow": "to", "to": "to", "leftarrow": "from",
    "Rightarrow": "implies", "Leftarrow": "impliedby",
    "leftrightarrow": "iff", "Leftrightarrow": "iff", "mapsto": "mapsto",
    "circ": "circ", "cdots": "cdots", "dots": "cdots", "ldots": "cdots",
    "vdash": "vdash", "models": "models",
}

_RELATION_LABELS = {
    "=", "<", ">", "<=", ">=", "!=", "equiv", "approx", "sim", "simeq",
    "cong", "propto", "subset", "supset", "subseteq", "supseteq", "in", "ni",
    "notin", "ll", "gg", "prec", "succ", "mid", "parallel", "perp", "to",
    "from", "implies", "impliedby", "iff", "mapsto", "vdash", "models",
}
_ADDITIVE_LABELS = {"+", "-", "pm", "mp", "cup", "cap", "setminus", "vee",
                    "wedge", "oplus", "ominus", "cdots"}
_MULTIPLICATIVE_LABELS = {"*", "/", "otimes", "odot", "circ"}

ACCENT_COMMANDS = {
    "hat", "bar", "vec", "tilde", "dot", "ddot", "overline", "underline",
    "widehat", "widetilde", "overrightarrow",
}

# Style wrappers contribute nothing to layout; their argument passes through.
STYLE_COMMANDS = {
    "mathrm", "mathbf", "mathit", "mathbb", "mathcal", "mathsf", "mathfrak",
    "boldsymbol", "bm", "mathtt", "displaystyle", "textstyle", "scriptstyle",
}

# Dropped during tokenization; they carry no layout information.
_PURE_SPACING = {",", ";", "!", ":", " ", "quad", "qquad", "enspace",
                 "thinspace", "limits", "nolimits", "big", "Big", "bigg",
                 "Bigg", "bigl", "bigr", "Bigl", "Bigr", "biggl", "biggr",
                 "bigm", "middle"}

_FRACTION_COMMANDS = {"frac", "dfrac", "tfrac", "cfrac"}

_MATRIX_ENVIRONMENTS = {"matrix", "pmatrix", "bmatrix", "Bmatrix", "vmatrix",
                        "Vmatrix", "smallmatrix", "cases", "array", "aligned",
                        "align", "align*", "split", "gathered"}

# Commands that terminate an expression rather than starting an operand.
_NON_OPERAND_COMMANDS = {"end", "}", "right"}


@dataclass
class ParserConfig:
    """Knobs for the classification of symbols during parsing."""

    constant_letters: frozenset[str] = DEFAULT_CONSTANT_LETTERS
    unknown_commands: str = "function"  # "function" (pass-through) or "error"


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass
class _Token:
    kind: str
    value: str
    offset: int  # byte offset into the UTF-8 source


def _tokenize(text: str) -> list[_Token]:
    raw: list[_Token] = []
    i = 0
    byte_offset = 0
    n = len(text)
    while i < n:
        ch = text[i]
        start = byte_offset
        if ch.isspace() or ch == "~":
            i += 1
            byte_offset += len(ch.encode("utf-8"))
            continue
        if ch == "\\":
            j = i + 1
            if j < n and text[j].isalpha():
                while j < n and text[j].isalpha():
                    j += 1
                raw.append(_Token("cmd", text[i + 1:j], start))
            elif j < n:
                single = text[j]
                if single == "\\":
                    raw.append(_Token("newrow", "\\\\", start))
                else:
                    raw.append(_Token("cmd", single, start))
                j += 1
            else:
                raise ParseError("dangling backslash", start)
            byte_offset += len(text[i:j].encode("utf-8"))
            i = j
            continue
        if ch.isdigit():
            raw.append(_Token("digit", ch, start))
        elif ch == ".":
            raw.append(_Token("dot", ch, start))
        elif ch.isalpha():
            raw.append(_Token("letter", ch, start))
        elif ch == "{":
            raw.append(_Token("lbrace", ch, start))
        elif ch == "}":
            raw.append(_Token("rbrace", ch, start))
        elif ch == "(":
            raw.append(_Token("lparen", ch, start))
        elif ch == ")":
            raw.append(_Token("rparen", ch, start))
        elif ch == "[":
            raw.append(_Token("lbracket", ch, start))
        elif ch == "]":
            raw.append(_Token("rbracket", ch, start))
        elif ch == "^":
            raw.append(_Token("caret", ch, start))
        elif ch == "_":
            raw.append(_Token("under", ch, start))
        elif ch == ",":
            raw.append(_Token("comma", ch, start))
        elif ch == "&":
            raw.append(_Token("amp", ch, start))
        elif ch == "!":
            raw.append(_Token("bang", ch, start))
        elif ch == "'":
            raw.append(_Token("prime", ch, start))
        elif ch in "+-*/=<>|":
            raw.append(_Token("op", ch, start))
        else:
            raise ParseError(f"unexpected character {ch!r}", start)
        i += 1
        byte_offset += len(ch.encode("utf-8"))
    return _drop_spacing(raw)


def _drop_spacing(raw: list[_Token]) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    while i < len(raw):
        tok = raw[i]
        if tok.kind == "cmd" and tok.value in _PURE_SPACING:
            i += 1
            continue
        if tok.kind == "cmd" and tok.value in ("hspace", "vspace"):
            i += 1
            if i < len(raw) and raw[i].kind == "lbrace":
                depth = 0
                while i < len(raw):
                    if raw[i].kind == "lbrace":
                        depth += 1
                    elif raw[i].kind == "rbrace":
                        depth -= 1
                        if depth == 0:
                            i += 1
                            break
                    i += 1
            continue
        tokens.append(tok)
        i += 1
    return tokens


# ---------------------------------------------------------------------------
# Recursive-descent parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token], config: ParserConfig, src_len: int):
        self.tokens = tokens
        self.pos = 0
        self.config = config
        self.src_len = src_len

    # -- token utilities --------------------------------------------------

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> _Token:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.src_len)
        self.pos += 1
        return tok

    def _offset(self) -> int:
        tok = self._peek()
        return tok.offset if tok else self.src_len

    # -- entry ------------------------------------------------------------

    def parse(self) -> TreeNode:
        node = self._parse_comma_list()
        if self._peek() is not None:
            tok = self._peek()
            raise ParseError(f"unexpected {tok.value!r}", tok.offset)
        return node

    # -- grammar levels ---------------------------------------------------

    def _parse_comma_list(self) -> TreeNode:
        items = [self._parse_relation()]
        while (tok := self._peek()) is not None and tok.kind == "comma":
            self._next()
            items.append(self._parse_relation())
        if len(items) == 1:
            return items[0]
        return TreeNode(GROUP, "seq", tuple(items))

    @staticmethod
    def _infix_label(tok: _Token) -> str | None:
        if tok.kind == "op":
            return "mid" if tok.value == "|" else tok.value
        if tok.kind == "cmd" and tok.value in OPERATOR_COMMANDS:
            return OPERATOR_COMMANDS[tok.value]
        return None

    def _parse_relation(self) -> TreeNode:
        left = self._parse_additive()
        while (tok := self._peek()) is not None:
            label = self._infix_label(tok)
            if label is None or label not in _RELATION_LABELS:
                break
            self._next()
            left = TreeNode(OPERATOR, label, (left, self._parse_additive()))
        return left

    def _parse_additive(self) -> TreeNode:
        left = self._parse_multiplicative()
        while (tok := self._peek()) is not None:
            label = self._infix_label(tok)
            if label is None or label not in _ADDITIVE_LABELS:
                break
            self._next()
            left = TreeNode(OPERATOR, label, (left, self._parse_multiplicative()))
        return left

    def _parse_multiplicative(self) -> TreeNode:
        left = self._parse_unary()
        while (tok := self._peek()) is not None:
            label = self._infix_label(tok)
            if label is not None and label in _MULTIPLICATIVE_LABELS:
                self._next()
                left = TreeNode(OPERATOR, label, (left, self._parse_unary()))
                continue
            if label is None and self._starts_operand(tok):
                left = TreeNode(OPERATOR, "*", (left, self._parse_unary()))
                continue
            break
        return left

    @staticmethod
    def _starts_operand(tok: _Token) -> bool:
        if tok.kind in ("letter", "digit", "dot", "lbrace", "lparen",
                        "lbracket"):
            return True
        if tok.kind == "cmd":
            return (tok.value not in OPERATOR_COMMANDS
                    and tok.value not in _NON_OPERAND_COMMANDS)
        return False

    def _parse_unary(self) -> TreeNode:
        tok = self._peek()
        if tok is not None and tok.kind == "op" and tok.value in "+-":
            self._next()
            child = self._parse_unary()
            if tok.value == "+":
                return child
            return TreeNode(OPERATOR, "-", (child,))
        return self._parse_postfix()

    def _parse_postfix(self) -> TreeNode:
        node = self._parse_atom()
        while (tok := self._peek()) is not None:
            if tok.kind == "caret":
                self._next()
                node = TreeNode(OPERATOR, "^", (node, self._parse_script_arg()))
            elif tok.kind == "under":
                self._next()
                node = TreeNode(OPERATOR, "_", (node, self._parse_script_arg()))
            elif tok.kind == "bang":
                self._next()
                node = TreeNode(OPERATOR, "!", (node,))
            elif tok.kind == "prime":
                self._next()
                node = TreeNode(OPERATOR, "'", (node,))
            else:
                break
        return node

    def _parse_script_arg(self) -> TreeNode:
        """Superscript/subscript argument: a braced group or one token."""
        tok = self._peek()
        if tok is None:
            raise ParseError("missing script argument", self.src_len)
        if tok.kind == "lbrace":
            return self._parse_braced_group()
        if tok.kind == "digit":
            self._next()
            return TreeNode(CONSTANT, tok.value)
        if tok.kind == "letter":
            self._next()
            return self._classify_letter(tok.value)
        if tok.kind == "cmd":
            return self._parse_atom()
        if tok.kind == "op" and tok.value in "+-":
            self._next()  # e.g. 10^-3
            inner = self._parse_script_arg()
            return inner if tok.value == "+" else TreeNode(OPERATOR, "-", (inner,))
        raise ParseError(f"invalid script argument {tok.value!r}", tok.offset)

    def _parse_braced_group(self) -> TreeNode:
        open_tok = self._next()  # lbrace
        tok = self._peek()
        if tok is not None and tok.kind == "rbrace":
            raise ParseError("empty group", tok.offset)
        node = self._parse_comma_list()
        closing = self._peek()
        if closing is None or closing.kind != "rbrace":
            raise ParseError("unbalanced brace", open_tok.offset)
        self._next()
        return node

    def _parse_required_arg(self, command: str) -> TreeNode:
        tok = self._peek()
        if tok is None:
            raise ParseError(f"missing argument of \\{command}", self.src_len)
        if tok.kind == "lbrace":
            return self._parse_braced_group()
        if tok.kind == "digit":
            self._next()
            return TreeNode(CONSTANT, tok.value)
        if tok.kind == "letter":
            self._next()
            return self._classify_letter(tok.value)
        if tok.kind == "cmd" and self._starts_operand(tok):
            return self._parse_atom()
        raise ParseError(f"missing argument of \\{command}", tok.offset)

    def _classify_letter(self, letter: str) -> TreeNode:
        if letter in self.config.constant_letters:
            return TreeNode(CONSTANT, letter)
        return TreeNode(VARIABLE, letter)

    def _parse_number(self) -> TreeNode:
        parts: list[str] = []
        seen_dot = False
        start = self._offset()
        while (tok := self._peek()) is not None:
            if tok.kind == "digit":
                parts.append(self._next().value)
            elif tok.kind == "dot" and not seen_dot:
                nxt = (self.tokens[self.pos + 1]
                       if self.pos + 1 < len(self.tokens) else None)
                if nxt is not None and nxt.kind == "digit":
                    seen_dot = True
                    parts.append(self._next().value)
                else:
                    break
            else:
                break
        if not parts:
            raise ParseError("stray '.'", start)
        return TreeNode(CONSTANT, "".join(parts))

    # -- atoms ------------------------------------------------------------

    def _parse_atom(self) -> TreeNode:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.src_len)
        if tok.kind == "letter":
            self._next()
            return self._classify_letter(tok.value)
        if tok.kind in ("digit", "dot"):
            return self._parse_number()
        if tok.kind == "lbrace":
            return self._parse_braced_group()
        if tok.kind in ("lparen", "lbracket"):
            return self._parse_delimited(tok.kind)
        if tok.kind == "cmd":
            return self._parse_command()
        raise ParseError(f"unexpected {tok.value!r}", tok.offset)

    def _parse_delimited(self, open_kind: str) -> TreeNode:
        close_kind = {"lparen": "rparen", "lbracket": "rbracket"}[open_kind]
        open_tok = self._next()
        node = self._parse_comma_list()
        closing = self._peek()
        if closing is None or closing.kind != close_kind:
            raise ParseError("unbalanced delimiter", open_tok.offset)
        self._next()
        return node

    def _parse_command(self) -> TreeNode:
        tok = self._next()
        name = tok.value

        if name == "left":
            return self._parse_stretchy(tok)
        if name == "right":
            raise ParseError("unmatched \\right", tok.offset)
        if name == "{":
            node = self._parse_comma_list()
            closing = self._peek()
            if (closing is None or closing.kind != "cmd"
                    or closing.value != "}"):
                raise ParseError("unbalanced \\{", tok.offset)
            self._next()
            return node
        if name == "}":
            raise ParseError("unmatched \\}", tok.offset)
        if name in GREEK_COMMANDS:
            return TreeNode(VARIABLE, name)
        if name in CONSTANT_COMMANDS:
            return TreeNode(CONSTANT, name)
        if name in OPERATOR_COMMANDS:
            raise ParseError(f"operator \\{name} in operand position",
                             tok.offset)
        if name in _FRACTION_COMMANDS:
            first = self._parse_required_arg(name)
            second = self._parse_required_arg(name)
            return TreeNode(OPERATOR, "frac", (first, second))
        if name == "binom":
            first = self._parse_required_arg(name)
            second = self._parse_required_arg(name)
            return TreeNode(FUNCTION, "binom", (first, second))
        if name == "sqrt":
            return self._parse_sqrt(tok)
        if name in STYLE_COMMANDS:
            if (nxt := self._peek()) is not None and nxt.kind == "lbrace":
                return self._parse_braced_group()
            return self._parse_atom()
        if name in ACCENT_COMMANDS:
            return TreeNode(FUNCTION, name, (self._parse_required_arg(name),))
        if name in ("text", "textrm", "mbox"):
            raw = self._collect_braced_raw(tok)
            return TreeNode(FUNCTION, "text", (TreeNode(CONSTANT, raw),))
        if name == "operatorname":
            fname = self._collect_braced_raw(tok)
            return self._parse_function_application(fname)
        if name in FUNCTION_COMMANDS:
            return self._parse_function_application(name)
        if name in BIG_OPERATOR_COMMANDS:
            return self._parse_big_operator(name)
        if name == "begin":
            return self._parse_environment(tok)
        if name == "end":
            raise ParseError("unmatched \\end", tok.offset)

        # Unknown command: pass through as a function over its braced
        # arguments, or degrade to a symbol leaf when it has none.
        if self.config.unknown_commands == "error":
            raise ParseError(f"unknown command \\{name}", tok.offset)
        args = []
        while (nxt := self._peek()) is not None and nxt.kind == "lbrace":
            args.append(self._parse_braced_group())
        if args:
            return TreeNode(FUNCTION, name, tuple(args))
        return TreeNode(CONSTANT, name)

    def _parse_sqrt(self, tok: _Token) -> TreeNode:
        index = None
        if (nxt := self._peek()) is not None and nxt.kind == "lbracket":
            self._next()
            index = self._parse_comma_list()
            closing = self._peek()
            if closing is None or closing.kind != "rbracket":
                raise ParseError("unbalanced sqrt index", tok.offset)
            self._next()
        radicand = self._parse_required_arg("sqrt")
        children = (index, radicand) if index is not None else (radicand,)
        return TreeNode(OPERATOR, "sqrt", children)

    def _parse_stretchy(self, tok: _Token) -> TreeNode:
        """\\left<delim> expr \\right<delim>: delimiters are transparent."""
        self._next()  # opening delimiter token
        node = self._parse_comma_list()
        closing = self._peek()
        if (closing is None or closing.kind != "cmd"
                or closing.value != "right"):
            raise ParseError("unbalanced \\left", tok.offset)
        self._next()
        if self._peek() is None:
            raise ParseError("missing \\right delimiter", self.src_len)
        self._next()  # closing delimiter token
        return node

    def _parse_function_application(self, name: str) -> TreeNode:
        # Script decorations on the function symbol apply to the whole
        # application: \sin^2 x parses as (sin x)^2.
        scripts: list[tuple[str, TreeNode]] = []
        while (nxt := self._peek()) is not None and nxt.kind in ("caret",
                                                                 "under"):
            op = "^" if nxt.kind == "caret" else "_"
            self._next()
            scripts.append((op, self._parse_script_arg()))
        nxt = self._peek()
        if nxt is not None and self._starts_operand(nxt):
            node = TreeNode(FUNCTION, name, (self._parse_postfix(),))
        else:
            node = TreeNode(VARIABLE, name)  # bare symbol, never applied
        for op, script in scripts:
            node = TreeNode(OPERATOR, op, (node, script))
        return node

    def _parse_big_operator(self, name: str) -> TreeNode:
        lower = upper = None
        while (nxt := self._peek()) is not None and nxt.kind in ("caret",
                                                                 "under"):
            which = nxt.kind
            self._next()
            arg = self._parse_script_arg()
            if which == "under":
                lower = arg
            else:
                upper = arg
        body = None
        nxt = self._peek()
        if nxt is not None and self._starts_operand(nxt):
            body = self._parse_multiplicative()
        children = tuple(c for c in (lower, upper, body) if c is not None)
        if not children:
            return TreeNode(VARIABLE, name)
        return TreeNode(FUNCTION, name, children)

    def _parse_environment(self, tok: _Token) -> TreeNode:
        env = self._collect_braced_raw(tok).strip()
        if env == "array":
            if (nxt := self._peek()) is not None and nxt.kind == "lbrace":
                self._collect_braced_raw(tok)  # column spec, dropped
        rows: list[TreeNode] = []
        cells: list[TreeNode] = []
        while True:
            nxt = self._peek()
            if nxt is None:
                raise ParseError(f"unterminated environment {env}", tok.offset)
            if nxt.kind == "cmd" and nxt.value == "end":
                self._next()
                closing_env = self._collect_braced_raw(tok).strip()
                if closing_env != env:
                    raise ParseError(
                        f"environment mismatch: {env} closed by {closing_env}",
                        tok.offset)
                break
            if nxt.kind == "newrow":
                self._next()
                rows.append(self._make_row(cells, tok))
                cells = []
                continue
            if nxt.kind == "amp":
                raise ParseError("empty cell", nxt.offset)
            cells.append(self._parse_comma_list())
            nxt = self._peek()
            if nxt is not None and nxt.kind == "amp":
                self._next()
        if cells:
            rows.append(self._make_row(cells, tok))
        if not rows:
            raise ParseError(f"empty environment {env}", tok.offset)
        label = "matrix" if env in _MATRIX_ENVIRONMENTS else env
        return TreeNode(FUNCTION, label, tuple(rows))

    @staticmethod
    def _make_row(cells: list[TreeNode], tok: _Token) -> TreeNode:
        if not cells:
            raise ParseError("empty row", tok.offset)
        if len(cells) == 1:
            return cells[0]
        return TreeNode(GROUP, "row", tuple(cells))

    def _collect_braced_raw(self, tok: _Token) -> str:
        """Consume a braced group and return its raw token text."""
        nxt = self._peek()
        if nxt is None or nxt.kind != "lbrace":
            raise ParseError("expected braced argument", self._offset())
        self._next()
        depth = 1
        parts: list[str] = []
        while depth:
            t = self._peek()
            if t is None:
                raise ParseError("unbalanced brace", tok.offset)
            self._next()
            if t.kind == "lbrace":
                depth += 1
            elif t.kind == "rbrace":
                depth -= 1
                if depth == 0:
                    break
            if depth:
                parts.append("\\" + t.value + " " if t.kind == "cmd"
                             else t.value)
        return "".join(parts).strip()


def parse_latex(latex: str, config: ParserConfig | None = None) -> SemanticTree:
    """Parse a LaTeX math expression into its layout tree.

    Raises ParseError (with the byte offset of the fault) for unbalanced
    braces, empty argument slots, and malformed commands.
    """
    if not latex or not latex.strip():
        raise ParseError("empty formula", 0)
    config = config or ParserConfig()
    text = latex.strip()
    if text.startswith("$") and text.endswith("$") and len(text) > 1:
        text = text.strip("$")
        if not text.strip():
            raise ParseError("empty formula", 0)
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty formula", 0)
    parser = _Parser(tokens, config, len(latex.encode("utf-8")))
    return SemanticTree(parser.parse())


# parse_formula is the canonical front door: LaTeX in, tree out.
parse_formula = parse_latex


# ---------------------------------------------------------------------------
# Presentation MathML front-end: converted to an equivalent LaTeX string and
# parsed with the same grammar, so both entry syntaxes yield identical trees.
# ---------------------------------------------------------------------------

_MML_GREEK = {
    "α": "\\alpha", "β": "\\beta", "γ": "\\gamma", "δ": "\\delta",
    "ε": "\\epsilon", "ζ": "\\zeta", "η": "\\eta", "θ": "\\theta",
    "ι": "\\iota", "κ": "\\kappa", "λ": "\\lambda", "μ": "\\mu",
    "ν": "\\nu", "ξ": "\\xi", "π": "\\pi", "ρ": "\\rho", "σ": "\\sigma",
    "τ": "\\tau", "υ": "\\upsilon", "φ": "\\phi", "χ": "\\chi",
    "ψ": "\\psi", "ω": "\\omega", "Γ": "\\Gamma", "Δ": "\\Delta",
    "Θ": "\\Theta", "Λ": "\\Lambda", "Ξ": "\\Xi", "Π": "\\Pi",
    "Σ": "\\Sigma", "Φ": "\\Phi", "Ψ": "\\Psi", "Ω": "\\Omega",
}

_MML_OPS = {
    "+": "+", "-": "-", "−": "-", "*": "*", "×": "\\times", "⋅": "\\cdot",
    "∗": "*", "/": "/", "÷": "\\div", "=": "=", "<": "<", ">": ">",
    "≤": "\\leq", "≥": "\\geq", "≠": "\\neq", "±": "\\pm", "∓": "\\mp",
    "∈": "\\in", "∉": "\\notin", "⊂": "\\subset", "⊆": "\\subseteq",
    "∪": "\\cup", "∩": "\\cap", "≈": "\\approx", "≡": "\\equiv",
    "∝": "\\propto", "→": "\\to", "↦": "\\mapsto", "∼": "\\sim",
    "(": "(", ")": ")", "[": "[", "]": "]", ",": ",", "!": "!", "′": "'",
    "{": "\\{", "}": "\\}", "|": "|",
}

_MML_BIG = {"∑": "sum", "∏": "prod", "∫": "int", "⋃": "bigcup",
            "⋂": "bigcap", "⊕": "bigoplus", "⨂": "bigotimes"}

_MML_ACCENTS = {"^": "hat", "ˆ": "hat", "¯": "bar", "‾": "overline",
                "→": "vec", "~": "tilde", "˜": "tilde", "˙": "dot",
                "¨": "ddot"}

_INVISIBLE = {"⁡", "⁢", "⁣", "⁤"}


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _mml_text(elem) -> str:
    return (elem.text or "").strip()


def mathml_to_latex(mathml: str) -> str:
    """Rewrite Presentation MathML as the equivalent LaTeX source."""
    try:
        root = ET.fromstring(mathml)
    except ET.ParseError as exc:
        raise ParseError(f"malformed MathML: {exc}", 0) from None
    return _mml_convert(root)


def _mml_convert(elem) -> str:
    tag = _strip_ns(elem.tag)
    children = list(elem)
    if tag in ("math", "mrow", "mstyle", "mpadded", "merror", "menclose"):
        return " ".join(_mml_convert(c) for c in children)
    if tag == "semantics":
        if not children:
            raise ParseError("empty semantics element", 0)
        return _mml_convert(children[0])
    if tag == "mi":
        text = _mml_text(elem)
        if text in _MML_GREEK:
            return _MML_GREEK[text]
        if len(text) > 1:
            return "\\" + text
        return text
    if tag == "mn":
        return _mml_text(elem)
    if tag == "mo":
        text = _mml_text(elem)
        if not text or text in _INVISIBLE:
            return ""
        if text in _MML_BIG:
            return "\\" + _MML_BIG[text]
        if text in _MML_OPS:
            return _MML_OPS[text]
        return "\\" + text if text.isalpha() else text
    if tag == "mtext":
        return "\\text{" + _mml_text(elem) + "}"
    if tag == "msup":
        base, exp = children
        return "{" + _mml_convert(base) + "}^{" + _mml_convert(exp) + "}"
    if tag == "msub":
        base, sub = children
        return "{" + _mml_convert(base) + "}_{" + _mml_convert(sub) + "}"
    if tag == "msubsup":
        base, sub, sup = children
        return ("{" + _mml_convert(base) + "}_{" + _mml_convert(sub) +
                "}^{" + _mml_convert(sup) + "}")
    if tag == "mfrac":
        num, den = children
        return "\\frac{" + _mml_convert(num) + "}{" + _mml_convert(den) + "}"
    if tag == "msqrt":
        inner = " ".join(_mml_convert(c) for c in children)
        return "\\sqrt{" + inner + "}"
    if tag == "mroot":
        base, index = children
        return ("\\sqrt[" + _mml_convert(index) + "]{" +
                _mml_convert(base) + "}")
    if tag == "mfenced":
        open_d = elem.get("open", "(")
        close_d = elem.get("close", ")")
        sep = elem.get("separators", ",") or ","
        inner = sep[0].join(_mml_convert(c) for c in children)
        return open_d + inner + close_d
    if tag in ("mover", "munder", "munderover"):
        return _mml_scripted(elem, children)
    if tag == "mtable":
        rows = []
        for mtr in children:
            cells = [_mml_convert(mtd) for mtd in mtr]
            rows.append(" & ".join(cells))
        return "\\begin{matrix} " + " \\\\ ".join(rows) + " \\end{matrix}"
    if tag == "mspace":
        return ""
    # Unknown presentation element: recurse leniently.
    return " ".join(_mml_convert(c) for c in children)


def _mml_scripted(elem, children) -> str:
    tag = _strip_ns(elem.tag)
    base = children[0]
    base_text = _mml_text(base) if _strip_ns(base.tag) == "mo" else None
    if base_text in _MML_BIG:
        cmd = "\\" + _MML_BIG[base_text]
        if tag == "munder":
            return cmd + "_{" + _mml_convert(children[1]) + "}"
        if tag == "mover":
            return cmd + "^{" + _mml_convert(children[1]) + "}"
        return (cmd + "_{" + _mml_convert(children[1]) + "}^{" +
                _mml_convert(children[2]) + "}")
    if tag == "mover":
        accent = _mml_text(children[1])
        if accent in _MML_ACCENTS:
            return ("\\" + _MML_ACCENTS[accent] + "{" + _mml_convert(base)
                    + "}")
        return ("{" + _mml_convert(base) + "}^{" + _mml_convert(children[1])
                + "}")
    if tag == "munder":
        return ("{" + _mml_convert(base) + "}_{" + _mml_convert(children[1])
                + "}")
    return ("{" + _mml_convert(base) + "}_{" + _mml_convert(children[1]) +
            "}^{" + _mml_convert(children[2]) + "}")


def parse_mathml(mathml: str,
                 config: ParserConfig | None = None) -> SemanticTree:
    """Parse Presentation MathML into the same tree shape as parse_latex."""
    return parse_latex(mathml_to_latex(mathml), config)


# ---------------------------------------------------------------------------
# Serialization and term extraction
# ---------------------------------------------------------------------------

def serialize(node: TreeNode) -> str:
    """Canonical prefix serialization, injective up to tree structure."""
    if node.is_leaf:
        return node.label
    return (node.label + "(" +
            ",".join(serialize(c) for c in node.children) + ")")


def generalized(node: TreeNode) -> TreeNode:
    """Replace variable/constant leaves with wildcards; idempotent."""
    if node.is_leaf:
        if node.kind == VARIABLE:
            return TreeNode(VARIABLE, VARIABLE_WILDCARD)
        if node.kind == CONSTANT:
            return TreeNode(CONSTANT, CONSTANT_WILDCARD)
        return node
    return TreeNode(node.kind, node.label,
                    tuple(generalized(c) for c in node.children))


def extract_terms(tree: SemanticTree) -> TermSet:
    """Emit one original and one generalized term per non-leaf subtree.

    Leaves emit nothing, so a single-symbol formula yields an empty set.
    Duplicate subtrees produce duplicate terms (multiset semantics).
    """
    terms: list[FormulaTerm] = []
    count = 0
    for node, level in tree.walk():
        count += 1
        if node.is_leaf:
            continue
        terms.append(FormulaTerm(serialize(node), ORIGINAL, level))
        terms.append(FormulaTerm(serialize(generalized(node)), GENERALIZED,
                                 level))
    return TermSet(terms=terms, source_node_count=count)


def complexity(term_set: TermSet) -> int:
    """Layout complexity: the sum of levels over every extracted term."""
    return sum(t.level for t in term_set.terms)


def layout_transition(target_terms: TermSet, source_terms: TermSet,
                      generalized_penalty: float = 0.5) -> float:
    """Layout similarity of a target formula given a source formula.

    Coverage ratio (matched source terms over all source terms) times the
    penalty-weighted mean of level-distance weights over the source terms.
    Generalized terms weigh `generalized_penalty`; a matched term's level
    weight is 1/(1 + minimum level distance between its occurrences in the
    two sets).  Unmatched terms contribute zero to the numerator.  Not
    symmetric: the denominator is the source's term mass.
    """
    if not source_terms.terms:
        return 0.0
    target_levels = target_terms.levels_by_serialization()
    matched = 0
    numerator = 0.0
    denominator = 0.0
    for term in source_terms.terms:
        weight = generalized_penalty if term.kind == GENERALIZED else 1.0
        denominator += weight
        levels = target_levels.get(term.serialization)
        if levels is None:
            continue
        matched += 1
        min_dist = min(abs(term.level - lvl) for lvl in levels)
        numerator += weight / (1.0 + min_dist)
    coverage = matched / len(source_terms.terms)
    return coverage * numerator / denominator


# ---------------------------------------------------------------------------
# Counting and display helpers
# ---------------------------------------------------------------------------

def count_symbols(tree: SemanticTree) -> tuple[int, int]:
    """Return (distinct variable labels, operator+function occurrences)."""
    variables: set[str] = set()
    operators = 0
    for node, _ in tree.walk():
        if node.kind == VARIABLE:
            variables.add(node.label)
        elif node.kind in (OPERATOR, FUNCTION):
            operators += 1
    return len(variables), operators


def render_tree(tree: SemanticTree) -> str:
    """Indented one-node-per-line rendering for debugging output."""
    lines: list[str] = []

    def visit(node: TreeNode, depth: int) -> None:
        lines.append("  " * depth + f"{node.kind}:{node.label}")
        for child in node.children:
            visit(child, depth + 1)

    visit(tree.root, 0)
    return "\n".join(lines)
