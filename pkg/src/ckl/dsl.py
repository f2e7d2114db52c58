"""Expression DSL for metric components and projective symbols.

Grammar (per text file line):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := number | symbol | '(' expr ')' | func '(' expr ')' | '-' base

Supported functions: exp, log, sin, cos, tan, sinh, cosh, sqrt.
Free symbols must be declared coordinates or parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jets import Jet, JetDomainError, jet_space

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sinh", "cosh", "sqrt")


class DslError(ValueError):
    def __init__(self, message, line=None, col=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {col}" if col is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.col = col


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


Expr = (Num, Sym, Neg, BinOp, Pow, Call)


def free_symbols(e):
    if isinstance(e, Num):
        return set()
    if isinstance(e, Sym):
        return {e.name}
    if isinstance(e, Neg):
        return free_symbols(e.arg)
    if isinstance(e, BinOp):
        return free_symbols(e.left) | free_symbols(e.right)
    if isinstance(e, Pow):
        return free_symbols(e.base)
    if isinstance(e, Call):
        return free_symbols(e.arg)
    raise TypeError(f"not an expression node: {e!r}")


def expr_str(e):
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Neg):
        return f"(-{expr_str(e.arg)})"
    if isinstance(e, BinOp):
        return f"({expr_str(e.left)} {e.op} {expr_str(e.right)})"
    if isinstance(e, Pow):
        return f"{expr_str(e.base)}^{e.exponent}"
    if isinstance(e, Call):
        return f"{e.func}({expr_str(e.arg)})"
    raise TypeError


# convenience constructors used by the catalog builders
def num(v):
    return Num(float(v))


def sym(name):
    return Sym(name)


def add(*es):
    es = [e for e in es if not (isinstance(e, Num) and e.value == 0.0)]
    if not es:
        return Num(0.0)
    out = es[0]
    for e in es[1:]:
        out = BinOp("+", out, e)
    return out


def sub(a, b):
    return BinOp("-", a, b)


def mul(*es):
    for e in es:
        if isinstance(e, Num) and e.value == 0.0:
            return Num(0.0)
    es = [e for e in es if not (isinstance(e, Num) and e.value == 1.0)]
    if not es:
        return Num(1.0)
    out = es[0]
    for e in es[1:]:
        out = BinOp("*", out, e)
    return out


def div(a, b):
    return BinOp("/", a, b)


def neg(e):
    return Neg(e)


def powi(e, n):
    return Pow(e, int(n))


def call(fn, e):
    return Call(fn, e)


def scaled(c, e):
    c = float(c)
    if c == 0.0:
        return Num(0.0)
    if c == 1.0:
        return e
    return mul(Num(c), e)


# --------------------------------------------------------------------------
# Tokenizer / parser


class _Tok:
    def __init__(self, kind, text, col):
        self.kind = kind
        self.text = text
        self.col = col


def _tokenize(text, line=None):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_e = False
            while j < n and (text[j].isdigit() or text[j] == "." or text[j] in "eE" or (seen_e and text[j] in "+-")):
                if text[j] in "eE":
                    if seen_e:
                        break
                    seen_e = True
                    j += 1
                    continue
                if text[j] in "+-" and text[j - 1] not in "eE":
                    break
                j += 1
            toks.append(_Tok("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("name", text[i:j], i))
            i = j
            continue
        if c in "+-*/^()":
            toks.append(_Tok(c, c, i))
            i += 1
            continue
        raise DslError(f"unexpected character {c!r}", line, i)
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    def __init__(self, toks, line=None):
        self.toks = toks
        self.pos = 0
        self.line = line

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind=None):
        t = self.toks[self.pos]
        if kind is not None and t.kind != kind:
            raise DslError(f"expected {kind!r}, found {t.text!r}", self.line, t.col)
        self.pos += 1
        return t

    def parse_expr(self):
        node = self.parse_term()
        while self.peek().kind in "+-":
            op = self.take().kind
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.peek().kind in "*/":
            op = self.take().kind
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self):
        node = self.parse_base()
        if self.peek().kind == "^":
            self.take()
            sign = 1
            if self.peek().kind == "-":
                self.take()
                sign = -1
            t = self.take("num")
            if "." in t.text or "e" in t.text or "E" in t.text:
                raise DslError("exponents must be integers", self.line, t.col)
            node = Pow(node, sign * int(t.text))
        return node

    def parse_base(self):
        t = self.peek()
        if t.kind == "-":
            self.take()
            return Neg(self.parse_base())
        if t.kind == "num":
            self.take()
            return Num(float(t.text))
        if t.kind == "name":
            self.take()
            if self.peek().kind == "(":
                if t.text not in FUNCTIONS:
                    raise DslError(f"unknown function {t.text!r}", self.line, t.col)
                self.take("(")
                arg = self.parse_expr()
                self.take(")")
                return Call(t.text, arg)
            return Sym(t.text)
        if t.kind == "(":
            self.take()
            node = self.parse_expr()
            self.take(")")
            return node
        raise DslError(f"unexpected token {t.text!r}", self.line, t.col)


def parse_expr(text, line=None):
    p = _Parser(_tokenize(text, line), line)
    node = p.parse_expr()
    if p.peek().kind != "end":
        t = p.peek()
        raise DslError(f"trailing input {t.text!r}", line, t.col)
    return node


# --------------------------------------------------------------------------
# Evaluation to jets


def expr_jet(e, coords, base, order, params):
    """Evaluate an expression to a scalar jet at ``base``.

    coords: list of coordinate names mapped to jet variables 0..n-1.
    params: mapping of parameter names to floats.
    """
    space = jet_space(len(coords), order)
    cindex = {name: k for k, name in enumerate(coords)}

    def ev(node):
        if isinstance(node, Num):
            return Jet.constant(space, node.value)
        if isinstance(node, Sym):
            if node.name in cindex:
                k = cindex[node.name]
                return Jet.coordinate(space, k, float(base[k]))
            if node.name in params:
                return Jet.constant(space, float(params[node.name]))
            raise DslError(f"unknown symbol {node.name}")
        if isinstance(node, Neg):
            return -ev(node.arg)
        if isinstance(node, BinOp):
            a = ev(node.left)
            b = ev(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            try:
                return a / b
            except JetDomainError as exc:
                raise JetDomainError(f"{exc} in {expr_str(node)}") from None
        if isinstance(node, Pow):
            return ev(node.base) ** node.exponent
        if isinstance(node, Call):
            arg = ev(node.arg)
            try:
                return getattr(arg, node.func)()
            except JetDomainError as exc:
                raise JetDomainError(f"{exc} in {expr_str(node)}") from None
        raise TypeError(f"not an expression node: {node!r}")

    return ev(e)


def expr_value(e, coords, point, params):
    return float(expr_jet(e, coords, point, 0, params).value)


# --------------------------------------------------------------------------
# Metric specification

RIEMANNIAN = "riemannian"
SPLIT = "split"

_ETA = {
    RIEMANNIAN: np.diag([1.0, 1.0, 1.0, 1.0]),
    SPLIT: np.diag([1.0, 1.0, -1.0, -1.0]),
}


def signature_eta(signature):
    return _ETA[signature]


@dataclass
class MetricSpec:
    """Symmetric 4x4 array of component expressions defining a metric."""

    signature: str
    coords: list
    components: dict  # (i, j) with i <= j -> Expr
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.signature not in (RIEMANNIAN, SPLIT):
            raise DslError(f"unknown signature tag {self.signature!r}")
        if len(self.coords) != 4:
            raise DslError("metric specs are four-dimensional")
        declared = set(self.coords) | set(self.params)
        for (i, j), e in self.components.items():
            unknown = free_symbols(e) - declared
            if unknown:
                raise DslError(f"unknown symbol {sorted(unknown)[0]} in g{i}{j}")

    def with_params(self, **updates):
        p = dict(self.params)
        p.update(updates)
        return MetricSpec(self.signature, list(self.coords), dict(self.components), p)

    def component(self, i, j):
        key = (i, j) if i <= j else (j, i)
        return self.components.get(key, Num(0.0))

    def metric_jets(self, point, order):
        """4x4 jet of metric components at ``point``."""
        space = jet_space(4, order)
        data = np.zeros((space.ncoeff, 4, 4))
        for i in range(4):
            for j in range(i, 4):
                e = self.component(i, j)
                jet = expr_jet(e, self.coords, point, order, self.params)
                data[:, i, j] = jet.data
                data[:, j, i] = jet.data
        return Jet(space, data)

    def metric_values(self, point):
        return self.metric_jets(point, 0).value

    def conformally_rescaled(self, omega_expr):
        """Multiply every component by omega^2 (an Expr in the same coords)."""
        comps = {
            key: mul(powi(omega_expr, 2), e) for key, e in self.components.items()
        }
        return MetricSpec(self.signature, list(self.coords), comps, dict(self.params))


def flat_metric_spec(signature=RIEMANNIAN, coords=("x0", "x1", "x2", "x3")):
    eta = signature_eta(signature)
    comps = {(i, i): Num(float(eta[i, i])) for i in range(4)}
    return MetricSpec(signature, list(coords), comps)


def parse_metric_spec(text):
    """Parse the metric DSL file format.

    line 1: ``signature: riemannian|split``
    line 2: ``coords: n0 n1 n2 n3``
    optional ``param name = value`` lines
    then ``g<i><j> = expr`` lines for 0 <= i <= j <= 3 (missing entries are 0).
    """
    signature = None
    coords = None
    params = {}
    comps = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("signature:"):
            tag = line.split(":", 1)[1].strip()
            if tag not in (RIEMANNIAN, SPLIT):
                raise DslError(f"unknown signature tag {tag!r}", lineno)
            signature = tag
            continue
        if line.startswith("coords:"):
            names = line.split(":", 1)[1].split()
            if len(names) != 4:
                raise DslError(f"expected 4 coordinate names, got {len(names)}", lineno)
            coords = names
            continue
        if line.startswith("param "):
            body = line[len("param ") :]
            if "=" not in body:
                raise DslError("param line must read 'param name = value'", lineno)
            name, val = body.split("=", 1)
            params[name.strip()] = float(val.strip())
            continue
        if "=" in line:
            lhs, rhs = line.split("=", 1)
            lhs = lhs.strip()
            if not (len(lhs) == 3 and lhs[0] == "g" and lhs[1].isdigit() and lhs[2].isdigit()):
                raise DslError(f"unrecognized assignment target {lhs!r}", lineno)
            i, j = int(lhs[1]), int(lhs[2])
            if not (0 <= i <= j <= 3):
                raise DslError(f"component indices must satisfy 0 <= i <= j <= 3 in {lhs!r}", lineno)
            comps[(i, j)] = parse_expr(rhs.strip(), lineno)
            continue
        raise DslError(f"unrecognized line {line!r}", lineno)
    if signature is None:
        raise DslError("missing 'signature:' line")
    if coords is None:
        raise DslError("missing 'coords:' line")
    return MetricSpec(signature, coords, comps, params)
