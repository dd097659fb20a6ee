"""Fourier-multiplier symbols l(k) and their admissibility checks.

A dissipative-dispersive operator is specified by its symbol l(k), written
in a small expression language over the angular wavenumber k (so that
d/dx corresponds to i*k).  Grammar:

    expr   := term  (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := ('+'|'-') unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | 'k' | 'i' | 'abs' '(' expr ')'
            | 'sgn' '(' expr ')' | '(' expr ')'

Exponents must be constant (k-free); a non-integer exponent is only
accepted on a base that is provably real and nonnegative (e.g. abs(k)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SymbolError",
    "SymbolSyntaxError",
    "SymbolEvalError",
    "SymbolExpr",
    "AdmissibilityReport",
    "MultiplierSpec",
    "parse_symbol",
    "eval_symbol",
    "validate_admissibility",
    "admissibility_samples",
    "preset",
    "rescale_symbol",
]

CHECK_TOL = 1e-12


class SymbolError(ValueError):
    """Base error for the symbol language."""


class SymbolSyntaxError(SymbolError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class SymbolEvalError(SymbolError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Const(Node):
    value: complex


@dataclass(frozen=True)
class Wavenumber(Node):
    pass


@dataclass(frozen=True)
class Call(Node):
    fn: str  # 'abs' | 'sgn'
    arg: Node


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # '+', '-', '*', '/', '^'
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class SymbolExpr:
    """Parsed symbol: an expression tree plus its source text."""

    root: Node
    text: str

    def __call__(self, k):
        return eval_symbol(self, k)


# ---------------------------------------------------------------------------
# Tokenizer / parser

_FUNCS = ("abs", "sgn")


def _tokenize(text: str):
    tokens = []  # (kind, value, offset)
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch in "+-*/^(),":
            tokens.append((ch, ch, pos))
            pos += 1
            continue
        if ch.isdigit() or ch == ".":
            start = pos
            while pos < n and (text[pos].isdigit() or text[pos] == "."):
                pos += 1
            if pos < n and text[pos] in "eE":
                mark = pos
                pos += 1
                if pos < n and text[pos] in "+-":
                    pos += 1
                if pos < n and text[pos].isdigit():
                    while pos < n and text[pos].isdigit():
                        pos += 1
                else:
                    pos = mark  # bare 'e' is not part of the number
            lit = text[start:pos]
            try:
                value = float(lit)
            except ValueError:
                raise SymbolSyntaxError(f"bad numeric literal {lit!r}", start)
            if not np.isfinite(value):
                raise SymbolSyntaxError(f"non-finite literal {lit!r}", start)
            tokens.append(("num", value, start))
            continue
        if ch.isalpha() or ch == "_":
            start = pos
            while pos < n and (text[pos].isalnum() or text[pos] == "_"):
                pos += 1
            tokens.append(("name", text[start:pos], start))
            continue
        raise SymbolSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.advance()
        if tok[0] != kind:
            raise SymbolSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise SymbolSyntaxError(f"unexpected trailing {tok[1]!r}", tok[2])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok[0] == "+":
            self.advance()
            return self.unary()
        if tok[0] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "^":
            caret = self.advance()
            exponent = self.unary()  # right-associative, allows k^-2
            _check_power(base, exponent, caret[2])
            return BinOp("^", base, exponent)
        return base

    def atom(self) -> Node:
        tok = self.advance()
        kind, value, offset = tok
        if kind == "num":
            return Const(complex(value))
        if kind == "name":
            if value == "k":
                return Wavenumber()
            if value == "i":
                return Const(1j)
            if value in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            raise SymbolSyntaxError(f"unknown identifier {value!r}", offset)
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise SymbolSyntaxError(f"expected operand, found {value or kind!r}", offset)


# ---------------------------------------------------------------------------
# Static analysis used by the '^' rule


def _fold_const(node: Node):
    """Value of a k-free subtree, or None if it contains k."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Wavenumber):
        return None
    if isinstance(node, Neg):
        v = _fold_const(node.arg)
        return None if v is None else -v
    if isinstance(node, Call):
        v = _fold_const(node.arg)
        if v is None:
            return None
        if node.fn == "abs":
            return complex(abs(v))
        return complex(np.sign(v.real)) if v.imag == 0 else None
    if isinstance(node, BinOp):
        a = _fold_const(node.lhs)
        b = _fold_const(node.rhs)
        if a is None or b is None:
            return None
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return a ** b
    raise TypeError(node)


def _provably_real(node: Node) -> bool:
    if isinstance(node, Const):
        return node.value.imag == 0.0
    if isinstance(node, Wavenumber):
        return True
    if isinstance(node, Neg):
        return _provably_real(node.arg)
    if isinstance(node, Call):
        return True  # abs is real; sgn demands a real argument anyway
    if isinstance(node, BinOp):
        if node.op == "^":
            e = _fold_const(node.rhs)
            if e is not None and e.imag == 0 and float(e.real).is_integer():
                return _provably_real(node.lhs)
            return _provably_nonneg(node.lhs)
        return _provably_real(node.lhs) and _provably_real(node.rhs)
    raise TypeError(node)


def _provably_nonneg(node: Node) -> bool:
    if isinstance(node, Const):
        return node.value.imag == 0.0 and node.value.real >= 0.0
    if isinstance(node, Call):
        return node.fn == "abs"
    if isinstance(node, BinOp):
        if node.op in ("+", "*"):
            return _provably_nonneg(node.lhs) and _provably_nonneg(node.rhs)
        if node.op == "/":
            return _provably_nonneg(node.lhs) and _provably_nonneg(node.rhs)
        if node.op == "^":
            e = _fold_const(node.rhs)
            if _provably_nonneg(node.lhs):
                return True
            if (
                e is not None
                and e.imag == 0
                and float(e.real).is_integer()
                and int(e.real) % 2 == 0
                and _provably_real(node.lhs)
            ):
                return True
    return False


def _check_power(base: Node, exponent: Node, offset: int):
    e = _fold_const(exponent)
    if e is None:
        raise SymbolSyntaxError("exponent must not depend on k", offset)
    if e.imag != 0.0:
        raise SymbolSyntaxError("exponent must be real", offset)
    if not float(e.real).is_integer() and not _provably_nonneg(base):
        raise SymbolSyntaxError(
            "non-integer exponent on sign-changing base", offset
        )


# ---------------------------------------------------------------------------
# Evaluation


def _eval_node(node: Node, k: np.ndarray) -> np.ndarray:
    if isinstance(node, Const):
        return np.full(k.shape, node.value, dtype=complex)
    if isinstance(node, Wavenumber):
        return k.astype(complex)
    if isinstance(node, Neg):
        return -_eval_node(node.arg, k)
    if isinstance(node, Call):
        v = _eval_node(node.arg, k)
        if node.fn == "abs":
            return np.abs(v).astype(complex)
        if np.max(np.abs(v.imag)) > 0.0:
            raise SymbolEvalError("sgn of a non-real argument")
        return np.sign(v.real).astype(complex)
    if isinstance(node, BinOp):
        a = _eval_node(node.lhs, k)
        if node.op == "^":
            e = _fold_const(node.rhs).real
            if float(e).is_integer():
                with np.errstate(divide="ignore", invalid="ignore"):
                    return a ** int(e)
            # base is provably >= 0 real by the parse-time check
            with np.errstate(divide="ignore", invalid="ignore"):
                return (a.real ** e).astype(complex)
        b = _eval_node(node.rhs, k)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        with np.errstate(divide="ignore", invalid="ignore"):
            return a / b
    raise TypeError(node)


def parse_symbol(text: str) -> SymbolExpr:
    """Parse a symbol expression string into a tree.

    Raises SymbolSyntaxError (with byte offset) on malformed input,
    unknown identifiers, or a non-integer exponent on a sign-changing base.
    """
    if not text or not text.strip():
        raise SymbolSyntaxError("empty expression", 0)
    if not text.isascii():
        raise SymbolSyntaxError("expression must be ASCII", 0)
    root = _Parser(text).parse()
    return SymbolExpr(root=root, text=text)


def eval_symbol(expr: SymbolExpr, wavenumbers) -> np.ndarray:
    """Evaluate l(k) pointwise on an array of angular wavenumbers.

    Negative powers are singular at k=0; the value there is taken to be 0
    when the two-sided limit symmetrization (l(+d)+l(-d))/2 vanishes,
    otherwise the symbol is rejected.
    """
    k = np.atleast_1d(np.asarray(wavenumbers, dtype=float))
    if not np.all(np.isfinite(k)):
        raise SymbolEvalError("wavenumbers must be finite")
    values = _eval_node(expr.root, k)

    bad = ~np.isfinite(values)
    if np.any(bad):
        if np.any(bad & (k != 0.0)):
            raise SymbolEvalError("symbol not finite at a nonzero wavenumber")
        values[bad] = _origin_value(expr)
    if np.isscalar(wavenumbers) or np.ndim(wavenumbers) == 0:
        return values[0]
    return values


def _origin_value(expr: SymbolExpr) -> complex:
    # symmetrized limit at k=0; only 0 is an accepted value
    for d in (1e-4, 1e-6, 1e-8):
        probe = _eval_node(expr.root, np.array([d, -d]))
        if not np.all(np.isfinite(probe)):
            raise SymbolEvalError("singularity at k=0 without convention")
        sym = 0.5 * (probe[0] + probe[1])
        scale = 1.0 + float(np.max(np.abs(probe)))
        if abs(sym) > 1e-9 * scale:
            raise SymbolEvalError("singularity at k=0 without convention")
    return 0.0


def unparse(node: Node) -> str:
    """Render a tree back to (fully parenthesized) source text."""
    if isinstance(node, Const):
        v = node.value
        if v.imag == 0.0:
            return repr(v.real)
        if v == 1j:
            return "i"
        if v.real == 0.0:
            return f"({v.imag!r}*i)"
        return f"({v.real!r}+{v.imag!r}*i)"
    if isinstance(node, Wavenumber):
        return "k"
    if isinstance(node, Neg):
        return f"(-{unparse(node.arg)})"
    if isinstance(node, Call):
        return f"{node.fn}({unparse(node.arg)})"
    if isinstance(node, BinOp):
        return f"({unparse(node.lhs)}{node.op}{unparse(node.rhs)})"
    raise TypeError(node)


# ---------------------------------------------------------------------------
# Admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    """Sampled evidence that a symbol defines a usable operator.

    A usable l must vanish at the origin, be Hermitian (l(-k) = conj l(k),
    so the operator maps real fields to real fields) and have Re l <= 0
    (no amplification).
    """

    zero_at_origin: bool
    hermitian: bool
    dissipative: bool
    max_re: float
    passed: bool

    @staticmethod
    def combine(zero_at_origin, hermitian, dissipative, max_re):
        return AdmissibilityReport(
            zero_at_origin=zero_at_origin,
            hermitian=hermitian,
            dissipative=dissipative,
            max_re=max_re,
            passed=bool(zero_at_origin and hermitian and dissipative),
        )


def admissibility_samples(k_max: float = 256.0, n: int = 512) -> np.ndarray:
    """Symmetric sample set: 0, a near-origin refinement, and a dense sweep."""
    fine = np.geomspace(1e-8, 1.0, 64)
    coarse = np.linspace(1e-3, k_max, n)
    pos = np.unique(np.concatenate([fine, coarse]))
    return np.concatenate([[0.0], pos, -pos])


def validate_admissibility(expr: SymbolExpr, sample_wavenumbers) -> AdmissibilityReport:
    """Check l(0)=0, Hermitian symmetry and Re l <= 0 on a symmetric sample set."""
    ks = np.asarray(sample_wavenumbers, dtype=float)
    if 0.0 not in ks:
        raise ValueError("sample set must include k=0")
    pos = np.unique(np.abs(ks[ks != 0.0]))
    v0 = eval_symbol(expr, np.array([0.0]))[0]
    vp = eval_symbol(expr, pos)
    vm = eval_symbol(expr, -pos)

    zero_at_origin = bool(abs(v0) <= CHECK_TOL)
    herm_slack = np.abs(vm - np.conj(vp)) - CHECK_TOL * (1.0 + np.abs(vp))
    hermitian = bool(np.max(herm_slack) <= 0.0)
    everything = np.concatenate([[v0], vp, vm])
    re_slack = everything.real - CHECK_TOL * (1.0 + np.abs(everything))
    dissipative = bool(np.max(re_slack) <= 0.0)
    return AdmissibilityReport.combine(
        zero_at_origin, hermitian, dissipative, float(np.max(everything.real))
    )


# ---------------------------------------------------------------------------
# Multiplier specs and presets


@dataclass(frozen=True)
class MultiplierSpec:
    """A validated symbol: expression, human label, and admissibility evidence."""

    expr: SymbolExpr
    label: str
    admissibility: AdmissibilityReport
    params: dict = field(default_factory=dict)

    @property
    def text(self) -> str:
        return self.expr.text

    def values(self, wavenumbers) -> np.ndarray:
        return eval_symbol(self.expr, wavenumbers)

    def require_admissible(self):
        if not self.admissibility.passed:
            raise SymbolError(f"operator {self.label!r} failed admissibility")

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.values(np.array([0.0, 0.37, -2.1, 11.0])) == 0.0))


def _make_spec(text: str, label: str, params: dict | None = None,
               samples=None) -> MultiplierSpec:
    expr = parse_symbol(text)
    report = validate_admissibility(
        expr, admissibility_samples() if samples is None else samples
    )
    return MultiplierSpec(expr=expr, label=label,
                          admissibility=report, params=params or {})


def preset(name: str, nu: float | None = None,
           terms: list[tuple[float, float]] | None = None) -> MultiplierSpec:
    """Built-in operators.

    burgers          l = 0
    kdvb(nu)         l = nu*(i*k)^3
    bo               l = i*k*abs(k)
    hilbert          l = i*sgn(k)
    frac(terms)      l = -sum a_j*abs(k)^(2*alpha_j), a_j >= 0, 0 < alpha_j < 1
    """
    if name == "burgers":
        return _make_spec("0", "burgers")
    if name == "kdvb":
        if nu is None:
            raise ValueError("kdvb preset requires nu")
        return _make_spec(f"({nu!r})*(i*k)^3", f"kdvb(nu={nu:g})", {"nu": float(nu)})
    if name == "bo":
        return _make_spec("i*k*abs(k)", "bo")
    if name == "hilbert":
        return _make_spec("i*sgn(k)", "hilbert")
    if name == "frac":
        if not terms:
            raise ValueError("frac preset requires (a_j, alpha_j) terms")
        alphas = [a for (_, a) in terms]
        if any(a <= 0.0 or a >= 1.0 for a in alphas):
            raise ValueError("frac exponents must satisfy 0 < alpha < 1")
        if any(x >= y for x, y in zip(alphas, alphas[1:])):
            raise ValueError("frac exponents must be strictly increasing")
        if any(c < 0.0 for (c, _) in terms):
            raise ValueError("frac coefficients must be nonnegative")
        body = "+".join(f"({c!r})*abs(k)^({(2 * a)!r})" for (c, a) in terms)
        label = "frac(" + ",".join(f"{c:g}:{a:g}" for (c, a) in terms) + ")"
        return _make_spec(f"-({body})", label, {"terms": [tuple(t) for t in terms]})
    raise ValueError(f"unknown preset {name!r}")


def _substitute_scaled(node: Node, lam: float) -> Node:
    if isinstance(node, Wavenumber):
        return BinOp("*", Const(complex(lam)), Wavenumber())
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(_substitute_scaled(node.arg, lam))
    if isinstance(node, Call):
        return Call(node.fn, _substitute_scaled(node.arg, lam))
    if isinstance(node, BinOp):
        return BinOp(node.op, _substitute_scaled(node.lhs, lam),
                     _substitute_scaled(node.rhs, lam))
    raise TypeError(node)


def rescale_symbol(spec: MultiplierSpec, lam: float) -> MultiplierSpec:
    """Length rescale: l -> l1 with l1(k) = lam^-2 * l(lam*k)."""
    if not lam > 0.0:
        raise ValueError("scale factor must be positive")
    root = BinOp("*", Const(complex(lam ** -2.0)),
                 _substitute_scaled(spec.expr.root, lam))
    expr = SymbolExpr(root=root, text=unparse(root))
    report = validate_admissibility(expr, admissibility_samples())
    params = dict(spec.params)
    if "nu" in params:
        params["nu"] = params["nu"] * lam
    if "terms" in params:
        params["terms"] = [
            (c * lam ** (2.0 * a - 2.0), a) for (c, a) in params["terms"]
        ]
    params["rescaled_from"] = spec.label
    params["scale"] = float(lam)
    label = spec.label if lam == 1.0 else f"rescale({spec.label},{lam:g})"
    return MultiplierSpec(expr=expr, label=label, admissibility=report, params=params)


def spec_from_text(text: str, label: str | None = None) -> MultiplierSpec:
    """Parse + validate a user-supplied symbol string."""
    return _make_spec(text, label or text)
