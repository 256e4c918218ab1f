"""Exact scalars: rationals (gmpy2 ``mpq``) and univariate rational functions.

A computation is either fully numeric (every scalar an ``mpq``) or symbolic in
exactly one indeterminate, in which case scalars are :class:`RatFun` values
whose polynomials carry the same variable tag.
"""
from __future__ import annotations

from typing import Iterable, Sequence, Union

from gmpy2 import mpq

Rational = type(mpq(0))
VARS = ("u", "z", "q")

_ZERO = mpq(0)
_ONE = mpq(1)


class FieldError(ArithmeticError):
    pass


def rat(x, d=1) -> Rational:
    """Coerce ints, strings like ``"5/2"`` and rationals to ``mpq``."""
    if isinstance(x, str):
        s = x.strip()
        if not s:
            raise ValueError("empty rational literal")
        return mpq(s) / mpq(d)
    return mpq(x) / mpq(d)


def rational_text(x) -> str:
    x = mpq(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- polynomials


class Poly:
    """Dense univariate polynomial over Q; ``coeffs[k]`` multiplies ``var**k``."""

    __slots__ = ("coeffs", "var", "_hash")

    def __init__(self, coeffs: Iterable = (), var: str = "u"):
        if var not in VARS:
            raise ValueError(f"unknown indeterminate {var!r}")
        c = [mpq(x) for x in coeffs]
        while c and not c[-1]:
            c.pop()
        self.coeffs = tuple(c)
        self.var = var
        self._hash = None

    @classmethod
    def _raw(cls, coeffs: tuple, var: str) -> "Poly":
        # caller guarantees mpq entries and no trailing zeros
        p = object.__new__(cls)
        p.coeffs = coeffs
        p.var = var
        p._hash = None
        return p

    @classmethod
    def const(cls, c, var: str = "u") -> "Poly":
        c = mpq(c)
        return cls._raw((c,) if c else (), var)

    @classmethod
    def gen(cls, var: str = "u") -> "Poly":
        return cls._raw((_ZERO, _ONE), var)

    @classmethod
    def from_roots(cls, roots: Iterable, var: str = "u") -> "Poly":
        p = cls.const(1, var)
        for r in roots:
            p = p * cls._raw((-mpq(r), _ONE), var)
        return p

    # -- basic queries
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    @property
    def lc(self) -> Rational:
        return self.coeffs[-1] if self.coeffs else _ZERO

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 1

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.var == other.var and self.coeffs == other.coeffs
        if isinstance(other, (int, Rational)):
            return self.coeffs == ((mpq(other),) if other else ())
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.var, self.coeffs))
        return self._hash

    def _check(self, other: "Poly"):
        if other.var != self.var:
            raise FieldError(f"mixed indeterminates {self.var!r} and {other.var!r}")

    # -- ring operations
    def __add__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            a, b = self.coeffs, other.coeffs
            if len(a) < len(b):
                a, b = b, a
            c = list(a)
            for k, x in enumerate(b):
                c[k] += x
            while c and not c[-1]:
                c.pop()
            return Poly._raw(tuple(c), self.var)
        if isinstance(other, (int, Rational)):
            if not other:
                return self
            c = list(self.coeffs) or [_ZERO]
            c[0] += other
            while c and not c[-1]:
                c.pop()
            return Poly._raw(tuple(c), self.var)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(tuple(-x for x in self.coeffs), self.var)

    def __sub__(self, other):
        if isinstance(other, (Poly, int, Rational)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            a, b = self.coeffs, other.coeffs
            if not a or not b:
                return Poly._raw((), self.var)
            if len(b) == 1:
                x = b[0]
                return Poly._raw(tuple(y * x for y in a), self.var)
            if len(a) == 1:
                x = a[0]
                return Poly._raw(tuple(y * x for y in b), self.var)
            c = [_ZERO] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        c[i + j] += x * y
            return Poly._raw(tuple(c), self.var)
        if isinstance(other, (int, Rational)):
            if not other:
                return Poly._raw((), self.var)
            return Poly._raw(tuple(x * other for x in self.coeffs), self.var)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            if not other:
                raise ZeroDivisionError("division by zero in function field")
            return self * (1 / mpq(other))
        if isinstance(other, Poly):
            return RatFun(self, other)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise FieldError("negative power of a polynomial")
        out = Poly.const(1, self.var)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def divmod(self, other: "Poly"):
        self._check(other)
        if not other.coeffs:
            raise ZeroDivisionError("division by zero in function field")
        r = list(self.coeffs)
        d = other.coeffs
        dl = len(d)
        inv = 1 / d[-1]
        if len(r) < dl:
            return Poly._raw((), self.var), self
        qt = [_ZERO] * (len(r) - dl + 1)
        for k in range(len(r) - dl, -1, -1):
            c = r[k + dl - 1] * inv
            qt[k] = c
            if c:
                for j in range(dl):
                    r[k + j] -= c * d[j]
        r = r[: dl - 1]
        while r and not r[-1]:
            r.pop()
        return Poly._raw(tuple(qt), self.var), Poly._raw(tuple(r), self.var)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        qt, r = self.divmod(other)
        if r:
            raise FieldError("inexact polynomial division")
        return qt

    def monic(self) -> "Poly":
        if not self.coeffs or self.coeffs[-1] == 1:
            return self
        inv = 1 / self.coeffs[-1]
        return Poly._raw(tuple(x * inv for x in self.coeffs), self.var)

    def __call__(self, x):
        acc = _ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    evaluate = __call__

    def derivative(self) -> "Poly":
        return Poly._raw(tuple(k * c for k, c in enumerate(self.coeffs) if k), self.var)

    def shift_scale(self, factor) -> "Poly":
        """p(factor * x)."""
        f = mpq(factor)
        out, pw = [], _ONE
        for c in self.coeffs:
            out.append(c * pw)
            pw *= f
        return Poly(out, self.var)

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        return poly_text(self)


def _coef_text(c: Rational) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def poly_text(p: Poly, var: str | None = None) -> str:
    """Descending-degree rendering, e.g. ``u^2 - 5*u + 4``."""
    v = var or p.var
    if not p.coeffs:
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p.coeffs[k]
        if not c:
            continue
        sign = "-" if c < 0 else "+"
        a = -c if c < 0 else c
        if k == 0:
            body = _coef_text(a)
        else:
            mono = v if k == 1 else f"{v}^{k}"
            body = mono if a == 1 else f"{_coef_text(a)}*{mono}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def poly_gcd(p: Poly, r: Poly) -> Poly:
    """Monic gcd; raises when both arguments vanish."""
    p._check(r)
    if not p.coeffs and not r.coeffs:
        raise FieldError("gcd of two zero polynomials")
    a, b = p, r
    while b.coeffs:
        if b.degree == 0:
            return Poly._raw((_ONE,), p.var)
        a, b = b, a.divmod(b)[1]
    return a.monic()


def poly_lcm(p: Poly, r: Poly) -> Poly:
    if not p.coeffs or not r.coeffs:
        raise FieldError("lcm with the zero polynomial")
    return (p * r).exact_div(poly_gcd(p, r)).monic()


def homogenize(p: Poly, first: str = "a", second: str = "b") -> str:
    """Render p(a/b) * b^deg as a homogeneous polynomial in (a, b)."""
    if not p.coeffs:
        return "0"
    d = p.degree
    terms = []
    for k in range(d, -1, -1):
        c = p.coeffs[k]
        if not c:
            continue
        mono = []
        if k:
            mono.append(first if k == 1 else f"{first}^{k}")
        if d - k:
            mono.append(second if d - k == 1 else f"{second}^{d - k}")
        a = -c if c < 0 else c
        body = "*".join(mono)
        if not body:
            body = _coef_text(a)
        elif a != 1:
            body = f"{_coef_text(a)}*{body}"
        terms.append(("-" if c < 0 else "+", body))
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


# ---------------------------------------------------------- rational functions


class RatFun:
    """num/den with gcd(num, den) = 1 and den monic."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if not isinstance(num, Poly):
            raise TypeError("RatFun numerator must be a Poly")
        if den is None:
            den = Poly._raw((_ONE,), num.var)
        n, d = _normalize_pair(num, den)
        self.num = n
        self.den = d

    @classmethod
    def _raw(cls, num: Poly, den: Poly) -> "RatFun":
        r = object.__new__(cls)
        r.num = num
        r.den = den
        return r

    @classmethod
    def gen(cls, var: str = "u") -> "RatFun":
        return cls._raw(Poly.gen(var), Poly._raw((_ONE,), var))

    @classmethod
    def const(cls, c, var: str = "u") -> "RatFun":
        return cls._raw(Poly.const(c, var), Poly._raw((_ONE,), var))

    @property
    def var(self) -> str:
        return self.num.var

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def is_constant(self) -> bool:
        return self.den.is_one() and self.num.is_constant()

    def constant_value(self) -> Rational:
        if not self.is_constant():
            raise FieldError("not a constant")
        return self.num.coeffs[0] if self.num.coeffs else _ZERO

    def __bool__(self) -> bool:
        return bool(self.num.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, RatFun):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Rational)):
            return self.den.is_one() and self.num == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.den.is_one() and self.num.degree <= 0:
            return hash(self.num.coeffs[0] if self.num.coeffs else _ZERO)
        return hash((self.num, self.den))

    def _coerce(self, other):
        if isinstance(other, RatFun):
            if other.num.var != self.num.var:
                raise FieldError(f"mixed indeterminates {self.var!r} and {other.var!r}")
            return other
        if isinstance(other, (int, Rational)):
            return None
        raise TypeError(f"cannot combine RatFun with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if not other:
                return self
            # gcd(n + c d, d) = gcd(n, d) = 1
            return RatFun._raw(self.num + self.den * mpq(other), self.den)
        d1, d2 = self.den, o.den
        if d1.is_one() and d2.is_one():
            return RatFun._raw(self.num + o.num, d1)
        if d1 == d2:
            return _from_unreduced(self.num + o.num, d1)
        g = poly_gcd(d1, d2)
        if g.is_one():
            return RatFun._raw(self.num * d2 + o.num * d1, d1 * d2)
        d1g, d2g = d1.exact_div(g), d2.exact_div(g)
        return _from_unreduced(self.num * d2g + o.num * d1g, d1g * d2)

    __radd__ = __add__

    def __neg__(self):
        return RatFun._raw(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if not other:
                return RatFun._raw(Poly._raw((), self.var), self.den._raw((_ONE,), self.var))
            return RatFun._raw(self.num * mpq(other), self.den)
        if not self.num.coeffs or not o.num.coeffs:
            return RatFun._raw(Poly._raw((), self.var), Poly._raw((_ONE,), self.var))
        n1, d1, n2, d2 = self.num, self.den, o.num, o.den
        if d1.is_one() and d2.is_one():
            return RatFun._raw(n1 * n2, d1)
        if not d2.is_one():
            g = poly_gcd(n1, d2)
            if not g.is_one():
                n1, d2 = n1.exact_div(g), d2.exact_div(g)
        if not d1.is_one():
            g = poly_gcd(n2, d1)
            if not g.is_one():
                n2, d1 = n2.exact_div(g), d1.exact_div(g)
        num, den = n1 * n2, d1 * d2
        lc = den.lc
        if lc != 1:
            inv = 1 / lc
            num, den = num * inv, den * inv
        return RatFun._raw(num, den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if not self.num.coeffs:
            raise ZeroDivisionError("division by zero in function field")
        lc = self.num.lc
        inv = 1 / lc
        return RatFun._raw(self.den * inv, self.num * inv)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if not other:
                raise ZeroDivisionError("division by zero in function field")
            return RatFun._raw(self.num * (1 / mpq(other)), self.den)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFun._raw(self.num ** n, self.den ** n)

    def __call__(self, x):
        d = self.den(x)
        if not d:
            raise ZeroDivisionError("evaluation at a pole")
        return self.num(x) / d

    evaluate = __call__

    def __repr__(self) -> str:
        return f"RatFun({self})"

    def __str__(self) -> str:
        return f"({poly_text(self.num)})/({poly_text(self.den)})"


def _normalize_pair(num: Poly, den: Poly):
    num._check(den)
    if not den.coeffs:
        raise ZeroDivisionError("division by zero in function field")
    if not num.coeffs:
        return num, Poly._raw((_ONE,), num.var)
    if den.degree > 0:
        g = poly_gcd(num, den)
        if not g.is_one():
            num, den = num.exact_div(g), den.exact_div(g)
    lc = den.lc
    if lc != 1:
        inv = 1 / lc
        num, den = num * inv, den * inv
    return num, den


def _from_unreduced(num: Poly, den: Poly) -> RatFun:
    n, d = _normalize_pair(num, den)
    return RatFun._raw(n, d)


Scalar = Union[Rational, RatFun]


def normalize(r: RatFun) -> RatFun:
    """Canonical representative: coprime parts, monic denominator."""
    return _from_unreduced(r.num, r.den)


def lcm_denominators(entries: Sequence) -> Poly:
    """Monic lcm of the denominators of a nonempty list of scalars."""
    if not entries:
        raise ValueError("lcm of an empty list")
    var = next((e.var for e in entries if isinstance(e, RatFun)), "u")
    acc = Poly._raw((_ONE,), var)
    seen = set()
    for e in entries:
        if isinstance(e, RatFun):
            d = e.den
            if d.is_one() or d in seen:
                continue
            seen.add(d)
            acc = poly_lcm(acc, d)
    return acc


def is_polynomial(x) -> bool:
    return not isinstance(x, RatFun) or x.is_polynomial()


def rational_roots(p: Poly) -> list:
    """All rational roots of p with multiplicity, ascending."""
    if not p.coeffs:
        raise FieldError("roots of the zero polynomial")
    roots: list = []
    # peel off the root 0 first; the rest goes through an exact factorisation
    k = 0
    while k < len(p.coeffs) and not p.coeffs[k]:
        k += 1
    roots.extend([mpq(0)] * k)
    rest = Poly(p.coeffs[k:], p.var)
    if rest.degree <= 0:
        return sorted(roots)
    if rest.degree == 1:
        roots.append(-rest.coeffs[0] / rest.coeffs[1])
        return sorted(roots)
    candidates = _linear_factor_roots(rest)
    # confirm each candidate and its multiplicity by exact deflation
    for r in candidates:
        lin = Poly._raw((-r, _ONE), p.var)
        while True:
            qt, rem = rest.divmod(lin)
            if rem:
                break
            roots.append(r)
            rest = qt
    return sorted(roots)


def _linear_factor_roots(p: Poly) -> list:
    import sympy  # deferred: only root finding needs it, and the import is slow

    x = sympy.Symbol("x")
    expr = sum(
        sympy.Rational(int(c.numerator), int(c.denominator)) * x ** k
        for k, c in enumerate(p.coeffs)
    )
    _, factors = sympy.factor_list(sympy.Poly(expr, x, domain="QQ"))
    out = []
    for f, _mult in factors:
        if f.degree() == 1:
            c1, c0 = f.all_coeffs()
            r = -sympy.Rational(c0) / sympy.Rational(c1)
            out.append(mpq(int(r.p), int(r.q)))
    return sorted(set(out))


# ------------------------------------------------------------------ helpers


def scalar_text(x) -> str:
    """Canonical text used bit-exactly in JSON reports."""
    if isinstance(x, RatFun):
        return str(x)
    if isinstance(x, (int, Rational)):
        return rational_text(x)
    raise TypeError(f"not a scalar: {x!r}")


def parse_scalar(text: str, var: str | None = None):
    """Inverse of :func:`scalar_text` for rationals and ``(num)/(den)`` forms."""
    s = text.strip()
    if s.startswith("("):
        if var is None:
            for v in VARS:
                if v in s:
                    var = v
                    break
            else:
                var = "u"
        close = _matching_paren(s, 0)
        num = parse_poly(s[1:close], var)
        rest = s[close + 1 :].strip()
        if not rest:
            return RatFun(num)
        if not rest.startswith("/("):
            raise ValueError(f"bad rational function literal {text!r}")
        close2 = _matching_paren(rest, 1)
        den = parse_poly(rest[2:close2], var)
        return RatFun(num, den)
    return rat(s)


def _matching_paren(s: str, start: int) -> int:
    depth = 0
    for k in range(start, len(s)):
        if s[k] == "(":
            depth += 1
        elif s[k] == ")":
            depth -= 1
            if depth == 0:
                return k
    raise ValueError(f"unbalanced parentheses in {s!r}")


def parse_poly(text: str, var: str = "u") -> Poly:
    """Parse the output of :func:`poly_text`."""
    s = text.replace(" ", "")
    if s in ("", "0"):
        return Poly((), var)
    if s[0] not in "+-":
        s = "+" + s
    terms, cur = [], ""
    for ch in s:
        if ch in "+-" and cur and cur[-1] not in "^*/":
            terms.append(cur)
            cur = ch
        else:
            cur += ch
    terms.append(cur)
    coeffs: dict = {}
    for t in terms:
        sign = -1 if t[0] == "-" else 1
        body = t[1:]
        if var in body:
            if "*" in body:
                c, mono = body.split("*", 1)
                c = rat(c)
            else:
                c, mono = mpq(1), body
            k = int(mono.split("^")[1]) if "^" in mono else 1
        else:
            c, k = rat(body), 0
        coeffs[k] = coeffs.get(k, mpq(0)) + sign * c
    deg = max(coeffs)
    return Poly([coeffs.get(k, 0) for k in range(deg + 1)], var)


def power(x, k: int):
    """x**k for rationals and rational functions, including negative k."""
    if isinstance(x, RatFun):
        return x ** k
    return mpq(x) ** k


def is_root_of_unity_free(q) -> bool:
    """True when a numeric q has |q| not in {0, 1}, hence is no root of unity."""
    q = mpq(q)
    return q != 0 and abs(q) != 1


__all__ = [
    "FieldError",
    "Poly",
    "RatFun",
    "Rational",
    "Scalar",
    "homogenize",
    "is_polynomial",
    "lcm_denominators",
    "normalize",
    "parse_poly",
    "parse_scalar",
    "poly_gcd",
    "poly_lcm",
    "poly_text",
    "power",
    "rat",
    "rational_roots",
    "rational_text",
    "scalar_text",
]

