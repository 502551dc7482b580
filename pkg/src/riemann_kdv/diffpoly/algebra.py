"""Exact differential polynomials over the Gaussian rationals.

A DiffPoly is a finite sum of monomials c * prod (v^(k))^e where v ranges over
named differential indeterminates (u, x, y, g, ...), v^(k) is the k-th
z-derivative and c is a Gaussian rational.  Exponents are positive except that
order-zero factors may carry negative exponents, so expressions like
g'^2 / g^3 live in the ring (Laurent in the undifferentiated variable), which is
closed under the total derivative.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from ..errors import NotExact, ValidationError

Rational = Fraction


class QI:
    """Gaussian rational re + i*im with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @staticmethod
    def coerce(c) -> "QI":
        if isinstance(c, QI):
            return c
        if isinstance(c, (int, Fraction)):
            return QI(c, 0)
        if isinstance(c, complex):
            raise ValidationError("floating-point coefficients are not allowed; use QI")
        if isinstance(c, str):
            return QI(Fraction(c), 0)
        raise ValidationError(f"cannot use {type(c).__name__} as an exact coefficient")

    @staticmethod
    def _other(o):
        try:
            return QI.coerce(o)
        except ValidationError:
            return None

    def __add__(self, o):
        o = QI._other(o)
        if o is None:
            return NotImplemented
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __sub__(self, o):
        o = QI._other(o)
        if o is None:
            return NotImplemented
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return QI.coerce(o) - self

    def __mul__(self, o):
        o = QI._other(o)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return QI(self.re * o.re, 0)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = QI.coerce(o)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero coefficient")
        return self * QI(o.re / d, -o.im / d)

    def __rtruediv__(self, o):
        return QI.coerce(o) / self

    def __eq__(self, o):
        try:
            o = QI.coerce(o)
        except ValidationError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self):
        return QI(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"QI({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i" if self.im != 1 else "i"
        return f"({self.re} + {self.im}*i)"


I = QI(0, 1)


Factor = tuple  # ((name, order), exponent)
Monomial = tuple  # sorted tuple of factors


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for key, e in b:
        d[key] = d.get(key, 0) + e
        if d[key] == 0:
            del d[key]
    return tuple(sorted(d.items()))


class DiffPoly:
    """Immutable exact differential polynomial (Laurent in order-zero factors)."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = QI.coerce(c)
                if c:
                    for (name, k), e in m:
                        if e < 0 and k != 0:
                            raise ValidationError("negative powers allowed only for undifferentiated variables")
                    clean[tuple(sorted(m))] = c
        self._terms = clean
        self._hash = None

    # construction
    @classmethod
    def const(cls, c) -> "DiffPoly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str, order: int = 0, power: int = 1) -> "DiffPoly":
        if order < 0:
            raise ValidationError("derivative order must be non-negative")
        if power == 0:
            return cls.const(1)
        return cls({(((name, order), power),): 1})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, DiffPoly):
            try:
                other = DiffPoly.const(other)
            except ValidationError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # ring operations
    @staticmethod
    def _lift(o) -> "DiffPoly":
        return o if isinstance(o, DiffPoly) else DiffPoly.const(o)

    def __add__(self, o):
        o = DiffPoly._lift(o)
        out = dict(self._terms)
        for m, c in o._terms.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return DiffPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, o):
        return self + (-DiffPoly._lift(o))

    def __rsub__(self, o):
        return DiffPoly._lift(o) - self

    def __mul__(self, o):
        if not isinstance(o, DiffPoly):
            c = QI.coerce(o)
            if not c:
                return DiffPoly()
            return DiffPoly._raw({m: v * c for m, v in self._terms.items()})
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in o._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m)
                s = c1 * c2 if s is None else s + c1 * c2
                out[m] = s
        return DiffPoly._raw({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, DiffPoly):
            if len(o._terms) != 1:
                raise ValidationError("division only by a single monomial")
            (m, c), = o._terms.items()
            inv = tuple((k, -e) for k, e in m)
            return self * DiffPoly({inv: QI(1) / c})
        return self * (QI(1) / QI.coerce(o))

    def __rtruediv__(self, o):
        return DiffPoly._lift(o) / self

    def __pow__(self, n: int):
        if n < 0:
            return DiffPoly.const(1) / (self ** (-n))
        out = DiffPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    @classmethod
    def _raw(cls, terms: dict) -> "DiffPoly":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    # structure
    def variables(self) -> set[str]:
        return {name for m in self._terms for (name, _), _ in m}

    def max_order(self, name: str) -> int:
        return max((k for m in self._terms for (nm, k), _ in m if nm == name), default=-1)

    def degree_in(self, name: str, order: int) -> int:
        return max((e for m in self._terms for (key, e) in m if key == (name, order)), default=0)

    def coefficient(self, monomial) -> QI:
        return self._terms.get(tuple(sorted(monomial)), QI(0))

    def conjugate_coefficients(self) -> "DiffPoly":
        return DiffPoly._raw({m: c.conjugate() for m, c in self._terms.items()})

    # calculus
    def partial(self, name: str, order: int) -> "DiffPoly":
        """Partial derivative with respect to the jet coordinate name^(order)."""
        key = (name, order)
        out = {}
        for m, c in self._terms.items():
            d = dict(m)
            e = d.get(key)
            if not e:
                continue
            if e == 1:
                del d[key]
            else:
                d[key] = e - 1
            nm = tuple(sorted(d.items()))
            out[nm] = out.get(nm, QI(0)) + c * e
        return DiffPoly._raw({m: c for m, c in out.items() if c})

    def derive(self, times: int = 1) -> "DiffPoly":
        p = self
        for _ in range(times):
            p = p._derive_once()
        return p

    def _derive_once(self) -> "DiffPoly":
        out: dict = {}
        for m, c in self._terms.items():
            for i, ((name, k), e) in enumerate(m):
                d = dict(m)
                if e == 1:
                    del d[(name, k)]
                else:
                    d[(name, k)] = e - 1
                nk = (name, k + 1)
                d[nk] = d.get(nk, 0) + 1
                if d[nk] == 0:
                    del d[nk]
                nm = tuple(sorted(d.items()))
                s = out.get(nm)
                out[nm] = c * e if s is None else s + c * e
        return DiffPoly._raw({m: c for m, c in out.items() if c})

    def subs(self, mapping: Mapping[str, "DiffPoly"]) -> "DiffPoly":
        """Replace each variable v by mapping[v] and v^(k) by its k-th derivative."""
        cache: dict = {}

        def power(name, k, e):
            key = (name, k, e)
            if key not in cache:
                base = mapping[name].derive(k) if k else mapping[name]
                cache[key] = base ** e
            return cache[key]

        out = DiffPoly()
        for m, c in self._terms.items():
            term = DiffPoly.const(c)
            rest = []
            for (name, k), e in m:
                if name in mapping:
                    term = term * power(name, k, e)
                else:
                    rest.append(((name, k), e))
            if rest:
                term = term * DiffPoly({tuple(rest): 1})
            out = out + term
        return out

    def prolong(self, flows: Mapping[str, "DiffPoly"]) -> "DiffPoly":
        """Evolutionary derivative: sum_k dp/dv^(k) * D^k(flow_v)."""
        out = DiffPoly()
        for name, flow in flows.items():
            top = self.max_order(name)
            dflow = flow
            for k in range(top + 1):
                part = self.partial(name, k)
                if part:
                    out = out + part * dflow
                dflow = dflow.derive()
        return out

    def euler(self, name: str) -> "DiffPoly":
        """Variational derivative sum_k (-D)^k dp/dv^(k)."""
        out = DiffPoly()
        for k in range(self.max_order(name) + 1):
            part = self.partial(name, k)
            if part:
                out = out + (part.derive(k) * ((-1) ** k))
        return out

    def is_total_derivative(self) -> bool:
        if self.is_zero():
            return True
        if () in self._terms:
            return False
        return all(self.euler(v).is_zero() for v in self.variables())

    # numeric evaluation
    def evaluate(self, jets: Mapping[str, object], scalar=None):
        """Evaluate with jets[v][k] holding numeric values of v^(k) (arrays broadcast).

        ``scalar`` converts an exact coefficient to the numeric type (default
        complex/float).  Monomials are visited in sorted order and shared
        prefixes are multiplied once.
        """
        if scalar is None:
            scalar = lambda c: complex(c) if c.im else float(c.re)
        total = 0
        powcache: dict = {}
        stack: list = []   # (factor, running product) along the current prefix
        for m in sorted(self._terms):
            common = 0
            while common < min(len(stack), len(m)) and stack[common][0] == m[common]:
                common += 1
            del stack[common:]
            for f in m[common:]:
                (name, k), e = f
                key = (name, k, e)
                if key not in powcache:
                    base = jets[name][k]
                    powcache[key] = base ** e if e > 0 else 1 / base ** (-e)
                prev = stack[-1][1] if stack else None
                stack.append((f, powcache[key] if prev is None else prev * powcache[key]))
            c = scalar(self._terms[m])
            total = total + (c * stack[-1][1] if stack else c)
        return total

    # printing
    def sorted_terms(self):
        def key(item):
            m, c = item
            top = max((k for (_, k), _ in m), default=-1)
            deg = sum(e for _, e in m)
            return (-top, deg, [(-k, e) for (_, k), e in m])
        return sorted(self._terms.items(), key=key)

    def to_ascii(self) -> str:
        return _render(self, _ascii_factor, "*", _ascii_coeff)

    def to_latex(self) -> str:
        return _render(self, _latex_factor, " ", _latex_coeff)

    def __str__(self):
        return self.to_ascii()

    def __repr__(self):
        return f"DiffPoly({self.to_ascii()})"


def _ascii_factor(name, k, e):
    primes = {0: "", 1: "'", 2: "''", 3: "'''"}
    base = name + primes[k] if k in primes else f"{name}^({k})"
    return base if e == 1 else f"{base}^{e}" if k == 0 else f"({base})^{e}"


def _latex_factor(name, k, e):
    primes = {0: "", 1: "'", 2: "''", 3: "'''"}
    base = name + primes[k] if k in primes else f"{name}^{{({k})}}"
    if e == 1:
        return base
    return f"{base}^{{{e}}}" if k == 0 else f"({base})^{{{e}}}"


def _ascii_coeff(c: QI) -> str:
    return str(c)


def _latex_coeff(c: QI) -> str:
    def frac(q: Fraction) -> str:
        return str(q.numerator) if q.denominator == 1 else f"\\frac{{{q.numerator}}}{{{q.denominator}}}"
    if not c.im:
        return frac(c.re)
    if not c.re:
        return "i" if c.im == 1 else f"{frac(c.im)}i"
    return f"({frac(c.re)} + {frac(c.im)}i)"


def _render(p: DiffPoly, factor, sep, coeff) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.sorted_terms():
        num = [factor(n, k, e) for (n, k), e in m if e > 0]
        den = [factor(n, k, -e) for (n, k), e in m if e < 0]
        sign = "+"
        if c.is_real() and c.re < 0:
            sign, c = "-", -c
        body = sep.join(num)
        if den:
            d = sep.join(den)
            if sep == " ":
                body = f"\\frac{{{body or '1'}}}{{{d}}}"
            else:
                body = f"{body or '1'}/{d if len(den) == 1 else '(' + d + ')'}"
        if c == 1 and body:
            text = body
        elif body:
            text = f"{coeff(c)}{sep}{body}" if sep == "*" else f"{coeff(c)} {body}"
        else:
            text = coeff(c)
        parts.append((sign, text))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for s, t in parts[1:]:
        out += f" {s} {t}"
    return out


# -- integration ---------------------------------------------------------------

def integrate_exact(p: DiffPoly, max_steps: int = 10_000) -> DiffPoly:
    """Q with derive(Q) = p, or NotExact.

    Exactness is decided by the Euler operator.  The primitive is built by
    peeling the highest derivative: if v^(n) is the top jet of p, p is affine in
    it with coefficient A, and A integrated in v^(n-1) gives Q1 with
    p - D(Q1) free of v^(n).
    """
    if not p.is_total_derivative():
        raise NotExact("Euler operator does not vanish")
    result = DiffPoly()
    rest = p
    for _ in range(max_steps):
        if rest.is_zero():
            if not result.derive() == p:
                raise NotExact("primitive check failed")
            return result
        name, n = max(((nm, k) for m in rest._terms for (nm, k), _ in m if k >= 1),
                      key=lambda x: (x[1], x[0]), default=(None, 0))
        if name is None:
            raise NotExact("remainder has no derivative factors")
        if rest.degree_in(name, n) != 1:
            raise NotExact(f"not affine in {name}^({n})")
        A = rest.partial(name, n)
        Q = _antiderivative(A, name, n - 1)
        result = result + Q
        rest = rest - Q.derive()
    raise NotExact("integration did not terminate")


def _antiderivative(A: DiffPoly, name: str, order: int) -> DiffPoly:
    """Antiderivative of A in the jet coordinate name^(order), other jets fixed."""
    key = (name, order)
    out = {}
    for m, c in A.items():
        d = dict(m)
        e = d.get(key, 0)
        if e == -1:
            raise NotExact(f"primitive would need log({name})")
        d[key] = e + 1
        if d[key] == 0:
            del d[key]
        nm = tuple(sorted(d.items()))
        out[nm] = out.get(nm, QI(0)) + c / (e + 1)
    return DiffPoly(out)


def monomials_of_weight(name: str, weight: int, var_weight: int = 2) -> list[DiffPoly]:
    """All monomials in name^(k) with total weight, where name^(k) weighs var_weight + k."""
    out = []

    def rec(remaining, min_k, factors):
        if remaining == 0:
            d = {}
            for k in factors:
                d[(name, k)] = d.get((name, k), 0) + 1
            out.append(DiffPoly({tuple(sorted(d.items())): 1}))
            return
        for k in range(min_k, remaining - var_weight + 1):
            rec(remaining - var_weight - k, k, factors + [k])

    rec(weight, 0, [])
    return out
