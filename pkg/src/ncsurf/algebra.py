"""Exact scalar arithmetic, free-group words, group-ring elements, and
arc-alphabet endomorphisms.

Scalars live in Q(2cos(pi/d)) represented as polynomials reduced modulo the
minimal polynomial of L = 2cos(pi/d); for d <= 3 the field is plain Q with
L in {2, 0, 1}.  Words are freely reduced sequences of directed-arc letters
with integer exponents.  Group-ring elements are finite scalar combinations
of words with a canonical (shortlex) serialization.
"""

import math
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple


# ---------------------------------------------------------------------------
# scalar fields Q(2cos(pi/d))
# ---------------------------------------------------------------------------

def _poly_trim(p: List[Fraction]) -> List[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_add(a, b):
    n = max(len(a), len(b))
    out = [Fraction(0)] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return _poly_trim(out)


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_divmod(a, b):
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv_lead = Fraction(1) / b[-1]
    while len(a) >= len(b):
        c = a[-1] * inv_lead
        k = len(a) - len(b)
        q[k] = c
        for i, y in enumerate(b):
            a[k + i] -= c * y
        _poly_trim(a)
        if not a:
            break
    return _poly_trim(q), a


def _poly_invmod(a, m):
    # extended Euclid in Q[x]: find u with u*a = 1 (mod m)
    r0, r1 = list(m), list(a)
    s0, s1 = [], [Fraction(1)]
    while True:
        if len(r1) == 1:
            inv = Fraction(1) / r1[0]
            return _poly_trim([c * inv for c in s1])
        if not r1:
            raise ZeroDivisionError("division by zero scalar")
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_add(s0, [-c for c in _poly_mul(q, s1)])


class ScalarField:
    """Field descriptor for Q(2cos(pi/d)): minimal polynomial and numerics."""

    def __init__(self, d: int, min_poly: List[Fraction], root: float):
        self.d = d
        self.min_poly = tuple(min_poly)  # monic, ascending coefficients
        self.degree = len(min_poly) - 1
        self.root = root

    def __repr__(self):
        return f"ScalarField(d={self.d}, degree={self.degree})"

    def __eq__(self, other):
        return isinstance(other, ScalarField) and self.min_poly == other.min_poly

    def __hash__(self):
        return hash(self.min_poly)

    # -- element constructors ------------------------------------------------

    def scalar(self, value) -> "Scalar":
        if isinstance(value, Scalar):
            if value.field is not self and value.field != self:
                raise ValueError("scalar field mismatch")
            return value
        return Scalar(self, [Fraction(value)])

    def zero(self) -> "Scalar":
        return Scalar(self, [])

    def one(self) -> "Scalar":
        return Scalar(self, [Fraction(1)])

    def lam(self) -> "Scalar":
        """The generator L = 2cos(pi/d) as a field element."""
        return Scalar(self, _poly_divmod([Fraction(0), Fraction(1)],
                                         list(self.min_poly))[1])


_FIELD_CACHE: Dict[int, ScalarField] = {}


def _min_poly_of_2cos(d: int) -> List[Fraction]:
    import sympy
    x = sympy.Symbol("x")
    expr = 2 * sympy.cos(sympy.pi / d)
    poly = sympy.minimal_polynomial(expr, x, polys=True).monic()
    coeffs = poly.all_coeffs()[::-1]  # ascending
    return [Fraction(str(c)) for c in coeffs]


def scalar_field(d: int) -> ScalarField:
    """Field descriptor for Q(2cos(pi/d)); rational for d in {1,2,3}."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if d not in _FIELD_CACHE:
        if d <= 3:
            lam = {1: Fraction(-2), 2: Fraction(0), 3: Fraction(1)}[d]
            # d=1: 2cos(pi) = -2;  d=2: 0;  d=3: 1.  Rational field.
            mp = [-lam, Fraction(1)]
            _FIELD_CACHE[d] = ScalarField(d, mp, float(lam))
        else:
            mp = _min_poly_of_2cos(d)
            _FIELD_CACHE[d] = ScalarField(d, mp, 2 * math.cos(math.pi / d))
    return _FIELD_CACHE[d]


RATIONALS = scalar_field(3)  # convenient rational field (L = 1)


class Scalar:
    """Element of Q(2cos(pi/d)): polynomial in L of degree < deg(m_d)."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: ScalarField, coeffs):
        self.field = field
        self.coeffs = tuple(_poly_trim([Fraction(c) for c in coeffs]))

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise ValueError("scalar field mismatch")
            return other
        return Scalar(self.field, [Fraction(other)])

    def __add__(self, other):
        other = self._coerce(other)
        return Scalar(self.field, _poly_add(list(self.coeffs), list(other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.field, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        prod = _poly_mul(list(self.coeffs), list(other.coeffs))
        _, rem = _poly_divmod(prod, list(self.field.min_poly))
        return Scalar(self.field, rem)

    __rmul__ = __mul__

    def inv(self) -> "Scalar":
        if not self.coeffs:
            raise ZeroDivisionError("inverse of zero scalar")
        return Scalar(self.field,
                      _poly_invmod(list(self.coeffs), list(self.field.min_poly)))

    def __truediv__(self, other):
        return self * self._coerce(other).inv()

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        return isinstance(other, Scalar) and self.field == other.field \
            and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def __bool__(self):
        return bool(self.coeffs)

    def bar(self) -> "Scalar":
        return self

    def numeric(self) -> float:
        return sum(float(c) * self.field.root ** i
                   for i, c in enumerate(self.coeffs))

    def __repr__(self):
        return f"Scalar({self!s})"

    def __str__(self):
        return _poly_str(self.coeffs, "L")


def _frac_str(c: Fraction) -> str:
    return str(c)


def _poly_str(coeffs, var: str) -> str:
    if not coeffs:
        return "0"
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        if i == 0:
            body = _frac_str(abs(c))
        else:
            mag = abs(c)
            head = "" if mag == 1 else f"{_frac_str(mag)}*"
            body = f"{head}{var}" + (f"^{i}" if i > 1 else "")
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Laurent polynomials in q^{1/2}
# ---------------------------------------------------------------------------

class QScalar:
    """Laurent polynomial in q^{1/2}: map half-integer exponent -> rational."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Fraction, Fraction]] = None):
        clean = {}
        for e, c in (terms or {}).items():
            e = Fraction(e)
            c = Fraction(c)
            if 2 * e != int(2 * e):
                raise ValueError("exponent must be a half integer")
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @staticmethod
    def of(value) -> "QScalar":
        if isinstance(value, QScalar):
            return value
        return QScalar({Fraction(0): Fraction(value)})

    @staticmethod
    def q_pow(e) -> "QScalar":
        return QScalar({Fraction(e): Fraction(1)})

    def __add__(self, other):
        other = QScalar.of(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return QScalar(out)

    __radd__ = __add__

    def __neg__(self):
        return QScalar({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-QScalar.of(other))

    def __rsub__(self, other):
        return QScalar.of(other) + (-self)

    def __mul__(self, other):
        other = QScalar.of(other)
        out: Dict[Fraction, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return QScalar(out)

    __rmul__ = __mul__

    def inv(self) -> "QScalar":
        if len(self.terms) != 1:
            raise ZeroDivisionError("only monomials in q are invertible")
        (e, c), = self.terms.items()
        return QScalar({-e: Fraction(1) / c})

    def __truediv__(self, other):
        return self * QScalar.of(other).inv()

    def bar(self) -> "QScalar":
        """Bar involution q^{1/2} -> q^{-1/2}."""
        return QScalar({-e: c for e, c in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QScalar.of(other)
        return isinstance(other, QScalar) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"QScalar({self!s})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            if e == 0:
                body = _frac_str(abs(c))
            else:
                head = "" if abs(c) == 1 else f"{_frac_str(abs(c))}*"
                exp = str(e) if e.denominator == 1 else f"({e})"
                body = f"{head}q^{exp}"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)


class QDomain:
    """Coefficient-domain shim so RingElem can run over QScalar."""

    degree = 0

    def scalar(self, value):
        return QScalar.of(value)

    def zero(self):
        return QScalar.of(0)

    def one(self):
        return QScalar.of(1)

    def __eq__(self, other):
        return isinstance(other, QDomain)

    def __hash__(self):
        return hash("QDomain")


Q_DOMAIN = QDomain()


# ---------------------------------------------------------------------------
# directed-arc generator symbols
# ---------------------------------------------------------------------------

class Dgen(tuple):
    """Directed arc: (arc id, direction in {+1,-1}).  bar reverses direction."""

    __slots__ = ()

    def __new__(cls, arc, s: int = 1):
        if s not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        return tuple.__new__(cls, (arc, s))

    @property
    def arc(self):
        return self[0]

    @property
    def s(self) -> int:
        return self[1]

    def bar(self) -> "Dgen":
        return Dgen(self[0], -self[1])

    def __repr__(self):
        return f"t[{self[0]}{'' if self[1] == 1 else '~'}]"


def _atom_key(a):
    if isinstance(a, tuple):
        return (2,) + tuple(_atom_key(x) for x in a)
    if isinstance(a, bool):
        return (0, int(a))
    if isinstance(a, int):
        return (0, a)
    return (1, str(a))


def gen_key(g: Dgen):
    """Deterministic total order on generator symbols."""
    return (_atom_key(g.arc), -g.s)


# ---------------------------------------------------------------------------
# freely reduced words
# ---------------------------------------------------------------------------

class Word:
    # Words are always kept reduced: adjacent letters are distinct symbols
    # and no exponent is zero.

    __slots__ = ("word",)

    def __init__(self):
        self.word: List[Tuple[Dgen, int]] = []

    @staticmethod
    def identity() -> "Word":
        return Word()

    @staticmethod
    def gen(g: Dgen, power: int = 1) -> "Word":
        w = Word()
        w.add(g, power)
        return w

    @staticmethod
    def of(letters) -> "Word":
        """Build from an iterable of Dgen or (Dgen, power) pairs."""
        w = Word()
        for item in letters:
            if isinstance(item, Dgen):
                w.add(item)
            else:
                w.add(item[0], item[1])
        return w

    def add(self, g: Dgen, power: int = 1):
        if power == 0:
            return
        if self.word and self.word[-1][0] == g:
            self.word[-1] = (g, self.word[-1][1] + power)
            if self.word[-1][1] == 0:
                self.word.pop()
        else:
            self.word.append((g, power))

    def __imul__(self, other: "Word"):
        for g, p in other.word:
            self.add(g, p)
        return self

    def __itruediv__(self, other: "Word"):
        for g, p in other.word[::-1]:
            self.add(g, -p)
        return self

    def __mul__(self, other: "Word") -> "Word":
        res = self.copy()
        res *= other
        return res

    def __truediv__(self, other: "Word") -> "Word":
        res = self.copy()
        res /= other
        return res

    def __invert__(self) -> "Word":
        res = Word()
        for g, p in self.word[::-1]:
            res.add(g, -p)
        return res

    def __pow__(self, n: int) -> "Word":
        if n == 0:
            return Word()
        if n < 0:
            return ~(self ** (-n))
        half = self ** (n // 2)
        return half * half * self if n % 2 else half * half

    def bar(self) -> "Word":
        """Anti-automorphism: reverse the word and reverse each letter."""
        res = Word()
        for g, p in self.word[::-1]:
            res.add(g.bar(), p)
        return res

    def copy(self) -> "Word":
        res = Word()
        res.word = list(self.word)
        return res

    def __iter__(self) -> Iterator[Tuple[Dgen, int]]:
        return iter(self.word)

    def __len__(self):
        return sum(abs(p) for _, p in self.word)

    def is_identity(self) -> bool:
        return not self.word

    def key(self):
        return tuple(self.word)

    def sort_key(self):
        """Shortlex key: length, then per-letter (arc id, direction, sign)."""
        return (len(self),
                tuple((gen_key(g), 0 if p > 0 else 1, abs(p))
                      for g, p in self.word))

    def __eq__(self, other):
        return isinstance(other, Word) and self.word == other.word

    def __hash__(self):
        return hash(tuple(self.word))

    def __repr__(self):
        if not self.word:
            return "1"
        return "*".join(f"{g!r}" + (f"^{p}" if p != 1 else "")
                        for g, p in self.word)


def word_mul(a: Word, b: Word) -> Word:
    return a * b


def word_inv(a: Word) -> Word:
    return ~a


# ---------------------------------------------------------------------------
# group-ring elements
# ---------------------------------------------------------------------------

class RingElem:
    """Finite scalar combination of words; canonical sorted-support form."""

    __slots__ = ("dom", "terms")

    def __init__(self, dom, terms: Optional[Dict[tuple, object]] = None):
        self.dom = dom
        self.terms: Dict[tuple, object] = {}
        for k, c in (terms or {}).items():
            if c:
                self.terms[k] = self.terms[k] + c if k in self.terms else c
        self.terms = {k: c for k, c in self.terms.items() if c}

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def zero(dom) -> "RingElem":
        return RingElem(dom)

    @staticmethod
    def one(dom) -> "RingElem":
        return RingElem(dom, {(): dom.one()})

    @staticmethod
    def of_word(dom, w: Word, coeff=None) -> "RingElem":
        c = dom.one() if coeff is None else dom.scalar(coeff)
        return RingElem(dom, {w.key(): c})

    @staticmethod
    def of_gen(dom, g: Dgen, power: int = 1) -> "RingElem":
        return RingElem.of_word(dom, Word.gen(g, power))

    # -- ring operations --------------------------------------------------------

    def _check(self, other: "RingElem"):
        if self.dom != other.dom:
            raise ValueError("scalar field mismatch")

    def __add__(self, other: "RingElem") -> "RingElem":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return RingElem(self.dom, out)

    def __neg__(self):
        return RingElem(self.dom, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "RingElem") -> "RingElem":
        self._check(other)
        out: Dict[tuple, object] = {}
        for k1, c1 in self.terms.items():
            w1 = Word.of(k1)
            for k2, c2 in other.terms.items():
                k = (w1 * Word.of(k2)).key()
                c = c1 * c2
                out[k] = out[k] + c if k in out else c
        return RingElem(self.dom, out)

    def scale(self, coeff) -> "RingElem":
        c0 = self.dom.scalar(coeff)
        return RingElem(self.dom, {k: c0 * c for k, c in self.terms.items()})

    def bar(self) -> "RingElem":
        out = {}
        for k, c in self.terms.items():
            kb = Word.of(k).bar().key()
            cb = c.bar() if hasattr(c, "bar") else c
            out[kb] = out[kb] + cb if kb in out else cb
        return RingElem(self.dom, out)

    def __eq__(self, other):
        return isinstance(other, RingElem) and self.dom == other.dom \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.dom, tuple(sorted(self.terms.items(),
                                            key=lambda kv: Word.of(kv[0]).sort_key()))))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        """Terms as (Word, scalar) pairs in canonical shortlex order."""
        keys = sorted(self.terms, key=lambda k: Word.of(k).sort_key())
        return [(Word.of(k), self.terms[k]) for k in keys]

    def monomial(self) -> Tuple[Word, object]:
        if len(self.terms) != 1:
            raise ValueError("not a monomial")
        k, c = next(iter(self.terms.items()))
        return Word.of(k), c

    def inv_monomial(self) -> "RingElem":
        w, c = self.monomial()
        if hasattr(c, "inv"):
            ci = c.inv()
        else:
            ci = 1 / c
        return RingElem(self.dom, {(~w).key(): ci})

    def __repr__(self):
        return f"RingElem({serialize(self)})"


def ring_add(a: RingElem, b: RingElem) -> RingElem:
    return a + b


def ring_mul(a: RingElem, b: RingElem) -> RingElem:
    return a * b


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def default_namer(g: Dgen) -> str:
    arc = g.arc
    if isinstance(arc, tuple) and len(arc) >= 2:
        body = ",".join(str(x) for x in arc[1:])
        name = f"{arc[0]}{body}"
    else:
        name = str(arc)
    return name + ("" if g.s == 1 else "~")


def word_str(w: Word, namer=None) -> str:
    namer = namer or default_namer
    if w.is_identity():
        return "1"
    return " * ".join(f"x[{namer(g)}]" + (f"^{p}" if p != 1 else "")
                      for g, p in w)


def serialize(elem: RingElem, namer=None) -> str:
    """Canonical text form: shortlex-sorted terms, scalars in L / q."""
    items = elem.items()
    if not items:
        return "0"
    parts = []
    for w, c in items:
        cs = str(c)
        ws = word_str(w, namer)
        if ws == "1":
            term = cs
        elif cs == "1":
            term = ws
        else:
            if any(op in cs for op in (" + ", " - ")):
                cs = f"({cs})"
            term = f"{cs} * {ws}"
        parts.append(term)
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# arc-alphabet endomorphisms
# ---------------------------------------------------------------------------

class ArcEndo:
    """Endomorphism of the free group on arc letters, given by generator
    images; identity outside the stated support."""

    __slots__ = ("images",)

    def __init__(self, images: Optional[Dict[Dgen, Word]] = None):
        self.images: Dict[Dgen, Word] = {}
        for g, w in (images or {}).items():
            if not (w.is_identity() is False and len(w.word) == 1
                    and w.word[0] == (g, 1)):
                self.images[g] = w.copy()

    @staticmethod
    def identity() -> "ArcEndo":
        return ArcEndo()

    @staticmethod
    def with_bar(images: Dict[Dgen, Word]) -> "ArcEndo":
        """Extend images to reversed letters via the bar anti-automorphism."""
        full = dict(images)
        for g, w in images.items():
            full.setdefault(g.bar(), w.bar())
        return ArcEndo(full)

    def image(self, g: Dgen) -> Word:
        if g in self.images:
            return self.images[g].copy()
        return Word.gen(g)

    def support(self):
        return set(self.images)

    def apply(self, w: Word) -> Word:
        res = Word()
        for g, p in w:
            res *= self.image(g) ** p
        return res

    def apply_ring(self, x: RingElem) -> RingElem:
        out: Dict[tuple, object] = {}
        for k, c in x.terms.items():
            key = self.apply(Word.of(k)).key()
            out[key] = out[key] + c if key in out else c
        return RingElem(x.dom, out)

    def compose(self, other: "ArcEndo") -> "ArcEndo":
        """Composite applying `other` first: g -> self(other(g))."""
        support = set(self.images) | set(other.images)
        return ArcEndo({g: self.apply(other.image(g)) for g in support})

    def inverse_on(self, gens) -> "ArcEndo":
        raise NotImplementedError  # inverses are constructed case by case

    def __eq__(self, other):
        if not isinstance(other, ArcEndo):
            return NotImplemented
        for g in set(self.images) | set(other.images):
            if self.image(g) != other.image(g):
                return False
        return True

    def __hash__(self):
        items = sorted(((gen_key(g), tuple(w.word))
                        for g, w in self.images.items()))
        return hash(tuple(items))

    def is_identity_on(self, gens) -> bool:
        return all(self.image(g) == Word.gen(g) for g in gens)

    def __repr__(self):
        ims = ", ".join(f"{g!r} -> {w!r}" for g, w in
                        sorted(self.images.items(), key=lambda kv: gen_key(kv[0])))
        return f"ArcEndo({ims})"


def endo_apply(e: ArcEndo, w: Word) -> Word:
    return e.apply(w)


def endo_compose(e1: ArcEndo, e2: ArcEndo) -> ArcEndo:
    """Composite applying e2 first."""
    return e1.compose(e2)
