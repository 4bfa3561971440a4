"""
Bergman Toolkit - Polynomial Core
Multivariate polynomials in z and conj(z) over exact-rational or float complex scalars,
with the partial, radial and tangential derivatives used throughout the toolkit
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, prod
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
import structlog

from bergman_toolkit.config import config
from bergman_toolkit.exceptions import (
    DimensionMismatchError,
    InvalidCoordinateError,
    PolynomialParseError,
)

logger = structlog.get_logger(__name__)

EXACT = "exact"
FLOAT = "float"

# Degree reported for the zero polynomial.
ZERO_DEGREE = -1


# ==================== SCALARS ====================


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot build an exact rational from {type(value).__name__}")


@dataclass(frozen=True)
class ExactComplex:
    """Complex number with rational real and imaginary parts"""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _as_fraction(self.re))
        object.__setattr__(self, "im", _as_fraction(self.im))

    @classmethod
    def coerce(cls, value) -> "Scalar":
        """Lift int/Fraction to ExactComplex; float and complex stay float-kind"""
        if isinstance(value, ExactComplex):
            return value
        if isinstance(value, (int, np.integer, Fraction)):
            return cls(_as_fraction(value))
        if isinstance(value, (float, complex, np.floating, np.complexfloating)):
            return complex(value)
        raise TypeError(f"unsupported scalar type {type(value).__name__}")

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def abs_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __neg__(self) -> "ExactComplex":
        return ExactComplex(-self.re, -self.im)

    def __add__(self, other):
        other = ExactComplex.coerce(other)
        if isinstance(other, complex):
            return complex(self) + other
        return ExactComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-ExactComplex.coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = ExactComplex.coerce(other)
        if isinstance(other, complex):
            return complex(self) * other
        return ExactComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = ExactComplex.coerce(other)
        if isinstance(other, complex):
            return complex(self) / other
        denom = other.abs_sq()
        if denom == 0:
            raise ZeroDivisionError("division by exact zero")
        num = self * other.conjugate()
        return ExactComplex(num.re / denom, num.im / denom)

    def __rtruediv__(self, other):
        other = ExactComplex.coerce(other)
        if isinstance(other, complex):
            return other / complex(self)
        return other / self

    def __pow__(self, exponent: int) -> "ExactComplex":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = ExactComplex(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, ExactComplex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        return f"ExactComplex({self.re}, {self.im})"

    def to_literal(self) -> str:
        """Literal that parses back to the same value"""
        if self.im == 0:
            return _fraction_literal(self.re)
        if self.re == 0:
            return f"{_fraction_literal(self.im)}*i"
        return f"({_fraction_literal(self.re)}+{_fraction_literal(self.im)}*i)"


Scalar = Union[ExactComplex, complex]


def _fraction_literal(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def scalar_kind(value: Scalar) -> str:
    return EXACT if isinstance(value, ExactComplex) else FLOAT


def scalar_is_zero(value: Scalar) -> bool:
    if isinstance(value, ExactComplex):
        return value.is_zero()
    return value == 0


def scalar_conj(value: Scalar) -> Scalar:
    return value.conjugate()


def scalars_close(a: Scalar, b: Scalar, rtol: Optional[float] = None) -> bool:
    """Exact equality for two exact scalars, relative tolerance otherwise"""
    if isinstance(a, ExactComplex) and isinstance(b, ExactComplex):
        return a == b
    rtol = config.FLOAT_COEFF_TOL if rtol is None else rtol
    a, b = complex(a), complex(b)
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def _scalar_literal(value: Scalar) -> str:
    if isinstance(value, ExactComplex):
        return value.to_literal()
    return f"({value.real!r}+{value.imag!r}*i)"


# ==================== MULTI-INDICES ====================


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Exponent vector alpha of the monomial z^alpha"""

    exponents: Tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if not exps:
            raise ValueError("a multi-index needs at least one coordinate")
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, j: int) -> "MultiIndex":
        """epsilon_j, with 1-based coordinate j"""
        check_coordinate(j, n)
        return cls(tuple(1 if k == j - 1 else 0 for k in range(n)))

    @property
    def n(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def factorial(self) -> int:
        return prod(factorial(e) for e in self.exponents)

    def __getitem__(self, j: int) -> int:
        """1-based access, alpha[j] = alpha_j"""
        check_coordinate(j, self.n)
        return self.exponents[j - 1]

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        _check_same_n(self.n, other.n)
        return MultiIndex(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        _check_same_n(self.n, other.n)
        return MultiIndex(tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def dominates(self, other: "MultiIndex") -> bool:
        return all(a >= b for a, b in zip(self.exponents, other.exponents))

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Graded-lex key: degree first, then larger exponents of earlier coordinates"""
        return (self.degree, tuple(-e for e in self.exponents))

    def monomial_literal(self) -> str:
        parts = []
        for k, e in enumerate(self.exponents, start=1):
            if e == 1:
                parts.append(f"z{k}")
            elif e > 1:
                parts.append(f"z{k}^{e}")
        return "*".join(parts)

    def __repr__(self) -> str:
        return f"MultiIndex{self.exponents}"


def check_coordinate(j: int, n: int) -> None:
    if not isinstance(j, (int, np.integer)) or not 1 <= j <= n:
        raise InvalidCoordinateError(f"coordinate {j} outside 1..{n}")


def _check_same_n(n1: int, n2: int) -> None:
    if n1 != n2:
        raise DimensionMismatchError(f"dimension mismatch: {n1} vs {n2}")


def _compositions(total: int, parts: int) -> Iterable[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=256)
def _enumerate_cached(n: int, D: int) -> Tuple[MultiIndex, ...]:
    return tuple(
        MultiIndex(exps) for d in range(D + 1) for exps in _compositions(d, n)
    )


def multiindex_enumerate(n: int, D: int) -> List[MultiIndex]:
    """
    All multi-indices with |alpha| <= D in graded-lexicographic order

    Args:
        n (int): Number of variables, n >= 1
        D (int): Maximal total degree, D >= 0

    Returns:
        List of binomial(n+D, n) multi-indices
    """
    if n < 1 or D < 0:
        raise ValueError(f"need n >= 1 and D >= 0, got n={n}, D={D}")
    return list(_enumerate_cached(n, D))


def homogeneous_dimension(n: int, d: int) -> int:
    """Number of monomials of exact degree d in n variables"""
    return comb(n + d - 1, n - 1)


# ==================== HOLOMORPHIC POLYNOMIALS ====================


class HoloPoly:
    """Holomorphic polynomial sum c_alpha z^alpha in n variables"""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Optional[Dict[MultiIndex, Scalar]] = None):
        if n < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        self.n = n
        cleaned: Dict[MultiIndex, Scalar] = {}
        for alpha, coeff in (terms or {}).items():
            if not isinstance(alpha, MultiIndex):
                alpha = MultiIndex(alpha)
            _check_same_n(alpha.n, n)
            coeff = ExactComplex.coerce(coeff)
            if not scalar_is_zero(coeff):
                cleaned[alpha] = coeff
        self.terms = cleaned

    # ----- constructors -----

    @classmethod
    def zero(cls, n: int) -> "HoloPoly":
        return cls(n)

    @classmethod
    def constant(cls, n: int, value=1) -> "HoloPoly":
        return cls(n, {MultiIndex.zero(n): value})

    @classmethod
    def monomial(cls, alpha, coeff=1) -> "HoloPoly":
        alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(alpha)
        return cls(alpha.n, {alpha: coeff})

    @classmethod
    def coordinate(cls, n: int, j: int) -> "HoloPoly":
        return cls(n, {MultiIndex.unit(n, j): 1})

    # ----- structure -----

    @property
    def degree(self) -> int:
        if not self.terms:
            return ZERO_DEGREE
        return max(alpha.degree for alpha in self.terms)

    @property
    def order(self) -> int:
        """Order of vanishing at the origin (smallest |alpha| present)"""
        if not self.terms:
            return ZERO_DEGREE
        return min(alpha.degree for alpha in self.terms)

    @property
    def kind(self) -> str:
        return FLOAT if any(isinstance(c, complex) for c in self.terms.values()) else EXACT

    def is_zero(self) -> bool:
        return not self.terms

    def is_homogeneous(self) -> bool:
        return len({alpha.degree for alpha in self.terms}) <= 1

    def coefficient(self, alpha) -> Scalar:
        alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(alpha)
        return self.terms.get(alpha, ExactComplex(0))

    def sorted_terms(self) -> List[Tuple[MultiIndex, Scalar]]:
        return sorted(self.terms.items(), key=lambda item: item[0].sort_key())

    def homogeneous_parts(self) -> Dict[int, "HoloPoly"]:
        parts: Dict[int, Dict[MultiIndex, Scalar]] = {}
        for alpha, c in self.terms.items():
            parts.setdefault(alpha.degree, {})[alpha] = c
        return {d: HoloPoly(self.n, t) for d, t in sorted(parts.items())}

    def to_float(self) -> "HoloPoly":
        return HoloPoly(self.n, {a: complex(c) for a, c in self.terms.items()})

    def conjugate(self) -> "MixedPoly":
        return MixedPoly.from_holo(self).conjugate()

    # ----- arithmetic -----

    def _combine(self, other: "HoloPoly", sign: int) -> "HoloPoly":
        _check_same_n(self.n, other.n)
        out = dict(self.terms)
        for alpha, c in other.terms.items():
            out[alpha] = out.get(alpha, ExactComplex(0)) + (c if sign > 0 else -c)
        return HoloPoly(self.n, out)

    def __add__(self, other):
        if isinstance(other, HoloPoly):
            return self._combine(other, 1)
        if isinstance(other, MixedPoly):
            return MixedPoly.from_holo(self) + other
        return self._combine(HoloPoly.constant(self.n, other), 1)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, HoloPoly):
            return self._combine(other, -1)
        if isinstance(other, MixedPoly):
            return MixedPoly.from_holo(self) - other
        return self._combine(HoloPoly.constant(self.n, other), -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self) -> "HoloPoly":
        return HoloPoly(self.n, {a: -c for a, c in self.terms.items()})

    def scale(self, factor) -> "HoloPoly":
        factor = ExactComplex.coerce(factor)
        return HoloPoly(self.n, {a: c * factor for a, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, HoloPoly):
            return poly_mul(self, other)
        if isinstance(other, MixedPoly):
            return MixedPoly.from_holo(self) * other
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, HoloPoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    __hash__ = None

    def almost_equal(self, other: "HoloPoly", rtol: Optional[float] = None) -> bool:
        _check_same_n(self.n, other.n)
        keys = set(self.terms) | set(other.terms)
        return all(
            scalars_close(self.coefficient(a), other.coefficient(a), rtol) for a in keys
        )

    # ----- evaluation -----

    def evaluate(self, points) -> Union[complex, np.ndarray]:
        """
        Evaluate at one point (shape (n,)) or many points (shape (k, n))

        Returns:
            complex for a single point, complex array of shape (k,) otherwise
        """
        pts = np.asarray(points, dtype=complex)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.n:
            raise DimensionMismatchError(f"points have {pts.shape[1]} coordinates, need {self.n}")
        values = np.zeros(pts.shape[0], dtype=complex)
        for alpha, c in self.terms.items():
            values += complex(c) * np.prod(pts ** np.array(alpha.exponents), axis=1)
        return complex(values[0]) if single else values

    # ----- text -----

    def to_literal(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for alpha, c in self.sorted_terms():
            mono = alpha.monomial_literal()
            if not mono:
                pieces.append(_scalar_literal(c))
            elif c == 1:
                pieces.append(mono)
            else:
                pieces.append(f"{_scalar_literal(c)}*{mono}")
        return " + ".join(pieces)

    def __str__(self) -> str:
        return self.to_literal()

    def __repr__(self) -> str:
        return f"HoloPoly(n={self.n}, {self.to_literal()!r})"


# ==================== MIXED POLYNOMIALS ====================


class MixedPoly:
    """Polynomial sum c_{alpha,beta} z^alpha conj(z)^beta in n variables"""

    __slots__ = ("n", "terms")

    def __init__(
        self, n: int, terms: Optional[Dict[Tuple[MultiIndex, MultiIndex], Scalar]] = None
    ):
        if n < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        self.n = n
        cleaned: Dict[Tuple[MultiIndex, MultiIndex], Scalar] = {}
        for (alpha, beta), coeff in (terms or {}).items():
            alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(alpha)
            beta = beta if isinstance(beta, MultiIndex) else MultiIndex(beta)
            _check_same_n(alpha.n, n)
            _check_same_n(beta.n, n)
            coeff = ExactComplex.coerce(coeff)
            if not scalar_is_zero(coeff):
                cleaned[(alpha, beta)] = coeff
        self.terms = cleaned

    @classmethod
    def from_holo(cls, p: HoloPoly) -> "MixedPoly":
        zero = MultiIndex.zero(p.n)
        return cls(p.n, {(alpha, zero): c for alpha, c in p.terms.items()})

    @classmethod
    def conj_coordinate(cls, n: int, j: int) -> "MixedPoly":
        """The function conj(z_j)"""
        return cls(n, {(MultiIndex.zero(n), MultiIndex.unit(n, j)): 1})

    @classmethod
    def norm_sq(cls, n: int) -> "MixedPoly":
        """|z|^2 = sum z_i conj(z_i)"""
        return cls(n, {(MultiIndex.unit(n, i), MultiIndex.unit(n, i)): 1 for i in range(1, n + 1)})

    @property
    def kind(self) -> str:
        return FLOAT if any(isinstance(c, complex) for c in self.terms.values()) else EXACT

    def is_zero(self) -> bool:
        return not self.terms

    def is_holomorphic(self) -> bool:
        return all(beta.degree == 0 for _, beta in self.terms)

    def as_holo(self) -> HoloPoly:
        if not self.is_holomorphic():
            raise ValueError("polynomial depends on conj(z)")
        return HoloPoly(self.n, {alpha: c for (alpha, _), c in self.terms.items()})

    def antiholomorphic_degree(self) -> int:
        if not self.terms:
            return ZERO_DEGREE
        return max(beta.degree for _, beta in self.terms)

    def coefficient(self, alpha, beta) -> Scalar:
        alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(alpha)
        beta = beta if isinstance(beta, MultiIndex) else MultiIndex(beta)
        return self.terms.get((alpha, beta), ExactComplex(0))

    def conjugate(self) -> "MixedPoly":
        return MixedPoly(
            self.n, {(beta, alpha): scalar_conj(c) for (alpha, beta), c in self.terms.items()}
        )

    def abs_sq(self) -> "MixedPoly":
        """|h|^2 = h * conj(h)"""
        return self * self.conjugate()

    def _lift(self, other) -> "MixedPoly":
        if isinstance(other, MixedPoly):
            _check_same_n(self.n, other.n)
            return other
        if isinstance(other, HoloPoly):
            _check_same_n(self.n, other.n)
            return MixedPoly.from_holo(other)
        return MixedPoly.from_holo(HoloPoly.constant(self.n, other))

    def __add__(self, other) -> "MixedPoly":
        other = self._lift(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, ExactComplex(0)) + c
        return MixedPoly(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> "MixedPoly":
        return MixedPoly(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "MixedPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "MixedPoly":
        return self._lift(other) - self

    def __mul__(self, other) -> "MixedPoly":
        other = self._lift(other)
        out: Dict[Tuple[MultiIndex, MultiIndex], Scalar] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (a1 + a2, b1 + b2)
                out[key] = out.get(key, ExactComplex(0)) + c1 * c2
        return MixedPoly(self.n, out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, HoloPoly):
            other = MixedPoly.from_holo(other)
        if not isinstance(other, MixedPoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    __hash__ = None

    def evaluate(self, points) -> Union[complex, np.ndarray]:
        pts = np.asarray(points, dtype=complex)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.n:
            raise DimensionMismatchError(f"points have {pts.shape[1]} coordinates, need {self.n}")
        conj_pts = np.conj(pts)
        values = np.zeros(pts.shape[0], dtype=complex)
        for (alpha, beta), c in self.terms.items():
            values += (
                complex(c)
                * np.prod(pts ** np.array(alpha.exponents), axis=1)
                * np.prod(conj_pts ** np.array(beta.exponents), axis=1)
            )
        return complex(values[0]) if single else values

    def __repr__(self) -> str:
        body = " + ".join(
            f"{_scalar_literal(c)}*z^{a.exponents}*conj(z)^{b.exponents}"
            for (a, b), c in sorted(self.terms.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key()))
        )
        return f"MixedPoly(n={self.n}, {body or '0'})"


# ==================== OPERATIONS ====================


def poly_mul(p: HoloPoly, q: HoloPoly) -> HoloPoly:
    """Coefficient convolution of two holomorphic polynomials"""
    _check_same_n(p.n, q.n)
    out: Dict[MultiIndex, Scalar] = {}
    for a1, c1 in p.terms.items():
        for a2, c2 in q.terms.items():
            key = a1 + a2
            out[key] = out.get(key, ExactComplex(0)) + c1 * c2
    return HoloPoly(p.n, out)


def partial_derivative(p: HoloPoly, j: int) -> HoloPoly:
    """d/dz_j, coordinate j is 1-based"""
    check_coordinate(j, p.n)
    unit = MultiIndex.unit(p.n, j)
    out = {}
    for alpha, c in p.terms.items():
        if alpha[j] > 0:
            out[alpha - unit] = c * alpha[j]
    return HoloPoly(p.n, out)


def radial_derivative(p: HoloPoly) -> HoloPoly:
    """R p = sum z_i d_i p, which scales z^alpha by |alpha|"""
    return HoloPoly(p.n, {alpha: c * alpha.degree for alpha, c in p.terms.items()})


def radial_power(p: HoloPoly, l: int) -> HoloPoly:
    """R^l p"""
    if l < 0:
        raise ValueError(f"radial power order must be >= 0, got {l}")
    return HoloPoly(p.n, {alpha: c * alpha.degree ** l for alpha, c in p.terms.items()})


def tangential_derivative(p: HoloPoly, j: int, i: int) -> MixedPoly:
    """L_{j,i} p = conj(z_i) d_j p - conj(z_j) d_i p"""
    check_coordinate(j, p.n)
    check_coordinate(i, p.n)
    if i == j:
        raise InvalidCoordinateError(f"tangential derivative needs i != j, got i = j = {i}")
    return (
        MixedPoly.conj_coordinate(p.n, i) * partial_derivative(p, j)
        - MixedPoly.conj_coordinate(p.n, j) * partial_derivative(p, i)
    )


@lru_cache(maxsize=64)
def _radial_power_table(l: int) -> Tuple[int, ...]:
    if l == 1:
        return (1,)
    prev = _radial_power_table(l - 1)
    # a_0 = a_l = 0 at order l - 1
    padded = (0,) + prev + (0,)
    return tuple(j * padded[j] + padded[j - 1] for j in range(1, l + 1))


def radial_power_coeffs(l: int) -> List[int]:
    """
    Coefficients a_j, j = 1..l, with R^l f = sum a_j z^j f^(j) in one variable

    Built from a_j^(l+1) = j a_j^(l) + a_{j-1}^(l); these are Stirling numbers of the
    second kind.
    """
    if l < 1:
        raise ValueError(f"order must be >= 1, got {l}")
    return list(_radial_power_table(l))


def dilate(p: HoloPoly, r) -> HoloPoly:
    """p_r(z) = p(r z); exact when r is an int or Fraction"""
    r = ExactComplex.coerce(r)
    return HoloPoly(p.n, {alpha: c * r ** alpha.degree for alpha, c in p.terms.items()})


# ==================== LITERAL PARSER ====================

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"|(?P<var>z(?P<index>\d+))"
    r"|(?P<imag>i)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match or match.end() == pos:
            raise PolynomialParseError("unexpected character", text, pos)
        if match.group("var"):
            tokens.append(("var", match.group("index"), match.start("var")))
        elif match.group("number"):
            tokens.append(("number", match.group("number"), match.start("number")))
        elif match.group("imag"):
            tokens.append(("imag", "i", match.start("imag")))
        else:
            tokens.append(("op", match.group("op"), match.start("op")))
        pos = match.end()
    return tokens


class _Parser:
    """Recursive descent over poly := term (('+'|'-') term)*"""

    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.pos = 0

    def _peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _error(self, message: str) -> PolynomialParseError:
        tok = self._peek()
        return PolynomialParseError(message, self.text, tok[2] if tok else len(self.text))

    def _take_op(self, symbol: str) -> bool:
        tok = self._peek()
        if tok and tok[0] == "op" and tok[1] == symbol:
            self.pos += 1
            return True
        return False

    def parse(self) -> HoloPoly:
        if not self.tokens:
            raise PolynomialParseError("empty polynomial literal", self.text, 0)
        result = self._poly()
        if self._peek() is not None:
            raise self._error("trailing input")
        return result

    def _poly(self) -> HoloPoly:
        result = self._term()
        while True:
            if self._take_op("+"):
                result = result + self._term()
            elif self._take_op("-"):
                result = result - self._term()
            else:
                return result

    def _term(self) -> HoloPoly:
        result = self._factor()
        while True:
            if self._take_op("*"):
                result = result * self._factor()
            elif self._take_op("/"):
                divisor = self._factor()
                if divisor.degree > 0 or divisor.is_zero():
                    raise self._error("division only by a nonzero constant")
                result = result.scale(ExactComplex(1) / divisor.coefficient(MultiIndex.zero(self.n)))
            else:
                return result

    def _factor(self) -> HoloPoly:
        if self._take_op("-"):
            return -self._factor()
        if self._take_op("+"):
            return self._factor()
        base = self._atom()
        if self._take_op("^"):
            tok = self._peek()
            if not tok or tok[0] != "number" or not tok[1].isdigit():
                raise self._error("exponent must be a non-negative integer")
            self.pos += 1
            power = HoloPoly.constant(self.n, 1)
            for _ in range(int(tok[1])):
                power = power * base
            return power
        return base

    def _atom(self) -> HoloPoly:
        tok = self._peek()
        if tok is None:
            raise self._error("unexpected end of input")
        kind, value, _ = tok
        if kind == "number":
            self.pos += 1
            scalar = ExactComplex(Fraction(value))
            nxt = self._peek()
            if nxt and nxt[0] == "imag":
                self.pos += 1
                scalar = scalar * ExactComplex(0, 1)
            return HoloPoly.constant(self.n, scalar)
        if kind == "imag":
            self.pos += 1
            return HoloPoly.constant(self.n, ExactComplex(0, 1))
        if kind == "var":
            self.pos += 1
            j = int(value)
            if not 1 <= j <= self.n:
                raise PolynomialParseError(f"variable z{j} outside z1..z{self.n}", self.text, tok[2])
            return HoloPoly.coordinate(self.n, j)
        if kind == "op" and value == "(":
            self.pos += 1
            inner = self._poly()
            if not self._take_op(")"):
                raise self._error("missing closing parenthesis")
            return inner
        raise self._error(f"unexpected token {value!r}")


def parse_polynomial(text: str, n: int) -> HoloPoly:
    """
    Parse a literal such as "2*z1^2*z2 - (1+3i)*z3" into an exact HoloPoly

    Args:
        text (str): Polynomial literal
        n (int): Ambient dimension; variables must be among z1..zn

    Returns:
        HoloPoly with exact coefficients
    """
    return _Parser(text, n).parse()
