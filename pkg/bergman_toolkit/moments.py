"""
Bergman Toolkit - Moments Module
Exact weighted integrals of polynomial expressions over the unit ball and spherical shells
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, pi
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import structlog

from bergman_toolkit.polycore import (
    EXACT,
    ExactComplex,
    HoloPoly,
    MixedPoly,
    MultiIndex,
    scalar_conj,
)

logger = structlog.get_logger(__name__)

Number = Union[Fraction, float]


# ==================== VALUE TYPES ====================


@dataclass(frozen=True)
class PiMultiple:
    """Exact value coeff * pi^pi_power; coeff is a float only for float-kind inputs"""

    coeff: Number
    pi_power: int = 0

    @classmethod
    def zero(cls, pi_power: int = 0) -> "PiMultiple":
        return cls(Fraction(0), pi_power)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.coeff, Fraction)

    def _aligned(self, other: "PiMultiple") -> "PiMultiple":
        if self.pi_power != other.pi_power and self.coeff != 0 and other.coeff != 0:
            raise ValueError(f"cannot combine pi^{self.pi_power} with pi^{other.pi_power}")
        return other

    def __add__(self, other: "PiMultiple") -> "PiMultiple":
        self._aligned(other)
        power = self.pi_power if self.coeff != 0 else other.pi_power
        return PiMultiple(self.coeff + other.coeff, power)

    def __sub__(self, other: "PiMultiple") -> "PiMultiple":
        return self + PiMultiple(-other.coeff, other.pi_power)

    def __mul__(self, other) -> "PiMultiple":
        if isinstance(other, PiMultiple):
            return PiMultiple(self.coeff * other.coeff, self.pi_power + other.pi_power)
        return PiMultiple(self.coeff * other, self.pi_power)

    __rmul__ = __mul__

    def ratio(self, other: "PiMultiple") -> Number:
        """self / other, which must carry the same power of pi"""
        if other.coeff == 0:
            raise ZeroDivisionError("ratio against a zero integral")
        if self.coeff == 0:
            return Fraction(0) if self.is_exact and other.is_exact else 0.0
        if self.pi_power != other.pi_power:
            return float(self) / float(other)
        return self.coeff / other.coeff

    def _cmp_key(self, other: "PiMultiple") -> Tuple[Number, Number]:
        if self.pi_power == other.pi_power or self.coeff == 0 or other.coeff == 0:
            return self.coeff, other.coeff
        return float(self), float(other)

    def __le__(self, other: "PiMultiple") -> bool:
        a, b = self._cmp_key(other)
        return a <= b

    def __lt__(self, other: "PiMultiple") -> bool:
        a, b = self._cmp_key(other)
        return a < b

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiMultiple):
            return NotImplemented
        if self.coeff == 0 and other.coeff == 0:
            return True
        return self.pi_power == other.pi_power and self.coeff == other.coeff

    def __hash__(self) -> int:
        return hash((self.coeff, self.pi_power if self.coeff != 0 else 0))

    def __float__(self) -> float:
        return float(self.coeff) * pi ** self.pi_power

    def to_json(self) -> Dict:
        if self.is_exact:
            rational = f"{self.coeff.numerator}/{self.coeff.denominator}"
        else:
            rational = None
        return {"rational": rational, "pi_power": self.pi_power, "float": float(self)}

    def __repr__(self) -> str:
        return f"PiMultiple({self.coeff}, pi^{self.pi_power})"


@dataclass(frozen=True)
class WeightSpec:
    """Weight (1-|z|^2)^t, either against raw dm or normalized as c_t dv"""

    t: int = 0
    normalization: Literal["raw", "normalized"] = "raw"

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"weight exponent must be >= 0, got {self.t}")

    def c_t(self, n: int) -> Fraction:
        return weight_constant(n, self.t)


@dataclass(frozen=True)
class Region:
    """Full ball, or the shell Omega_r = {r < |z| < 1}"""

    kind: Literal["ball", "shell"] = "ball"
    r: Fraction = Fraction(0)

    def __post_init__(self):
        r = Fraction(self.r) if not isinstance(self.r, Fraction) else self.r
        object.__setattr__(self, "r", r)
        if self.kind == "shell" and not 0 < r < 1:
            raise ValueError(f"shell radius must lie strictly in (0, 1), got {r}")
        if self.kind == "ball" and r != 0:
            raise ValueError("the full ball carries no radius")

    @classmethod
    def ball(cls) -> "Region":
        return cls("ball", Fraction(0))

    @classmethod
    def shell(cls, r) -> "Region":
        return cls("shell", Fraction(r) if not isinstance(r, float) else Fraction(str(r)))

    @property
    def inner_radius_sq(self) -> Fraction:
        return self.r * self.r

    def contains(self, radii: np.ndarray) -> np.ndarray:
        radii = np.asarray(radii, dtype=float)
        return (radii < 1.0) & (radii > float(self.r))


FULL_BALL = Region.ball()


# ==================== CLOSED FORMS ====================


def weight_constant(n: int, t: int) -> Fraction:
    """c_t = (n+t)! / (n! t!)"""
    return Fraction(comb(n + t, t))


def ball_volume(n: int) -> PiMultiple:
    """Vol(B_n) = pi^n / n!"""
    return PiMultiple(Fraction(1, factorial(n)), n)


@lru_cache(maxsize=4096)
def monomial_norm_sq(alpha: MultiIndex, t: int, n: Optional[int] = None) -> Fraction:
    """
    ||z^alpha||_t^2 = alpha! (n+t)! / (n+t+|alpha|)! in the normalized weighted norm

    Args:
        alpha (MultiIndex): Exponent vector
        t (int): Weight exponent, t >= 0
        n (int): Dimension (defaults to alpha.n)
    """
    n = alpha.n if n is None else n
    if t < 0:
        raise ValueError(f"weight exponent must be >= 0, got {t}")
    return Fraction(alpha.factorial * factorial(n + t), factorial(n + t + alpha.degree))


def holo_norm_sq(f: HoloPoly, t: int = 0) -> Number:
    """||f||_t^2 via orthogonality of monomials"""
    total = Fraction(0) if f.kind == EXACT else 0.0
    for alpha, c in f.terms.items():
        weight = monomial_norm_sq(alpha, t, f.n)
        if isinstance(c, ExactComplex):
            total += c.abs_sq() * weight
        else:
            total += abs(c) ** 2 * float(weight)
    return total


@lru_cache(maxsize=4096)
def sphere_moment(alpha: MultiIndex) -> Fraction:
    """Integral of |xi^alpha|^2 against normalized surface measure on the sphere"""
    n = alpha.n
    return Fraction(factorial(n - 1) * alpha.factorial, factorial(n - 1 + alpha.degree))


@lru_cache(maxsize=8192)
def _radial_tail(a: int, t: int, s: Fraction) -> Fraction:
    """Integral over [s, 1] of u^a (1-u)^t du"""
    total = Fraction(0)
    for k in range(t + 1):
        term = Fraction(comb(t, k), a + k + 1) * (1 - s ** (a + k + 1))
        total += -term if k % 2 else term
    return total


@lru_cache(maxsize=16384)
def moment(alpha: MultiIndex, beta: MultiIndex, t: int = 0, region: Region = FULL_BALL) -> PiMultiple:
    """
    Integral of z^alpha conj(z)^beta (1-|z|^2)^t dm over the region

    Angular orthogonality kills every alpha != beta. For alpha = beta the polar
    factorization gives 2n Vol(B_n) * (1/2) int u^{|alpha|+n-1} (1-u)^t du * sphere moment,
    which is pi^n alpha! / (n-1+|alpha|)! times the radial integral.
    """
    if alpha.n != beta.n:
        raise ValueError(f"dimension mismatch: {alpha.n} vs {beta.n}")
    n = alpha.n
    if alpha != beta:
        return PiMultiple.zero(n)
    radial = _radial_tail(alpha.degree + n - 1, t, region.inner_radius_sq)
    coeff = radial * Fraction(alpha.factorial, factorial(n - 1 + alpha.degree))
    return PiMultiple(coeff, n)


def _as_mixed(h: Union[HoloPoly, MixedPoly]) -> MixedPoly:
    return MixedPoly.from_holo(h) if isinstance(h, HoloPoly) else h


def weighted_L2_sq(
    h: Union[HoloPoly, MixedPoly],
    t: Union[int, WeightSpec] = 0,
    region: Region = FULL_BALL,
    normalized: bool = False,
) -> PiMultiple:
    """
    Integral of |h|^2 (1-|z|^2)^t over the region, expanded bilinearly through moment

    Args:
        h: Holomorphic or mixed polynomial
        t: Weight exponent, or a WeightSpec carrying its own normalization
        region (Region): Full ball or shell
        normalized (bool): Multiply by c_t / Vol(B_n), giving ||h||_t^2 for holomorphic h

    Returns:
        PiMultiple (pi power 0 when normalized)
    """
    weight = t if isinstance(t, WeightSpec) else WeightSpec(t, "normalized" if normalized else "raw")
    t = weight.t
    mixed = _as_mixed(h)
    n = mixed.n
    exact = mixed.kind == EXACT

    # z^{a1} conj(z)^{b1} pairs with conj of z^{a2} conj(z)^{b2} only when a1-b1 == a2-b2.
    buckets: Dict[Tuple[int, ...], List] = {}
    for (alpha, beta), c in mixed.terms.items():
        charge = tuple(a - b for a, b in zip(alpha.exponents, beta.exponents))
        buckets.setdefault(charge, []).append((alpha, beta, c))

    total = ExactComplex(0) if exact else 0j
    for terms in buckets.values():
        for a1, b1, c1 in terms:
            for a2, b2, c2 in terms:
                m = moment(a1 + b2, b1 + a2, t, region)
                if m.coeff == 0:
                    continue
                total = total + c1 * scalar_conj(c2) * m.coeff

    if exact:
        if total.im != 0:
            raise ArithmeticError("weighted L2 integral came out non-real")
        value = PiMultiple(total.re, n)
    else:
        value = PiMultiple(float(complex(total).real), n)

    if weight.normalization == "normalized":
        scale = weight.c_t(n) * factorial(n)
        value = PiMultiple(value.coeff * (scale if exact else float(scale)), 0)
    return value


def integrate(g: Union[HoloPoly, MixedPoly], t: int = 0, region: Region = FULL_BALL) -> PiMultiple:
    """Integral of g (1-|z|^2)^t dm, term by term through moment"""
    mixed = _as_mixed(g)
    total = ExactComplex(0) if mixed.kind == EXACT else 0j
    for (alpha, beta), c in mixed.terms.items():
        m = moment(alpha, beta, t, region)
        if m.coeff != 0:
            total = total + c * m.coeff
    if isinstance(total, ExactComplex):
        if total.im != 0:
            raise ArithmeticError("integral of a real integrand came out non-real")
        return PiMultiple(total.re, mixed.n)
    return PiMultiple(float(complex(total).real), mixed.n)


# ==================== SLICE DECOMPOSITION ====================


@lru_cache(maxsize=4096)
def _disk_weighted_moment(a: int, n: int, t: int, s: Fraction) -> Fraction:
    """
    Coefficient of pi in the disk integral of |z|^{2a} |z^{n-1}|^2 (1-|z|^2)^t dm
    over s < |z|^2 < 1
    """
    # polar: 2 pi int rho^{2(a+n-1)+1} (1-rho^2)^t drho = pi int_s^1 u^{a+n-1} (1-u)^t du
    total = Fraction(0)
    for k in range(t + 1):
        power = a + n + k
        piece = Fraction(comb(t, k)) * (1 - s ** power) / power
        total += -piece if k % 2 else piece
    return total


@lru_cache(maxsize=4096)
def _sphere_surface_moment(alpha: MultiIndex) -> Fraction:
    """Coefficient of pi^n in the integral of |xi^alpha|^2 against surface measure dm(xi)"""
    n = alpha.n
    surface_area = Fraction(2, factorial(n - 1))
    return surface_area * sphere_moment(alpha)


def slice_integral(g: Union[HoloPoly, MixedPoly], t: int = 0, region: Region = FULL_BALL) -> PiMultiple:
    """
    Integral of g (1-|z|^2)^t dm over the region computed through slices g_xi(z) = g(xi z)

    int_{B_n} g dm = (1/2pi) int_{sphere} dm(xi) int_D g_xi(z) |z^{n-1}|^2 dm(z)

    Args:
        g: Polynomial integrand (e.g. h.abs_sq() for |h|^2)
        t (int): Weight exponent
        region (Region): Ball or shell; the shell restricts the disk integral to an annulus

    Returns:
        PiMultiple with pi power n
    """
    mixed = _as_mixed(g)
    n = mixed.n
    s = region.inner_radius_sq
    total = ExactComplex(0) if mixed.kind == EXACT else 0j
    for (alpha, beta), c in mixed.terms.items():
        # g_xi(z) = c xi^alpha conj(xi)^beta z^|alpha| conj(z)^|beta|
        if alpha != beta:
            # disk integral vanishes unless |alpha| = |beta|, sphere integral unless alpha = beta
            continue
        disk = _disk_weighted_moment(alpha.degree, n, t, s)
        sphere = _sphere_surface_moment(alpha)
        # (1/2pi) * (sphere pi^n) * (disk pi) = pi^n * sphere * disk / 2
        total = total + c * (sphere * disk / 2)
    if isinstance(total, ExactComplex):
        if total.im != 0:
            raise ArithmeticError("slice integral of a real integrand came out non-real")
        return PiMultiple(total.re, n)
    return PiMultiple(float(complex(total).real), n)


# ==================== MONTE CARLO ====================


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: complex
    stderr: float
    samples: int

    def agrees_with(self, exact: Union[PiMultiple, float, complex], sigmas: float = 3.0) -> bool:
        target = float(exact) if isinstance(exact, PiMultiple) else complex(exact)
        return abs(self.value - target) <= sigmas * self.stderr

    def to_json(self) -> Dict:
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "stderr": self.stderr,
            "samples": self.samples,
        }


def sample_ball(n: int, count: int, rng: np.random.Generator, batch: int = 65536) -> np.ndarray:
    """Uniform points in B_n by rejection from the cube [-1, 1]^{2n}"""
    accepted: List[np.ndarray] = []
    have = 0
    while have < count:
        cube = rng.uniform(-1.0, 1.0, size=(batch, 2 * n))
        inside = cube[np.sum(cube ** 2, axis=1) < 1.0]
        accepted.append(inside)
        have += len(inside)
    real = np.concatenate(accepted)[:count]
    return real[:, :n] + 1j * real[:, n:]


def monte_carlo_integral(
    h: Union[HoloPoly, MixedPoly],
    t: int = 0,
    region: Region = FULL_BALL,
    samples: int = 100_000,
    seed: int = 0,
) -> MonteCarloEstimate:
    """
    Unbiased estimate of the integral of h (1-|z|^2)^t dm over the region

    Args:
        h: Integrand (not squared)
        t (int): Weight exponent
        region (Region): Ball or shell
        samples (int): Accepted points in the ball, >= 1
        seed (int): Seed for numpy's default_rng
    """
    if samples < 1:
        raise ValueError(f"need at least one sample, got {samples}")
    rng = np.random.default_rng(seed)
    points = sample_ball(h.n, samples, rng)
    radii_sq = np.sum(np.abs(points) ** 2, axis=1)
    values = h.evaluate(points) * (1.0 - radii_sq) ** t
    values = np.where(region.contains(np.sqrt(radii_sq)), values, 0.0)

    volume = float(ball_volume(h.n))
    estimate = volume * complex(np.mean(values))
    if samples > 1:
        spread = np.sqrt(np.var(values.real, ddof=1) + np.var(values.imag, ddof=1))
        stderr = volume * float(spread) / np.sqrt(samples)
    else:
        stderr = float("inf")
    logger.debug("🎲 Monte Carlo integral", samples=samples, estimate=estimate, stderr=stderr)
    return MonteCarloEstimate(estimate, stderr, samples)
