"""The Marčenko–Pastur law: support, density, moments and Stieltjes transform.

F_y is the limiting spectral distribution of the self-normalized sample
covariance matrix when p/n -> y. For y > 1 it carries an atom of mass
1 - 1/y at zero. The companion law F̲_y = (1 - y)δ₀ + y F_y has the
Stieltjes transform m̲(z) used by the central limit theorem module.
"""
# Python imports
import cmath
import dataclasses
import logging
import math

# 3rd party imports
import numpy as np
from scipy import integrate, optimize

# Project imports
from sncov.errors import DomainError, NumericalError, UnsupportedParametersError

logger = logging.getLogger(__name__)

# Largest moment order accepted by mp_moment. Beyond it the moments overflow
# the precision the tests care about.
MAX_MOMENT = 50

_QUAD_OPTIONS = {"epsabs": 1e-14, "epsrel": 1e-12, "limit": 200}


def _check_y(y):
    if not (isinstance(y, (int, float, np.floating, np.integer)) and math.isfinite(y) and y > 0):
        raise DomainError("y must be a finite positive number, got %r" % (y,))
    return float(y)


def support_edges(y):
    """Returns (a₋, a₊) = ((1 - √y)², (1 + √y)²)."""
    y = _check_y(y)
    root = math.sqrt(y)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


@dataclasses.dataclass(frozen=True)
class MPLaw:
    """F_y together with its support edges and the mass of its atom at zero."""
    y: float
    a_minus: float = dataclasses.field(init=False)
    a_plus: float = dataclasses.field(init=False)
    point_mass_at_zero: float = dataclasses.field(init=False)

    def __post_init__(self):
        a_minus, a_plus = support_edges(self.y)
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "a_minus", a_minus)
        object.__setattr__(self, "a_plus", a_plus)
        object.__setattr__(self, "point_mass_at_zero", max(0.0, 1.0 - 1.0 / self.y))

    def density(self, x):
        return density(x, self.y)

    def moment(self, k):
        return mp_moment(k, self.y)

    def cdf(self, x):
        return mp_cdf(x, self.y)


def density(x, y):
    """Density of the absolutely continuous part of F_y.

    Accepts a scalar or an array and returns the same shape. Zero off the
    support and at x = 0.
    """
    a_minus, a_plus = support_edges(y)
    x = np.asarray(x, dtype=float)

    inside = (x >= a_minus) & (x <= a_plus) & (x > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.sqrt(np.clip((x - a_minus) * (a_plus - x), 0.0, None)) / (2.0 * math.pi * x * y)
    values = np.where(inside, values, 0.0)

    if values.ndim == 0:
        return float(values)
    return values


def _is_nonpositive_integer(v):
    return v <= 0 and float(v).is_integer()


def hyp2f1_terminating(a, b, c, x):
    """Gauss hypergeometric ₂F₁(a, b; c; x) for a series that terminates.

    At least one of a and b must be a nonpositive integer; the series is then
    a polynomial of degree M = min(-a, -b) over those that are.
    """
    lengths = [-int(v) for v in (a, b) if _is_nonpositive_integer(v)]
    if not lengths:
        raise UnsupportedParametersError(
            "2F1(%r, %r; %r; x) does not terminate" % (a, b, c))
    length = min(lengths)

    if _is_nonpositive_integer(c) and -c < length:
        raise UnsupportedParametersError(
            "2F1 with c = %r hits a zero denominator before terminating" % (c,))

    term = 1.0
    total = 1.0
    for m in range(length):
        term *= (a + m) * (b + m) / ((c + m) * (m + 1)) * x
        total += term

    return total


def mp_moment(k, y):
    """k-th moment of F_y.

    Equals (1 + y)^(k-1) ₂F₁((1-k)/2, 1-k/2; 2; 4y/(1+y)²); the series
    terminates for every integer k ≥ 1.
    """
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise DomainError("moment order must be a nonnegative integer, got %r" % (k,))
    k = int(k)
    if k > MAX_MOMENT:
        raise DomainError("moment order %d exceeds the supported maximum of %d" % (k, MAX_MOMENT))
    y = _check_y(y)

    if k == 0:
        return 1.0

    return (1.0 + y) ** (k - 1) * hyp2f1_terminating((1.0 - k) / 2.0, 1.0 - k / 2.0, 2.0,
                                                     4.0 * y / (1.0 + y) ** 2)


def log_moment(y):
    """∫ log x dF_y(x) = (y - 1)/y · log(1 - y) - 1, defined for 0 < y < 1."""
    y = _check_y(y)
    if y >= 1.0:
        raise DomainError("the log moment of F_y needs y < 1, got %r" % y)

    return (y - 1.0) / y * math.log1p(-y) - 1.0


def mp_quadrature(f, y):
    """∫ f dF_y by adaptive quadrature, including the atom at zero when y > 1.

    The substitution x = a₋ + 4√y sin²(θ/2), θ ∈ [0, π] absorbs the square
    root edges of the density, leaving the smooth integrand
    2 f(x) sin²θ / (π x).
    """
    law = MPLaw(y)
    root = math.sqrt(law.y)

    def integrand(theta):
        x = law.a_minus + 4.0 * root * math.sin(theta / 2.0) ** 2
        return f(x) * 2.0 * math.sin(theta) ** 2 / (math.pi * x)

    value, _ = integrate.quad(integrand, 0.0, math.pi, **_QUAD_OPTIONS)
    if law.point_mass_at_zero > 0:
        value += law.point_mass_at_zero * f(0.0)

    if not math.isfinite(value):
        raise NumericalError("quadrature against F_%g is not finite" % law.y)

    return value


def mp_cdf(x, y):
    """Distribution function of F_y, atom included.

    Accepts a scalar or an array and returns the same shape.
    """
    law = MPLaw(y)
    root = math.sqrt(law.y)

    def one(point):
        if point < 0:
            return 0.0
        if point >= law.a_plus:
            return 1.0
        value = law.point_mass_at_zero
        if point > law.a_minus:
            # Inverse of the substitution used by mp_quadrature.
            theta = math.acos(min(1.0, max(-1.0, (1.0 + law.y - point) / (2.0 * root))))
            value += integrate.quad(
                lambda t: 2.0 * math.sin(t) ** 2 / (math.pi * (law.a_minus + 4.0 * root * math.sin(t / 2.0) ** 2)),
                0.0, theta, **_QUAD_OPTIONS)[0]
        return min(1.0, value)

    points = np.asarray(x, dtype=float)
    if points.ndim == 0:
        return one(float(points))

    return np.array([one(point) for point in points.ravel()]).reshape(points.shape)


def mp_quantiles(p, y):
    """The p mid-point quantiles F_y⁻¹((i - ½)/p), i = 1..p, in ascending order.

    The step function on these points is the p-point distribution closest to
    F_y in Kolmogorov–Smirnov distance.
    """
    if int(p) != p or p < 1:
        raise DomainError("p must be a positive integer, got %r" % (p,))
    law = MPLaw(y)

    quantiles = np.zeros(int(p))
    for i in range(int(p)):
        level = (i + 0.5) / p
        if level <= law.point_mass_at_zero:
            continue
        quantiles[i] = optimize.brentq(lambda point: mp_cdf(point, law.y) - level,
                                       law.a_minus, law.a_plus, xtol=1e-13)

    return quantiles


def _stieltjes_root(z, y):
    """sqrt(z - a₋) · sqrt(z - a₊) with principal square roots.

    Works on scalars through cmath and on arrays through numpy. The product
    is analytic off [a₋, a₊] and behaves like z at infinity.
    """
    a_minus, a_plus = support_edges(y)
    if isinstance(z, np.ndarray):
        return np.sqrt(z - a_minus) * np.sqrt(z - a_plus)
    return cmath.sqrt(z - a_minus) * cmath.sqrt(z - a_plus)


def stieltjes_values(z, y):
    """m̲ on an array of points, with no domain checks.

    Uses m̲ = 2 / (-(z + 1 - y) - R(z)), algebraically equal to the
    quadratic formula root and free of cancellation for large |z|.
    """
    return 2.0 / (-(z + 1.0 - y) - _stieltjes_root(z, y))


def stieltjes_m_underline(z, y):
    """Stieltjes transform m̲(z) of the companion law F̲_y.

    The Herglotz branch: Im m̲ > 0 when Im z > 0, conj(m̲(z)) = m̲(conj z)
    and m̲(z) ~ -1/z as |z| grows. Undefined on the support and, when
    y ≤ 1, at z = 0.
    """
    y = _check_y(y)
    a_minus, a_plus = support_edges(y)
    z = complex(z)

    if z.imag == 0.0 and (a_minus <= z.real <= a_plus or (z.real == 0.0 and y <= 1.0)):
        raise DomainError("m(z) is undefined at z = %r for y = %g" % (z, y))

    return stieltjes_values(z, y)


def stieltjes_derivative_values(m, y):
    """m̲'(z) from m̲(z): 1 / (1/m̲² - y/(1 + m̲)²)."""
    return 1.0 / (1.0 / m ** 2 - y / (1.0 + m) ** 2)


def stieltjes_derivative(z, y):
    """m̲'(z), with the same domain as stieltjes_m_underline."""
    return stieltjes_derivative_values(stieltjes_m_underline(z, y), float(y))


def stieltjes_quadrature(z, y):
    """m̲(z) by quadrature against F̲_y. Slow; serves as an oracle."""
    y = _check_y(y)
    z = complex(z)
    real = mp_quadrature(lambda x: (1.0 / (x - z)).real, y)
    imag = mp_quadrature(lambda x: (1.0 / (x - z)).imag, y)

    return (1.0 - y) / (-z) + y * complex(real, imag)


@dataclasses.dataclass(frozen=True)
class Power:
    """The spectral function x ↦ x^k."""
    k: int

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise DomainError("power must be a positive integer, got %r" % (self.k,))
        object.__setattr__(self, "k", int(self.k))

    def __call__(self, x):
        return x ** self.k

    def mp_integral(self, y):
        return mp_moment(self.k, y)

    def __str__(self):
        return "power:%d" % self.k


@dataclasses.dataclass(frozen=True)
class Log:
    """The spectral function x ↦ log x."""

    def __call__(self, x):
        return np.log(x)

    def mp_integral(self, y):
        return log_moment(y)

    def __str__(self):
        return "log"


def parse_function(text):
    """Reads 'log' or 'power:k' into a spectral function."""
    text = text.strip().lower()
    if text == "log":
        return Log()
    if text.startswith("power:"):
        try:
            k = int(text.split(":", 1)[1])
        except ValueError:
            raise DomainError("malformed spectral function %r" % text)
        return Power(k)
    raise DomainError("unknown spectral function %r (expected 'log' or 'power:k')" % text)
