"""Centering and scaling of linear spectral statistics of S̃ₙ.

Closed forms cover the log statistic, the trace-of-square statistic and
the moment statistics. The contour integrals give the same asymptotic mean
and covariance for any analytic spectral function and serve as their oracle.
"""
# Python imports
import dataclasses
import logging
import math

# 3rd party imports
import numpy as np

# Project imports
from sncov import mp_law
from sncov.errors import (DomainError, InternalInconsistencyError, QuadratureError,
                          UnsupportedRegimeError)

logger = logging.getLogger(__name__)

DEFAULT_NODES = 2048
MAX_NODES = 16384
# Contour nodes per unit of analyticity margin; the trapezoid error decays
# like exp(-nodes * margin).
NODES_PER_MARGIN = 60.0
# Real-axis distance a circular contour keeps from the interval it encloses.
CIRCLE_CLEARANCE = 0.1
# Largest moment order for the moment statistics.
MAX_TEST_MOMENT = 8
# Rows of the double contour sum evaluated at once.
_BLOCK_ROWS = 256


@dataclasses.dataclass(frozen=True)
class CenterScale:
    """Location and scale that standardize a statistic to N(0, 1)."""
    center: float
    sd: float

    def __post_init__(self):
        if not (math.isfinite(self.center) and math.isfinite(self.sd) and self.sd > 0):
            raise InternalInconsistencyError(
                "invalid center/scale (%r, %r)" % (self.center, self.sd))

    def standardize(self, statistic):
        return (statistic - self.center) / self.sd


def _ratio(p, n):
    if int(p) != p or int(n) != n or p < 1 or n < 1:
        raise DomainError("p and n must be positive integers, got %r, %r" % (p, n))
    return p / n


def _log_variance(y):
    """-2y - 2 log(1 - y), by its power series when y is small."""
    if y < 1e-3:
        return sum(2.0 * y ** j / j for j in range(2, 10))
    return -2.0 * (y + math.log1p(-y))


def log_center_scale(p, n):
    """Center and scale of L̃ₙ = Σ log λᵢ; needs yₙ = p/n < 1."""
    y = _ratio(p, n)
    if y >= 1.0:
        raise UnsupportedRegimeError("the log statistic needs p < n, got p = %d, n = %d" % (p, n))

    center = p * mp_law.log_moment(y) + y + math.log1p(-y) / 2.0
    return CenterScale(center, math.sqrt(_log_variance(y)))


def jhn_standardize(summary):
    """(T̃ₙ + 1)/2 with T̃ₙ = Σ λᵢ²/yₙ - n - p; asymptotically N(0, 1)."""
    statistic = math.fsum(summary.eigenvalues ** 2) / summary.y_n - summary.n - summary.p
    return (statistic + 1.0) / 2.0


def _check_test_moment(k):
    if isinstance(k, bool) or int(k) != k or not 2 <= k <= MAX_TEST_MOMENT:
        raise DomainError("moment order must be an integer in [2, %d], got %r" % (MAX_TEST_MOMENT, k))
    return int(k)


def moment_mu(k, y):
    """Asymptotic mean of Σ λᵢ^k - p ∫ x^k dF_{yₙ}."""
    k = _check_test_moment(k)
    y = mp_law._check_y(y)
    x = 4.0 * y / (1.0 + y) ** 2

    h1 = mp_law.hyp2f1_terminating((3.0 - k) / 2.0, 1.0 - k / 2.0, 1.0, x)
    h2 = mp_law.hyp2f1_terminating((3.0 - k) / 2.0, 1.0 - k / 2.0, 2.0, x)
    first = (-2.0 * k * (k - 1) * (1.0 + y) ** (k - 2) / ((k + 1) * (k + 2))
             * ((y - 1.0) ** 2 * h1 + (-1.0 + 4.0 * k * y - y * y) * h2))

    root = math.sqrt(y)
    second = ((1.0 + root) ** (2 * k) + (1.0 - root) ** (2 * k)) / 4.0
    third = 0.5 * math.fsum(math.comb(k, i) ** 2 * y ** i for i in range(k + 1))

    return first + second - third


def _separable_coefficient(k, y):
    """k-th Laurent coefficient of 1/(1 + m̲(1/w)) at w = 0."""
    total = 0.0
    for i in range(1, k + 2):
        total += (math.comb(k + 1, i) * (1.0 - y) ** (k + 1 - i) * y ** (i - 1)
                  * (math.factorial(k + i - 1) / (math.factorial(i - 1) * math.factorial(k + 1))))
    return total


def moment_sigma2(k, y):
    """Asymptotic variance of Σ λᵢ^k - p ∫ x^k dF_{yₙ}."""
    k = _check_test_moment(k)
    y = mp_law._check_y(y)

    first = -2.0 * y * (k * _separable_coefficient(k, y)) ** 2

    terms = []
    for i in range(k):
        for j in range(k + 1):
            inner = sum(l * math.comb(2 * k - 1 - (i + l), k - 1) * math.comb(2 * k - 1 - j + l, k - 1)
                        for l in range(1, k - i + 1))
            terms.append(math.comb(k, i) * math.comb(k, j) * y ** (2 * k - i - j)
                         * (1.0 - y) ** (i + j) * inner)
    second = 2.0 * math.fsum(terms)

    sigma2 = first + second
    if not sigma2 > 0:
        raise InternalInconsistencyError("variance of the moment-%d statistic at y = %g is %r" % (k, y, sigma2))

    return sigma2


def moment_center_scale(k, p, n):
    """μ and √σ² of the moment-k statistic at yₙ = p/n."""
    y = _ratio(p, n)
    return CenterScale(moment_mu(k, y), math.sqrt(moment_sigma2(k, y)))


def closed_form_mean(f, y):
    """Closed-form asymptotic mean of the centered statistic for f."""
    if isinstance(f, mp_law.Log):
        if not 0 < y < 1:
            raise DomainError("the log statistic needs 0 < y < 1, got %r" % y)
        return y + math.log1p(-y) / 2.0
    if f.k == 1:
        return 0.0
    return moment_mu(f.k, y)


def closed_form_var(f, y):
    """Closed-form asymptotic variance of the centered statistic for f."""
    if isinstance(f, mp_law.Log):
        if not 0 < y < 1:
            raise DomainError("the log statistic needs 0 < y < 1, got %r" % y)
        return _log_variance(y)
    if f.k == 1:
        return 0.0
    return moment_sigma2(f.k, y)


@dataclasses.dataclass(frozen=True)
class ContourSpec:
    """A positively oriented ellipse z(θ) = c + r cos θ + i s sin θ.

    radius is the semi-axis r along the real line, focal the half focal
    distance h, and s = √(r² - h²). focal = 0 gives a circle.
    """
    center_re: float
    radius: float
    nodes: int = DEFAULT_NODES
    focal: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("contour radius must be positive, got %r" % self.radius)
        if not 0 <= self.focal < self.radius:
            raise DomainError("contour focal distance must lie in [0, radius), got %r" % self.focal)
        if int(self.nodes) != self.nodes or self.nodes < 8:
            raise DomainError("a contour needs at least 8 nodes, got %r" % self.nodes)

    @property
    def semi_minor(self):
        return math.sqrt(self.radius ** 2 - self.focal ** 2)

    def points(self):
        """Nodes z(θⱼ) and derivatives dz/dθ at θⱼ = 2πj/N."""
        theta = 2.0 * math.pi * np.arange(self.nodes) / self.nodes
        cos, sin = np.cos(theta), np.sin(theta)
        z = self.center_re + self.radius * cos + 1j * self.semi_minor * sin
        dz = -self.radius * sin + 1j * self.semi_minor * cos
        return z, dz

    def encloses(self, low, high, margin=0.0):
        """Whether the contour crosses the real line more than margin outside [low, high]."""
        return self.center_re - self.radius < low - margin and self.center_re + self.radius > high + margin


def _nodes_for_margin(margin):
    nodes = DEFAULT_NODES
    needed = math.ceil(NODES_PER_MARGIN / margin)
    if needed > nodes:
        nodes = 2 ** math.ceil(math.log2(needed))
    if nodes > MAX_NODES:
        logger.warning("contour margin %g calls for %d nodes; capping at %d", margin, nodes, MAX_NODES)
        nodes = MAX_NODES
    return nodes


def default_contours(f, y, nodes=None):
    """Two nested contours suited to f.

    Both are ellipses confocal with the support. Along the level η of the
    elliptic coordinates (radius = h cosh η) the support is η = 0 and the
    point z = 0 is η₀ = |½ log y|. Power functions use levels outside η₀, so
    the contours enclose [0, a₊]; Log uses levels between 0 and η₀, so the
    contours leave out the branch point at zero.
    """
    y = mp_law._check_y(y)
    focal = 2.0 * math.sqrt(y)
    center = 1.0 + y
    eta0 = abs(0.5 * math.log(y))

    if isinstance(f, mp_law.Log):
        if y >= 1.0:
            raise DomainError("no contour separates the support from 0 when y = %g >= 1" % y)
        levels = (eta0 / 3.0, 2.0 * eta0 / 3.0)
        margin = eta0 / 3.0
    else:
        levels = (eta0 + 0.3, eta0 + 0.6)
        margin = 0.3

    if nodes is None:
        nodes = _nodes_for_margin(margin)

    return tuple(ContourSpec(center, focal * math.cosh(level), nodes, focal) for level in levels)


def contours_from_radius(f, y, radius, nodes=DEFAULT_NODES):
    """A contour pair whose inner ellipse has the given semi-axis.

    The outer ellipse sits at 1.3 times the radius for power functions and
    halfway to the point z = 0 for Log.
    """
    y = mp_law._check_y(y)
    focal = 2.0 * math.sqrt(y)
    center = 1.0 + y
    if radius <= focal:
        raise DomainError("radius %g does not clear the support (needs > %g)" % (radius, focal))

    outer = (radius + center) / 2.0 if isinstance(f, mp_law.Log) else 1.3 * radius
    return ContourSpec(center, radius, nodes, focal), ContourSpec(center, outer, nodes, focal)


def _validate(f, y, spec):
    a_minus, a_plus = mp_law.support_edges(y)
    low = a_minus if y < 1.0 else 0.0
    # Confocal ellipses keep their distance from the support in η instead.
    margin = CIRCLE_CLEARANCE if spec.focal == 0.0 else 0.0
    if not spec.encloses(low, a_plus, margin):
        raise DomainError("contour %s does not enclose [%g, %g] with clearance %g" % (spec, low, a_plus, margin))
    if isinstance(f, mp_law.Log) and spec.center_re - spec.radius <= 0.0:
        raise DomainError("contour %s must leave out z = 0 for the log function" % (spec,))


def _csum(values):
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _real_part(value, what):
    if abs(value.imag) > 1e-8 * max(1.0, abs(value.real)):
        raise QuadratureError("%s has an imaginary residue of %g" % (what, value.imag))
    return value.real


def contour_mean(f, y, spec=None):
    """Asymptotic mean of the centered statistic for f by contour integration.

    (1/πi)∮ f A/(1 - B) dz - (1/2πi)∮ f A/(1 - B)² dz with
    A = y m̲³/(1 + m̲)³ and B = y m̲²/(1 + m̲)².
    """
    y = mp_law._check_y(y)
    if spec is None:
        spec = default_contours(f, y)[0]
    _validate(f, y, spec)

    z, dz = spec.points()
    m = mp_law.stieltjes_values(z, y)
    ratio = m / (1.0 + m)
    a = y * ratio ** 3
    b = y * ratio ** 2
    fz = f(z)
    weight = 2.0 * math.pi / spec.nodes

    first = _csum(fz * a / (1.0 - b) * dz) * weight
    second = _csum(fz * a / (1.0 - b) ** 2 * dz) * weight
    value = first / (math.pi * 1j) - second / (2.0 * math.pi * 1j)

    return _real_part(value, "contour mean of %s at y = %g" % (f, y))


def contour_cov(f, g, y, spec1=None, spec2=None):
    """Asymptotic covariance of the centered statistics for f and g.

    (y/2π²) I_f I_g - (1/2π²) ∮∮ f(z₁) g(z₂) m̲'(z₁) m̲'(z₂)/(m̲(z₂) - m̲(z₁))² dz₁ dz₂
    with I_f = ∮ f m̲'/(1 + m̲)² dz. f runs over the inner contour spec1 and
    g over the outer contour spec2.
    """
    y = mp_law._check_y(y)
    if spec1 is None or spec2 is None:
        # Both functions must be analytic on both contours.
        guide = f if isinstance(f, mp_law.Log) else g
        inner, outer = default_contours(guide, y)
        spec1 = spec1 or inner
        spec2 = spec2 or outer
    for spec in (spec1, spec2):
        _validate(f, y, spec)
        _validate(g, y, spec)

    z1, dz1 = spec1.points()
    z2, dz2 = spec2.points()
    m1 = mp_law.stieltjes_values(z1, y)
    m2 = mp_law.stieltjes_values(z2, y)
    # dm/dθ along each contour
    dm1 = mp_law.stieltjes_derivative_values(m1, y) * dz1
    dm2 = mp_law.stieltjes_derivative_values(m2, y) * dz2
    w1 = 2.0 * math.pi / spec1.nodes
    w2 = 2.0 * math.pi / spec2.nodes

    f1 = f(z1) * dm1
    g2 = g(z2) * dm2

    separable = (y / (2.0 * math.pi ** 2)) * (_csum(f1 / (1.0 + m1) ** 2) * w1) * (_csum(g2 / (1.0 + m2) ** 2) * w2)

    rows = np.empty(len(m1), dtype=complex)
    for start in range(0, len(m1), _BLOCK_ROWS):
        stop = start + _BLOCK_ROWS
        difference = m2[None, :] - m1[start:stop, None]
        if np.min(np.abs(difference)) < 1e-12:
            raise QuadratureError("contours %s and %s intersect" % (spec1, spec2))
        rows[start:stop] = np.sum(g2[None, :] / difference ** 2, axis=1)
    kernel = _csum(f1 * rows) * w1 * w2

    value = separable - kernel / (2.0 * math.pi ** 2)

    return _real_part(value, "contour covariance of %s and %s at y = %g" % (f, g, y))
