"""Sphericity tests built on the spectrum of S̃ₙ.

Every test reduces a panel to a standardized statistic z and rejects when
the two-sided normal p-value 2(1 - Φ(|z|)) falls below alpha. Testing
proportionality to a known target Σ₀ whitens the panel by Σ₀^(-1/2) first.
"""
# Python imports
import dataclasses
import enum
import logging
import math
from typing import Optional

# 3rd party imports
import numpy as np
from scipy import linalg, stats

# Project imports
from sncov import clt, mp_law, spectra
from sncov.errors import DomainError, UnsupportedRegimeError

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.05


class TestName(enum.Enum):
    LR_SN = "lr-sn"
    JHN_SN = "jhn-sn"
    MOMENT_K = "moment"


@dataclasses.dataclass(frozen=True)
class TestSelector:
    """One of the tests, with the moment order for MOMENT_K."""
    name: TestName
    k: Optional[int] = None

    __test__ = False

    def __post_init__(self):
        if self.name is TestName.MOMENT_K:
            if self.k is None or isinstance(self.k, bool) or int(self.k) != self.k \
                    or not 2 <= self.k <= clt.MAX_TEST_MOMENT:
                raise DomainError("moment test order must be in [2, %d], got %r" % (clt.MAX_TEST_MOMENT, self.k))
        elif self.k is not None:
            raise DomainError("%s takes no moment order" % self.name.value)

    @classmethod
    def parse(cls, text):
        """Reads 'lr-sn', 'jhn-sn' or 'moment:k'."""
        text = text.strip().lower()
        if text.startswith("moment:"):
            try:
                k = int(text.split(":", 1)[1])
            except ValueError:
                raise DomainError("malformed test name %r" % text)
            return cls(TestName.MOMENT_K, k)
        try:
            return cls(TestName(text))
        except ValueError:
            raise DomainError("unknown test %r (expected lr-sn, jhn-sn or moment:k)" % text)

    @property
    def label(self):
        """Name used in reports: LR_SN, JHN_SN or MOMENT_K(k)."""
        if self.name is TestName.MOMENT_K:
            return "MOMENT_K(%d)" % self.k
        return self.name.name

    def __str__(self):
        if self.name is TestName.MOMENT_K:
            return "moment:%d" % self.k
        return self.name.value


LR_SN = TestSelector(TestName.LR_SN)
JHN_SN = TestSelector(TestName.JHN_SN)


@dataclasses.dataclass(frozen=True)
class TestReport:
    """Outcome of one test on one panel."""
    test_name: str
    statistic: float
    z: float
    p_value: float
    alpha: float
    reject: bool
    p: int
    n: int
    y_n: float
    target: str = "identity"

    __test__ = False

    def to_dict(self):
        return dataclasses.asdict(self)


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1), got %r" % (alpha,))


def two_sided_p_value(z):
    return float(2.0 * stats.norm.sf(abs(z)))


def _report(selector, statistic, z, alpha, summary):
    p_value = two_sided_p_value(z)
    return TestReport(test_name=selector.label, statistic=float(statistic), z=float(z),
                      p_value=p_value, alpha=alpha, reject=p_value < alpha,
                      p=summary.p, n=summary.n, y_n=summary.y_n)


def run_on_summary(selector, summary, alpha=DEFAULT_ALPHA):
    """Runs a test on an already computed spectrum.

    Monte Carlo replications compute the spectrum once and hand it to each
    test in the cell.
    """
    _check_alpha(alpha)

    if selector.name is TestName.LR_SN:
        if summary.y_n >= 1:
            raise UnsupportedRegimeError(
                "LR-SN needs p < n, got p = %d, n = %d" % (summary.p, summary.n))
        scale = clt.log_center_scale(summary.p, summary.n)
        statistic = spectra.lss_g(summary, mp_law.Log()) + summary.p * mp_law.log_moment(summary.y_n)
        z = scale.standardize(statistic)
    elif selector.name is TestName.JHN_SN:
        statistic = math.fsum(summary.eigenvalues ** 2) / summary.y_n - summary.n - summary.p
        z = clt.jhn_standardize(summary)
    else:
        scale = clt.moment_center_scale(selector.k, summary.p, summary.n)
        statistic = spectra.lss_g(summary, mp_law.Power(selector.k))
        z = scale.standardize(statistic)

    return _report(selector, statistic, z, alpha, summary)


def run_test(selector, obs, alpha=DEFAULT_ALPHA):
    """Runs the selected test on a panel."""
    _check_alpha(alpha)
    if selector.name is TestName.LR_SN and obs.y_n >= 1:
        raise UnsupportedRegimeError("LR-SN needs p < n, got p = %d, n = %d" % (obs.p, obs.n))

    return run_on_summary(selector, spectra.snc_eigenvalues(obs), alpha)


def test_lr_sn(obs, alpha=DEFAULT_ALPHA):
    """The log-determinant test; p < n only."""
    return run_test(LR_SN, obs, alpha)


def test_jhn_sn(obs, alpha=DEFAULT_ALPHA):
    """John's test on the self-normalized panel; any p/n."""
    return run_test(JHN_SN, obs, alpha)


def test_moment_k(obs, k, alpha=DEFAULT_ALPHA):
    """The moment-k test, 2 ≤ k ≤ 8."""
    return run_test(TestSelector(TestName.MOMENT_K, k), obs, alpha)


# None of these are unit tests.
test_lr_sn.__test__ = False
test_jhn_sn.__test__ = False
test_moment_k.__test__ = False


class TargetKind(enum.Enum):
    IDENTITY = "identity"
    DIAGONAL = "diagonal"
    FULL_PSD = "full"


@dataclasses.dataclass(frozen=True, eq=False)
class TargetSpec:
    """The hypothesized shape Σ₀ of the covariance.

    values holds the diagonal for DIAGONAL and the matrix for FULL_PSD.
    """
    kind: TargetKind
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind is TargetKind.IDENTITY:
            return
        values = np.array(self.values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise DomainError("target has non-finite entries")
        if self.kind is TargetKind.DIAGONAL:
            if values.ndim != 1:
                raise DomainError("a diagonal target needs a 1-d array")
            if np.any(values <= 0):
                raise DomainError("a diagonal target needs positive entries")
        else:
            if values.ndim != 2 or values.shape[0] != values.shape[1]:
                raise DomainError("a full target needs a square matrix")
            if not np.allclose(values, values.T, rtol=1e-12, atol=1e-14):
                raise DomainError("a full target must be symmetric")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def identity(cls):
        return cls(TargetKind.IDENTITY)

    @classmethod
    def diagonal(cls, values):
        return cls(TargetKind.DIAGONAL, values)

    @classmethod
    def full(cls, matrix):
        return cls(TargetKind.FULL_PSD, matrix)

    def whiten(self, obs):
        """Σ₀^(-1/2) applied to every column of the panel."""
        if self.kind is TargetKind.IDENTITY:
            return obs

        if self.values.shape[0] != obs.p:
            raise DomainError("target has dimension %d but the panel has p = %d"
                              % (self.values.shape[0], obs.p))

        if self.kind is TargetKind.DIAGONAL:
            return spectra.ObservationMatrix(obs.data / np.sqrt(self.values)[:, None])

        try:
            linalg.cholesky(self.values, lower=True)
        except linalg.LinAlgError:
            raise DomainError("a full target must be positive definite")
        eigenvalues, vectors = linalg.eigh(self.values)
        inverse_root = (vectors / np.sqrt(eigenvalues)) @ vectors.T

        return spectra.ObservationMatrix(inverse_root @ obs.data)


def test_proportional_to(obs, target, test=JHN_SN, alpha=DEFAULT_ALPHA):
    """Tests H₀: Σ ∝ target by running the test on the whitened panel."""
    report = run_test(test, target.whiten(obs), alpha)
    return dataclasses.replace(report, target=target.kind.value)


test_proportional_to.__test__ = False
