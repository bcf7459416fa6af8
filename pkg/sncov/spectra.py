"""Self-normalization, the spectrum of S̃ₙ and linear spectral statistics."""
# Python imports
import dataclasses
import logging
import math

# 3rd party imports
import numpy as np
from scipy import linalg

# Project imports
from sncov import mp_law
from sncov.errors import DegenerateSpectrumError, DomainError, NumericalError

logger = logging.getLogger(__name__)

# Eigenvalues at or below EIGEN_FLOOR_RATIO * max eigenvalue count as zero
# for statistics that take logarithms.
EIGEN_FLOOR_RATIO = 1e-10


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class ObservationMatrix:
    """A p × n panel; column i is the observation Yᵢ."""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise DomainError("observations must form a 2-d array, got %d dimensions" % data.ndim)
        p, n = data.shape
        if p < 2 or n < 2:
            raise DomainError("need p >= 2 and n >= 2, got p = %d, n = %d" % (p, n))
        if not np.all(np.isfinite(data)):
            raise DomainError("observations contain non-finite entries")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def p(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]

    @property
    def y_n(self):
        return self.p / self.n


@dataclasses.dataclass(frozen=True, eq=False)
class SpectralSummary:
    """Eigenvalues of S̃ₙ, nonnegative and in descending order."""
    p: int
    n: int
    eigenvalues: np.ndarray

    def __post_init__(self):
        eigenvalues = _frozen(self.eigenvalues)
        if eigenvalues.shape != (self.p,):
            raise DomainError("expected %d eigenvalues, got shape %s" % (self.p, eigenvalues.shape))
        object.__setattr__(self, "eigenvalues", eigenvalues)

    @property
    def y_n(self):
        return self.p / self.n

    @property
    def eigen_floor(self):
        return EIGEN_FLOOR_RATIO * float(self.eigenvalues.max(initial=0.0))


def self_normalize(obs):
    """Divides every column by its Euclidean norm; zero columns stay zero."""
    norms = np.linalg.norm(obs.data, axis=0)
    safe = np.where(norms > 0, norms, 1.0)

    return ObservationMatrix(obs.data / safe)


def snc_eigenvalues(obs, route=None):
    """Spectrum of S̃ₙ = (p/n) X Xᵀ, X the self-normalized panel.

    route is "outer" (eigenvalues of the p × p matrix), "gram" (the n × n
    matrix XᵀX, padded with p - n zeros when p > n) or None, which picks
    the smaller of the two.
    """
    x = self_normalize(obs).data
    p, n = x.shape
    scale = p / n

    if route is None:
        route = "gram" if p > n else "outer"

    try:
        if route == "outer":
            values = linalg.eigh(scale * (x @ x.T), eigvals_only=True)
        elif route == "gram":
            values = linalg.eigh(scale * (x.T @ x), eigvals_only=True)
            if p > n:
                values = np.concatenate([values, np.zeros(p - n)])
            else:
                values = values[n - p:]
        else:
            raise DomainError("unknown eigenvalue route %r" % (route,))
    except linalg.LinAlgError as e:
        raise NumericalError("eigensolver failed on a %d x %d panel: %s" % (p, n, e)) from e

    if not np.all(np.isfinite(values)):
        raise NumericalError("eigensolver returned non-finite eigenvalues")

    values = np.sort(np.clip(values, 0.0, None))[::-1]

    return SpectralSummary(p, n, values)


def lss_g(summary, f):
    """Centered linear spectral statistic Σ f(λᵢ) - p ∫ f dF_{yₙ}."""
    values = summary.eigenvalues

    if isinstance(f, mp_law.Log):
        if np.any(values <= summary.eigen_floor):
            raise DegenerateSpectrumError(
                "log statistic needs positive eigenvalues; %d of %d are at or below %g"
                % (int(np.sum(values <= summary.eigen_floor)), summary.p, summary.eigen_floor))
        total = math.fsum(np.log(values))
    else:
        total = math.fsum(f(values))

    return total - summary.p * f.mp_integral(summary.y_n)


def esd_ks_distance(summary):
    """sup_x |F^{S̃ₙ}(x) - F_{yₙ}(x)| for the empirical spectral distribution.

    The supremum of a step function against a distribution function is
    attained at a jump, approached from either side; tied eigenvalues form a
    single jump and the atom of F_y at zero is treated the same way.
    """
    y = summary.y_n
    law = mp_law.MPLaw(y)
    values, counts = np.unique(summary.eigenvalues, return_counts=True)

    right = np.cumsum(counts) / summary.p
    left = right - counts / summary.p

    model_right = np.asarray(mp_law.mp_cdf(values, y), dtype=float)
    model_left = np.where(values == 0.0, model_right - law.point_mass_at_zero, model_right)

    return float(max(np.max(np.abs(right - model_right)), np.max(np.abs(left - model_left))))
