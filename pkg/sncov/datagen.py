"""Synthetic panels Yᵢ = ωᵢ Σ^(1/2) Zᵢ for simulation studies.

The innovations Z̃ are drawn before the scales ω so that the iid Gaussian
and elliptical models share the same Σ^(1/2) Z̃ under one seed and, after
self-normalization, give the same panel.
"""
# Python imports
import dataclasses
import enum
import hashlib
import logging
import math

# 3rd party imports
import numpy as np
from scipy import linalg

# Project imports
from sncov import spectra
from sncov.errors import DomainError

logger = logging.getLogger(__name__)

# ω²ᵢ = GARCH_CONSTANT + GARCH_PERSISTENCE ω²ᵢ₋₁ + GARCH_REACTION |Yᵢ₋₁|²/tr Σ
GARCH_CONSTANT = 0.01
GARCH_PERSISTENCE = 0.85
GARCH_REACTION = 0.1
# Fixed point of the recursion when |Y|²/tr Σ sits at its mean.
GARCH_START = GARCH_CONSTANT / (1.0 - GARCH_PERSISTENCE - GARCH_REACTION)
GARCH_BURN_IN = 100


class ModelKind(enum.Enum):
    IID_GAUSSIAN = "iid"
    ELLIPTICAL = "elliptical"
    GARCH_T4 = "garch-t4"

    @classmethod
    def parse(cls, text):
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise DomainError("unknown model %r (expected iid, elliptical or garch-t4)" % text)


@dataclasses.dataclass(frozen=True)
class SigmaSpec:
    """Population covariance: the identity or the Toeplitz matrix ρ^|i-j|."""
    p: int
    rho: float = 0.0

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise DomainError("p must be a positive integer, got %r" % (self.p,))
        if not abs(self.rho) < 1:
            raise DomainError("Toeplitz coefficient must satisfy |rho| < 1, got %r" % (self.rho,))

    @classmethod
    def parse(cls, text, p):
        """Reads 'identity' or 'toeplitz:rho'."""
        text = text.strip().lower()
        if text == "identity":
            return cls(p)
        if text.startswith("toeplitz:"):
            try:
                rho = float(text.split(":", 1)[1])
            except ValueError:
                raise DomainError("malformed covariance %r" % text)
            return cls(p, rho)
        raise DomainError("unknown covariance %r (expected identity or toeplitz:rho)" % text)

    @property
    def is_identity(self):
        return self.rho == 0.0

    def matrix(self):
        return linalg.toeplitz(self.rho ** np.arange(self.p))

    def trace(self):
        # every diagonal entry is ρ⁰ = 1
        return float(self.p)

    def __str__(self):
        return "identity" if self.is_identity else "toeplitz:%r" % self.rho


@dataclasses.dataclass(frozen=True)
class GenModel:
    kind: ModelKind
    sigma: SigmaSpec
    p: int
    n: int
    seed: int
    burn_in: int = GARCH_BURN_IN

    def __post_init__(self):
        if self.sigma.p != self.p:
            raise DomainError("covariance has dimension %d but p = %d" % (self.sigma.p, self.p))
        if int(self.n) != self.n or self.n < 2 or self.p < 2:
            raise DomainError("need p >= 2 and n >= 2, got p = %r, n = %r" % (self.p, self.n))
        if self.burn_in < 0:
            raise DomainError("burn-in must be nonnegative")


@dataclasses.dataclass(frozen=True, eq=False)
class PanelDraw:
    """A generated panel and its squared scales.

    omega2[i] is ω² of column i; omega2_start is ω² of the column that
    precedes the first kept one (the last burn-in column, or the
    recursion's starting value when there is no burn-in).
    """
    obs: spectra.ObservationMatrix
    omega2: np.ndarray
    omega2_start: float


def derive_seed(master_seed, *key):
    """A 64-bit seed that depends only on the master seed and the key.

    Keys are rendered with str(), so 0.5 and 0.50 name the same stream but
    0.5 and 1/2 (a Fraction) do not.
    """
    text = "|".join(str(part) for part in (master_seed,) + key)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def sigma_sqrt(spec):
    """Lower Cholesky factor L with L Lᵀ = Σ."""
    if spec.is_identity:
        return np.eye(spec.p)
    try:
        return linalg.cholesky(spec.matrix(), lower=True)
    except linalg.LinAlgError as e:
        raise DomainError("covariance %s is not positive definite: %s" % (spec, e)) from e


def std_t4_sample(count, rng):
    """Student t with 4 degrees of freedom, scaled to unit variance."""
    normals = rng.standard_normal(count)
    chi2 = rng.chisquare(4, count)
    return normals / np.sqrt(chi2 / 4.0) / math.sqrt(2.0)


def garch_step(omega2_prev, y_prev, trace):
    """One step of the ω² recursion."""
    norm2 = math.fsum(np.square(y_prev))
    return GARCH_CONSTANT + GARCH_PERSISTENCE * omega2_prev + GARCH_REACTION * norm2 / trace


def _rng(seed):
    return np.random.default_rng(np.random.SeedSequence(seed))


def draw_panel(model):
    """Generates the panel for a model together with its scales."""
    rng = _rng(model.seed)
    p, n = model.p, model.n
    root = None if model.sigma.is_identity else sigma_sqrt(model.sigma)

    def colored(innovations):
        return innovations if root is None else root @ innovations

    if model.kind is ModelKind.GARCH_T4:
        total = n + model.burn_in
        shaped = colored(std_t4_sample((p, total), rng))
        trace = model.sigma.trace()

        data = np.empty((p, total))
        omega2 = np.empty(total)
        for i in range(total):
            if i == 0:
                omega2[i] = GARCH_START
            else:
                omega2[i] = garch_step(omega2[i - 1], data[:, i - 1], trace)
            data[:, i] = math.sqrt(omega2[i]) * shaped[:, i]

        start = GARCH_START if model.burn_in == 0 else float(omega2[model.burn_in - 1])
        return PanelDraw(spectra.ObservationMatrix(data[:, model.burn_in:]),
                         omega2[model.burn_in:].copy(), start)

    shaped = colored(rng.standard_normal((p, n)))
    if model.kind is ModelKind.ELLIPTICAL:
        omega = np.abs(rng.standard_normal(n))
        return PanelDraw(spectra.ObservationMatrix(shaped * omega), omega ** 2, 1.0)

    return PanelDraw(spectra.ObservationMatrix(shaped), np.ones(n), 1.0)


def gen_panel(model):
    """Generates the p × n panel for a model."""
    return draw_panel(model).obs
