"""Month-by-month test that factor-model residuals have a diagonal shape.

For each calendar month m (from the sixth month of data on) the factor
model is fitted by OLS on months m-5..m. The residual of each day is
self-normalized, the diagonal target Σ_D is the mean of the squared
self-normalized residuals over months m-5..m-1, and the residual days of
month m are tested for proportionality to Σ_D with JHN-SN.
"""
# Python imports
import dataclasses
import enum
import logging
from typing import Optional

# 3rd party imports
import numpy as np
import pandas as pd

# Project imports
from sncov import spectra, sphericity
from sncov.errors import DegenerateTargetError, DomainError, Error

logger = logging.getLogger(__name__)

WINDOW_MONTHS = 6
TARGET_FLOOR = 1e-12


class FactorModel(enum.Enum):
    CAPM = ("mktrf",)
    FF3 = ("mktrf", "smb", "hml")

    @classmethod
    def parse(cls, text):
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise DomainError("unknown factor model %r (expected capm or ff3)" % text)

    @property
    def columns(self):
        return list(self.value)


def _check_frame(frame, what):
    if not isinstance(frame.index, pd.DatetimeIndex):
        raise DomainError("%s must be indexed by date" % what)
    if not frame.index.is_monotonic_increasing or frame.index.has_duplicates:
        raise DomainError("%s dates must be strictly increasing" % what)
    gaps = frame.columns[frame.isna().any()].tolist()
    if gaps:
        raise DomainError("%s has missing values in %s" % (what, ", ".join(map(str, gaps))))


@dataclasses.dataclass(frozen=True, eq=False)
class ReturnPanel:
    """Daily returns, one row per date and one column per ticker."""
    frame: pd.DataFrame

    def __post_init__(self):
        _check_frame(self.frame, "returns")

    @property
    def dates(self):
        return self.frame.index

    @property
    def tickers(self):
        return list(self.frame.columns)

    @property
    def returns(self):
        return self.frame.to_numpy(dtype=float)


@dataclasses.dataclass(frozen=True, eq=False)
class FactorPanel:
    """Daily factor returns on the same calendar as a ReturnPanel."""
    frame: pd.DataFrame

    def __post_init__(self):
        _check_frame(self.frame, "factors")

    @property
    def dates(self):
        return self.frame.index

    def columns_for(self, model):
        missing = [name for name in model.columns if name not in self.frame.columns]
        if missing:
            raise DomainError("factors lack columns %s needed by %s" % (", ".join(missing), model.name))
        return self.frame[model.columns]


def _read_dated_csv(path, what, lower=False):
    try:
        frame = pd.read_csv(path)
    except (ValueError, pd.errors.ParserError) as e:
        raise DomainError("%s file %s is not valid CSV: %s" % (what, path, e))
    if "date" not in frame.columns:
        raise DomainError("%s file %s has no 'date' column" % (what, path))
    try:
        frame["date"] = pd.to_datetime(frame["date"])
        frame = frame.set_index("date").sort_index()
        if lower:
            frame.columns = [str(name).lower() for name in frame.columns]
        return frame.astype(float)
    except (ValueError, TypeError) as e:
        raise DomainError("%s file %s: %s" % (what, path, e))


def load_returns(path):
    """Reads returns.csv: a date column then one column per ticker."""
    return ReturnPanel(_read_dated_csv(path, "returns"))


def load_factors(path):
    """Reads factors.csv: a date column then mktrf, smb and hml."""
    return FactorPanel(_read_dated_csv(path, "factors", lower=True))


def ols_residuals(returns, factors):
    """Residuals of every column of returns (T × p) regressed on an intercept
    and the columns of factors (T × q)."""
    returns = np.asarray(returns, dtype=float)
    factors = np.asarray(factors, dtype=float)
    if factors.ndim == 1:
        factors = factors[:, None]
    t, q = factors.shape

    if t <= q + 1:
        raise DomainError("need more than %d observations to fit %d factors, got %d" % (q + 1, q, t))
    design = np.column_stack([np.ones(t), factors])
    if np.linalg.matrix_rank(design) < q + 1:
        raise DomainError("factor design matrix is rank deficient")

    coefficients, *_ = np.linalg.lstsq(design, returns, rcond=None)
    return returns - design @ coefficients


def _self_normalize_rows(residuals):
    norms = np.linalg.norm(residuals, axis=1)
    return residuals / np.where(norms > 0, norms, 1.0)[:, None]


@dataclasses.dataclass(frozen=True, eq=False)
class RollingResult:
    """The test of one month, or the reason it was skipped."""
    month: str
    window_start: pd.Timestamp
    window_end: pd.Timestamp
    report: Optional[sphericity.TestReport] = None
    sigma_d: Optional[np.ndarray] = None
    error: Optional[str] = None

    def to_dict(self):
        return {"month": self.month,
                "window_start": self.window_start.strftime("%Y-%m-%d"),
                "window_end": self.window_end.strftime("%Y-%m-%d"),
                "report": None if self.report is None else self.report.to_dict(),
                "error": self.error}


def _month_windows(dates):
    """Yields (month, window mask, month mask) per tested month.

    Windows span calendar months, so a month with no data still counts
    toward the six. Months without data are not tested.
    """
    if len(dates) == 0:
        return
    months = dates.to_period("M")
    calendar = pd.period_range(months.min(), months.max(), freq="M")
    for i in range(WINDOW_MONTHS - 1, len(calendar)):
        month = calendar[i]
        current = months == month
        if not current.any():
            continue
        window = (months >= calendar[i - WINDOW_MONTHS + 1]) & (months <= month)
        yield month, window, current


def _aligned_factors(returns, factors, model):
    selected = factors.columns_for(model)
    missing = returns.dates.difference(selected.index)
    if len(missing):
        raise DomainError("factors lack %d return dates, first %s" % (len(missing), missing[0].date()))
    return selected.loc[returns.dates].to_numpy(dtype=float)


def rolling_diag_test(returns, factors, model=FactorModel.FF3, alpha=sphericity.DEFAULT_ALPHA):
    """Tests every month with a full six-month window, oldest first.

    A month whose window cannot be fitted, whose target is degenerate or
    that has fewer than two days is kept with its error and no report.
    """
    values = returns.returns
    factor_values = _aligned_factors(returns, factors, model)
    results = []

    for month, window, current in _month_windows(returns.dates):
        window_dates = returns.dates[window]
        start, end = window_dates[0], window_dates[-1]
        try:
            residuals = _self_normalize_rows(ols_residuals(values[window], factor_values[window]))
            in_window_month = current[window]
            if in_window_month.all():
                raise DomainError("no days before %s in its window to build the target" % month)
            sigma_d = np.mean(residuals[~in_window_month] ** 2, axis=0)
            if np.any(sigma_d <= TARGET_FLOOR):
                raise DegenerateTargetError("target entry at or below %g for %s"
                                            % (TARGET_FLOOR, ", ".join(
                                                str(returns.tickers[j]) for j in np.flatnonzero(sigma_d <= TARGET_FLOOR))))
            obs = spectra.ObservationMatrix(residuals[in_window_month].T)
            report = sphericity.test_proportional_to(obs, sphericity.TargetSpec.diagonal(sigma_d),
                                                     sphericity.JHN_SN, alpha)
        except Error as e:
            logger.info("skipping %s: %s", month, e)
            results.append(RollingResult(str(month), start, end, error=str(e)))
            continue

        results.append(RollingResult(str(month), start, end, report, sigma_d))

    return results


def residual_norm_series(returns, factors, model=FactorModel.FF3):
    """Euclidean norm of every tested day's residual vector.

    Each day gets its residual from the window of the month it is tested in.
    """
    values = returns.returns
    factor_values = _aligned_factors(returns, factors, model)
    pieces = []

    for month, window, current in _month_windows(returns.dates):
        try:
            residuals = ols_residuals(values[window], factor_values[window])
        except DomainError as e:
            logger.info("no residual norms for %s: %s", month, e)
            continue
        norms = np.linalg.norm(residuals[current[window]], axis=1)
        pieces.append(pd.Series(norms, index=returns.dates[current]))

    if not pieces:
        return pd.Series([], dtype=float, name="norm")
    return pd.concat(pieces).rename("norm")


def norm_autocorrelation(series, lag=1):
    """Autocorrelation of the norm series at the given lag."""
    if len(series) <= lag + 1:
        raise DomainError("need more than %d norms for a lag %d autocorrelation" % (lag + 1, lag))
    return float(series.autocorr(lag))


@dataclasses.dataclass(frozen=True)
class Summary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float
    sd: float
    n_months: int
    within_196: float

    def to_dict(self):
        return dataclasses.asdict(self)


def summarize_reports(results):
    """Order statistics, mean and sd of the monthly z values.

    Months without a report are left out. Quartiles interpolate linearly
    between order statistics.
    """
    z = np.array([result.report.z for result in results if result.report is not None])
    if len(z) == 0:
        raise DomainError("no tested months to summarize")

    q1, median, q3 = np.percentile(z, [25, 50, 75])
    sd = float(np.std(z, ddof=1)) if len(z) > 1 else 0.0

    return Summary(min=float(z.min()), q1=float(q1), median=float(median), q3=float(q3),
                   max=float(z.max()), mean=float(z.mean()), sd=sd, n_months=len(z),
                   within_196=float(np.mean(np.abs(z) <= 1.96)))
