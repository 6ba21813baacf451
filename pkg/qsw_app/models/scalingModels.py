'''
==============================================================================
Scaling Model - logarithmic growth regime and information dimension
==============================================================================

This module fits the information dimension d_I(alpha), the slope of the
entropy against ln t in its logarithmic growth regime:

    S(t, alpha) ~ d_I(alpha) ln t      (after a transient, before saturation)

The regime is either given as a fixed window or found by auto_window, which
slides a window of fixed width in log time across the unsaturated part of
the trace and keeps the most linear one.

This is a computed model: nothing here owns state beyond the immutable
FitWindow and FitResult records.

Reference Values:
    - classical chain: d_I = d_s / 2 = 1/2
    - classical Sierpinski gasket: d_I = ln 3 / ln 5 ~ 0.683
    - dimer, short times: S ~ alpha t (1 - ln(alpha t))
'''

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import linregress

from qsw_app.utils import validators
from qsw_app.utils.errors import ConfigError, FitError, NoScalingRegime

logger = logging.getLogger(__name__)

# =============================================================================
# MODULE CONSTANTS
# =============================================================================

MIN_FIT_POINTS = 5
MIN_AUTO_SAMPLES = 20
DIMER_VALIDITY_LIMIT = 0.1
# relative slack so window endpoints that went through log/exp still match samples
ENDPOINT_RTOL = 1e-9
# windows whose R^2 is this close to the best one count as equally linear
DEFAULT_R2_TOLERANCE = 1e-3


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass(frozen=True)
class FitWindow:
    """Fit interval [t_lo, t_hi]; at least half a decade wide (t_hi / t_lo >= 3)."""
    t_lo: float
    t_hi: float

    def __post_init__(self):
        error = validators.validate_window(self.t_lo, self.t_hi)
        if error:
            raise ConfigError(error)

    def mask(self, times):
        """Boolean selection of the times inside the window."""
        times = np.asarray(times, dtype=float)
        return (times >= self.t_lo * (1 - ENDPOINT_RTOL)) & (times <= self.t_hi * (1 + ENDPOINT_RTOL))

    @property
    def decades(self):
        return math.log10(self.t_hi / self.t_lo)


@dataclass(frozen=True)
class FitResult:
    """
    Least-squares fit on a window.

    Attributes:
        d_info (float): Fitted dimension. For entropy fits this is the slope
                        against ln t; for return-probability fits it is the
                        spectral dimension -2 * slope.
        intercept (float): Intercept of the fitted line.
        window (FitWindow): Window that was fitted.
        r_squared (float): Coefficient of determination in [0, 1].
        n_points (int): Samples inside the window, at least 5.
        alpha (float): Interpolation weight of the walk.
        slope (float|None): Raw slope; equals d_info for entropy fits.
    """
    d_info: float
    intercept: float
    window: FitWindow
    r_squared: float
    n_points: int
    alpha: float
    slope: Optional[float] = None

    def __post_init__(self):
        if self.n_points < MIN_FIT_POINTS:
            raise FitError(f"Fit needs at least {MIN_FIT_POINTS} points (got {self.n_points})")
        if not 0.0 <= self.r_squared <= 1.0:
            raise FitError(f"R^2 {self.r_squared} outside [0, 1]")
        if self.slope is None:
            object.__setattr__(self, 'slope', self.d_info)


# =============================================================================
# LEAST SQUARES
# =============================================================================

def _linear_fit(x, y):
    """
    Ordinary least squares y = slope * x + intercept.

    Returns:
        tuple: (slope, intercept, r_squared)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < MIN_FIT_POINTS:
        raise FitError(f"Too few points in window ({x.size} < {MIN_FIT_POINTS})")
    if np.ptp(x) == 0:
        raise FitError("Zero variance in ln t; cannot fit a slope")

    fit = linregress(x, y)
    residuals = y - (fit.intercept + fit.slope * x)
    ss_res = float(np.dot(residuals, residuals))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot > 0:
        r_squared = 1.0 - ss_res / ss_tot
    else:
        r_squared = 1.0 if ss_res == 0 else 0.0
    return float(fit.slope), float(fit.intercept), min(max(r_squared, 0.0), 1.0)


# =============================================================================
# INFORMATION DIMENSION
# =============================================================================

def fit_information_dimension(trace, window):
    """
    Slope of entropy against ln t on a window.

    Args:
        trace (EntropyTrace): von Neumann or Shannon trace.
        window (FitWindow): Fit interval.

    Returns:
        FitResult: d_info is the slope (the information dimension).

    Raises:
        FitError: Fewer than 5 samples in the window, or zero variance.
    """
    mask = window.mask(trace.times)
    slope, intercept, r_squared = _linear_fit(np.log(trace.times[mask]), trace.values[mask])
    return FitResult(d_info=slope, intercept=intercept, window=window, r_squared=r_squared,
                     n_points=int(mask.sum()), alpha=trace.alpha)


def auto_window(trace, min_decades=0.7, saturation_margin=0.9, transient_time=1.0,
                r2_tolerance=DEFAULT_R2_TOLERANCE):
    """
    Locate the logarithmic growth regime of an entropy trace.

    Admissible samples start at the transient cutoff t_I and end before the
    entropy first reaches saturation_margin * ln N. A window min_decades wide
    (in log10 t) slides over them and each is scored by the R^2 of its own
    linear fit. Every window within r2_tolerance of the best score counts as
    a tie, and ties go to the latest window, so a straight early transient
    does not win over the asymptotic regime that follows it.

    Args:
        trace (EntropyTrace): At least 20 positive-time samples.
        min_decades (float): Window width in decades, default 0.7.
        saturation_margin (float): Fraction of ln N treated as saturated.
        transient_time (float): t_I; earlier samples are ignored.
        r2_tolerance (float): R^2 slack treated as a tie, default 1e-3.

    Returns:
        FitWindow

    Raises:
        NoScalingRegime: No window fits between the transient and saturation.
    """
    errors = [e for e in (validators.validate_positive(min_decades, "min_decades"),
                          validators.validate_fraction(saturation_margin, "saturation_margin"),
                          validators.validate_positive(transient_time, "transient_time"),
                          validators.validate_nonnegative(r2_tolerance, "r2_tolerance")) if e]
    if not errors and 10 ** min_decades < validators.MIN_WINDOW_RATIO:
        errors.append(f"min_decades {min_decades} is narrower than a window may be")
    if errors:
        raise ConfigError(errors)
    if trace.times.size < MIN_AUTO_SAMPLES:
        raise FitError(f"auto_window needs at least {MIN_AUTO_SAMPLES} samples (got {trace.times.size})")

    threshold = saturation_margin * trace.max_entropy
    times, values = trace.times, trace.values
    first = int(np.searchsorted(times, transient_time * (1 - ENDPOINT_RTOL)))
    last = first
    while last < times.size and values[last] < threshold:
        last += 1
    log_t = np.log(times[first:last])
    segment = values[first:last]
    width = min_decades * math.log(10.0)

    candidates = []
    for i in range(log_t.size):
        k = int(np.searchsorted(log_t, log_t[i] + width - 1e-12))
        if k >= log_t.size:
            break
        if k - i + 1 < MIN_FIT_POINTS:
            continue
        _, _, r_squared = _linear_fit(log_t[i:k + 1], segment[i:k + 1])
        candidates.append((i, k, r_squared))

    if not candidates:
        raise NoScalingRegime(
            f"No scaling regime in {trace.network_tag or 'trace'} at alpha={trace.alpha}: "
            f"{log_t.size} admissible samples between t_I={transient_time} and saturation")

    best_r2 = max(r2 for _, _, r2 in candidates)
    # candidates run in time order; the last near-best one is the latest
    i, k, r_squared = [c for c in candidates if c[2] >= best_r2 - r2_tolerance][-1]
    window = FitWindow(float(times[first + i]), float(times[first + k]))
    logger.debug("[FIT] alpha=%s auto window [%.4g, %.4g] R^2=%.6f (best %.6f)",
                 trace.alpha, window.t_lo, window.t_hi, r_squared, best_r2)
    return window


# =============================================================================
# ANALYTIC BENCHMARKS AND CURVES
# =============================================================================

def dimer_short_time(alpha, t):
    """
    Short-time dimer entropy alpha t (1 - ln(alpha t)), valid for alpha t < 0.1.
    """
    errors = [e for e in (validators.validate_alpha(alpha, allow_zero=False),
                          validators.validate_positive(t, "t")) if e]
    if errors:
        raise ConfigError(errors)
    x = alpha * t
    if x >= DIMER_VALIDITY_LIMIT:
        raise ConfigError(f"alpha*t = {x:g} is outside the short-time domain (< {DIMER_VALIDITY_LIMIT})")
    return x * (1.0 - math.log(x))


def dimension_curve(results):
    """
    d_I(alpha) curve from one FitResult per alpha.

    Returns:
        list[tuple]: (alpha, d_info, r_squared) ascending in alpha.
    """
    ordered = sorted(results, key=lambda r: r.alpha)
    for a, b in zip(ordered, ordered[1:]):
        if a.alpha == b.alpha:
            raise ConfigError(f"Duplicate alpha {a.alpha} in dimension curve")
    return [(r.alpha, r.d_info, r.r_squared) for r in ordered]


def fit_spectral_dimension(return_prob, window, alpha=1.0):
    """
    Spectral dimension from p_jj(t) ~ t^(-d_s / 2) by a log-log fit.

    Args:
        return_prob (np.ndarray): Rows (t, p_jj), as from return_probability.
        window (FitWindow): Fit interval.
        alpha (float): Label stored on the result.

    Returns:
        FitResult: d_info = d_s = -2 * slope; slope holds the raw exponent.
    """
    data = np.asarray(return_prob, dtype=float)
    times, probabilities = data[:, 0], data[:, 1]
    mask = window.mask(times) & (times > 0) & (probabilities > 0)
    slope, intercept, r_squared = _linear_fit(np.log(times[mask]), np.log(probabilities[mask]))
    return FitResult(d_info=-2.0 * slope, intercept=intercept, window=window,
                     r_squared=r_squared, n_points=int(mask.sum()), alpha=alpha, slope=slope)


def classical_prediction(topology):
    """
    Classical information dimension d_s / 2 of the reference networks.
    """
    if topology == 'chain':
        return 0.5
    if topology == 'sierpinski':
        return math.log(3.0) / math.log(5.0)
    raise ConfigError(f"No classical prediction for topology '{topology}'")
