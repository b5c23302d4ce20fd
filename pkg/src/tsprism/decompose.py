"""Additive decomposition of a window into growth, seasonal, and residual parts.

A window ``y`` of length ``n`` is modelled as

    y = growth + sum_i seasonal_i + other

where growth is a piecewise-linear trend (intercept, slope, and hinge terms at
uniformly spaced changepoints), each seasonal_i is a truncated Fourier series
of period ``P_i`` with ``N_i`` harmonics, and other is whatever the fitted
parts leave behind.  Everything is estimated in one ridge-penalized
least-squares solve, so the decomposition is deterministic, order-independent,
and exactly additive by construction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import SingularSystem, WindowTooShort

GROWTH = "Growth"
OTHER = "Other"

#: Default seasonal blocks for hourly data: one day and one week.
DEFAULT_PERIODS: tuple[tuple[str, float, int], ...] = (
    ("Daily", 24.0, 3),
    ("Weekly", 168.0, 3),
)


@dataclass(frozen=True)
class DecompositionSpec:
    """Configuration of the decomposition basis and its penalties.

    Parameters
    ----------
    periods : tuple of (name, period_in_samples, n_harmonics)
        One Fourier block per entry; may be empty for a trend-only fit.
    n_changepoints : int
        Number of hinge terms in the trend.
    changepoint_span : float
        Changepoints are spread uniformly over the open interval
        ``(0, changepoint_span)`` of normalized window time.
    ridge_trend : float
        L2 penalty on the changepoint slope deltas.
    ridge_seasonal : float
        L2 penalty on the Fourier coefficients.

    Defaults are tuned for z-scaled inputs.
    """

    periods: tuple[tuple[str, float, int], ...] = DEFAULT_PERIODS
    n_changepoints: int = 25
    changepoint_span: float = 0.8
    ridge_trend: float = 0.5
    ridge_seasonal: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple((str(n), float(p), int(k)) for n, p, k in self.periods))
        for name, period, n_harm in self.periods:
            if period < 2:
                raise ValueError(f"period {name!r} must span at least 2 samples")
            if n_harm < 1:
                raise ValueError(f"period {name!r} needs at least 1 harmonic")
            if 2 * n_harm >= period:
                warnings.warn(
                    f"period {name!r}: 2*{n_harm} harmonics >= period {period}; "
                    "the highest harmonics alias",
                    stacklevel=2,
                )
        names = [n for n, _, _ in self.periods]
        if len(set(names)) != len(names) or GROWTH in names or OTHER in names:
            raise ValueError("period names must be unique and distinct from the growth/residual names")
        if self.n_changepoints < 0:
            raise ValueError("n_changepoints must be >= 0")
        if not 0.0 < self.changepoint_span <= 1.0:
            raise ValueError("changepoint_span must lie in (0, 1]")
        if self.ridge_trend < 0 or self.ridge_seasonal < 0:
            raise ValueError("penalties must be nonnegative")

    @property
    def concept_names(self) -> tuple[str, ...]:
        """Fixed component order: growth, seasonals in spec order, residual."""
        return (GROWTH, *(name for name, _, _ in self.periods), OTHER)

    def min_window_length(self) -> int:
        max_harm = max((k for _, _, k in self.periods), default=0)
        return 2 * max_harm + 2

    def to_config(self) -> dict:
        return {
            "periods": [list(p) for p in self.periods],
            "n_changepoints": self.n_changepoints,
            "changepoint_span": self.changepoint_span,
            "ridge_trend": self.ridge_trend,
            "ridge_seasonal": self.ridge_seasonal,
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "DecompositionSpec":
        return cls(
            periods=tuple(tuple(p) for p in cfg.get("periods", DEFAULT_PERIODS)),
            n_changepoints=cfg.get("n_changepoints", 25),
            changepoint_span=cfg.get("changepoint_span", 0.8),
            ridge_trend=cfg.get("ridge_trend", 0.5),
            ridge_seasonal=cfg.get("ridge_seasonal", 0.01),
        )


@dataclass(frozen=True)
class Decomposition:
    """Fitted components of one window, in fixed order, summing to the input.

    ``components`` maps concept name to a vector of window length; the residual
    is defined as ``original`` minus the fitted blocks, so the elementwise sum
    reproduces ``original`` to float precision.  ``coefficients`` holds the
    fitted basis weights (trend terms, then each block's cos/sin pairs) and
    ``block_slices`` locates each fitted block inside it.
    """

    components: dict[str, np.ndarray]
    original: np.ndarray
    coefficients: np.ndarray = field(repr=False, default=None)
    block_slices: dict[str, slice] = field(repr=False, default=None)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.components.keys())

    def stacked(self) -> np.ndarray:
        """Components as an (m, n) array in concept order."""
        return np.stack([self.components[name] for name in self.names])


def build_design_matrix(n: int, spec: DecompositionSpec) -> tuple[np.ndarray, dict[str, slice]]:
    """Assemble the basis for a window of ``n`` samples.

    Columns are, in order: intercept; normalized time ``t = index / (n - 1)``;
    one hinge ``max(0, t - s_j)`` per changepoint; then per period the columns
    ``cos(2 pi k idx / P)``, ``sin(2 pi k idx / P)`` for ``k = 1..N`` using the
    raw sample index, so daily/weekly phases line up with sample spacing.

    Returns the matrix and a map from block name (growth plus each period
    name) to the slice of columns it owns.  The residual owns no columns.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    t = np.arange(n, dtype=np.float64) / (n - 1)
    idx = np.arange(n, dtype=np.float64)

    cols = [np.ones(n), t]
    changepoints = spec.changepoint_span * np.arange(1, spec.n_changepoints + 1) / (spec.n_changepoints + 1)
    for s in changepoints:
        cols.append(np.maximum(0.0, t - s))

    blocks = {GROWTH: slice(0, len(cols))}
    for name, period, n_harm in spec.periods:
        start = len(cols)
        for k in range(1, n_harm + 1):
            angle = 2.0 * np.pi * k * idx / period
            cols.append(np.cos(angle))
            cols.append(np.sin(angle))
        blocks[name] = slice(start, len(cols))

    return np.column_stack(cols), blocks


def _penalty_diagonal(n_cols: int, blocks: dict[str, slice], spec: DecompositionSpec) -> np.ndarray:
    diag = np.zeros(n_cols)
    growth = blocks[GROWTH]
    diag[growth.start + 2 : growth.stop] = spec.ridge_trend  # intercept and slope stay free
    for name in blocks:
        if name != GROWTH:
            diag[blocks[name]] = spec.ridge_seasonal
    return diag


def fit(window_input: np.ndarray, spec: DecompositionSpec = DecompositionSpec()) -> Decomposition:
    """Fit the decomposition to one window input by penalized least squares.

    Solves ``(X^T X + diag(penalties)) beta = X^T y`` via Cholesky; a singular
    system gets one retry with 1e-8 diagonal jitter before raising
    :class:`SingularSystem`.  The residual component is ``y - X beta``, which
    makes the reconstruction identity exact by construction.
    """
    y = np.asarray(window_input, dtype=np.float64)
    n = y.shape[0]
    if n < spec.min_window_length():
        raise WindowTooShort(f"need at least {spec.min_window_length()} samples, got {n}")

    X, blocks = build_design_matrix(n, spec)
    penalties = _penalty_diagonal(X.shape[1], blocks, spec)
    gram = X.T @ X
    gram[np.diag_indices_from(gram)] += penalties
    rhs = X.T @ y
    try:
        beta = cho_solve(cho_factor(gram, lower=True), rhs)
    except LinAlgError:
        gram[np.diag_indices_from(gram)] += 1e-8
        try:
            beta = cho_solve(cho_factor(gram, lower=True), rhs)
        except LinAlgError as exc:
            raise SingularSystem("penalized normal equations are singular") from exc

    components: dict[str, np.ndarray] = {}
    fitted = np.zeros(n)
    for name in (GROWTH, *(p[0] for p in spec.periods)):
        sl = blocks[name]
        part = X[:, sl] @ beta[sl]
        components[name] = part
        fitted = fitted + part
    components[OTHER] = y - fitted

    for part in components.values():
        part.flags.writeable = False
    return Decomposition(components=components, original=y, coefficients=beta, block_slices=blocks)


def reconstruct(d: Decomposition) -> np.ndarray:
    """Elementwise sum of the components, in fixed concept order."""
    total = np.zeros_like(d.original)
    for name in d.names:
        total = total + d.components[name]
    return total
