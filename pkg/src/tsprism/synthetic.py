"""Synthetic series with planted components, plus independent result oracles.

The generator plants a piecewise-linear trend and pure sinusoids, so the
ground truth of every concept is known exactly.  The oracles re-derive results
through routes that share no code with the production paths: Shapley values
via permutation averaging instead of coalition enumeration, and the penalized
least-squares fit via an augmented lstsq instead of Cholesky on the normal
equations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Sequence

import numpy as np

from .decompose import Decomposition
from .errors import SingularSystem, TooManyConcepts
from .models import ModelHandle
from .series import TimeSeries
from .shapley import BackgroundSet, Coalition, ConceptSet, mask_and_predict

_MASK64 = (1 << 64) - 1
_EPOCH = datetime(2001, 4, 1)

#: Exhaustive permutation averaging is m! orderings; 8! = 40320 is the cap.
MAX_EXHAUSTIVE_CONCEPTS = 8


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31), state


def gaussian_noise(n: int, seed: int) -> np.ndarray:
    """n standard normal draws from splitmix64 + Box-Muller.

    The generator is pinned (no library RNG) so fixtures reproduce bit-for-bit
    across platforms and library versions.
    """
    out = np.empty(n)
    state = seed & _MASK64
    i = 0
    while i < n:
        v1, state = _splitmix64(state)
        v2, state = _splitmix64(state)
        u1 = ((v1 >> 11) + 1) * 2.0**-53  # in (0, 1], keeps log() finite
        u2 = (v2 >> 11) * 2.0**-53
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        out[i] = radius * math.cos(angle)
        if i + 1 < n:
            out[i + 1] = radius * math.sin(angle)
        i += 2
    return out


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a planted series: trend + sinusoids + seeded Gaussian noise."""

    length: int
    base: float = 0.0
    slope: float = 0.0
    kinks: tuple[tuple[int, float], ...] = ()
    seasonals: tuple[tuple[float, float, float], ...] = ()
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kinks", tuple((int(i), float(d)) for i, d in self.kinks))
        object.__setattr__(self, "seasonals", tuple((float(p), float(a), float(ph)) for p, a, ph in self.seasonals))
        if self.length < 1:
            raise ValueError("length must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        indices = [i for i, _ in self.kinks]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("kink indices must be strictly increasing")
        if any(i < 0 or i >= self.length for i in indices):
            raise ValueError("kink indices must lie inside [0, length)")
        if any(p < 2 for p, _, _ in self.seasonals):
            raise ValueError("seasonal periods must be >= 2")


def generate(spec: SyntheticSpec) -> tuple[TimeSeries, dict[str, np.ndarray]]:
    """Build the planted hourly series and return it with its true components.

    Component map keys: ``trend``, one ``seasonal_<period>`` per sinusoid, and
    ``noise``.  The series is their elementwise sum.
    """
    idx = np.arange(spec.length, dtype=float)
    trend = spec.base + spec.slope * idx
    for kink, delta in spec.kinks:
        trend = trend + delta * np.maximum(0.0, idx - kink)

    components: dict[str, np.ndarray] = {"trend": trend}
    for period, amplitude, phase in spec.seasonals:
        key = f"seasonal_{period:g}"
        wave = amplitude * np.sin(2.0 * math.pi * idx / period + phase)
        if key in components:
            components[key] = components[key] + wave
        else:
            components[key] = wave

    noise = spec.noise_std * gaussian_noise(spec.length, spec.seed) if spec.noise_std > 0 else np.zeros(spec.length)
    components["noise"] = noise

    values = np.zeros(spec.length)
    for part in components.values():
        values = values + part
    step = timedelta(hours=1)
    timestamps = tuple(_EPOCH + step * i for i in range(spec.length))
    return TimeSeries(timestamps=timestamps, values=values, step=step), components


def ordering_marginals(
    input_decomp: Decomposition,
    model: ModelHandle,
    bg: BackgroundSet,
    orderings: Sequence[Sequence[int]],
) -> np.ndarray:
    """Marginal contribution of each concept under each ordering, shape (K, m).

    Coalition values are memoized across orderings, so the work is bounded by
    the number of distinct coalitions touched, not K * m.
    """
    m = len(input_decomp.names)
    values: dict[int, float] = {}

    def value(mask: int) -> float:
        if mask not in values:
            values[mask] = mask_and_predict(input_decomp, Coalition(mask, m), bg, model)
        return values[mask]

    out = np.empty((len(orderings), m))
    for k, order in enumerate(orderings):
        mask = 0
        for i in order:
            bit = 1 << i
            out[k, i] = value(mask | bit) - value(mask)
            mask |= bit
    return out


def permutation_shapley(
    input_decomp: Decomposition,
    model: ModelHandle,
    concepts: ConceptSet,
    bg: BackgroundSet,
    exhaustive: bool = True,
    seed: int = 0,
    n_orderings: int = 2000,
) -> dict[str, float]:
    """Shapley values by averaging marginal contributions over concept orderings.

    Exhaustive mode enumerates all m! orderings and reproduces the coalition
    formula exactly; sampled mode averages ``n_orderings`` seeded random
    orderings as a Monte-Carlo estimate.
    """
    if concepts.names != input_decomp.names:
        raise ValueError(f"concepts {concepts.names} do not match decomposition {input_decomp.names}")
    m = concepts.m
    if exhaustive:
        if m > MAX_EXHAUSTIVE_CONCEPTS:
            raise TooManyConcepts(f"exhaustive averaging over {m}! orderings is capped at m={MAX_EXHAUSTIVE_CONCEPTS}")
        orderings: list[tuple[int, ...]] = list(itertools.permutations(range(m)))
    else:
        rng = np.random.default_rng(seed)
        orderings = [tuple(int(i) for i in rng.permutation(m)) for _ in range(n_orderings)]

    marginals = ordering_marginals(input_decomp, model, bg, orderings)
    return {
        name: math.fsum(marginals[:, i]) / len(orderings)
        for i, name in enumerate(concepts.names)
    }


def dense_ls_oracle(matrix: np.ndarray, targets: np.ndarray, penalty_diag: np.ndarray) -> np.ndarray:
    """Penalized least squares via lstsq on the augmented system.

    Solves min ||X b - y||^2 + b' diag(penalty) b by stacking sqrt(penalty)
    rows under X, a factorization route independent of the normal-equations
    Cholesky used in production.
    """
    matrix = np.asarray(matrix, dtype=float)
    targets = np.asarray(targets, dtype=float)
    penalty_diag = np.asarray(penalty_diag, dtype=float)
    n, p = matrix.shape
    if penalty_diag.shape != (p,):
        raise ValueError(f"penalty diagonal must have {p} entries, got {penalty_diag.shape}")
    if np.any(penalty_diag < 0):
        raise ValueError("penalties must be nonnegative")
    augmented = np.vstack([matrix, np.diag(np.sqrt(penalty_diag))])
    rhs = np.concatenate([targets, np.zeros(p)])
    coefficients, _, rank, _ = np.linalg.lstsq(augmented, rhs, rcond=None)
    if rank < p:
        raise SingularSystem(f"augmented system has rank {rank} < {p}")
    return coefficients
