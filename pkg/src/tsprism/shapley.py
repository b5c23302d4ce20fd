"""Exact Shapley attribution over decomposition concepts.

Each concept is one additive component of the explained window.  A coalition
keeps its members' components from the input and replaces everything else with
the matching components of background training windows; the model output under
a coalition is the average prediction over those substituted windows.  With m
concepts all 2^m coalition values are evaluated exactly once, so the resulting
attributions are exact Shapley values of the induced game, no sampling
involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decompose import Decomposition, DecompositionSpec, fit
from .errors import InsufficientTrainingData, LengthMismatch, TooManyConcepts
from .models import ModelHandle
from .series import Window

#: Hard cap on exact enumeration: 2^20 coalitions is already a million model
#: batches per window.
MAX_CONCEPTS = 20


@dataclass(frozen=True)
class ConceptSet:
    """Ordered concept names, one per decomposition component."""

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if not 1 <= len(self.names) <= MAX_CONCEPTS:
            raise TooManyConcepts(f"need 1..{MAX_CONCEPTS} concepts, got {len(self.names)}")
        if len(set(self.names)) != len(self.names):
            raise ValueError("concept names must be unique")

    @classmethod
    def from_spec(cls, spec: DecompositionSpec) -> "ConceptSet":
        return cls(spec.concept_names)

    @property
    def m(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class Coalition:
    """Subset of m concepts, encoded as a bitmask (bit i = concept i kept)."""

    mask: int
    m: int

    def __post_init__(self):
        if not 0 <= self.mask < (1 << self.m):
            raise ValueError(f"mask {self.mask} out of range for m={self.m}")

    @classmethod
    def full(cls, m: int) -> "Coalition":
        return cls((1 << m) - 1, m)

    @classmethod
    def of(cls, members: Sequence[int], m: int) -> "Coalition":
        mask = 0
        for i in members:
            mask |= 1 << i
        return cls(mask, m)

    def size(self) -> int:
        return self.mask.bit_count()

    def contains(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.m) if self.contains(i))


@dataclass(frozen=True)
class BackgroundSet:
    """N training windows with cached decompositions, drawn without replacement."""

    windows: np.ndarray
    decompositions: tuple[Decomposition, ...]
    seed: int
    indices: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.windows.shape[0]

    @property
    def concept_names(self) -> tuple[str, ...]:
        return self.decompositions[0].names


@dataclass(frozen=True)
class ShapExplanation:
    """Exact per-concept attributions for one explained window (scaled units).

    ``base_value`` is the coalition value with every concept masked; by the
    efficiency axiom ``base_value + sum(phi.values())`` equals
    ``model_output``, the prediction on the unmasked input.
    """

    base_value: float
    phi: dict[str, float]
    model_output: float
    input_id: int | None = None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.phi.keys())


def shapley_weight(s: int, m: int) -> float:
    """Coalition weight s! (m - s - 1)! / m! for a coalition of size s."""
    if not 0 <= s <= m - 1:
        raise ValueError(f"need 0 <= s <= m-1, got s={s}, m={m}")
    return math.factorial(s) * math.factorial(m - s - 1) / math.factorial(m)


def sample_background(
    train_windows: Sequence[Window],
    n: int,
    seed: int,
    spec: DecompositionSpec = DecompositionSpec(),
) -> BackgroundSet:
    """Draw ``n`` training windows without replacement and decompose each once.

    The draw is a seeded shuffle, so ``n == len(train_windows)`` returns the
    whole pool in shuffled order and the same seed reproduces the selection.
    """
    if n < 1:
        raise ValueError("need at least one background sample")
    if n > len(train_windows):
        raise InsufficientTrainingData(f"requested {n} background samples from {len(train_windows)} windows")
    rng = np.random.default_rng(seed)
    indices = tuple(int(i) for i in rng.permutation(len(train_windows))[:n])
    windows = np.stack([train_windows[i].input for i in indices])
    decompositions = tuple(fit(train_windows[i].input, spec) for i in indices)
    return BackgroundSet(windows=windows, decompositions=decompositions, seed=seed, indices=indices)


def _component_tensors(input_decomp: Decomposition, bg: BackgroundSet) -> tuple[np.ndarray, np.ndarray]:
    names = input_decomp.names
    if bg.concept_names != names:
        raise ValueError(f"background concepts {bg.concept_names} do not match input concepts {names}")
    input_components = input_decomp.stacked()
    if bg.windows.shape[1] != input_components.shape[1]:
        raise LengthMismatch(
            f"background windows have length {bg.windows.shape[1]}, input has {input_components.shape[1]}"
        )
    bg_components = np.stack([d.stacked() for d in bg.decompositions])  # (N, m, L)
    return input_components, bg_components


def _masked_batch(mask: int, input_components: np.ndarray, bg_components: np.ndarray) -> np.ndarray:
    """Substituted windows for one coalition: kept parts from the input,
    masked parts from each background window.  Components are accumulated in
    ascending concept order so results do not depend on scheduling."""
    m, length = input_components.shape
    kept = np.zeros(length)
    for i in range(m):
        if mask >> i & 1:
            kept = kept + input_components[i]
    substituted = np.zeros((bg_components.shape[0], length))
    for i in range(m):
        if not mask >> i & 1:
            substituted = substituted + bg_components[:, i]
    return kept[None, :] + substituted


def mask_and_predict(
    input_decomp: Decomposition,
    coalition: Coalition,
    bg: BackgroundSet,
    model: ModelHandle,
) -> float:
    """Average model output over the background-substituted windows of one coalition."""
    input_components, bg_components = _component_tensors(input_decomp, bg)
    if coalition.m != input_components.shape[0]:
        raise ValueError(f"coalition is over {coalition.m} concepts, decomposition has {input_components.shape[0]}")
    batch = _masked_batch(coalition.mask, input_components, bg_components)
    predictions = model.predict(batch)
    return math.fsum(predictions) / bg.n


def explain_decomposition(
    input_decomp: Decomposition,
    bg: BackgroundSet,
    model: ModelHandle,
    input_id: int | None = None,
) -> ShapExplanation:
    """Exact Shapley attribution for an already-decomposed input.

    Evaluates every coalition value exactly once (2^m batched model calls) and
    combines them with compensated summation in a fixed order, so repeated runs
    are bit-identical.
    """
    names = input_decomp.names
    m = len(names)
    if m > MAX_CONCEPTS:
        raise TooManyConcepts(f"{m} concepts would need 2^{m} coalition evaluations")

    input_components, bg_components = _component_tensors(input_decomp, bg)

    values = np.empty(1 << m)
    for mask in range(1 << m):
        batch = _masked_batch(mask, input_components, bg_components)
        values[mask] = math.fsum(model.predict(batch)) / bg.n

    weights = [shapley_weight(s, m) for s in range(m)]
    phi: dict[str, float] = {}
    for i, name in enumerate(names):
        bit = 1 << i
        terms = []
        for mask in range(1 << m):
            if mask & bit:
                continue
            terms.append(weights[mask.bit_count()] * (values[mask | bit] - values[mask]))
        phi[name] = math.fsum(terms)

    return ShapExplanation(
        base_value=float(values[0]),
        phi=phi,
        model_output=float(values[(1 << m) - 1]),
        input_id=input_id,
    )


def compute_shap(
    window: Window,
    model: ModelHandle,
    spec: DecompositionSpec,
    bg: BackgroundSet,
) -> ShapExplanation:
    """Decompose one window and attribute the model's forecast to its concepts."""
    decomp = fit(window.input, spec)
    return explain_decomposition(decomp, bg, model, input_id=window.origin_index)
