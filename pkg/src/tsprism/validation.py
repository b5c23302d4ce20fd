"""Built-in correctness checks: axiom suites and oracle equivalence.

These are the same properties the test suite enforces, packaged so a user can
run them against an installed copy (``validate`` subcommand) without checking
out the repository.  Every check is seeded and runs in a few seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import synthetic
from .decompose import DecompositionSpec, build_design_matrix, fit, reconstruct
from .models import persistence, train_ridge
from .series import make_windows
from .shapley import ConceptSet, compute_shap, explain_decomposition, sample_background


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _context(seed: int) -> dict:
    spec = synthetic.SyntheticSpec(
        length=1400,
        base=4.0,
        slope=0.01,
        kinks=((500, -0.015), (900, 0.02)),
        seasonals=((24.0, 1.2, 0.4), (168.0, 0.8, 1.1)),
        noise_std=0.15,
        seed=seed,
    )
    series, _ = synthetic.generate(spec)
    windows = make_windows(series, 169, 25)
    train, explain = windows[:-12], windows[-12:]
    dspec = DecompositionSpec()
    bg = sample_background(train, 16, seed, dspec)
    return {
        "train": train,
        "explain": explain,
        "dspec": dspec,
        "bg": bg,
        "ridge": train_ridge(train).as_handle(),
        "persistence": persistence(),
    }


def _check_noise_determinism(seed: int, ctx: dict) -> CheckResult:
    a = synthetic.gaussian_noise(512, seed)
    b = synthetic.gaussian_noise(512, seed)
    c = synthetic.gaussian_noise(512, seed + 1)
    same = bool(np.array_equal(a, b))
    differs = bool(not np.array_equal(a, c))
    return CheckResult(
        "noise-determinism",
        same and differs,
        "same seed bit-identical, different seed differs" if same and differs else "seeded noise not reproducible",
    )


def _check_reconstruction(seed: int, ctx: dict) -> CheckResult:
    worst = 0.0
    for window in ctx["explain"]:
        d = fit(window.input, ctx["dspec"])
        worst = max(worst, float(np.max(np.abs(reconstruct(d) - window.input))))
    return CheckResult(
        "decomposition-identity",
        worst <= 1e-10,
        f"max |sum(components) - original| = {worst:.3e} (tolerance 1e-10)",
    )


def _check_dual_fit(seed: int, ctx: dict) -> CheckResult:
    dspec = ctx["dspec"]
    worst = 0.0
    for window in ctx["explain"][:6]:
        y = window.input
        matrix, blocks = build_design_matrix(len(y), dspec)
        penalty = np.zeros(matrix.shape[1])
        growth = blocks["Growth"]
        penalty[growth.start + 2 : growth.stop] = dspec.ridge_trend
        for name in dspec.concept_names[1:-1]:
            sl = blocks[name]
            penalty[sl.start : sl.stop] = dspec.ridge_seasonal
        oracle = synthetic.dense_ls_oracle(matrix, y, penalty)
        produced = fit(y, dspec).coefficients
        scale = max(1.0, float(np.max(np.abs(oracle))))
        worst = max(worst, float(np.max(np.abs(produced - oracle))) / scale)
    return CheckResult(
        "dual-path-fit",
        worst <= 1e-8,
        f"max relative deviation Cholesky vs lstsq = {worst:.3e} (tolerance 1e-8)",
    )


def _check_efficiency(seed: int, ctx: dict) -> CheckResult:
    worst = 0.0
    for window in ctx["explain"][:8]:
        e = compute_shap(window, ctx["ridge"], ctx["dspec"], ctx["bg"])
        gap = abs(e.base_value + math.fsum(e.phi.values()) - e.model_output)
        worst = max(worst, gap)
    return CheckResult(
        "efficiency-axiom",
        worst <= 1e-9,
        f"max |base + sum(phi) - output| = {worst:.3e} (tolerance 1e-9)",
    )


def _check_permutation_equivalence(seed: int, ctx: dict) -> CheckResult:
    concepts = ConceptSet.from_spec(ctx["dspec"])
    worst = 0.0
    for window in ctx["explain"][:2]:
        d = fit(window.input, ctx["dspec"])
        direct = explain_decomposition(d, ctx["bg"], ctx["ridge"])
        averaged = synthetic.permutation_shapley(d, ctx["ridge"], concepts, ctx["bg"], exhaustive=True)
        for name in concepts.names:
            worst = max(worst, abs(direct.phi[name] - averaged[name]))
    return CheckResult(
        "permutation-equivalence",
        worst <= 1e-9,
        f"max |coalition formula - permutation average| = {worst:.3e} (tolerance 1e-9)",
    )


def _check_persistence_closed_form(seed: int, ctx: dict) -> CheckResult:
    bg = ctx["bg"]
    bg_last = {
        name: math.fsum(d.components[name][-1] for d in bg.decompositions) / bg.n
        for name in bg.concept_names
    }
    worst = 0.0
    for window in ctx["explain"][:5]:
        d = fit(window.input, ctx["dspec"])
        e = explain_decomposition(d, bg, ctx["persistence"])
        for name in d.names:
            expected = float(d.components[name][-1]) - bg_last[name]
            worst = max(worst, abs(e.phi[name] - expected))
    return CheckResult(
        "persistence-closed-form",
        worst <= 1e-9,
        f"max |phi - (last - mean background last)| = {worst:.3e} (tolerance 1e-9)",
    )


_CHECKS = (
    _check_noise_determinism,
    _check_reconstruction,
    _check_dual_fit,
    _check_efficiency,
    _check_permutation_equivalence,
    _check_persistence_closed_form,
)


def run_all(seed: int = 0) -> list[CheckResult]:
    """Run every check with one shared seeded fixture; order is fixed."""
    ctx = _context(seed)
    return [check(seed, ctx) for check in _CHECKS]
