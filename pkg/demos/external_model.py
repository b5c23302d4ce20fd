"""Explain a forecaster that lives in another process.

The explainer only ever calls model(batch) -> predictions, so any child
process that speaks the line-delimited JSON protocol can be explained
without exposing its internals.  Here the child is persistence_server.py
(same directory); swapping in a model written in another language is the
same one-line change to the command.
"""

import sys
from pathlib import Path

from tsprism import (
    DecompositionSpec,
    ExternalModel,
    SplitSpec,
    compute_shap,
    fit_scaler,
    make_windows,
    persistence,
    sample_background,
    split,
)
from tsprism.synthetic import SyntheticSpec, generate

SERVER = Path(__file__).parent / "persistence_server.py"


def main():
    print("1. Building the usual pipeline")
    spec = SyntheticSpec(
        length=4000,
        base=8.0,
        slope=0.006,
        seasonals=((24.0, 1.2, 0.3),),
        noise_std=0.2,
        seed=1,
    )
    series, _ = generate(spec)
    train_series, test_series = split(series, SplitSpec(0.8))
    train = make_windows(train_series, 169, 25)
    test = make_windows(test_series, 169, 25)
    scaler = fit_scaler(train)
    strain = [scaler.transform_window(w) for w in train]
    window = scaler.transform_window(test[0])
    dspec = DecompositionSpec()
    bg = sample_background(strain, 100, seed=0, spec=dspec)

    command = [sys.executable, str(SERVER)]
    print(f"2. Launching the external model: {' '.join(command)}")
    child = ExternalModel(command, input_length=168)

    try:
        print("3. Explaining one window through the child process")
        over_wire = compute_shap(window, child.as_handle(), dspec, bg)
        in_core = compute_shap(window, persistence(), dspec, bg)

        print("4. Attribution agrees with the in-core persistence model:")
        print(f"   {'concept':<8} {'external':>12} {'in-core':>12}")
        for name in over_wire.phi:
            print(f"   {name:<8} {over_wire.phi[name]:+12.6f} {in_core.phi[name]:+12.6f}")
        worst = max(abs(over_wire.phi[n] - in_core.phi[n]) for n in over_wire.phi)
        print(f"   max difference {worst:.3e}")
    finally:
        code = child.close()
        print(f"5. Child exited with status {code}")


if __name__ == "__main__":
    main()
