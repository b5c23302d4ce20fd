"""Walk through one explanation end to end.

Generates an hourly series with a known trend and two seasonalities, trains
the built-in ridge baseline, decomposes a single test window into the four
concepts (Growth, Daily, Weekly, Other), and attributes the model's
prediction to them with exact Shapley values.  Finishes with a text
waterfall and an SVG of the same picture.
"""

from pathlib import Path

from tsprism import (
    DecompositionSpec,
    SplitSpec,
    compute_shap,
    fit,
    fit_scaler,
    make_windows,
    render_svg,
    sample_background,
    split,
    train_ridge,
    waterfall,
)
from tsprism.synthetic import SyntheticSpec, generate

OUT = Path(__file__).parent / "demo_out"


def main():
    print("1. Generating a synthetic hourly series (trend + daily + weekly + noise)")
    spec = SyntheticSpec(
        length=6000,
        base=20.0,
        slope=0.01,
        kinks=((2500, -0.012),),
        seasonals=((24.0, 2.0, 0.4), (168.0, 1.0, 1.1)),
        noise_std=0.3,
        seed=7,
    )
    series, plants = generate(spec)
    print(f"   {len(series)} points, step {series.step}")

    print("2. Splitting 80/20 and cutting 169-sample windows at stride 25")
    train_series, test_series = split(series, SplitSpec(0.8))
    train = make_windows(train_series, 169, 25)
    test = make_windows(test_series, 169, 25)
    print(f"   {len(train)} train windows, {len(test)} test windows")

    print("3. Scaling to z-units with statistics from the training side only")
    scaler = fit_scaler(train)
    strain = [scaler.transform_window(w) for w in train]
    stest = [scaler.transform_window(w) for w in test]
    print(f"   mean {scaler.mean:.3f}, std {scaler.std:.3f}")

    print("4. Training the lagged ridge baseline")
    model = train_ridge(strain).as_handle()

    print("5. Decomposing the first test window")
    dspec = DecompositionSpec()
    window = stest[0]
    decomp = fit(window.input, dspec)
    for name in decomp.names:
        component = decomp.components[name]
        print(f"   {name:<7} range [{component.min():+.3f}, {component.max():+.3f}]")

    print("6. Sampling 100 background windows and computing exact Shapley values")
    bg = sample_background(strain, 100, seed=0, spec=dspec)
    explanation = compute_shap(window, model, dspec, bg)

    print("7. Waterfall from base value to prediction (scaled units)")
    chart = waterfall(explanation)
    running = chart.base_value
    print(f"   base       {running:+.4f}")
    for name, phi in chart.steps:
        running += phi
        print(f"   {name:<10} {phi:+.4f}  -> {running:+.4f}")
    print(f"   prediction {chart.final_value:+.4f}")

    OUT.mkdir(exist_ok=True)
    domain = waterfall(explanation, scaler)
    path = OUT / "waterfall.svg"
    path.write_bytes(render_svg(domain, title="Window 0, domain units"))
    print(f"8. Wrote {path}")


if __name__ == "__main__":
    main()
