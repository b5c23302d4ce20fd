"""Aggregate attributions over every test window.

On trend-dominated data the Growth concept should carry most of the mean
|phi|; the script verifies that reading and also reports, per concept, the
correlation between a window's last component value and its attribution.
With a persistence model that correlation is exactly 1, so the ridge
baseline's value is a measure of how persistence-like it behaves.
"""

from pathlib import Path

from tsprism import (
    DecompositionSpec,
    SplitSpec,
    compute_shap,
    correlation_report,
    fit,
    fit_scaler,
    global_report,
    make_windows,
    render_svg,
    sample_background,
    split,
    train_ridge,
)
from tsprism.synthetic import SyntheticSpec, generate

OUT = Path(__file__).parent / "demo_out"


def main():
    print("1. Generating trend-dominated data")
    spec = SyntheticSpec(
        length=4500,
        base=10.0,
        slope=0.012,
        seasonals=((24.0, 1.5, 0.7), (168.0, 1.0, 2.1)),
        noise_std=0.1,
        seed=0,
    )
    series, _ = generate(spec)

    print("2. Standard pipeline: split, window, scale, train, sample background")
    train_series, test_series = split(series, SplitSpec(0.8))
    train = make_windows(train_series, 169, 25)
    test = make_windows(test_series, 169, 25)
    scaler = fit_scaler(train)
    strain = [scaler.transform_window(w) for w in train]
    stest = [scaler.transform_window(w) for w in test]
    dspec = DecompositionSpec()
    bg = sample_background(strain, 100, seed=0, spec=dspec)
    model = train_ridge(strain).as_handle()

    print(f"3. Explaining all {len(stest)} test windows")
    decomps = [fit(w.input, dspec) for w in stest]
    explanations = [compute_shap(w, model, dspec, bg) for w in stest]

    print("4. Mean |phi| per concept, domain units (megawatt-scale data would read in MW)")
    report = global_report(explanations, scaler)
    for name, mean in report.ranked():
        bar = "#" * max(1, round(40 * mean / report.ranked()[0][1]))
        print(f"   {name:<7} {mean:9.4f}  {bar}")

    print("5. Last component value vs phi, per concept")
    corr = correlation_report(explanations, decomps)
    for name, r in corr.r.items():
        shown = "n/a" if r is None else f"{r:+.4f}"
        print(f"   {name:<7} r = {shown}")

    OUT.mkdir(exist_ok=True)
    (OUT / "global.svg").write_bytes(render_svg(report, title="Mean |phi| per concept"))
    (OUT / "correlation.svg").write_bytes(render_svg(corr, title="Last component value vs phi"))
    print(f"6. Wrote {OUT / 'global.svg'} and {OUT / 'correlation.svg'}")

    print("\nSame thing via the CLI:")
    print("   tsprism synth --length 4500 --slope 0.012 --seasonal 24:1.5 --seasonal 168:1 \\")
    print("       --noise-std 0.1 --out-dir data")
    print("   tsprism global --input data/synthetic.csv --out-dir out")


if __name__ == "__main__":
    main()
