"""Command-line driver for the full workflow.

Subcommands: ingest, synth, decompose, train, explain, global, validate.
Every run is reproducible: all randomness flows from ``--seed`` and each
artifact embeds a digest of the effective configuration and of the input
file, so identical inputs and config produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import synthetic, validation
from .decompose import DecompositionSpec, fit
from .errors import TsprismError
from .models import ExternalModel, ModelHandle, RidgeLagModel, persistence, seasonal_naive, train_ridge
from .report import DOMAIN, correlation_report, global_report, render_svg, waterfall
from .series import Scaler, SplitSpec, fit_scaler, make_windows, parse_csv, split
from .shapley import compute_shap, sample_background

CONFIG_VERSION = 1

DEFAULTS: dict = {
    "input": None,
    "value_column": "value",
    "timestamp_column": "Datetime",
    "window_length": 169,
    "stride": 25,
    "split": 0.8,
    "background_n": 100,
    "seed": 0,
    "model": "ridge",
    "model_file": None,
    "seasonal_period": 24,
    "ridge_penalty": 1.0,
    "units": "domain",
    "out_dir": "out",
    "workers": 1,
    "fill_single_gaps": False,
}

#: Keys that affect numeric results; the config digest covers exactly these.
_DIGEST_KEYS = (
    "value_column",
    "timestamp_column",
    "window_length",
    "stride",
    "split",
    "background_n",
    "seed",
    "model",
    "model_file",
    "seasonal_period",
    "ridge_penalty",
    "units",
    "fill_single_gaps",
)

_TIME_FORMAT = "%Y-%m-%d %H:%M:%S"


# ---------------------------------------------------------------------------
# Config resolution and artifact helpers


def _load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    version = raw.pop("config_version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ValueError(f"unsupported config_version {version}, expected {CONFIG_VERSION}")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return raw


def _effective_config(args: argparse.Namespace) -> dict:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(_load_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _config_digest(cfg: dict) -> str:
    payload = {k: cfg[k] for k in _DIGEST_KEYS}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


def _dataset_digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, record: dict) -> None:
    path.write_bytes((json.dumps(record, indent=2) + "\n").encode("utf-8"))


def _print_json(record: dict) -> None:
    print(json.dumps(record, indent=2))


# ---------------------------------------------------------------------------
# Pipeline


class _Pipeline:
    """Everything downstream of the CSV: split, windows, scaler, model."""

    def __init__(self, cfg: dict):
        path = Path(cfg["input"])
        raw = path.read_bytes()
        self.cfg = cfg
        self.dataset_digest = _dataset_digest(raw)
        self.config_digest = _config_digest(cfg)
        self.series = parse_csv(
            io.BytesIO(raw),
            value_column=cfg["value_column"],
            timestamp_column=cfg["timestamp_column"],
            fill_single_gaps=cfg["fill_single_gaps"],
        )
        train_series, test_series = split(self.series, SplitSpec(cfg["split"]))
        self.train_windows = make_windows(train_series, cfg["window_length"], cfg["stride"])
        self.test_windows = make_windows(test_series, cfg["window_length"], cfg["stride"])
        self.input_length = cfg["window_length"] - 1
        self.decomposition_spec = DecompositionSpec()
        self._scaler: Scaler | None = None
        self._model: ModelHandle | None = None
        self._external: ExternalModel | None = None

    @property
    def scaler(self) -> Scaler:
        if self._scaler is None:
            self._scaler = fit_scaler(self.train_windows)
        return self._scaler

    def scaled_train(self):
        return [self.scaler.transform_window(w) for w in self.train_windows]

    def scaled_test(self):
        return [self.scaler.transform_window(w) for w in self.test_windows]

    def model(self) -> ModelHandle:
        if self._model is not None:
            return self._model
        cfg = self.cfg
        name = cfg["model"]
        if name == "persistence":
            self._model = persistence()
        elif name == "seasonal-naive":
            self._model = seasonal_naive(cfg["seasonal_period"])
        elif name == "ridge":
            if cfg["model_file"]:
                record = json.loads(Path(cfg["model_file"]).read_text(encoding="utf-8"))
                self._scaler = Scaler(record["scaler"]["mean"], record["scaler"]["std"])
                self._model = RidgeLagModel.from_config(record["model"]).as_handle()
            else:
                self._model = train_ridge(self.scaled_train(), ridge=cfg["ridge_penalty"]).as_handle()
        elif name.startswith("external:"):
            command = shlex.split(name[len("external:") :])
            self._external = ExternalModel(command, self.input_length)
            self._model = self._external.as_handle()
        else:
            raise ValueError(f"unknown model {name!r}")
        return self._model

    def close(self) -> None:
        if self._external is not None:
            self._external.close()
            self._external = None


def _explanation_record(explanation) -> dict:
    return {
        "input_id": explanation.input_id,
        "base_value": explanation.base_value,
        "phi": dict(explanation.phi),
        "model_output": explanation.model_output,
    }


def _explain_windows(pipe: _Pipeline, windows, cfg: dict):
    """Decompose and explain each window; order follows the input list.

    Fan-out is a thread pool: each job is independent and accumulates in a
    fixed order internally, so results do not depend on the worker count.
    """
    model = pipe.model()
    dspec = pipe.decomposition_spec
    bg = sample_background(pipe.scaled_train(), cfg["background_n"], cfg["seed"], dspec)

    def job(window):
        decomp = fit(window.input, dspec)
        explanation = compute_shap(window, model, dspec, bg)
        return decomp, explanation

    if cfg["workers"] > 1:
        with ThreadPoolExecutor(max_workers=cfg["workers"]) as pool:
            results = list(pool.map(job, windows))
    else:
        results = [job(w) for w in windows]
    return [d for d, _ in results], [e for _, e in results]


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_ingest(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    pipe = _Pipeline(cfg)
    out = _out_dir(cfg)
    series = pipe.series
    lines = [f"{cfg['timestamp_column']},{cfg['value_column']}"]
    for ts, value in zip(series.timestamps, series.values):
        lines.append(f"{ts.strftime(_TIME_FORMAT)},{float(value)!r}")
    (out / "series.csv").write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    _print_json(
        {
            "rows": len(series),
            "start": series.timestamps[0].strftime(_TIME_FORMAT),
            "end": series.timestamps[-1].strftime(_TIME_FORMAT),
            "step_seconds": series.step.total_seconds(),
            "train_windows": len(pipe.train_windows),
            "test_windows": len(pipe.test_windows),
            "dataset_digest": pipe.dataset_digest,
            "config_digest": pipe.config_digest,
            "out": str(out / "series.csv"),
        }
    )
    return 0


def _parse_kink(text: str) -> tuple[int, float]:
    index, _, delta = text.partition(":")
    return int(index), float(delta)


def _parse_seasonal(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) == 2:
        parts.append("0")
    period, amplitude, phase = parts
    return float(period), float(amplitude), float(phase)


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = synthetic.SyntheticSpec(
        length=args.length,
        base=args.base,
        slope=args.slope,
        kinks=tuple(_parse_kink(k) for k in args.kink or ()),
        seasonals=tuple(_parse_seasonal(s) for s in args.seasonal or ()),
        noise_std=args.noise_std,
        seed=args.seed if args.seed is not None else 0,
    )
    series, components = synthetic.generate(spec)
    out = Path(args.out_dir if args.out_dir is not None else DEFAULTS["out_dir"])
    out.mkdir(parents=True, exist_ok=True)

    lines = ["Datetime,value"]
    for ts, value in zip(series.timestamps, series.values):
        lines.append(f"{ts.strftime(_TIME_FORMAT)},{float(value)!r}")
    (out / "synthetic.csv").write_bytes(("\n".join(lines) + "\n").encode("utf-8"))

    names = list(components)
    lines = ["Datetime," + ",".join(names)]
    for i, ts in enumerate(series.timestamps):
        row = ",".join(repr(float(components[name][i])) for name in names)
        lines.append(f"{ts.strftime(_TIME_FORMAT)},{row}")
    (out / "synthetic_components.csv").write_bytes(("\n".join(lines) + "\n").encode("utf-8"))

    _print_json(
        {
            "rows": spec.length,
            "components": names,
            "series": str(out / "synthetic.csv"),
            "ground_truth": str(out / "synthetic_components.csv"),
        }
    )
    return 0


def _cmd_decompose(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    pipe = _Pipeline(cfg)
    windows = pipe.scaled_test()
    window = windows[args.window]
    decomp = fit(window.input, pipe.decomposition_spec)
    out = _out_dir(cfg)

    scaler = pipe.scaler
    names = list(decomp.names)
    in_domain = cfg["units"] == DOMAIN

    def convert(name: str, value: float) -> float:
        if not in_domain:
            return value
        # The mean shifts into the trend block so domain components still sum
        # to the original window.
        return value * scaler.std + (scaler.mean if name == "Growth" else 0.0)

    lines = ["index,original," + ",".join(names)]
    original = scaler.inverse(window.input) if in_domain else window.input
    for i in range(len(window.input)):
        row = ",".join(repr(convert(name, float(decomp.components[name][i]))) for name in names)
        lines.append(f"{i},{float(original[i])!r},{row}")
    path = out / f"decomposition_{args.window}.csv"
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    _print_json(
        {
            "window": args.window,
            "units": cfg["units"],
            "concepts": names,
            "out": str(path),
            "config_digest": pipe.config_digest,
            "dataset_digest": pipe.dataset_digest,
        }
    )
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    pipe = _Pipeline(cfg)
    model = train_ridge(pipe.scaled_train(), ridge=cfg["ridge_penalty"])
    out = _out_dir(cfg)
    record = {
        "config_version": CONFIG_VERSION,
        "kind": "ridge",
        "model": model.to_config(),
        "scaler": {"mean": pipe.scaler.mean, "std": pipe.scaler.std},
        "config_digest": pipe.config_digest,
        "dataset_digest": pipe.dataset_digest,
    }
    path = out / "model.json"
    _write_json(path, record)
    _print_json({"model": str(path), "lags": len(model.lag_indices), "config_digest": pipe.config_digest})
    return 0


def _cmd_explain(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    pipe = _Pipeline(cfg)
    try:
        windows = pipe.scaled_test()
        window = windows[args.window]
        decompositions, explanations = _explain_windows(pipe, [window], cfg)
        explanation = explanations[0]
        out = _out_dir(cfg)
        scaler = pipe.scaler

        record = {
            "config_version": CONFIG_VERSION,
            "config_digest": pipe.config_digest,
            "dataset_digest": pipe.dataset_digest,
            "seed": cfg["seed"],
            "window": {
                "index": args.window,
                "origin_index": window.origin_index,
                "start_time": window.start_time.strftime(_TIME_FORMAT) if window.start_time else None,
            },
            "scaler": {"mean": scaler.mean, "std": scaler.std},
            "explanation": _explanation_record(explanation),
            "waterfall": {
                "scaled": waterfall(explanation).to_record(),
                "domain": waterfall(explanation, scaler).to_record(),
            },
        }
        json_path = out / f"explanation_{args.window}.json"
        _write_json(json_path, record)

        chosen = waterfall(explanation, scaler if cfg["units"] == DOMAIN else None)
        svg_path = out / f"waterfall_{args.window}.svg"
        svg_path.write_bytes(render_svg(chosen, title=f"Window {args.window}"))
        _print_json(
            {
                "explanation": str(json_path),
                "waterfall": str(svg_path),
                "phi": dict(explanation.phi),
                "config_digest": pipe.config_digest,
            }
        )
        return 0
    finally:
        pipe.close()


def _cmd_global(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    pipe = _Pipeline(cfg)
    try:
        windows = pipe.scaled_test()
        decompositions, explanations = _explain_windows(pipe, windows, cfg)
        out = _out_dir(cfg)
        scaler = pipe.scaler
        digest = pipe.config_digest

        report = {
            "config_version": CONFIG_VERSION,
            "config_digest": digest,
            "dataset_digest": pipe.dataset_digest,
            "seed": cfg["seed"],
            "scaler": {"mean": scaler.mean, "std": scaler.std},
            "count": len(explanations),
            "explanations": [_explanation_record(e) for e in explanations],
            "global": {
                "scaled": global_report(explanations, config_digest=digest).to_record(),
                "domain": global_report(explanations, scaler, config_digest=digest).to_record(),
            },
            "correlation": {
                "scaled": correlation_report(explanations, decompositions).to_record(),
                "domain": correlation_report(explanations, decompositions, scaler).to_record(),
            },
        }
        _write_json(out / "report.json", report)

        lines = ["window_index,concept,phi_scaled,phi_domain"]
        for e in explanations:
            for name, value in e.phi.items():
                lines.append(f"{e.input_id},{name},{value!r},{value * scaler.std!r}")
        (out / "phi.csv").write_bytes(("\n".join(lines) + "\n").encode("utf-8"))

        use_scaler = scaler if cfg["units"] == DOMAIN else None
        (out / "global.svg").write_bytes(
            render_svg(global_report(explanations, use_scaler, config_digest=digest), title="Mean |phi| per concept")
        )
        (out / "correlation.svg").write_bytes(
            render_svg(
                correlation_report(explanations, decompositions, use_scaler),
                title="Last component value vs phi",
            )
        )
        _print_json(
            {
                "report": str(out / "report.json"),
                "windows": len(explanations),
                "global_means": report["global"][cfg["units"]]["means"],
                "config_digest": digest,
            }
        )
        return 0
    finally:
        pipe.close()


def _cmd_validate(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else 0
    results = validation.run_all(seed)
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        failed += 0 if result.passed else 1
        print(f"{status} {result.name}: {result.detail}")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


# ---------------------------------------------------------------------------
# Argument parsing


def _add_pipeline_flags(parser: argparse.ArgumentParser, need_input: bool = True) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--input", required=False, help="input CSV path")
    parser.add_argument("--value-column", dest="value_column")
    parser.add_argument("--timestamp-column", dest="timestamp_column")
    parser.add_argument("--window-length", dest="window_length", type=int)
    parser.add_argument("--stride", type=int)
    parser.add_argument("--split", type=float, help="train fraction, e.g. 0.8")
    parser.add_argument("--background-n", dest="background_n", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument(
        "--model",
        help="persistence | seasonal-naive | ridge | external:<command line>",
    )
    parser.add_argument("--model-file", dest="model_file", help="trained model JSON from the train subcommand")
    parser.add_argument("--seasonal-period", dest="seasonal_period", type=int)
    parser.add_argument("--ridge-penalty", dest="ridge_penalty", type=float)
    parser.add_argument("--units", choices=["scaled", "domain"])
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--workers", type=int)
    parser.add_argument(
        "--fill-single-gaps",
        dest="fill_single_gaps",
        action="store_const",
        const=True,
        help="fill isolated one-step gaps by linear interpolation",
    )
    if need_input:
        parser.set_defaults(_need_input=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsprism",
        description="Concept-level Shapley explanations for time-series forecasters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate a CSV, write the normalized series")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic series with known components")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--base", type=float, default=0.0)
    p.add_argument("--slope", type=float, default=0.0)
    p.add_argument("--kink", action="append", metavar="INDEX:DELTA", help="slope change, repeatable")
    p.add_argument("--seasonal", action="append", metavar="PERIOD:AMP[:PHASE]", help="sinusoid, repeatable")
    p.add_argument("--noise-std", dest="noise_std", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("decompose", help="decompose one test window into concept components")
    _add_pipeline_flags(p)
    p.add_argument("--window", type=int, default=0, help="index into the test windows")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("train", help="train the ridge baseline and save it")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("explain", help="explain one test window")
    _add_pipeline_flags(p)
    p.add_argument("--window", type=int, default=0, help="index into the test windows")
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("global", help="explain every test window and aggregate")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_global)

    p = sub.add_parser("validate", help="run the built-in axiom and oracle checks")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "_need_input", False) and not _effective_config(args)["input"]:
            raise ValueError("an input CSV is required (--input or config file)")
        return args.func(args)
    except (TsprismError, OSError, ValueError, IndexError) as exc:
        _error_record(exc)
        return 2


def _error_record(exc: Exception) -> None:
    record = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
