"""Black-box forecaster abstraction.

A :class:`ModelHandle` is just a deterministic batch-prediction function with a
name.  Built-in baselines (persistence, seasonal-naive, ridge-on-lags) cover
testing and demos; :func:`external_model` bridges to any forecaster that speaks
the line-delimited JSON protocol over stdin/stdout, which is what makes the
attribution genuinely model-agnostic.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import (
    LengthMismatch,
    ModelFailure,
    ModelTimeout,
    PeriodTooLong,
    ProtocolViolation,
    SingularSystem,
    SpawnFailure,
)
from .series import Window

PROTOCOL_VERSION = 1

#: Default feature lags for the ridge baseline: the last day hour by hour,
#: plus one value per look-back day up to a week.
DEFAULT_RIDGE_LAGS: tuple[int, ...] = tuple(range(1, 25)) + (25, 48, 72, 96, 120, 144, 168)


@dataclass(frozen=True)
class ModelHandle:
    """Named, deterministic batch predictor: (B, L) windows -> B values."""

    kind: str
    predict_batch: Callable[[np.ndarray], np.ndarray]

    def predict(self, windows) -> np.ndarray:
        batch = np.asarray(windows, dtype=np.float64)
        if batch.ndim == 1:
            batch = batch[None, :]
        out = np.asarray(self.predict_batch(batch), dtype=np.float64)
        if out.shape != (batch.shape[0],):
            raise ModelFailure(f"model {self.kind!r} returned {out.shape}, expected ({batch.shape[0]},)")
        if not np.all(np.isfinite(out)):
            raise ModelFailure(f"model {self.kind!r} returned non-finite predictions")
        return out


def persistence() -> ModelHandle:
    """Predict the last observed input value."""
    return ModelHandle("persistence", lambda batch: batch[:, -1].copy())


def seasonal_naive(period: int) -> ModelHandle:
    """Predict the value one period before the target, i.e. input[L - period]."""

    def predict(batch: np.ndarray) -> np.ndarray:
        length = batch.shape[1]
        if period >= length:
            raise PeriodTooLong(f"period {period} must be shorter than the input length {length}")
        return batch[:, length - period].copy()

    return ModelHandle(f"seasonal-naive({period})", predict)


@dataclass(frozen=True)
class RidgeLagModel:
    """Linear forecaster on a fixed set of input lags.

    Lag ``k`` reads ``input[L - k]``, the value ``k`` steps before the target.
    Trained by ridge-penalized least squares with an unpenalized intercept.
    """

    lag_indices: tuple[int, ...]
    coefficients: np.ndarray
    intercept: float
    ridge: float

    def features(self, batch: np.ndarray) -> np.ndarray:
        length = batch.shape[1]
        cols = [length - k for k in self.lag_indices]
        return batch[:, cols]

    def predict_batch(self, batch: np.ndarray) -> np.ndarray:
        return self.features(batch) @ self.coefficients + self.intercept

    def as_handle(self) -> ModelHandle:
        return ModelHandle("ridge", self.predict_batch)

    def to_config(self) -> dict:
        return {
            "lag_indices": list(self.lag_indices),
            "coefficients": [float(c) for c in self.coefficients],
            "intercept": self.intercept,
            "ridge": self.ridge,
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "RidgeLagModel":
        return cls(
            lag_indices=tuple(cfg["lag_indices"]),
            coefficients=np.asarray(cfg["coefficients"], dtype=np.float64),
            intercept=float(cfg["intercept"]),
            ridge=float(cfg["ridge"]),
        )


def train_ridge(
    train: Sequence[Window],
    lags: Sequence[int] = DEFAULT_RIDGE_LAGS,
    ridge: float = 1.0,
) -> RidgeLagModel:
    """Fit a :class:`RidgeLagModel` on windows that carry targets.

    Minimizes ``sum (target - beta . x_lags - b)^2 + ridge * |beta|^2`` on
    centered features, which leaves the intercept unpenalized.
    """
    lags = tuple(int(k) for k in lags)
    if len(train) < len(lags) + 1:
        raise ValueError(f"need at least {len(lags) + 1} training windows, got {len(train)}")
    if any(w.target is None for w in train):
        raise ValueError("all training windows must carry targets")
    length = train[0].input.shape[0]
    if any(k < 1 or k > length for k in lags):
        raise ValueError(f"lags must lie in [1, {length}]")

    batch = np.stack([w.input for w in train])
    targets = np.array([w.target for w in train])
    features = batch[:, [length - k for k in lags]]

    x_mean = features.mean(axis=0)
    y_mean = float(targets.mean())
    xc = features - x_mean
    yc = targets - y_mean

    gram = xc.T @ xc
    gram[np.diag_indices_from(gram)] += ridge
    try:
        beta = cho_solve(cho_factor(gram, lower=True), xc.T @ yc)
    except LinAlgError as exc:
        raise SingularSystem("ridge normal equations are singular") from exc

    intercept = y_mean - float(x_mean @ beta)
    return RidgeLagModel(lags, beta, intercept, float(ridge))


# --- external model bridge ----------------------------------------------------


class _LineReader:
    """Background reader so a stalled child can be detected by timeout."""

    def __init__(self, stream):
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        self._thread.start()

    def _pump(self, stream):
        for line in stream:
            self._queue.put(line)
        self._queue.put(None)  # EOF marker

    def readline(self, timeout: float) -> str | None:
        try:
            return self._queue.get(timeout=timeout)
        except queue.Empty:
            raise ModelTimeout(f"no reply within {timeout} s") from None


class ExternalModel:
    """Child-process forecaster speaking newline-delimited JSON.

    One child per handle; requests are answered strictly in order, so callers
    must funnel batches through a single logical queue (the built-in lock does
    this for threads in one process).  The child's stderr passes through for
    logging.
    """

    def __init__(self, command: Sequence[str], input_length: int, timeout: float = 60.0):
        self.command = tuple(command)
        self.input_length = int(input_length)
        self.timeout = float(timeout)
        self._lock = threading.Lock()
        self._next_id = 1
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,  # pass through
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise SpawnFailure(f"could not spawn {self.command!r}: {exc}") from exc
        self._reader = _LineReader(self._proc.stdout)
        self._handshake()

    def _send(self, message: dict):
        try:
            self._proc.stdin.write(json.dumps(message) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise ModelFailure(f"external model {self.command!r} closed its stdin") from exc

    def _receive(self) -> dict:
        line = self._reader.readline(self.timeout)
        if line is None:
            raise ProtocolViolation("external model closed its stdout")
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolViolation("reply is not valid JSON", line=line.rstrip("\n")) from None
        if not isinstance(message, dict):
            raise ProtocolViolation("reply is not a JSON object", line=line.rstrip("\n"))
        return message

    def _handshake(self):
        self._send({"type": "hello", "protocol": PROTOCOL_VERSION, "input_length": self.input_length})
        reply = self._receive()
        if reply.get("type") != "ready":
            raise ProtocolViolation("expected a ready reply to hello", line=json.dumps(reply))

    def predict_batch(self, batch: np.ndarray) -> np.ndarray:
        with self._lock:
            request_id = self._next_id
            self._next_id += 1
            self._send({"type": "predict", "id": request_id, "windows": batch.tolist()})
            reply = self._receive()
        if reply.get("type") != "prediction":
            raise ProtocolViolation("expected a prediction reply", line=json.dumps(reply))
        if reply.get("id") != request_id:
            raise ProtocolViolation(f"reply id {reply.get('id')!r} does not match request id {request_id}", line=json.dumps(reply))
        predictions = reply.get("predictions")
        if not isinstance(predictions, list) or len(predictions) != batch.shape[0]:
            raise ProtocolViolation("predictions must be a list matching the batch size", line=json.dumps(reply))
        return np.asarray(predictions, dtype=np.float64)

    def as_handle(self) -> ModelHandle:
        return ModelHandle(f"external:{' '.join(self.command)}", self.predict_batch)

    def close(self) -> int | None:
        """Send bye, wait briefly, kill if needed; returns the child's exit code."""
        if self._proc.poll() is None:
            try:
                self._send({"type": "bye"})
            except ModelFailure:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait(timeout=5)
        if self._proc.stdin and not self._proc.stdin.closed:
            self._proc.stdin.close()
        return self._proc.returncode

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def external_model(command: Sequence[str], input_length: int, timeout: float = 60.0) -> ModelHandle:
    """Spawn ``command`` and wrap it as a :class:`ModelHandle`.

    The child lives as long as the handle.  Use :class:`ExternalModel` directly
    (it is a context manager) when the caller needs explicit shutdown.
    """
    return ExternalModel(command, input_length, timeout).as_handle()
