"""Next-occurrence predictors over behavior logs and occupancy frames.

Four predictors, weakest to strongest:

* prior day: repeat the clock time of the most recent occurrence,
* autoregression: least-squares AR over the gap series between occurrences,
  order and differencing picked by AIC,
* entry sequence: an LSTM over the most recent raw log entries,
* window context: a bidirectional LSTM over an occupancy-matrix context
  block, trained on prediction frames.

Timestamp-producing predictors report both the predicted instant and the
distance ahead in window units (instant minus prediction time, divided by
the window size).  Frame-trained models natively predict the frame target:
the count of windows to the next occurrence, where the window adjacent to
the context counts as 1.  ``next_occurrence_rmse`` evaluates instants
against frames by mapping an instant to that same count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import islice
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from adherence.logs import (
    MINUTES_PER_DAY,
    ActivityLog,
    PredictionFrame,
    clock_of,
)
from adherence.nn import Adam, SequenceRegressor, flatten_params, unflatten_params


class InsufficientHistory(ValueError):
    """Not enough past occurrences to make a prediction."""


class DivergedLoss(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class NextOccurrence:
    """A predicted next occurrence: absolute instant plus window distance."""

    at: float       # minutes since epoch, may be fractional
    windows: float  # (at - now) / window


# ---------------------------------------------------------------------------
# prior-day predictor
# ---------------------------------------------------------------------------

def prior_day_predict(log: ActivityLog, behavior: str, now: int,
                      window: int) -> NextOccurrence:
    """Project the clock time of the latest past occurrence onto the future.

    The prediction is the first instant at or after ``now`` whose clock time
    matches the most recent occurrence's start; a matching clock means the
    occurrence is due immediately.
    """
    starts = [e.start for e in log.occurrences(behavior) if e.start < now]
    if not starts:
        raise InsufficientHistory(f"no {behavior!r} occurrence before "
                                  f"{now} to project from")
    delta = (clock_of(starts[-1]) - clock_of(now)) % MINUTES_PER_DAY
    return NextOccurrence(at=float(now + delta), windows=delta / window)


# ---------------------------------------------------------------------------
# autoregression over gaps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ARModel:
    order: int          # number of lags
    diff: int           # 0 or 1, differencing applied before fitting
    coef: np.ndarray    # intercept first, then lag coefficients
    aic: float


def _ar_stable(coef: np.ndarray) -> bool:
    # no companion-matrix root outside the unit circle; boundary roots
    # stay (sustained oscillation is fine, only growth is not)
    lags = np.asarray(coef[1:], dtype=np.float64)
    if lags.size == 0:
        return True
    companion = np.zeros((lags.size, lags.size))
    companion[0, :] = lags
    if lags.size > 1:
        companion[1:, :-1] = np.eye(lags.size - 1)
    return bool(np.max(np.abs(np.linalg.eigvals(companion))) <= 1.0 + 1e-6)


def ar_fit(series: Sequence[float], max_order: int = 7,
           allow_diff: bool = True) -> ARModel:
    """Least-squares AR fit; order and differencing chosen by AIC.

    Candidates whose lag polynomial has a root outside the unit circle
    are skipped, so iterated forecasts cannot blow up.  The order-0
    mean model is always admissible.
    """
    base = np.asarray(series, dtype=np.float64)
    best: Optional[ARModel] = None
    for diff in (0, 1) if allow_diff else (0,):
        s = np.diff(base) if diff else base
        n = s.size
        for order in range(0, max_order + 1):
            rows = n - order
            if rows < order + 2:
                continue
            design = np.ones((rows, order + 1))
            for lag in range(1, order + 1):
                design[:, lag] = s[order - lag:n - lag]
            target = s[order:]
            coef, *_ = np.linalg.lstsq(design, target, rcond=None)
            if not _ar_stable(coef):
                continue
            rss = float(np.sum((target - design @ coef) ** 2))
            aic = rows * math.log(max(rss / rows, 1e-12)) + 2 * (order + 1 + diff)
            if best is None or aic < best.aic - 1e-12:
                best = ARModel(order, diff, coef, aic)
    if best is None:
        raise InsufficientHistory(
            f"series of {base.size} values is too short to fit")
    return best


def ar_forecast_iter(model: ARModel, series: Sequence[float]) -> Iterable[float]:
    """Yield successive forecasts past the end of ``series``."""
    hist = [float(v) for v in series]
    work = list(np.diff(hist)) if model.diff else list(hist)
    while True:
        total = float(model.coef[0])
        for lag in range(1, model.order + 1):
            total += float(model.coef[lag]) * work[-lag]
        work.append(total)
        value = hist[-1] + total if model.diff else total
        hist.append(value)
        yield value


def ar_forecast(model: ARModel, series: Sequence[float], steps: int) -> np.ndarray:
    return np.array(list(islice(ar_forecast_iter(model, series), steps)))


def ar_next_occurrence(log: ActivityLog, behavior: str, now: int, window: int,
                       max_order: int = 7) -> NextOccurrence:
    """Forecast the gap series forward until it crosses ``now``."""
    starts = [e.start for e in log.occurrences(behavior) if e.start < now]
    if len(starts) < 3:
        raise InsufficientHistory(
            f"need at least 3 past {behavior!r} occurrences, have {len(starts)}")
    gaps = np.diff(np.asarray(starts, dtype=np.float64)) / window
    model = ar_fit(gaps, max_order=max_order)
    floor_gap = 1.0 / window  # forecast gaps clamped to one minute
    t = float(starts[-1])
    for raw in ar_forecast_iter(model, gaps):
        t += max(raw, floor_gap) * window
        if t >= now:
            return NextOccurrence(at=t, windows=(t - now) / window)
        if t > now + 400 * MINUTES_PER_DAY:
            break
    raise InsufficientHistory(f"gap forecasts never crossed {now}")


# ---------------------------------------------------------------------------
# shared training loop
# ---------------------------------------------------------------------------

def _predict_chunked(reg: SequenceRegressor, X: np.ndarray,
                     chunk: int = 256) -> np.ndarray:
    if len(X) == 0:
        return np.zeros(0)
    return np.concatenate([reg.predict(X[s:s + chunk])
                           for s in range(0, len(X), chunk)])


def _fit(reg: SequenceRegressor, X: np.ndarray, y: np.ndarray,
         X_val: Optional[np.ndarray], y_val: Optional[np.ndarray],
         rng: np.random.Generator, max_epochs: int, patience: int,
         batch_size: int, lr: float) -> list:
    opt = Adam(reg.params, lr=lr)
    history = []
    best_params = None
    best_val = math.inf
    stale = 0
    have_val = X_val is not None and len(X_val) > 0
    for _ in range(max_epochs):
        order = rng.permutation(len(X))
        total = 0.0
        for s in range(0, len(order), batch_size):
            idx = order[s:s + batch_size]
            loss, grads = reg.loss_and_gradients(X[idx], y[idx])
            if not math.isfinite(loss):
                raise DivergedLoss(f"training loss became {loss}")
            opt.step(reg.params, grads)
            total += loss * len(idx)
        train_loss = total / len(X)
        if have_val:
            err = _predict_chunked(reg, X_val) - y_val
            val_loss = float(np.mean(err * err))
        else:
            val_loss = train_loss
        if not math.isfinite(val_loss):
            raise DivergedLoss(f"validation loss became {val_loss}")
        history.append((train_loss, val_loss))
        if val_loss < best_val - 1e-9:
            best_val = val_loss
            best_params = {k: v.copy() for k, v in reg.params.items()}
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break
    if best_params is not None:
        reg.params = best_params
    return history


def _standardize(y: np.ndarray) -> tuple:
    mean = float(np.mean(y))
    std = float(np.std(y))
    if std < 1e-8:
        std = 1.0
    return (y - mean) / std, mean, std


# ---------------------------------------------------------------------------
# window-context model
# ---------------------------------------------------------------------------

@dataclass
class WindowModel:
    """Bidirectional LSTM regressor over occupancy context blocks."""

    regressor: SequenceRegressor
    behaviors: tuple
    window: int
    context_windows: int
    y_mean: float
    y_std: float
    history: list


def frames_to_arrays(frames: Sequence[PredictionFrame]) -> tuple:
    """Stack frames into (B, context_windows, M) inputs and (B,) targets."""
    X = np.stack([f.context.T for f in frames]).astype(np.float64)
    y = np.array([f.y for f in frames], dtype=np.float64)
    return X, y


def train_window_model(train_frames: Sequence[PredictionFrame], behaviors: Sequence[str],
                       window: int, *, val_frames: Sequence[PredictionFrame] = None,
                       val_fraction: float = 0.1, hidden: int = 64,
                       pooling: str = "mean", bidirectional: bool = True,
                       seed: int = 0, max_epochs: int = 50, patience: int = 5,
                       batch_size: int = 32, lr: float = 1e-3) -> WindowModel:
    """Train on frames; chronological tail of each input goes to validation
    when no explicit validation frames are given."""
    frames = list(train_frames)
    if not frames:
        raise InsufficientHistory("no training frames")
    if val_frames is None:
        cut = int(len(frames) * (1.0 - val_fraction))
        cut = max(1, cut)
        frames, val_frames = frames[:cut], frames[cut:]
    X, y_raw = frames_to_arrays(frames)
    y, mean, std = _standardize(y_raw)
    reg = SequenceRegressor(X.shape[2], hidden=hidden, bidirectional=bidirectional,
                            pooling=pooling, seed=seed)
    if len(val_frames):
        X_val, y_val_raw = frames_to_arrays(val_frames)
        y_val = (y_val_raw - mean) / std
    else:
        X_val, y_val = None, None
    rng = np.random.default_rng(seed + 1)
    history = _fit(reg, X, y, X_val, y_val, rng, max_epochs, patience,
                   batch_size, lr)
    return WindowModel(reg, tuple(behaviors), window,
                       X.shape[1], mean, std, history)


def predict_window_model(model: WindowModel,
                         frames: Sequence[PredictionFrame]) -> np.ndarray:
    """Predicted window counts, de-standardized and clipped to >= 1."""
    X, _ = frames_to_arrays(frames)
    z = _predict_chunked(model.regressor, X)
    return np.maximum(1.0, z * model.y_std + model.y_mean)


def window_model_rmse(model: WindowModel,
                      frames: Sequence[PredictionFrame]) -> float:
    yhat = predict_window_model(model, frames)
    y = np.array([f.y for f in frames], dtype=np.float64)
    return float(np.sqrt(np.mean((yhat - y) ** 2)))


def predicted_instants(model: WindowModel,
                       frames: Sequence[PredictionFrame]) -> list:
    """Map window-count predictions to instants at predicted-window centers."""
    yhat = predict_window_model(model, frames)
    return [f.context_end + (v - 0.5) * model.window
            for f, v in zip(frames, yhat)]


# ---------------------------------------------------------------------------
# raw-entry model
# ---------------------------------------------------------------------------

@dataclass
class EntryModel:
    """LSTM over the most recent raw entries, predicting minutes ahead."""

    regressor: SequenceRegressor
    behaviors: tuple
    count: int
    y_mean: float
    y_std: float
    history: list


def entry_features(entries: Sequence, behaviors: Sequence[str], now: int,
                   count: int = 25) -> np.ndarray:
    """Featurize the last ``count`` entries starting before ``now``.

    Per entry: behavior one-hot, clock fraction of the start, duration in
    hours, and age in days.  Earlier rows are zero padding.
    """
    behaviors = list(behaviors)
    width = len(behaviors) + 3
    X = np.zeros((count, width))
    recent = [e for e in entries if e.start < now][-count:]
    for slot, e in zip(range(count - len(recent), count), recent):
        X[slot, behaviors.index(e.behavior)] = 1.0
        X[slot, len(behaviors)] = clock_of(e.start) / MINUTES_PER_DAY
        X[slot, len(behaviors) + 1] = e.duration / 60.0
        X[slot, len(behaviors) + 2] = (now - e.start) / MINUTES_PER_DAY
    return X


def build_entry_examples(log: ActivityLog, behavior: str,
                         count: int = 25) -> tuple:
    """One example per entry boundary that still has a future occurrence."""
    targets = [e.start for e in log.occurrences(behavior)]
    X_list, y_list, nows = [], [], []
    for j, entry in enumerate(log.entries):
        now = entry.stop
        future = [t for t in targets if t > now]
        if not future:
            continue
        X_list.append(entry_features(log.entries[:j + 1], log.behaviors, now, count))
        y_list.append(float(future[0] - now))
        nows.append(now)
    if not X_list:
        raise InsufficientHistory(f"no trainable positions for {behavior!r}")
    return np.stack(X_list), np.array(y_list), nows


def train_entry_model(log: ActivityLog, behavior: str, *, count: int = 25,
                      hidden: int = 32, seed: int = 0, val_fraction: float = 0.1,
                      max_epochs: int = 50, patience: int = 5,
                      batch_size: int = 32, lr: float = 1e-3) -> EntryModel:
    X, y_raw, _ = build_entry_examples(log, behavior, count)
    cut = max(1, int(len(X) * (1.0 - val_fraction)))
    y_std_all, mean, std = _standardize(y_raw[:cut])
    reg = SequenceRegressor(X.shape[2], hidden=hidden, bidirectional=False,
                            pooling="last", seed=seed)
    X_val = X[cut:] if cut < len(X) else None
    y_val = (y_raw[cut:] - mean) / std if cut < len(X) else None
    rng = np.random.default_rng(seed + 1)
    history = _fit(reg, X[:cut], y_std_all, X_val, y_val, rng,
                   max_epochs, patience, batch_size, lr)
    return EntryModel(reg, log.behaviors, count, mean, std, history)


def entry_model_predict(model: EntryModel, log: ActivityLog, now: int,
                        window: int) -> NextOccurrence:
    X = entry_features(log.entries, model.behaviors, now, model.count)
    z = float(model.regressor.predict(X[None, :, :])[0])
    ahead = max(1.0, z * model.y_std + model.y_mean)
    return NextOccurrence(at=now + ahead, windows=ahead / window)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def instant_to_window_count(at: float, now: int, window: int) -> int:
    """Map a predicted instant to the frame target scale (adjacent = 1)."""
    return int(math.floor((at - now) / window)) + 1


def next_occurrence_rmse(predict_at: Callable[[int], NextOccurrence],
                         frames: Sequence[PredictionFrame], window: int) -> float:
    """RMSE of an instant predictor against frame targets.

    ``predict_at`` receives each frame's context end and returns a
    :class:`NextOccurrence`; its instant is converted to a window count on
    the frame scale before comparing.
    """
    errors = []
    for frame in frames:
        pred = predict_at(frame.context_end)
        yhat = instant_to_window_count(pred.at, frame.context_end, window)
        errors.append(yhat - frame.y)
    return float(np.sqrt(np.mean(np.square(errors, dtype=np.float64))))


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def save_model(model, path) -> None:
    """One JSON header line, then the parameter vector as little-endian f8."""
    if not isinstance(model, (WindowModel, EntryModel)):
        raise TypeError(f"cannot save {type(model).__name__}")
    vector, spec = flatten_params(model.regressor.params)
    header = {
        "behaviors": list(model.behaviors),
        "hidden": model.regressor.hidden,
        "input_dim": model.regressor.input_dim,
        "bidirectional": model.regressor.bidirectional,
        "pooling": model.regressor.pooling,
        "param_spec": [[name, list(shape)] for name, shape in spec],
        "y_mean": model.y_mean,
        "y_std": model.y_std,
        "history": [list(pair) for pair in model.history],
    }
    if isinstance(model, WindowModel):
        header["kind"] = "window"
        header["window"] = model.window
        header["context_windows"] = model.context_windows
    else:
        header["kind"] = "entry"
        header["count"] = model.count
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(vector.astype("<f8").tobytes())


def load_model(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    vector = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    spec = [(name, tuple(shape)) for name, shape in header["param_spec"]]
    reg = SequenceRegressor(header["input_dim"], hidden=header["hidden"],
                            bidirectional=header["bidirectional"],
                            pooling=header["pooling"], seed=0)
    reg.params = unflatten_params(vector, spec)
    history = [tuple(pair) for pair in header.get("history", [])]
    if header["kind"] == "window":
        return WindowModel(reg, tuple(header["behaviors"]), header["window"],
                           header["context_windows"], header["y_mean"],
                           header["y_std"], history)
    if header["kind"] == "entry":
        return EntryModel(reg, tuple(header["behaviors"]), header["count"],
                          header["y_mean"], header["y_std"], history)
    raise ValueError(f"unknown model kind {header['kind']!r}")
