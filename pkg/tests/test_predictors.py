import math

import numpy as np
import pytest

from adherence.logs import (
    ActivityLog,
    LogEntry,
    MINUTES_PER_DAY,
    make_frames,
    occupancy_matrix,
)
from adherence.nn import SequenceRegressor
from adherence.predictors import (
    ARModel,
    DivergedLoss,
    EntryModel,
    InsufficientHistory,
    NextOccurrence,
    WindowModel,
    _fit,
    ar_fit,
    ar_forecast,
    ar_next_occurrence,
    build_entry_examples,
    entry_features,
    entry_model_predict,
    frames_to_arrays,
    instant_to_window_count,
    load_model,
    next_occurrence_rmse,
    predict_window_model,
    predicted_instants,
    prior_day_predict,
    save_model,
    train_entry_model,
    train_window_model,
    window_model_rmse,
)


def _daily_med_log(days=10, clock=480, duration=1, extra=()):
    entries = [LogEntry("take_medicine", clock + d * MINUTES_PER_DAY,
                        clock + d * MINUTES_PER_DAY + duration)
               for d in range(days)]
    entries += [LogEntry(b, s, e) for b, s, e in extra]
    return ActivityLog(tuple(entries))


# ---------------------------------------------------------------------------
# prior-day
# ---------------------------------------------------------------------------

def test_prior_day_projects_yesterdays_clock():
    log = _daily_med_log(days=1, clock=480)
    now = MINUTES_PER_DAY  # midnight after the dose
    pred = prior_day_predict(log, "take_medicine", now, 30)
    assert pred.windows == 16.0
    assert pred.at == now + 480
    assert prior_day_predict(log, "take_medicine", now, 15).windows == 32.0


def test_prior_day_same_clock_means_due_now():
    # an occurrence landing exactly on the boundary belongs to the first
    # future window, so a matching clock projects zero windows ahead
    log = _daily_med_log(days=1, clock=480)
    pred = prior_day_predict(log, "take_medicine", 480 + MINUTES_PER_DAY, 30)
    assert pred.windows == 0.0
    assert pred.at == 480 + MINUTES_PER_DAY


def test_prior_day_uses_latest_occurrence_strictly_before_now():
    log = ActivityLog((
        LogEntry("take_medicine", 480, 481),
        LogEntry("take_medicine", 600, 601),
        LogEntry("take_medicine", 720, 721),
    ))
    pred = prior_day_predict(log, "take_medicine", 720, 30)
    # the 720 occurrence is not history yet; clock 600 projects to tomorrow
    assert pred.at == 600 + MINUTES_PER_DAY


def test_prior_day_requires_history():
    log = _daily_med_log(days=1)
    with pytest.raises(InsufficientHistory):
        prior_day_predict(log, "take_medicine", 480, 30)
    with pytest.raises(InsufficientHistory):
        prior_day_predict(log, "eating", 10_000, 30)


def test_prior_day_rmse_zero_on_periodic_log():
    log = _daily_med_log(days=12)
    matrix = occupancy_matrix(log, 30)
    frames = make_frames(matrix, "take_medicine", 48)
    assert len(frames) > 100
    rmse = next_occurrence_rmse(
        lambda now: prior_day_predict(log, "take_medicine", now, 30),
        frames, 30)
    assert rmse == 0.0


# ---------------------------------------------------------------------------
# autoregression
# ---------------------------------------------------------------------------

def test_ar_fit_constant_series_predicts_the_constant():
    model = ar_fit([2.0] * 8)
    ahead = ar_forecast(model, [2.0] * 8, 5)
    assert np.all(np.abs(ahead - 2.0) < 1e-6)


def test_ar_fit_learns_alternating_gaps():
    series = [4.0, 8.0] * 5
    model = ar_fit(series)
    ahead = ar_forecast(model, series, 4)
    assert np.allclose(ahead, [4.0, 8.0, 4.0, 8.0], atol=1e-6)


def test_ar_fit_learns_a_linear_trend_with_differencing():
    series = [float(10 + 3 * k) for k in range(10)]
    model = ar_fit(series)
    ahead = ar_forecast(model, series, 3)
    assert np.allclose(ahead, [40.0, 43.0, 46.0], atol=1e-6)


def test_ar_fit_rejects_tiny_series():
    with pytest.raises(InsufficientHistory):
        ar_fit([1.0])


def test_ar_next_occurrence_constant_gaps():
    gap = 36 * 60
    starts = [k * gap for k in range(5)]
    log = ActivityLog(tuple(LogEntry("take_medicine", s, s + 1) for s in starts))
    now = starts[-1] + 200
    pred = ar_next_occurrence(log, "take_medicine", now, 30)
    assert abs(pred.at - (starts[-1] + gap)) < 1e-6
    assert abs(pred.windows - (starts[-1] + gap - now) / 30) < 1e-6
    # window-size invariance on the instant, factor two on the distance
    pred15 = ar_next_occurrence(log, "take_medicine", now, 15)
    assert abs(pred15.at - pred.at) < 1e-6
    assert abs(pred15.windows - 2 * pred.windows) < 1e-6


def test_ar_next_occurrence_skips_past_gaps_until_after_now():
    gap = 12 * 60
    starts = [k * gap for k in range(6)]
    log = ActivityLog(tuple(LogEntry("take_medicine", s, s + 1) for s in starts))
    now = starts[-1] + 2 * gap + 100  # one full future occurrence already behind now
    pred = ar_next_occurrence(log, "take_medicine", now, 30)
    assert abs(pred.at - (starts[-1] + 3 * gap)) < 1e-6


def test_ar_next_occurrence_requires_three_occurrences():
    log = ActivityLog((LogEntry("take_medicine", 0, 1),
                       LogEntry("take_medicine", 100, 101)))
    with pytest.raises(InsufficientHistory):
        ar_next_occurrence(log, "take_medicine", 200, 30)


def test_ar_rmse_zero_on_periodic_log():
    log = _daily_med_log(days=12)
    matrix = occupancy_matrix(log, 30)
    frames = make_frames(matrix, "take_medicine", 48)
    starts = [e.start for e in log.occurrences("take_medicine")]
    usable = [f for f in frames
              if sum(s < f.context_end for s in starts) >= 3]
    assert len(usable) > 100
    rmse = next_occurrence_rmse(
        lambda now: ar_next_occurrence(log, "take_medicine", now, 30),
        usable, 30)
    assert rmse == 0.0


# ---------------------------------------------------------------------------
# conversions
# ---------------------------------------------------------------------------

def test_instant_to_window_count_boundaries():
    assert instant_to_window_count(1000.0, 1000, 30) == 1
    assert instant_to_window_count(1029.9, 1000, 30) == 1
    assert instant_to_window_count(1030.0, 1000, 30) == 2
    assert instant_to_window_count(1000.0 + 16 * 30, 1000, 30) == 17


def test_frames_to_arrays_shapes():
    log = _daily_med_log(days=5, extra=(("eating", 700, 730),))
    frames = make_frames(occupancy_matrix(log, 60), "take_medicine", 24)
    X, y = frames_to_arrays(frames)
    assert X.shape == (len(frames), 24, 2)
    assert y.shape == (len(frames),)
    assert X.dtype == np.float64
    assert np.all(y >= 1)


# ---------------------------------------------------------------------------
# window-context model
# ---------------------------------------------------------------------------

def _small_frames(days=20):
    log = _daily_med_log(days=days)
    matrix = occupancy_matrix(log, 120)
    return make_frames(matrix, "take_medicine", 12, stride=2)


def test_window_model_loss_decreases():
    frames = _small_frames()
    model = train_window_model(frames, ("take_medicine",), 120, hidden=8,
                               seed=3, max_epochs=12, batch_size=16)
    assert model.history[-1][0] < model.history[0][0]
    assert model.context_windows == 12
    yhat = predict_window_model(model, frames)
    assert yhat.shape == (len(frames),)
    assert np.all(yhat >= 1.0)
    assert window_model_rmse(model, frames) >= 0.0


def test_window_model_overfits_a_single_frame():
    frames = _small_frames()[:1]
    model = train_window_model(frames, ("take_medicine",), 120, hidden=8,
                               seed=1, max_epochs=400, patience=400, lr=0.02)
    yhat = predict_window_model(model, frames)
    assert abs(yhat[0] - frames[0].y) < 0.01


def test_window_model_predicted_instants_center_convention():
    frames = _small_frames()[:3]
    model = train_window_model(frames, ("take_medicine",), 120, hidden=4,
                               seed=0, max_epochs=2)
    instants = predicted_instants(model, frames)
    yhat = predict_window_model(model, frames)
    for inst, f, v in zip(instants, frames, yhat):
        assert inst == pytest.approx(f.context_end + (v - 0.5) * 120)


def test_window_model_needs_frames():
    with pytest.raises(InsufficientHistory):
        train_window_model([], ("take_medicine",), 30)


def test_fit_raises_on_nan_loss():
    reg = SequenceRegressor(2, hidden=4, seed=0)
    reg.params["head_w"][:] = np.nan
    X = np.zeros((4, 5, 2))
    y = np.zeros(4)
    with pytest.raises(DivergedLoss):
        _fit(reg, X, y, None, None, np.random.default_rng(0), 2, 5, 4, 1e-3)


# ---------------------------------------------------------------------------
# raw-entry model
# ---------------------------------------------------------------------------

def _mixed_log(days=15):
    entries = []
    for d in range(days):
        base = d * MINUTES_PER_DAY
        entries.append(LogEntry("eating", base + 420, base + 450))
        entries.append(LogEntry("take_medicine", base + 480, base + 481))
        entries.append(LogEntry("eating", base + 760, base + 790))
    return ActivityLog(tuple(entries))


def test_entry_features_padding_and_values():
    log = _mixed_log(days=2)
    X = entry_features(log.entries, log.behaviors, now=500, count=25)
    assert X.shape == (25, 5)
    assert np.all(X[:23] == 0.0)  # only two entries start before minute 500
    eat_row, med_row = X[23], X[24]
    assert eat_row[log.behaviors.index("eating")] == 1.0
    assert med_row[log.behaviors.index("take_medicine")] == 1.0
    assert med_row[2] == pytest.approx(480 / MINUTES_PER_DAY)
    assert eat_row[3] == pytest.approx(0.5)  # 30 minutes
    assert med_row[4] == pytest.approx(20 / MINUTES_PER_DAY)


def test_build_entry_examples_targets():
    log = _mixed_log(days=3)
    X, y, nows = build_entry_examples(log, "take_medicine", count=10)
    assert X.shape[1:] == (10, 5)
    assert len(y) == len(nows) == len(X)
    # first example: after breakfast on day 0, the dose is 30 minutes out
    assert nows[0] == 450
    assert y[0] == 30.0
    with pytest.raises(InsufficientHistory):
        build_entry_examples(log, "sleeping")


def test_entry_model_trains_and_predicts():
    log = _mixed_log()
    model = train_entry_model(log, "take_medicine", count=10, hidden=6,
                              seed=2, max_epochs=8)
    assert model.history
    pred = entry_model_predict(model, log, now=5 * MINUTES_PER_DAY, window=30)
    assert isinstance(pred, NextOccurrence)
    assert pred.at >= 5 * MINUTES_PER_DAY + 1
    assert pred.windows == pytest.approx((pred.at - 5 * MINUTES_PER_DAY) / 30)


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def test_window_model_file_round_trip(tmp_path):
    frames = _small_frames()
    model = train_window_model(frames, ("take_medicine",), 120, hidden=6,
                               seed=4, max_epochs=3)
    path = tmp_path / "window.model"
    save_model(model, path)
    with open(path, "rb") as fh:
        first = fh.readline()
    assert first.startswith(b"{")
    back = load_model(path)
    assert isinstance(back, WindowModel)
    assert back.behaviors == model.behaviors
    assert back.window == model.window
    assert np.array_equal(predict_window_model(back, frames),
                          predict_window_model(model, frames))


def test_entry_model_file_round_trip(tmp_path):
    log = _mixed_log()
    model = train_entry_model(log, "take_medicine", count=8, hidden=5,
                              seed=6, max_epochs=3)
    path = tmp_path / "entry.model"
    save_model(model, path)
    back = load_model(path)
    assert isinstance(back, EntryModel)
    now = 6 * MINUTES_PER_DAY
    assert entry_model_predict(back, log, now, 30) == entry_model_predict(model, log, now, 30)


def test_save_model_rejects_other_types(tmp_path):
    with pytest.raises(TypeError):
        save_model(object(), tmp_path / "x.model")
