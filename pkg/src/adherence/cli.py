"""Command line front end.

One subcommand per capability, plus ``run``, which chains them into a full
pipeline (simulate a cohort, extract constraints from a guideline, vectorize,
train, evaluate predictors, score violation detection, cohort metrics) and
writes a reproducible report bundle.  Pipeline stages are cached by content
hash in ``cache.json``; reruns skip stages whose inputs did not change.

Nothing here prints timestamps or machine-specific paths into the bundle, so
two runs from the same config and seed produce byte-identical output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from adherence.analytics import (
    cohort_regularity,
    schedule_vector,
    similarity_matrix,
    write_regularity_table,
    write_similarity_heatmap,
)
from adherence.constraints import (
    dump_constraints_file,
    load_constraints_file,
    serialize,
    to_record,
)
from adherence.extraction import evaluate_extraction, extract_from_guideline
from adherence.logs import (
    ActivityLog,
    MINUTES_PER_DAY,
    context_windows_for,
    iso_to_minutes,
    make_frames,
    minutes_to_iso,
    occupancy_matrix,
    parse_log_file,
    sparsity,
    split_frames,
    write_log_file,
    write_occupancy_file,
)
from adherence.predictors import (
    InsufficientHistory,
    NextOccurrence,
    ar_next_occurrence,
    entry_model_predict,
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
from adherence.rules import (
    RuleConfig,
    check_instant,
    check_log,
    evaluate_violations,
    is_placement,
)
from adherence.simulate import CohortSpec, simulate_cohort
from adherence.logs import PredictionFrame


def _fail(message: str) -> "SystemExit":
    print(f"error: {message}", file=sys.stderr)
    return SystemExit(2)


def _read_text(path: Path, what: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _fail(f"{what}: cannot read {path} ({exc.strerror})")


def _parse_instant(text: str) -> int:
    """Accept raw minutes or an ISO timestamp."""
    try:
        return int(text)
    except ValueError:
        return iso_to_minutes(text)


def _load_log(path: Path, behaviors=()) -> ActivityLog:
    if not path.exists():
        raise _fail(f"log file {path} does not exist")
    return parse_log_file(path, patient_id=path.stem, behaviors=behaviors)


# ---------------------------------------------------------------------------
# plain subcommands
# ---------------------------------------------------------------------------

def cmd_extract(args) -> int:
    text = _read_text(Path(args.input), "guideline")
    result = extract_from_guideline(text)
    lines = [serialize(c) for c in result.constraints()]
    if args.output == "-":
        for line in lines:
            print(line)
    else:
        Path(args.output).write_text("".join(l + "\n" for l in lines),
                                     encoding="utf-8")
    print(f"statements={len(result.statements)} constraints={len(lines)} "
          f"tags={','.join(sorted(result.tag_set())) or '-'}", file=sys.stderr)
    return 0


def cmd_eval_extract(args) -> int:
    path = Path(args.corpus)
    predicted, gold = {}, {}
    for lineno, line in enumerate(_read_text(path, "corpus").splitlines(), 1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            doc_id, text, tags = doc["doc"], doc["text"], doc["gold"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise _fail(f"corpus line {lineno}: {exc}")
        gold[doc_id] = set(tags)
        predicted[doc_id] = extract_from_guideline(text).tag_set()
    report = evaluate_extraction(predicted, gold)
    print(report.as_text())
    return 0


def cmd_vectorize(args) -> int:
    log = _load_log(Path(args.log))
    matrix = occupancy_matrix(log, args.window)
    if args.output:
        write_occupancy_file(matrix, args.output)
    rows, cols = matrix.values.shape
    print(f"rows={rows} cols={cols} window={args.window} "
          f"sparsity={sparsity(matrix):.6f}")
    return 0


def cmd_train(args) -> int:
    log = _load_log(Path(args.log))
    if args.kind == "window":
        matrix = occupancy_matrix(log, args.window)
        context = context_windows_for(args.context_weeks, args.window)
        frames = make_frames(matrix, args.behavior, context, args.stride)
        model = train_window_model(
            frames, matrix.behaviors, args.window,
            hidden=args.hidden, pooling=args.pooling,
            bidirectional=not args.unidirectional, seed=args.seed,
            max_epochs=args.epochs, patience=args.patience,
            batch_size=args.batch, lr=args.lr)
        print(f"frames={len(frames)} context_windows={context}")
    else:
        model = train_entry_model(
            log, args.behavior, count=args.count, hidden=args.hidden,
            seed=args.seed, max_epochs=args.epochs, patience=args.patience,
            batch_size=args.batch, lr=args.lr)
    save_model(model, args.model)
    train_loss, val_loss = model.history[-1]
    print(f"epochs={len(model.history)} train_loss={train_loss:.6f} "
          f"val_loss={val_loss:.6f} model={args.model}")
    return 0


def cmd_predict(args) -> int:
    log = _load_log(Path(args.log))
    now = _parse_instant(args.now)
    if args.method == "prior-day":
        pred = prior_day_predict(log, args.behavior, now, args.window)
    elif args.method == "ar":
        pred = ar_next_occurrence(log, args.behavior, now, args.window)
    else:
        if not args.model:
            raise _fail("--model is required unless --method is prior-day or ar")
        model = load_model(args.model)
        pred = entry_model_predict(model, log, now, args.window) \
            if hasattr(model, "count") else _window_model_next(model, log, now)
    print(f"at={minutes_to_iso(int(round(pred.at)))} "
          f"minutes_ahead={pred.at - now:.1f} windows={pred.windows:.3f}")
    return 0


def _window_model_next(model, log: ActivityLog, now: int):
    """Predict from the context block ending at (or just before) ``now``."""
    matrix = occupancy_matrix(log, model.window)
    boundary = (now - matrix.origin) // model.window
    context = model.context_windows
    if boundary < context:
        raise InsufficientHistory(
            f"need {context} context windows before {minutes_to_iso(now)}")
    boundary = min(boundary, matrix.values.shape[1])
    frame = PredictionFrame(
        behavior="", offset=int(boundary - context), y=0,
        context=matrix.values[:, boundary - context:boundary],
        context_end=int(matrix.origin + boundary * model.window))
    at = predicted_instants(model, [frame])[0]
    windows = predict_window_model(model, [frame])[0]
    return NextOccurrence(at=at, windows=float(windows))


def cmd_eval(args) -> int:
    log = _load_log(Path(args.log))
    model = load_model(args.model)
    matrix = occupancy_matrix(log, model.window)
    frames = make_frames(matrix, args.behavior, model.context_windows,
                         args.stride)
    _, test = split_frames(frames, fraction=args.split)
    usable = _usable_frames(log, args.behavior, test)
    if not usable:
        raise _fail("no evaluable frames in the held-out fraction")
    rows = _method_rmse_rows(model, [(log, usable)], args.behavior)
    print(f"{'method':<14}{'frames':>8}{'rmse_windows':>14}")
    for name, count, value in rows:
        print(f"{name:<14}{count:>8}{value:>14.4f}")
    return 0


def cmd_check_violations(args) -> int:
    log = _load_log(Path(args.log))
    constraints = load_constraints_file(args.constraints)
    config = RuleConfig(target=args.target, tolerance=args.tolerance)
    results = check_log(log, constraints, config)
    counts: dict = {}
    for res in results:
        tag = to_record(res.constraint)["type"]
        if not args.summary:
            date = minutes_to_iso(res.day * MINUTES_PER_DAY)[:10]
            print(f"{date}\t{tag}\t{res.verdict}")
        counts.setdefault(tag, {"violation": 0, "ok": 0, "indeterminate": 0})
        counts[tag][res.verdict] += 1
    for tag in sorted(counts):
        c = counts[tag]
        print(f"# {tag}: violation={c['violation']} ok={c['ok']} "
              f"indeterminate={c['indeterminate']}")
    return 0


def cmd_metrics(args) -> int:
    logs = [_load_log(Path(p)) for p in args.logs]
    values = [sparsity(occupancy_matrix(log, args.window)) for log in logs]
    labels = [log.patient_id for log in logs]
    scores = None
    if len(logs) >= 2:
        scores = cohort_regularity(logs, args.window)
        if args.heatmap:
            sims = similarity_matrix(
                [schedule_vector(log, args.window) for log in logs])
            write_similarity_heatmap(sims, labels, args.heatmap)
        if args.regularity:
            write_regularity_table(scores, labels, args.regularity)
    print(f"{'patient':<12}{'entries':>8}{'sparsity':>10}{'regularity':>12}")
    for i, log in enumerate(logs):
        reg = f"{scores[i]:>12.4f}" if scores is not None else f"{'-':>12}"
        print(f"{labels[i]:<12}{len(log.entries):>8}{values[i]:>10.4f}{reg}")
    return 0


def cmd_simulate(args) -> int:
    spec = CohortSpec.from_file(args.spec)
    constraints = load_constraints_file(args.constraints) if args.constraints else []
    cohort = simulate_cohort(spec, constraints)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for patient in cohort.patients:
        write_log_file(patient.log, out / f"{patient.patient_id}.jsonl")
    if constraints:
        tags = [to_record(c)["type"] for c in constraints]
        with open(out / "ledger.tsv", "w", encoding="utf-8") as fh:
            fh.write("patient\tdate\tconstraint\ttag\tverdict\n")
            for patient in cohort.patients:
                for rec in patient.ledger:
                    date = minutes_to_iso(rec.day * MINUTES_PER_DAY)[:10]
                    fh.write(f"{patient.patient_id}\t{date}\t"
                             f"{rec.constraint_index}\t{tags[rec.constraint_index]}"
                             f"\t{rec.verdict}\n")
    total = sum(len(p.log.entries) for p in cohort.patients)
    print(f"patients={len(cohort.patients)} entries={total} out={out}")
    return 0


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def _hash_obj(obj) -> str:
    payload = json.dumps(obj, sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def _hash_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Cache:
    """Content-hash stage cache stored next to the pipeline outputs."""

    def __init__(self, path: Path, force: bool = False):
        self.path = path
        self.force = force
        self.entries = {}
        if path.exists() and not force:
            self.entries = json.loads(path.read_text(encoding="utf-8"))

    def stage(self, name: str, key_obj, outputs, builder) -> None:
        key = _hash_obj(key_obj)
        rel = [str(p.relative_to(self.path.parent)) for p in outputs]
        cached = self.entries.get(name)
        if (not self.force and cached and cached.get("key") == key
                and all((self.path.parent / p).exists() for p in cached["outputs"])):
            print(f"[{name}] cached")
            return
        builder()
        missing = [p for p in outputs if not p.exists()]
        if missing:
            raise _fail(f"stage {name} did not produce {missing[0]}")
        self.entries[name] = {"key": key, "outputs": rel}
        print(f"[{name}] built")

    def save(self) -> None:
        self.path.write_text(
            json.dumps(self.entries, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")


TRAIN_DEFAULTS = {
    "hidden": 16, "pooling": "mean", "bidirectional": True, "seed": 0,
    "max_epochs": 8, "patience": 4, "batch_size": 32, "lr": 2e-3,
    "stride": 4, "val_fraction": 0.1,
}


def _usable_frames(log: ActivityLog, behavior: str, frames) -> list:
    """Frames with enough history for every predictor (AR needs 3 starts)."""
    starts = [e.start for e in log.occurrences(behavior)]
    return [f for f in frames
            if sum(1 for s in starts if s < f.context_end) >= 3]


def _method_rmse_rows(model, per_patient, behavior: str) -> list:
    """Pooled test RMSE for the trained model and both baselines.

    ``per_patient`` holds (log, frames) pairs; pooling weights every frame
    equally across patients.
    """
    total = sum(len(frames) for _, frames in per_patient)
    rows = []
    pooled = [f for _, frames in per_patient for f in frames]
    rows.append(("window_model", total, window_model_rmse(model, pooled)))
    for name, predictor in (("prior_day", prior_day_predict),
                            ("ar", ar_next_occurrence)):
        squares = 0.0
        for log, frames in per_patient:
            if not frames:
                continue
            rmse = next_occurrence_rmse(
                lambda now, log=log: predictor(log, behavior, now, model.window),
                frames, model.window)
            squares += rmse * rmse * len(frames)
        rows.append((name, total, float(np.sqrt(squares / total))))
    return rows


def _predicted_day_verdicts(model, log: ActivityLog, constraints, config,
                            first_day: int, last_day: int) -> dict:
    """check_instant verdicts per (constraint index, day) from model output."""
    matrix = occupancy_matrix(log, model.window)
    by_day: dict = {}
    for e in log.entries:
        by_day.setdefault(e.start // MINUTES_PER_DAY, {}).setdefault(
            e.behavior, []).append(e.start)
    verdicts = {}
    for day in range(first_day, last_day + 1):
        midnight = day * MINUTES_PER_DAY
        boundary = (midnight - matrix.origin) // model.window
        if boundary < model.context_windows or boundary > matrix.values.shape[1]:
            continue
        frame = PredictionFrame(
            behavior="", offset=int(boundary - model.context_windows), y=0,
            context=matrix.values[:, boundary - model.context_windows:boundary],
            context_end=int(matrix.origin + boundary * model.window))
        instant = predicted_instants(model, [frame])[0]
        activities = {b: tuple(t) for b, t in by_day.get(day, {}).items()
                      if b != config.target}
        prev = by_day.get(day - 1, {}).get(config.target)
        reference = (prev[0] % MINUTES_PER_DAY) if prev else None
        for index, verdict in zip(
                range(len(constraints)),
                check_instant(constraints, instant, activities, config,
                              reference_clock=reference)):
            verdicts[(index, day)] = verdict
    return verdicts


def cmd_run(args) -> int:
    config_path = Path(args.config)
    if not config_path.exists():
        raise _fail(f"pipeline config {config_path} does not exist")
    config = json.loads(config_path.read_text(encoding="utf-8"))
    for key in ("guideline", "cohort"):
        if key not in config:
            raise _fail(f"pipeline config is missing {key!r}")
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache = _Cache(out / "cache.json", force=args.force)

    window = int(config.get("window", 30))
    context_weeks = int(config.get("context_weeks", 1))
    context = context_windows_for(context_weeks, window)
    holdout = float(config.get("holdout_fraction", 0.25))
    train_cfg = dict(TRAIN_DEFAULTS)
    train_cfg.update(config.get("train", {}))
    rule_config = RuleConfig(target=config.get("target", "take_medicine"),
                             tolerance=int(config.get("tolerance", 15)))

    guideline_path = config_path.parent / config["guideline"]
    if not guideline_path.exists():
        raise _fail(f"guideline {guideline_path} does not exist")
    guideline = guideline_path.read_text(encoding="utf-8")

    # extract constraints from the guideline text
    constraints_path = out / "constraints.jsonl"
    cache.stage(
        "extract", {"guideline": _hash_obj(guideline)}, [constraints_path],
        lambda: dump_constraints_file(
            extract_from_guideline(guideline).constraints(), constraints_path))
    constraints = load_constraints_file(constraints_path)
    tags = [to_record(c)["type"] for c in constraints]

    # simulate the cohort
    spec = CohortSpec.from_dict(config["cohort"])
    width = len(str(max(spec.patients - 1, 1)))
    patient_ids = [f"p{i:0{width}d}" for i in range(spec.patients)]
    logs_dir = out / "logs"
    log_paths = [logs_dir / f"{pid}.jsonl" for pid in patient_ids]

    def build_simulate():
        logs_dir.mkdir(exist_ok=True)
        for patient in simulate_cohort(spec).patients:
            write_log_file(patient.log, logs_dir / f"{patient.patient_id}.jsonl")

    cache.stage("simulate", {"spec": spec.to_dict()}, log_paths, build_simulate)
    behaviors = tuple(sorted(t.name for t in spec.behaviors))
    logs = [parse_log_file(p, patient_id=p.stem, behaviors=behaviors)
            for p in log_paths]
    log_hashes = [_hash_file(p) for p in log_paths]

    # occupancy artifacts
    occ_dir = out / "occupancy"
    occ_paths = [occ_dir / f"{pid}.occ" for pid in patient_ids]

    def build_vectorize():
        occ_dir.mkdir(exist_ok=True)
        for log, path in zip(logs, occ_paths):
            write_occupancy_file(occupancy_matrix(log, window), path)

    cache.stage("vectorize", {"logs": log_hashes, "window": window},
                occ_paths, build_vectorize)

    # frames, split per patient so no patient's future leaks into training
    matrices = [occupancy_matrix(log, window) for log in logs]
    per_train, per_val, per_test = [], [], []
    for log, matrix in zip(logs, matrices):
        frames = make_frames(matrix, rule_config.target, context,
                             int(train_cfg["stride"]))
        train, test = split_frames(frames, fraction=1.0 - holdout)
        cut = max(1, int(len(train) * (1.0 - float(train_cfg["val_fraction"]))))
        per_train.append(train[:cut])
        per_val.append(train[cut:])
        per_test.append((log, _usable_frames(log, rule_config.target, test)))

    model_path = out / "model.bin"
    train_key = {"logs": log_hashes, "window": window, "context": context,
                 "holdout": holdout, "target": rule_config.target,
                 "train": {k: train_cfg[k] for k in sorted(train_cfg)}}

    def build_train():
        model = train_window_model(
            [f for part in per_train for f in part], behaviors, window,
            val_frames=[f for part in per_val for f in part],
            hidden=int(train_cfg["hidden"]), pooling=str(train_cfg["pooling"]),
            bidirectional=bool(train_cfg["bidirectional"]),
            seed=int(train_cfg["seed"]), max_epochs=int(train_cfg["max_epochs"]),
            patience=int(train_cfg["patience"]),
            batch_size=int(train_cfg["batch_size"]), lr=float(train_cfg["lr"]))
        save_model(model, model_path)

    cache.stage("train", train_key, [model_path], build_train)
    model = load_model(model_path)
    model_hash = _hash_file(model_path)

    # predictor comparison on held-out frames
    rmse_path = out / "rmse.tsv"

    def build_rmse():
        rows = _method_rmse_rows(model, per_test, rule_config.target)
        with open(rmse_path, "w", encoding="utf-8") as fh:
            fh.write("method\tframes\trmse_windows\n")
            for name, count, value in rows:
                fh.write(f"{name}\t{count}\t{value:.6f}\n")

    cache.stage("evaluate", {"model": model_hash, "logs": log_hashes},
                [rmse_path], build_rmse)
    rmse = {}
    for line in rmse_path.read_text(encoding="utf-8").splitlines()[1:]:
        name, _, value = line.split("\t")
        rmse[name] = float(value)

    # violation detection from predicted dose instants, placement rules only
    placement = [(i, c) for i, c in enumerate(constraints) if is_placement(c)]
    violations_tsv = out / "violations.tsv"
    violations_json = out / "violations.json"

    def build_violations():
        pairs = []
        lines = ["patient\tdate\ttag\tpredicted\tactual"]
        actual_counts: dict = {}
        for log, test_frames in per_test:
            if not test_frames:
                continue
            first_day = min(f.context_end for f in test_frames) // MINUTES_PER_DAY + 1
            last_day = log.span[1] // MINUTES_PER_DAY
            actual = {}
            for index, constraint in enumerate(constraints):
                for res in check_log(log, [constraint], rule_config):
                    actual[(index, res.day)] = res.verdict
                    if first_day <= res.day <= last_day:
                        tag_counts = actual_counts.setdefault(
                            tags[index],
                            {"violation": 0, "ok": 0, "indeterminate": 0})
                        tag_counts[res.verdict] += 1
            predicted = _predicted_day_verdicts(
                model, log, [c for _, c in placement], rule_config,
                first_day, last_day)
            for slot, (index, _) in enumerate(placement):
                for day in range(first_day, last_day + 1):
                    if (slot, day) not in predicted or (index, day) not in actual:
                        continue
                    pred, act = predicted[(slot, day)], actual[(index, day)]
                    pairs.append((tags[index], pred, act))
                    date = minutes_to_iso(day * MINUTES_PER_DAY)[:10]
                    lines.append(f"{log.patient_id}\t{date}\t{tags[index]}"
                                 f"\t{pred}\t{act}")
        report = evaluate_violations(pairs)
        violations_tsv.write_text("".join(l + "\n" for l in lines),
                                  encoding="utf-8")
        summary = {
            "weighted_precision": round(report.weighted_precision, 6),
            "weighted_recall": round(report.weighted_recall, 6),
            "f1": round(report.f1, 6),
            "evaluated": report.evaluated,
            "excluded": report.excluded,
            "per_type": {
                s.tag: {"precision": round(s.precision, 6),
                        "recall": round(s.recall, 6),
                        "f1": round(s.f1, 6), "support": s.support,
                        "evaluated": s.evaluated, "excluded": s.excluded}
                for s in report.per_type},
            "actual_verdicts": actual_counts,
        }
        violations_json.write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")

    cache.stage("check", {"model": model_hash, "logs": log_hashes,
                          "constraints": _hash_file(constraints_path),
                          "target": rule_config.target,
                          "tolerance": rule_config.tolerance},
                [violations_tsv, violations_json], build_violations)
    violations_summary = json.loads(violations_json.read_text(encoding="utf-8"))

    # cohort metrics
    heatmap_path = out / "similarity.tsv"
    regularity_path = out / "regularity.tsv"

    def build_metrics():
        vectors = [schedule_vector(log, window) for log in logs]
        write_similarity_heatmap(similarity_matrix(vectors), patient_ids,
                                 heatmap_path)
        write_regularity_table(cohort_regularity(logs, window), patient_ids,
                               regularity_path)

    cache.stage("metrics", {"logs": log_hashes, "window": window},
                [heatmap_path, regularity_path], build_metrics)

    # summary report
    report_path = out / "report.json"
    scores = cohort_regularity(logs, window)
    report = {
        "window": window,
        "context_windows": context,
        "constraints": [serialize(c) for c in constraints],
        "patients": patient_ids,
        "rmse": {name: round(value, 6) for name, value in rmse.items()},
        "test_frames": sum(len(f) for _, f in per_test),
        "violations": violations_summary,
        "sparsity": {pid: round(sparsity(m), 6)
                     for pid, m in zip(patient_ids, matrices)},
        "regularity": {pid: round(float(s), 6)
                       for pid, s in zip(patient_ids, scores)},
    }
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")
    cache.save()
    print(f"[report] {report_path}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_train_flags(p, hidden: int) -> None:
    p.add_argument("--hidden", type=int, default=hidden)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adherence",
        description="Temporal medication constraints: extraction, behavior "
                    "log modeling, and violation detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract constraints from guideline text")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval-extract", help="score extraction on a labeled corpus")
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_eval_extract)

    p = sub.add_parser("vectorize", help="build the occupancy matrix for a log")
    p.add_argument("--log", required=True)
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--output")
    p.set_defaults(func=cmd_vectorize)

    p = sub.add_parser("train", help="train a next-occurrence model")
    p.add_argument("--log", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--kind", choices=("window", "entry"), default="window")
    p.add_argument("--behavior", default="take_medicine")
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--context-weeks", type=int, default=1)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--count", type=int, default=25,
                   help="entry model: recent entries fed to the model")
    p.add_argument("--pooling", choices=("mean", "last"), default="mean")
    p.add_argument("--unidirectional", action="store_true")
    _add_train_flags(p, hidden=32)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict the next occurrence")
    p.add_argument("--log", required=True)
    p.add_argument("--now", required=True, help="minutes or ISO timestamp")
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--behavior", default="take_medicine")
    p.add_argument("--model")
    p.add_argument("--method", choices=("model", "prior-day", "ar"),
                   default="model")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="compare predictors on held-out frames")
    p.add_argument("--log", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--behavior", default="take_medicine")
    p.add_argument("--split", type=float, default=0.75,
                   help="fraction of frames used for training (skipped here)")
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check-violations", help="judge a log against constraints")
    p.add_argument("--log", required=True)
    p.add_argument("--constraints", required=True)
    p.add_argument("--target", default="take_medicine")
    p.add_argument("--tolerance", type=int, default=15)
    p.add_argument("--summary", action="store_true",
                   help="print only the per-type counts")
    p.set_defaults(func=cmd_check_violations)

    p = sub.add_parser("metrics", help="sparsity and cohort regularity")
    p.add_argument("logs", nargs="+")
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--heatmap", help="write the similarity matrix here")
    p.add_argument("--regularity", help="write the regularity table here")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("simulate", help="generate a synthetic cohort")
    p.add_argument("--spec", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--constraints",
                   help="also write a per-day violation ledger")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="full pipeline into a report bundle")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--force", action="store_true",
                   help="ignore the stage cache and rebuild everything")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
