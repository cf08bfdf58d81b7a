"""Benchmark orchestration: policy x scenario runs, oracles, baselines.

The run command executes every configured (policy, scene) pair and
writes, under the output directory:

- ``metrics.csv`` with schema
  ``suite,family,seed,policy,success_auc,np,p,ao,sr50,sr75,q,acc,rob``;
- ``aggregate.json`` with per-policy and per-policy-per-family means;
- ``plots/success_<policy>.csv`` threshold-to-rate series;
- ``logs/<policy>/<family>_<seed>.jsonl`` per-frame result logs;
- ``manifest.json`` recording config digests, seeds, paths, versions
  (the manifest is the only file carrying a timestamp).

All outputs are deterministic functions of the config: rows are sorted
before writing, floats are serialized with ``repr``, and files land via
temp-then-rename so partially written output never survives.

Config files are JSON with this key tree (every leaf optional)::

    suite        "standard"                  named scenario suite
    n_seeds      20                          seeds per suite family
    policies     [six policy names]          which trackers to run
    k_ram, k_drm 6, 3                        memory capacities
    policy       {PolicyConfig fields}       threshold/weight overrides
    motion       {MotionConfig fields}
    drm          {DrmConfig fields}
    scenes       [SceneConfig dicts]         replaces the named suite

CLI flags override file values: ``--policy`` filters the policy list and
``--set key=value`` assigns dotted paths (``--set policy.alpha=0.4``).

The oracle command materializes brute-force expected values (rasterized
IoU, dense filter recursions, exhaustive pathway enumerations, full-sort
top-k, selection replays), the golden sequence fixtures, and the locked
distractor-family baseline; the test suite consumes those files and a
disagreement always means the library regressed, never that the oracle
should be rewritten. The compare command diffs two metrics CSVs cell by
cell with an optional tolerance.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import BitMask
from .membank import DrmConfig
from .metrics import SUCCESS_THRESHOLDS, evaluate, success_curve
from .motion import MotionConfig
from .oracles import (
    DenseKalmanOracle,
    dense_box_iou,
    dense_mask_iou,
    exhaustive_best_trajectory,
    him_choice_oracle,
    samurai_choice_oracle,
    topk_window_oracle,
)
from .policies import PolicyConfig
from .selection import PolicyKind, TrackerConfig, TrackerSession, frame_result_to_line
from .simulator import (
    MotionSpec,
    SceneConfig,
    config_from_dict,
    config_to_dict,
    gen_sequence,
    suite_standard,
    write_record,
)

__all__ = [
    "default_config",
    "load_config",
    "apply_overrides",
    "config_digest",
    "scene_list",
    "tracker_config_from",
    "run_scene",
    "cmd_run",
    "cmd_oracle",
    "cmd_compare",
    "CSV_HEADER",
    "ALL_POLICY_NAMES",
    "WORKERS_ENV",
]

CSV_HEADER = ["suite", "family", "seed", "policy", "success_auc", "np", "p",
              "ao", "sr50", "sr75", "q", "acc", "rob"]
ALL_POLICY_NAMES = [p.value for p in PolicyKind]
WORKERS_ENV = "TRACKMEM_WORKERS"

# Scaled-down scene per suite family; these generate the golden fixtures.
FIXTURE_SCENES = [
    SceneConfig(seed=11, frames=30, grid=(64, 64),
                target_motion=MotionSpec(kind="linear", speed=1.5, size=(16.0, 12.0)),
                n_distractors=1, distractor_similarity=0.5,
                occlusions=((12, 20),), proto_dim=4, family="occlusion"),
    SceneConfig(seed=12, frames=30, grid=(64, 64),
                target_motion=MotionSpec(kind="sinusoid", amplitude=16.0,
                                         frequency=0.15, size=(16.0, 12.0)),
                n_distractors=1, distractor_similarity=0.3,
                proto_dim=4, family="fast_motion"),
    SceneConfig(seed=13, frames=30, grid=(64, 64),
                target_motion=MotionSpec(kind="linear", speed=1.5, size=(16.0, 12.0)),
                n_distractors=2, distractor_similarity=0.9,
                score_noise=0.06, proto_dim=4, family="distractor"),
]


# --- config handling ---------------------------------------------------------


def default_config() -> dict:
    return {
        "suite": "standard",
        "n_seeds": 20,
        "policies": list(ALL_POLICY_NAMES),
        "k_ram": 6,
        "k_drm": 3,
        "policy": {},
        "motion": {},
        "drm": {},
    }


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending key."""


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        loaded = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    cfg = default_config()
    cfg.update(loaded)
    _validate_config(cfg, str(path))
    return cfg


def _validate_config(cfg: dict, origin: str) -> None:
    for name in cfg.get("policies", []):
        if name not in ALL_POLICY_NAMES:
            raise ConfigError(
                f"{origin}: unknown policy {name!r}; valid: {', '.join(ALL_POLICY_NAMES)}")
    for section, cls in (("policy", PolicyConfig), ("motion", MotionConfig),
                         ("drm", DrmConfig)):
        try:
            cls(**cfg.get(section, {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{origin}: bad {section!r} section: {exc}") from exc
    if cfg.get("suite", "standard") != "standard" and "scenes" not in cfg:
        raise ConfigError(f"{origin}: unknown suite {cfg['suite']!r} and no scenes given")


def apply_overrides(cfg: dict, sets: list[str]) -> dict:
    """Apply dotted-path ``key=value`` assignments; values parse as JSON."""
    out = json.loads(json.dumps(cfg))  # deep copy
    for item in sets:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    _validate_config(out, "--set override")
    return out


def config_digest(obj) -> str:
    """Stable digest: canonical JSON (sorted keys) hashed with sha256."""
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def scene_list(cfg: dict) -> list[SceneConfig]:
    if "scenes" in cfg:
        return [config_from_dict(d) for d in cfg["scenes"]]
    return suite_standard(n_seeds=cfg.get("n_seeds", 20))


def tracker_config_from(cfg: dict, policy_name: str) -> TrackerConfig:
    return TrackerConfig(
        policy=PolicyKind(policy_name),
        k_ram=cfg.get("k_ram", 6),
        k_drm=cfg.get("k_drm", 3),
        policy_cfg=PolicyConfig(**cfg.get("policy", {})),
        motion_cfg=MotionConfig(**cfg.get("motion", {})),
        drm_cfg=DrmConfig(**cfg.get("drm", {})),
    )


# --- running -------------------------------------------------------------------


def run_scene(record, tracker_cfg: TrackerConfig):
    """Run one session over a generated scene.

    Returns (EvalOutcome, success curve, frame results).
    """
    session = TrackerSession(tracker_cfg, record.init_mask)
    results = session.run(record.observations)
    pred = [
        r.chosen.bbox if (r.present and r.chosen is not None) else None
        for r in results
    ]
    present = [r.present for r in results]
    outcome = evaluate(pred, present, record.gt_boxes, record.gt_visible)
    curve = success_curve(pred, record.gt_boxes)
    return outcome, curve, results


def _scene_job(args: tuple[dict, dict, list[str]]):
    """Worker-pool unit: one scene against every requested policy."""
    scene_dict, run_cfg, policy_names = args
    scene = config_from_dict(scene_dict)
    record = gen_sequence(scene)
    rows = []
    curves = {}
    logs = {}
    for name in policy_names:
        outcome, curve, results = run_scene(record, tracker_config_from(run_cfg, name))
        rows.append({
            "suite": run_cfg.get("suite", "standard"),
            "family": scene.family,
            "seed": scene.seed,
            "policy": name,
            "outcome": outcome,
        })
        curves[name] = curve
        logs[name] = "".join(frame_result_to_line(r) + "\n" for r in results)
    return scene.family, scene.seed, rows, curves, logs


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _format_row(row: dict) -> list[str]:
    o = row["outcome"]
    return [
        row["suite"], row["family"], str(row["seed"]), row["policy"],
        repr(o.success_auc), repr(o.norm_precision_auc), repr(o.precision_at_20),
        repr(o.ao), repr(o.sr50), repr(o.sr75), repr(o.q), repr(o.acc), repr(o.rob),
    ]


_METRIC_FIELDS = ["success_auc", "norm_precision_auc", "precision_at_20",
                  "ao", "sr50", "sr75", "q", "acc", "rob"]


def _aggregate(rows: list[dict]) -> dict:
    per_policy: dict[str, dict] = {}
    per_policy_family: dict[str, dict] = {}
    for row in rows:
        per_policy.setdefault(row["policy"], []).append(row["outcome"])
        per_policy_family.setdefault(row["policy"], {}).setdefault(
            row["family"], []).append(row["outcome"])

    def means(outcomes) -> dict:
        return {
            field: float(np.mean([getattr(o, field) for o in outcomes]))
            for field in _METRIC_FIELDS
        }

    return {
        "per_policy": {p: means(v) for p, v in sorted(per_policy.items())},
        "per_policy_family": {
            p: {f: means(v) for f, v in sorted(fams.items())}
            for p, fams in sorted(per_policy_family.items())
        },
    }


def run_benchmark(cfg: dict, out_dir, policy_filter: list[str] | None = None,
                  workers: int | None = None) -> dict:
    """Execute the configured matrix and write all outputs.

    Returns the aggregate dict (also written to aggregate.json).
    """
    out = Path(out_dir)
    policy_names = [p for p in cfg["policies"]
                    if policy_filter is None or p in policy_filter]
    if policy_filter:
        for name in policy_filter:
            if name not in ALL_POLICY_NAMES:
                raise ConfigError(f"unknown policy {name!r}; valid: "
                                  f"{', '.join(ALL_POLICY_NAMES)}")
    scenes = scene_list(cfg)
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))

    jobs = [(config_to_dict(s), cfg, policy_names) for s in scenes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            job_results = list(pool.map(_scene_job, jobs))
    else:
        job_results = [_scene_job(j) for j in jobs]

    rows: list[dict] = []
    curve_acc: dict[str, list[np.ndarray]] = {}
    for family, seed, scene_rows, curves, logs in job_results:
        rows.extend(scene_rows)
        for name, curve in curves.items():
            curve_acc.setdefault(name, []).append(curve)
        for name, text in logs.items():
            _atomic_write(out / "logs" / name / f"{family}_{seed}.jsonl", text)

    rows.sort(key=lambda r: (r["family"], r["seed"], r["policy"]))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(_format_row(row))
    _atomic_write(out / "metrics.csv", buf.getvalue())

    aggregate = _aggregate(rows)
    _atomic_write(out / "aggregate.json",
                  json.dumps(aggregate, indent=2, sort_keys=True) + "\n")

    for name in policy_names:
        mean_curve = np.mean(np.stack(curve_acc[name]), axis=0)
        lines = ["threshold,rate"]
        lines += [f"{repr(float(t))},{repr(float(r))}"
                  for t, r in zip(SUCCESS_THRESHOLDS, mean_curve)]
        _atomic_write(out / "plots" / f"success_{name}.csv", "\n".join(lines) + "\n")

    manifest = {
        "tool_version": __version__,
        "created_unix": time.time(),
        "suite": cfg.get("suite", "standard"),
        "config_digest": config_digest(cfg),
        "policies": [
            {"name": name,
             "config_digest": config_digest({
                 "policy": name, "k_ram": cfg.get("k_ram", 6),
                 "k_drm": cfg.get("k_drm", 3),
                 "policy_cfg": cfg.get("policy", {}),
                 "motion_cfg": cfg.get("motion", {}),
                 "drm_cfg": cfg.get("drm", {}),
             })}
            for name in policy_names
        ],
        "seeds": sorted({s.seed for s in scenes}),
        "paths": {
            "metrics": "metrics.csv",
            "aggregate": "aggregate.json",
            "plots": [f"plots/success_{name}.csv" for name in policy_names],
            "logs": "logs/",
        },
    }
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return aggregate


def cmd_run(config_path, out_dir, policy_filter: list[str] | None = None,
            sets: list[str] | None = None, workers: int | None = None) -> int:
    try:
        cfg = load_config(config_path)
        if sets:
            cfg = apply_overrides(cfg, sets)
        run_benchmark(cfg, out_dir, policy_filter=policy_filter, workers=workers)
    except ConfigError as exc:
        print(f"error: {exc}")
        return 2
    print(f"run complete: {out_dir}")
    return 0


# --- oracle materialization ------------------------------------------------------


def _oracle_geometry(rng: np.random.Generator) -> dict:
    box_cases = []
    for _ in range(500):
        ax, ay = rng.integers(0, 40, size=2)
        aw, ah = rng.integers(0, 24, size=2)
        bx, by = rng.integers(0, 40, size=2)
        bw, bh = rng.integers(0, 24, size=2)
        a = (int(ax), int(ay), int(aw), int(ah))
        b = (int(bx), int(by), int(bw), int(bh))
        box_cases.append({"a": list(a), "b": list(b), "iou": dense_box_iou(a, b)})
    mask_cases = []
    for _ in range(100):
        da = rng.random((32, 32)) < 0.3
        db = rng.random((32, 32)) < 0.3
        mask_cases.append({
            "a": BitMask.from_dense(da).to_text(),
            "b": BitMask.from_dense(db).to_text(),
            "iou": dense_mask_iou(da, db),
        })
    return {"boxes": box_cases, "masks": mask_cases}


def _oracle_kalman(rng: np.random.Generator) -> dict:
    traces = []
    for _ in range(5):
        init = [float(v) for v in rng.uniform(10, 60, size=2)] + \
               [float(v) for v in rng.uniform(5, 25, size=2)]
        oracle = DenseKalmanOracle(tuple(init), 1e-2, 1e-1, 10.0)
        steps = []
        states = []
        for _ in range(50):
            oracle.predict()
            if rng.random() < 0.8:
                z = [float(v) for v in
                     (np.array(init) + rng.normal(0, 2.0, size=4))]
                z[2] = max(z[2], 1.0)
                z[3] = max(z[3], 1.0)
                oracle.update(tuple(z))
                steps.append({"op": "update", "box": z})
            else:
                steps.append({"op": "predict_only"})
            states.append({
                "mean": [float(v) for v in oracle.x],
                "cov": [float(v) for v in oracle.P.reshape(-1)],
            })
        traces.append({"init": init, "steps": steps, "states": states})
    return {"process_noise": 1e-2, "measurement_noise": 1e-1,
            "initial_cov_scale": 10.0, "traces": traces}


def _oracle_pathways(rng: np.random.Generator) -> dict:
    cases = []
    for frames in range(1, 7):
        for cap in (1, 2, 3):
            for _ in range(4):
                rows = [[float(v) for v in rng.random(3)] for _ in range(frames)]
                traj, score = exhaustive_best_trajectory(rows, 1e-6)
                cases.append({"s_mask_rows": rows, "P": cap, "epsilon": 1e-6,
                              "best_traj": list(traj), "best_score": score})
            # tie-heavy case from a coarse score alphabet
            rows = [[float(v) for v in rng.choice([0.2, 0.5, 0.9], size=3)]
                    for _ in range(frames)]
            traj, score = exhaustive_best_trajectory(rows, 1e-6)
            cases.append({"s_mask_rows": rows, "P": cap, "epsilon": 1e-6,
                          "best_traj": list(traj), "best_score": score})
    return {"cases": cases}


def _oracle_topk(rng: np.random.Generator) -> dict:
    cases = []
    for _ in range(200):
        n = int(rng.integers(0, 14))
        frames = sorted(rng.choice(np.arange(1, 40), size=n, replace=False).tolist()) \
            if n else []
        scores = [float(v) for v in rng.choice([0.1, 0.4, 0.7, 0.7, 0.9], size=n)]
        k = int(rng.integers(1, 7))
        selected = topk_window_oracle(list(zip(frames, scores)), k)
        cases.append({"frames": frames, "scores": scores, "k": k,
                      "selected": selected})
    return {"cases": cases}


def _oracle_choices(rng: np.random.Generator) -> dict:
    samurai = []
    for _ in range(300):
        s_mask = [float(v) for v in rng.random(3)]
        s_obj = [float(v) for v in rng.uniform(-1, 1, size=3)]
        s_kf = [float(v) for v in rng.random(3)]
        alpha = float(rng.choice([0.0, 0.25, 0.5, 1.0]))
        choice = samurai_choice_oracle(s_mask, s_obj, s_kf, alpha)
        samurai.append({"s_mask": s_mask, "s_obj": s_obj, "s_kf": s_kf,
                        "alpha": alpha, "choice": choice})
    him = []
    for _ in range(300):
        s_coarse = [float(v) for v in rng.random(3)]
        s_fine = [float(v) for v in rng.random(3)]
        s_iou = [float(v) for v in rng.random(3)]
        alpha, beta, tau = 0.4, 0.3, float(rng.choice([0.3, 0.5, 0.7]))
        idx, conf, used_fine = him_choice_oracle(s_coarse, s_fine, s_iou, alpha, beta, tau)
        him.append({"s_coarse": s_coarse, "s_fine": s_fine, "s_iou": s_iou,
                    "alpha": alpha, "beta": beta, "tau_conf": tau,
                    "choice": idx, "conf": conf, "used_fine": used_fine})
    return {"samurai": samurai, "him": him}


def _capture_distractor_baseline(n_seeds: int = 20) -> dict:
    """Mean AO per policy on the frozen distractor-heavy family."""
    scenes = [s for s in suite_standard(n_seeds=n_seeds) if s.family == "distractor"]
    cfg = default_config()
    per_seed: dict[str, dict[str, float]] = {name: {} for name in ALL_POLICY_NAMES}
    for scene in scenes:
        record = gen_sequence(scene)
        for name in ALL_POLICY_NAMES:
            outcome, _, _ = run_scene(record, tracker_config_from(cfg, name))
            per_seed[name][str(scene.seed)] = outcome.ao
    mean_ao = {name: float(np.mean(list(vals.values())))
               for name, vals in per_seed.items()}
    return {"family": "distractor", "n_seeds": n_seeds,
            "mean_ao": mean_ao, "per_seed": per_seed}


def cmd_oracle(out_dir) -> int:
    """Materialize oracle expectations, fixtures, and locked baselines."""
    out = Path(out_dir)
    rng = np.random.Generator(np.random.Philox(key=20240601))

    def dump(rel: str, payload: dict) -> None:
        _atomic_write(out / rel, json.dumps(payload, sort_keys=True,
                                            separators=(",", ":")) + "\n")

    dump("oracle/geometry.json", _oracle_geometry(rng))
    dump("oracle/kalman.json", _oracle_kalman(rng))
    dump("oracle/pathways.json", _oracle_pathways(rng))
    dump("oracle/topk.json", _oracle_topk(rng))
    dump("oracle/choices.json", _oracle_choices(rng))

    (out / "golden" / "sequences").mkdir(parents=True, exist_ok=True)
    for scene in FIXTURE_SCENES:
        record = gen_sequence(scene)
        base = out / "golden" / "sequences" / scene.family
        write_record(record, f"{base}.obs.jsonl", f"{base}.gt.jsonl")

    # golden trace: the motion-gated tracker on the occlusion fixture
    record = gen_sequence(FIXTURE_SCENES[0])
    _, _, results = run_scene(record, tracker_config_from(default_config(), "samurai_drm"))
    _atomic_write(out / "golden" / "trace_samurai_drm.jsonl",
                  "".join(frame_result_to_line(r) + "\n" for r in results))

    suite_digest = config_digest([config_to_dict(s) for s in suite_standard()])
    _atomic_write(out / "golden" / "suite_digest.txt", suite_digest + "\n")

    dump("baselines/distractor_ao.json", _capture_distractor_baseline())
    print(f"oracle outputs written: {out}")
    return 0


# --- compare -----------------------------------------------------------------------


def cmd_compare(baseline_csv, new_csv, tol: float = 0.0) -> int:
    """Cell-wise diff of two metrics CSVs; 0 ok, 1 diff, 2 schema error."""
    try:
        with open(baseline_csv, newline="", encoding="utf-8") as fh:
            base_rows = list(csv.reader(fh))
        with open(new_csv, newline="", encoding="utf-8") as fh:
            new_rows = list(csv.reader(fh))
    except OSError as exc:
        print(f"error: {exc}")
        return 2
    if not base_rows or not new_rows or base_rows[0] != CSV_HEADER or new_rows[0] != CSV_HEADER:
        print("error: schema mismatch (bad or missing header)")
        return 2

    def key(row): return tuple(row[:4])

    base_map = {key(r): r for r in base_rows[1:]}
    new_map = {key(r): r for r in new_rows[1:]}
    status = 0
    for k in sorted(set(base_map) | set(new_map)):
        if k not in base_map or k not in new_map:
            print(f"diff: row {','.join(k)} present in only one file")
            status = 1
            continue
        for col, bval, nval in zip(CSV_HEADER[4:], base_map[k][4:], new_map[k][4:]):
            if abs(float(bval) - float(nval)) > tol:
                print(f"diff: row {','.join(k)} column {col}: {bval} -> {nval}")
                status = 1
    if status == 0:
        print("compare: identical within tolerance")
    return status
