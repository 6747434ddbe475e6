"""Experiment orchestration: strict JSON configuration, seeded multi-trial
execution, CSV and JSON result emission, and suspend/resume for the digit
experiment.

A configuration is a plain dict (or a path to a JSON file). Unknown keys
are rejected by name, defaults are filled in, and the resulting effective
config both round-trips through validation unchanged and hashes to a
stable identifier that is stamped on every output. Trials k = 0..n-1 run
with seeds seed, seed+1, ... and each writes one CSV with a fixed,
versioned column set; summary.json collects per-trial outcomes and
cross-trial aggregates. A trial that diverges (non-finite parameters) is
recorded with its diagnostic and the remaining trials still run.
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, idx
from .samplers import NonFiniteSampleError, TemperatureSchedule
from .oracles import run_oracle_suite
from .tasks.mnist import MnistConfig, run_mnist_experiment
from .tasks.reaching import ReachingConfig, run_reaching_experiment
from .tasks.sigmoid import SigmoidConfig, run_sigmoid_experiment
from .tasks.xor import XorConfig, run_xor_run

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "schema_version", "experiment", "trial_seed", "step", "time_s",
    "temperature", "reward", "success", "accuracy", "w0", "w1", "w2", "w3",
)
OUTPUT_DIR_ENV = "SYNSAMPLER_OUTPUT_DIR"
CHECKPOINT_FORMAT = "synsampler-checkpoint"

EXPERIMENTS = ("sigmoid", "reaching", "xor", "mnist", "oracle-suite")

_TOP_KEYS = {"experiment", "seed", "n_trials", "sampler", "schedule",
             "task", "output_dir", "log_stride", "max_ticks"}
_SAMPLER_KEYS = {"mode", "a", "b", "c", "beta", "dt"}
_SCHEDULE_KEYS = {"kind", "t0", "t_final", "duration"}


class ConfigError(ValueError):
    """A configuration that names unknown keys or inconsistent values."""


class CheckpointError(RuntimeError):
    """A checkpoint file that cannot be used: corrupt, wrong experiment,
    or written by a different package version."""


def _fields(cls) -> set:
    return {f.name for f in dataclasses.fields(cls)}


# Task-section keys per experiment: the task dataclass knobs plus the
# runner arguments that live outside the dataclass.
_TASK_KEYS = {
    "sigmoid": _fields(SigmoidConfig) | {"n_presentations"},
    "xor": _fields(XorConfig) | {"n_presentations", "record_every"},
    "reaching": _fields(ReachingConfig) | {"duration_s", "learning"},
    "mnist": _fields(MnistConfig) | {
        "switch_at", "switch_to", "checkpoint_at",
        "data_dir", "n_train", "n_test",
    },
    "oracle-suite": {"n_episodes"},
}

# Sampler-section knobs accepted per experiment and the task knob each one
# folds into. Arm selection is only meaningful where the paper compares
# arms; the xor and reaching tasks run their published dynamics as is.
_SAMPLER_MODES = {
    "sigmoid": ("hamiltonian", "langevin"),
    "mnist": ("hamiltonian", "langevin"),
}
_SAMPLER_FOLD = {
    "sigmoid": {"a": "a", "b": "b", "beta": "beta"},
    "xor": {"a": "a", "b": "b"},
    "reaching": {"a": "a", "b": "b"},
    "mnist": {"a": "a", "b": "b", "c": "c", "beta": "beta", "dt": "dt"},
}

_DEFAULT_MODE = {"sigmoid": "hamiltonian", "mnist": "hamiltonian"}
_DEFAULT_MAX_TICKS = 50_000_000

# The cooled protocol is the experiment the xor task exists for, so it is
# also the default when no schedule is given.
_XOR_DEFAULT_SCHEDULE = {"kind": "linear", "t0": 0.5, "t_final": 0.01}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _as_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return value


def _check_keys(section: dict, allowed: set, where: str) -> None:
    extra = sorted(set(section) - allowed)
    if extra:
        raise ConfigError(f"unknown {where} keys: {', '.join(extra)}")


def load_config(config) -> dict:
    """Accept a dict, a JSON string, or a path to a JSON file."""
    if isinstance(config, dict):
        return dict(config)
    if isinstance(config, Path) or (
            isinstance(config, str) and not config.lstrip().startswith("{")):
        text = Path(config).read_text()
    else:
        text = config
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from None
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    return obj


def validate_config(config) -> dict:
    """Check a raw config and return the effective one, defaults applied.

    The effective config is itself a valid config: validating it again is
    the identity. Sampler-section knobs are folded into the task section
    so the result carries each value exactly once.
    """
    raw = load_config(config)
    _check_keys(raw, _TOP_KEYS, "config")
    experiment = raw.get("experiment")
    _require(experiment in EXPERIMENTS,
             f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")

    seed = _as_int(raw.get("seed", 0), "seed")
    _require(0 <= seed < 2 ** 64, f"seed must fit in 64 bits, got {seed}")
    n_trials = _as_int(raw.get("n_trials", 1), "n_trials")
    _require(n_trials >= 1, f"n_trials must be >= 1, got {n_trials}")

    sampler = dict(raw.get("sampler") or {})
    schedule = raw.get("schedule")
    task = dict(raw.get("task") or {})
    _check_keys(task, _TASK_KEYS[experiment], f"{experiment} task")

    if experiment == "oracle-suite":
        _require(not sampler, "oracle-suite takes no sampler section")
        _require(schedule is None, "oracle-suite takes no schedule")
        _require(raw.get("log_stride") is None,
                 "oracle-suite takes no log_stride")
        n_episodes = _as_int(task.get("n_episodes", 10_000), "n_episodes")
        _require(n_episodes >= 1, "n_episodes must be >= 1")
        task["n_episodes"] = n_episodes
        return {
            "experiment": experiment, "seed": seed, "n_trials": n_trials,
            "sampler": {}, "schedule": None, "task": task,
            "output_dir": raw.get("output_dir"),
            "log_stride": None,
            "max_ticks": _as_int(raw.get("max_ticks", _DEFAULT_MAX_TICKS),
                                 "max_ticks"),
        }

    # Sampler section: arm selection plus per-knob folding into the task.
    allowed_sampler = {"mode"} | set(_SAMPLER_FOLD[experiment])
    _check_keys(sampler, allowed_sampler & _SAMPLER_KEYS,
                f"{experiment} sampler")
    mode = sampler.pop("mode", None)
    if experiment in _SAMPLER_MODES:
        if mode is None:
            mode = _DEFAULT_MODE[experiment]
        _require(mode in _SAMPLER_MODES[experiment],
                 f"{experiment} mode must be one of "
                 f"{_SAMPLER_MODES[experiment]}, got {mode!r}")
    else:
        _require(mode is None,
                 f"the {experiment} experiment runs fixed dynamics; "
                 "mode is not selectable")
    for knob, target in _SAMPLER_FOLD[experiment].items():
        if knob in sampler:
            _require(target not in task,
                     f"{target} is set both in sampler and task sections")
            task[target] = sampler.pop(knob)

    # log_stride folds into the recording knob of the experiment.
    log_stride = raw.get("log_stride")
    if log_stride is not None:
        log_stride = _as_int(log_stride, "log_stride")
        _require(log_stride >= 1, "log_stride must be >= 1")
        stride_key = {"sigmoid": "record_every", "xor": "record_every",
                      "mnist": "eval_every"}.get(experiment)
        _require(stride_key is not None,
                 "reaching logs one row per trial; log_stride does not apply")
        _require(stride_key not in task,
                 f"{stride_key} is set both as log_stride and in the task")
        task[stride_key] = log_stride

    # Schedule: the xor protocol may cool; everything else holds constant
    # temperature, expressed either as schedule {constant, t0} or as the
    # task's own temperature knob, not both.
    if schedule is not None:
        _require(isinstance(schedule, dict), "schedule must be an object")
        _check_keys(schedule, _SCHEDULE_KEYS, "schedule")
        _require("kind" in schedule and "t0" in schedule,
                 "schedule needs at least kind and t0")
    if experiment == "xor":
        schedule = dict(schedule if schedule is not None
                        else _XOR_DEFAULT_SCHEDULE)
    elif schedule is not None:
        _require(schedule["kind"] == "constant",
                 f"only a constant schedule applies to {experiment}")
        _require("temperature" not in task,
                 "temperature is set both as schedule t0 and in the task")
        task["temperature"] = schedule["t0"]
        schedule = None

    # Materialize task defaults by constructing the task objects once; any
    # value error they raise is a configuration error here.
    try:
        effective_task, est_ticks, sched = _build_task(
            experiment, task, schedule)
    except ValueError as err:
        raise ConfigError(str(err)) from None

    max_ticks = _as_int(raw.get("max_ticks", _DEFAULT_MAX_TICKS), "max_ticks")
    _require(max_ticks >= 1, "max_ticks must be >= 1")
    _require(est_ticks <= max_ticks,
             f"estimated {est_ticks} ticks per trial exceeds "
             f"max_ticks {max_ticks}")

    if experiment == "mnist":
        ca = effective_task.get("checkpoint_at")
        if ca is not None:
            _require(n_trials == 1,
                     "checkpoint_at requires n_trials = 1")

    out = {
        "experiment": experiment, "seed": seed, "n_trials": n_trials,
        "sampler": {"mode": mode} if mode is not None else {},
        "schedule": sched, "task": effective_task,
        "output_dir": raw.get("output_dir"),
        "log_stride": None, "max_ticks": max_ticks,
    }
    return out


def _schedule_object(sched: dict) -> TemperatureSchedule:
    return TemperatureSchedule(kind=sched["kind"], T0=sched["t0"],
                               T_final=sched["t_final"],
                               duration=sched["duration"])


def _build_task(experiment: str, task: dict, schedule):
    """Construct task objects, returning (effective task map, tick
    estimate per trial, effective schedule map)."""
    task = dict(task)
    if experiment == "sigmoid":
        n_pres = _as_int(task.pop("n_presentations", 5000), "n_presentations")
        if n_pres < 1:
            raise ValueError("n_presentations must be >= 1")
        cfg = SigmoidConfig(**task)
        eff = dataclasses.asdict(cfg)
        eff["n_presentations"] = n_pres
        return eff, n_pres * round(cfg.cycle_seconds * 1e3), None

    if experiment == "xor":
        n_pres = _as_int(task.pop("n_presentations", 20_000),
                         "n_presentations")
        if n_pres < 1:
            raise ValueError("n_presentations must be >= 1")
        record_every = _as_int(task.pop("record_every", 500), "record_every")
        if record_every < 1:
            raise ValueError("record_every must be >= 1")
        cfg = XorConfig(**task)
        sched = dict(schedule)
        sched.setdefault("t_final", 0.0)
        if sched["kind"] != "constant" and "duration" not in sched:
            sched["duration"] = n_pres * cfg.cycle_seconds
        sched.setdefault("duration", 0.0)
        _schedule_object(sched)
        eff = dataclasses.asdict(cfg)
        eff["n_presentations"] = n_pres
        eff["record_every"] = record_every
        est = (n_pres * (cfg.present_ticks + cfg.delay_ticks)
               + 4 * cfg.probe_rounds * cfg.present_ticks)
        return eff, est, sched

    if experiment == "reaching":
        duration_s = float(task.pop("duration_s", 1800.0))
        if duration_s <= 0.0:
            raise ValueError("duration_s must be positive")
        learning = task.pop("learning", True)
        if not isinstance(learning, bool):
            raise ValueError("learning must be true or false")
        cfg = ReachingConfig(**{k: tuple(v) if k in ("start", "goal") else v
                                for k, v in task.items()})
        eff = dataclasses.asdict(cfg)
        eff["start"] = list(cfg.start)
        eff["goal"] = list(cfg.goal)
        eff["duration_s"] = duration_s
        eff["learning"] = learning
        return eff, round(duration_s * 1e3) + cfg.timeout_ticks, None

    if experiment == "mnist":
        extras = {}
        for key, default in (("switch_at", None), ("switch_to", "hamiltonian"),
                             ("checkpoint_at", None), ("data_dir", None),
                             ("n_train", 60_000), ("n_test", 10_000)):
            extras[key] = task.pop(key, default)
        cfg = MnistConfig(**task)
        if extras["switch_at"] is not None:
            sa = _as_int(extras["switch_at"], "switch_at")
            if not 0 < sa < cfg.n_updates:
                raise ValueError("switch_at must fall inside the run")
            extras["switch_at"] = sa
        if extras["switch_to"] not in ("hamiltonian", "langevin"):
            raise ValueError("switch_to must be hamiltonian or langevin")
        if extras["checkpoint_at"] is not None:
            ca = _as_int(extras["checkpoint_at"], "checkpoint_at")
            if not 0 < ca < cfg.n_updates:
                raise ValueError("checkpoint_at must fall inside the run")
            if ca % cfg.eval_every:
                raise ValueError(
                    "checkpoint_at must be a multiple of eval_every")
            extras["checkpoint_at"] = ca
        for key in ("n_train", "n_test"):
            n = _as_int(extras[key], key)
            if n < 1:
                raise ValueError(f"{key} must be >= 1")
            extras[key] = n
        if extras["data_dir"] is not None:
            extras["data_dir"] = str(extras["data_dir"])
        eff = dataclasses.asdict(cfg)
        eff.update(extras)
        return eff, cfg.n_updates, None

    raise ValueError(f"unknown experiment {experiment!r}")


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def config_hash(effective: dict) -> str:
    """Stable identifier of an effective config: sha256 of canonical JSON."""
    import hashlib
    canonical = json.dumps(_to_jsonable(effective), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class RunRecord:
    """Everything one trial produced: the rows written to its CSV, the
    final metrics, and where the artifacts went. Replaying the same
    config and seed reproduces the rows bit for bit."""

    experiment: str
    seed: int
    config_hash: str
    rows: list = field(default_factory=list)
    final: dict = field(default_factory=dict)
    wall_clock_s: float = 0.0
    error: Optional[str] = None
    csv_path: Optional[str] = None
    suspended: bool = False
    checkpoint_path: Optional[str] = None


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_rows_csv(path, rows) -> None:
    """Write rows (dicts keyed by CSV_COLUMNS) with deterministic bytes."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in CSV_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def _base_row(experiment: str, seed: int) -> dict:
    return {"schema_version": CSV_SCHEMA_VERSION, "experiment": experiment,
            "trial_seed": seed}


def _snap_cols(row: dict, snap) -> dict:
    for i in range(4):
        row[f"w{i}"] = float(snap[i])
    return row


def _rows_sigmoid(result, eff_task, seed):
    cycle = (eff_task["present_ticks"] + eff_task["reward_ticks"]
             + eff_task["delay_ticks"]) * 1e-3
    rows = []
    for k, step in enumerate(result["presentation"]):
        row = _base_row("sigmoid", seed)
        row.update(step=int(step), time_s=step * cycle,
                   temperature=eff_task["temperature"],
                   reward=float(result["reward_mean"][k]),
                   success=None, accuracy=None)
        rows.append(_snap_cols(row, result["theta_snap"][k]))
    return rows, {"final_reward": result["final_reward"]}


def _rows_xor(result, eff_task, seed):
    cycle = (eff_task["present_ticks"] + eff_task["delay_ticks"]) * 1e-3
    rows = []
    for k, step in enumerate(result["presentation"]):
        row = _base_row("xor", seed)
        row.update(step=int(step), time_s=step * cycle,
                   temperature=float(result["temperature"][k]),
                   reward=float(result["reward_mean"][k]),
                   success=None, accuracy=None)
        rows.append(_snap_cols(row, result["theta_snap"][k]))
    final = {
        "final_reward": float(result["reward_mean"][-1]),
        "optimal": bool(result["optimal"]),
        "probe_rates_hz": [float(r) for r in result["probe_rates"]],
    }
    return rows, final


def _rows_reaching(result, eff_task, seed):
    ticks = np.cumsum(result["trial_ticks"])
    rows = []
    for i in range(result["n_trials"]):
        row = _base_row("reaching", seed)
        row.update(step=i + 1, time_s=float(ticks[i]) * 1e-3,
                   temperature=eff_task["temperature"],
                   reward=float(result["success"][i]),
                   success=int(result["success"][i]), accuracy=None)
        rows.append(_snap_cols(row, result["theta_snap"][i]))
    final = {
        "n_trials": result["n_trials"],
        "success_rate": result["success_rate"],
        "late_success_rate": result["late_success_rate"],
    }
    return rows, final


def _rows_mnist(result, eff_task, seed):
    rows = []
    filled = 0
    for k, step in enumerate(result["update"]):
        if step == 0:
            continue
        filled = k + 1
        row = _base_row("mnist", seed)
        row.update(step=int(step), time_s=int(step) * eff_task["dt"],
                   temperature=eff_task["temperature"],
                   reward=float(result["reward_rate"][k]),
                   success=None, accuracy=float(result["accuracy"][k]))
        rows.append(_snap_cols(row, result["theta_snap"][k]))
    final = {
        "accuracy0": float(result["accuracy0"]),
        "final_accuracy": (float(result["accuracy"][filled - 1])
                           if filled else float(result["accuracy0"])),
    }
    return rows, final


_ROW_BUILDERS = {"sigmoid": _rows_sigmoid, "xor": _rows_xor,
                 "reaching": _rows_reaching, "mnist": _rows_mnist}
_PRIMARY_METRIC = {"sigmoid": "final_reward", "xor": "final_reward",
                   "reaching": "success_rate", "mnist": "final_accuracy"}


def resolve_output_dir(configured) -> Path:
    """Config value, else the environment override, else ./synsampler-runs."""
    if configured:
        return Path(configured)
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env)
    return Path("synsampler-runs")


def save_checkpoint(path, *, experiment: str, cfg_hash: str,
                    state: dict) -> None:
    """Persist a suspended run. The state must be the dict the task runner
    returned under its ``state`` key."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": __version__,
        "experiment": experiment,
        "config_hash": cfg_hash,
        "state": _to_jsonable(state),
    }
    Path(path).write_text(json.dumps(payload))


def load_checkpoint(path) -> dict:
    """Read a checkpoint, refusing corrupt files and version mismatches."""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise CheckpointError(f"cannot read checkpoint {path}: {err}") from None
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    version = payload.get("version")
    if version != __version__:
        raise CheckpointError(
            f"checkpoint was written by version {version}; "
            f"this is version {__version__}")
    for key in ("experiment", "config_hash", "state"):
        if key not in payload:
            raise CheckpointError(f"checkpoint {path} lacks {key}")
    return payload


def _mnist_arrays(eff_task, out_dir: Path):
    """Training and test arrays, from the configured directory or from a
    synthetic set cached next to the outputs."""
    configured = bool(eff_task["data_dir"])
    base = Path(eff_task["data_dir"]) if configured else out_dir / "mnist-data"
    paths = {key: base / name for key, name in idx.CANONICAL_NAMES.items()}
    if not configured:
        fresh = not all(p.exists() for p in paths.values())
        if not fresh:
            with open(paths["train_images"], "rb") as fh:
                header = fh.read(8)
            n = int.from_bytes(header[4:8], "big") if len(header) == 8 else -1
            fresh = n != eff_task["n_train"]
        if fresh:
            base.mkdir(parents=True, exist_ok=True)
            idx.write_synthetic_mnist(base, n_train=eff_task["n_train"],
                                      n_test=eff_task["n_test"], seed=0)
    train = idx.load_mnist(paths["train_images"], paths["train_labels"])
    test = idx.load_mnist(paths["test_images"], paths["test_labels"])
    return train[0], train[1], test[0], test[1]


def _dispatch(effective: dict, trial_seed: int, data, resume_state):
    experiment = effective["experiment"]
    task = effective["task"]
    if experiment == "sigmoid":
        names = _fields(SigmoidConfig)
        cfg = SigmoidConfig(**{k: v for k, v in task.items() if k in names})
        return run_sigmoid_experiment(
            effective["sampler"]["mode"], trial_seed,
            task["n_presentations"], cfg)
    if experiment == "xor":
        names = _fields(XorConfig)
        cfg = XorConfig(**{k: v for k, v in task.items() if k in names})
        schedule = _schedule_object(effective["schedule"])
        return run_xor_run(trial_seed, schedule, task["n_presentations"],
                           cfg, record_every=task["record_every"])
    if experiment == "reaching":
        names = _fields(ReachingConfig)
        kwargs = {k: v for k, v in task.items() if k in names}
        kwargs["start"] = tuple(kwargs["start"])
        kwargs["goal"] = tuple(kwargs["goal"])
        cfg = ReachingConfig(**kwargs)
        return run_reaching_experiment(
            trial_seed, task["duration_s"], learning=task["learning"],
            cfg=cfg)
    if experiment == "mnist":
        names = _fields(MnistConfig)
        cfg = MnistConfig(**{k: v for k, v in task.items() if k in names})
        return run_mnist_experiment(
            *data, mode=effective["sampler"]["mode"], seed=trial_seed,
            cfg=cfg, switch_at=task["switch_at"],
            switch_to=task["switch_to"], stop_at=task["checkpoint_at"],
            resume_state=resume_state)
    raise ConfigError(f"unknown experiment {experiment!r}")


def _restore_state(payload: dict) -> dict:
    state = dict(payload["state"])
    for key in ("theta", "gamma", "out_accuracy", "out_reward_rate"):
        state[key] = np.asarray(state[key], dtype=float)
    for key in ("out_update", "out_momentum_on"):
        state[key] = np.asarray(state[key], dtype=np.int64)
    state["out_theta_snap"] = np.asarray(state["out_theta_snap"], dtype=float)
    return state


def run(config, *, resume=None) -> dict:
    """Execute a config: n_trials runs, one CSV each, plus summary.json.

    Returns a dict with the effective config, its hash, the list of
    RunRecords, and the summary path. ``resume`` names a checkpoint file
    written by a previous suspended digit run; the current config decides
    the dynamics from the resume point on (switching the arm restarts the
    momentum at zero, as in the mid-run switch protocol).
    """
    effective = validate_config(config)
    experiment = effective["experiment"]
    cfg_hash = config_hash(effective)
    out_dir = resolve_output_dir(effective["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    resume_state = None
    if resume is not None:
        if experiment != "mnist":
            raise ConfigError("resume applies only to the mnist experiment")
        if effective["n_trials"] != 1:
            raise ConfigError("resume requires n_trials = 1")
        payload = load_checkpoint(resume)
        if payload["experiment"] != experiment:
            raise CheckpointError(
                f"checkpoint is for {payload['experiment']!r}, "
                f"not {experiment!r}")
        resume_state = _restore_state(payload)

    if experiment == "oracle-suite":
        return _run_oracles(effective, cfg_hash, out_dir)

    data = _mnist_arrays(effective["task"], out_dir) \
        if experiment == "mnist" else None

    records = []
    t_all = time.monotonic()
    for k in range(effective["n_trials"]):
        trial_seed = effective["seed"] + k
        record = RunRecord(experiment, trial_seed, cfg_hash)
        t0 = time.monotonic()
        try:
            result = _dispatch(effective, trial_seed, data, resume_state)
        except NonFiniteSampleError as err:
            record.error = str(err)
            record.wall_clock_s = time.monotonic() - t0
            records.append(record)
            continue
        rows, final = _ROW_BUILDERS[experiment](
            result, effective["task"], trial_seed)
        record.rows = rows
        record.final = final
        if "state" in result:
            record.suspended = True
            ckpt = out_dir / f"{experiment}_seed{trial_seed}_checkpoint.json"
            save_checkpoint(ckpt, experiment=experiment, cfg_hash=cfg_hash,
                            state=result["state"])
            record.checkpoint_path = str(ckpt)
        csv_path = out_dir / f"{experiment}_seed{trial_seed}.csv"
        write_rows_csv(csv_path, rows)
        record.csv_path = str(csv_path)
        record.wall_clock_s = time.monotonic() - t0
        records.append(record)

    summary = _summarize(effective, cfg_hash, records,
                         time.monotonic() - t_all)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(_to_jsonable(summary), indent=2,
                                       sort_keys=True))
    return {"effective": effective, "config_hash": cfg_hash,
            "records": records, "summary": summary,
            "summary_path": str(summary_path)}


def _run_oracles(effective, cfg_hash, out_dir: Path) -> dict:
    t0 = time.monotonic()
    report = run_oracle_suite(seed=effective["seed"],
                              n_episodes=effective["task"]["n_episodes"])
    all_passed = all(entry["passed"] for entry in report.values())
    wall = time.monotonic() - t0
    payload = {
        "experiment": "oracle-suite",
        "config": effective,
        "config_hash": cfg_hash,
        "all_passed": all_passed,
        "oracles": report,
        "wall_clock_s": wall,
        "package_version": __version__,
    }
    path = out_dir / "oracle_report.json"
    path.write_text(json.dumps(_to_jsonable(payload), indent=2,
                               sort_keys=True))
    record = RunRecord("oracle-suite", effective["seed"], cfg_hash,
                       final={"all_passed": all_passed}, wall_clock_s=wall)
    return {"effective": effective, "config_hash": cfg_hash,
            "records": [record], "summary": payload,
            "summary_path": str(path)}


def _summarize(effective, cfg_hash, records, wall) -> dict:
    experiment = effective["experiment"]
    metric = _PRIMARY_METRIC[experiment]
    values = [r.final[metric] for r in records if r.error is None]
    aggregate = {"metric": metric, "n": len(values)}
    if values:
        aggregate["mean"] = float(np.mean(values))
        aggregate["std"] = float(np.std(values))
    if experiment == "xor":
        flags = [r.final["optimal"] for r in records if r.error is None]
        if flags:
            aggregate["fraction_optimal"] = float(np.mean(flags))
    if experiment == "reaching":
        late = [r.final["late_success_rate"] for r in records
                if r.error is None]
        if late:
            aggregate["late_success_rate_mean"] = float(np.mean(late))
    trials = []
    for r in records:
        trials.append({
            "seed": r.seed, "csv": r.csv_path, "final": r.final,
            "error": r.error, "suspended": r.suspended,
            "checkpoint": r.checkpoint_path,
            "wall_clock_s": r.wall_clock_s,
        })
    return {
        "schema_version": CSV_SCHEMA_VERSION,
        "experiment": experiment,
        "config": effective,
        "config_hash": cfg_hash,
        "aggregate": aggregate,
        "trials": trials,
        "n_failed": sum(1 for r in records if r.error is not None),
        "wall_clock_s": wall,
        "package_version": __version__,
    }
