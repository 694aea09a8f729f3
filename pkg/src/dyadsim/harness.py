"""Trial orchestration: conditions, the 6-trial schedule, logging and reports.

Conditions wire the two handles to different force sources:

  HFOP         two synthetic humans share one object
  HRP          a synthetic human paired with the robotic partner
  ALONE        one synthetic human; the second handle mirrors the first
  ROBOT_ALONE  the robotic partner solo, mirrored the same way

Every simulation is deterministic under its seed. Per-trial random streams
are derived from the master seed through numpy SeedSequence keyed on
(master, pair, condition id, occurrence, lane, salt), so schedule order can
never leak randomness across trials.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .metrics import analysis_report, records_from_logs
from .partner import PartnerConfig, PartnerState, finish_trial as partner_finish, partner_step
from .pathgen import (Color, PathScript, Phase, TrialConfig, actual_direction,
                      generate_script, sample_series, script_from_dict,
                      script_to_dict, side_name)
from .simcore import DyadState, SimParams, _step_raw
from .surrogate import (SurrogateConfig, SurrogateState, begin_trial as surrogate_begin,
                        finish_trial as surrogate_finish, surrogate_step)

HFOP = "HFOP"
HRP = "HRP"
ALONE = "ALONE"
ROBOT_ALONE = "ROBOT_ALONE"
CONDITIONS = (HFOP, HRP, ALONE, ROBOT_ALONE)
_COND_ID = {c: i for i, c in enumerate(CONDITIONS)}

ORDERINGS = {
    "a": (HRP, HRP, ALONE, ALONE, HFOP, HFOP),
    "b": (HFOP, HFOP, ALONE, ALONE, HRP, HRP),
}

ANALYSIS_ZONE_S = 2.0  # per-choice RMS zone, matching the predictor window span

PHASE_NAMES = {Phase.BODY: "body", Phase.CHOICE_PRE: "choice_pre",
               Phase.CHOICE_POST: "choice_post", Phase.MERGE: "merge"}
COLOR_NAMES = {Color.GREEN: "green", Color.ORANGE: "orange", Color.RED: "red"}


class TrialError(RuntimeError):
    """Simulation aborted mid-trial; the message carries the tick index."""


class Obs:
    """Per-tick observation handed to an agent (mutated in place by the runner)."""

    __slots__ = ("k", "t", "phase", "choice_idx", "choice_t0",
                 "target_l", "target_r", "tvel_l", "tvel_r",
                 "cursor", "cursor_v", "own_x", "own_v", "f_int", "highlight")

    def __init__(self):
        self.k = 0
        self.t = 0.0
        self.phase = int(Phase.BODY)
        self.choice_idx = -1
        self.choice_t0 = 0.0
        self.target_l = 0.0
        self.target_r = 0.0
        self.tvel_l = 0.0
        self.tvel_r = 0.0
        self.cursor = 0.0
        self.cursor_v = 0.0
        self.own_x = 0.0
        self.own_v = 0.0
        self.f_int = 0.0
        self.highlight = 0


class SurrogateAgent:
    def __init__(self, cfg: SurrogateConfig, rng, dt_s: float):
        self.cfg = cfg
        self.rng = rng
        self.state = SurrogateState(dt_s)

    def begin_trial(self, n_ticks: int):
        surrogate_begin(self.state, n_ticks, self.cfg, self.rng)

    def step(self, obs) -> float:
        return surrogate_step(self.state, obs, self.cfg, self.rng)

    def finish(self) -> list[dict]:
        surrogate_finish(self.state)
        return self.state.events


class PartnerAgent:
    def __init__(self, cfg: PartnerConfig, rng, dt_s: float):
        self.cfg = cfg
        self.rng = rng
        self.state = PartnerState(dt_s)

    def begin_trial(self, n_ticks: int):
        pass

    def step(self, obs) -> float:
        f, _ = partner_step(self.state, obs, self.cfg, self.rng)
        return f

    def finish(self) -> list[dict]:
        partner_finish(self.state)
        return self.state.events


class PassiveAgent:
    """Zero-force handle (free handle; used in tests)."""

    def __init__(self, *_args, **_kwargs):
        pass

    def begin_trial(self, n_ticks: int):
        pass

    def step(self, obs) -> float:
        return 0.0

    def finish(self) -> list[dict]:
        return []


@dataclass
class ChoiceAnnotation:
    index: int
    t0_s: float
    decision_type: str
    highlight_1: int
    highlight_2: int
    direction: int
    rms_mm: float
    leader: int
    start_time_1_s: float | None
    start_time_2_s: float | None
    initiative_1_s: float | None
    initiative_2_s: float | None


@dataclass(frozen=True)
class Frame:
    """One logged tick: dyad state plus display-facing fields."""

    t: float
    x1: float
    x2: float
    v1: float
    v2: float
    f1: float
    f2: float
    f_couple: float
    cursor_x: float
    target_x: float
    color: int
    phase: int


@dataclass
class TrialLog:
    """Frame-by-frame record of one trial plus per-choice annotations."""

    condition: str
    seed: int
    config_hash: str
    script: PathScript
    dt_s: float
    n_ticks: int
    x1: np.ndarray
    x2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f_couple: np.ndarray
    cursor: np.ndarray
    target: np.ndarray
    color: np.ndarray
    phase: np.ndarray
    choice_idx: np.ndarray
    choices: list[ChoiceAnnotation] = field(default_factory=list)
    degraded: bool = False
    decimate: int = 1

    @property
    def n_frames(self) -> int:
        return len(self.cursor)

    def frame(self, k: int) -> Frame:
        return Frame(
            t=k * self.dt_s, x1=float(self.x1[k]), x2=float(self.x2[k]),
            v1=float(self.v1[k]), v2=float(self.v2[k]),
            f1=float(self.f1[k]), f2=float(self.f2[k]),
            f_couple=float(self.f_couple[k]),
            cursor_x=float(self.cursor[k]), target_x=float(self.target[k]),
            color=int(self.color[k]), phase=int(self.phase[k]),
        )


def config_hash(*cfgs) -> str:
    blob = json.dumps([_cfg_dict(c) for c in cfgs], sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _cfg_dict(cfg) -> dict:
    d = dataclasses.asdict(cfg)
    for k, v in d.items():
        if isinstance(v, tuple):
            d[k] = list(v)
    return d


class TrialRunner:
    """Steps one trial at 1 kHz; usable to completion or tick-by-tick.

    Agents are force sources honoring begin_trial/step/finish. With
    mirror=True the second handle receives the first handle's force, which
    by symmetry keeps it bit-identical to the first (cursor == handle)."""

    def __init__(self, condition: str, script: PathScript, sim: SimParams,
                 agent1, agent2=None, mirror: bool = False, seed: int = 0,
                 cfg_hash: str = ""):
        if agent2 is None and not mirror:
            raise ConfigError("two agents or mirror=True required")
        if sim.lateral_limit_mm <= script.x_max_mm:
            raise ConfigError("lateral_limit_mm must exceed the script x_max_mm")
        self.condition = condition
        self.script = script
        self.sim = sim
        self.agent1 = agent1
        self.agent2 = agent2
        self.mirror = mirror
        self.seed = seed
        self.cfg_hash = cfg_hash
        self.dt = sim.dt_s
        self.n_ticks = int(round(script.trial_duration_s / sim.dt_s))
        series = sample_series(script, sim.dt_s, self.n_ticks)
        self._L = series["left"].tolist()
        self._R = series["right"].tolist()
        self._VL = series["vleft"].tolist()
        self._VR = series["vright"].tolist()
        self._PH = series["phase"].tolist()
        self._CI = series["choice"].tolist()
        choices = script.choices
        self._hl1 = [c.highlight_1 for c in choices]
        self._hl2 = [c.highlight_2 for c in choices]
        self._ct0 = [c.t0_s for c in choices]
        self._obs = Obs()
        self.k = 0
        self._x1 = self._v1 = self._x2 = self._v2 = 0.0
        self._fc = 0.0
        n1 = self.n_ticks + 1
        self._aX1 = [0.0] * n1
        self._aX2 = [0.0] * n1
        self._aV1 = [0.0] * n1
        self._aV2 = [0.0] * n1
        self._aF1 = [0.0] * n1
        self._aF2 = [0.0] * n1
        self._aFC = [0.0] * n1
        self._started = False

    def begin(self):
        self.agent1.begin_trial(self.n_ticks)
        if self.agent2 is not None:
            self.agent2.begin_trial(self.n_ticks)
        self._started = True

    def step_tick(self):
        """Advance one tick: query both force sources, integrate, record."""
        k = self.k
        dt = self.dt
        obs = self._obs
        x1, v1, x2, v2, fc = self._x1, self._v1, self._x2, self._v2, self._fc
        ci = self._CI[k]
        obs.k = k
        obs.t = k * dt
        obs.phase = self._PH[k]
        obs.choice_idx = ci
        obs.target_l = self._L[k]
        obs.target_r = self._R[k]
        obs.tvel_l = self._VL[k]
        obs.tvel_r = self._VR[k]
        obs.cursor = (x1 + x2) * 0.5
        obs.cursor_v = (v1 + v2) * 0.5
        if ci >= 0:
            obs.choice_t0 = self._ct0[ci]
            obs.highlight = self._hl1[ci]
        else:
            obs.highlight = 0
        obs.own_x = x1
        obs.own_v = v1
        obs.f_int = fc
        f1 = self.agent1.step(obs)
        if self.mirror:
            f2 = f1
        else:
            if ci >= 0:
                obs.highlight = self._hl2[ci]
            obs.own_x = x2
            obs.own_v = v2
            obs.f_int = -fc
            f2 = self.agent2.step(obs)
        sim = self.sim
        try:
            x1, v1, x2, v2, fc = _step_raw(
                x1, v1, x2, v2, f1, f2, dt,
                sim.coupling_kp_n_per_m, sim.coupling_kd_n_s_per_m,
                sim.damping_b_n_s_per_m, sim.effective_mass_kg,
                sim.lateral_limit_mm)
        except Exception as exc:  # pragma: no cover - defensive
            raise TrialError(f"dynamics failed at tick {k}: {exc}") from exc
        if not (x1 == x1 and x2 == x2 and abs(x1) < 1e9 and abs(x2) < 1e9):
            raise TrialError(f"non-finite state at tick {k}")
        self._x1, self._v1, self._x2, self._v2, self._fc = x1, v1, x2, v2, fc
        self._aF1[k] = f1
        self._aF2[k] = f2
        k += 1
        self._aX1[k] = x1
        self._aX2[k] = x2
        self._aV1[k] = v1
        self._aV2[k] = v2
        self._aFC[k] = fc
        self.k = k

    @property
    def done(self) -> bool:
        return self.k >= self.n_ticks

    def run(self) -> TrialLog:
        self.begin()
        step = self.step_tick
        for _ in range(self.n_ticks):
            step()
        return self.finalize()

    def finalize(self, degraded: bool = False) -> TrialLog:
        ev1 = {e["choice"]: e for e in self.agent1.finish()}
        if self.agent2 is not None:
            ev2 = {e["choice"]: e for e in self.agent2.finish()}
        else:
            ev2 = {}
        x1 = np.array(self._aX1)
        x2 = np.array(self._aX2)
        cursor = (x1 + x2) * 0.5
        L = np.array(self._L)
        R = np.array(self._R)
        dist_l = np.abs(cursor - L)
        dist_r = np.abs(cursor - R)
        dist = np.minimum(dist_l, dist_r)
        target = np.where(dist_l <= dist_r, L, R)
        color = np.where(dist < 5.0, int(Color.GREEN),
                         np.where(dist < 15.0, int(Color.ORANGE), int(Color.RED))).astype(np.uint8)
        log = TrialLog(
            condition=self.condition, seed=self.seed, config_hash=self.cfg_hash,
            script=self.script, dt_s=self.dt, n_ticks=self.n_ticks,
            x1=x1, x2=x2, v1=np.array(self._aV1), v2=np.array(self._aV2),
            f1=np.array(self._aF1), f2=np.array(self._aF2),
            f_couple=np.array(self._aFC), cursor=cursor, target=target,
            color=color, phase=np.array(self._PH, dtype=np.uint8),
            choice_idx=np.array(self._CI, dtype=np.int32),
            degraded=degraded,
        )
        log.choices = self._annotate(log, L, R, ev1, ev2)
        return log

    def _annotate(self, log: TrialLog, L, R, ev1, ev2) -> list[ChoiceAnnotation]:
        dt = self.dt
        out = []
        for c in self.script.choices:
            direction = actual_direction(log, c)
            k0 = int(round(c.t0_s / dt))
            k1 = min(int(round((c.t0_s + ANALYSIS_ZONE_S) / dt)), log.n_ticks)
            branch = L if direction == -1 else R  # undecided falls to the right branch
            zone_target = branch[k0:k1 + 1]
            d = zone_target - log.cursor[k0:k1 + 1]
            rms_mm = float(np.sqrt(np.mean(d * d)))
            e1 = ev1.get(c.index, {})
            e2 = ev2.get(c.index, {})
            i1 = e1.get("initiative_s")
            i2 = e2.get("initiative_s")
            if i1 is not None and (i2 is None or i1 <= i2):
                leader = 1
            elif i2 is not None:
                leader = 2
            else:
                leader = 0
            out.append(ChoiceAnnotation(
                index=c.index, t0_s=c.t0_s,
                decision_type=c.decision_type.value,
                highlight_1=c.highlight_1, highlight_2=c.highlight_2,
                direction=direction, rms_mm=rms_mm, leader=leader,
                start_time_1_s=e1.get("onset_s"), start_time_2_s=e2.get("onset_s"),
                initiative_1_s=i1, initiative_2_s=i2,
            ))
        return out


def make_agents(condition: str, sim: SimParams, partner_cfg: PartnerConfig,
                surrogate_cfg: SurrogateConfig, seed: int):
    """Force sources for a condition; returns (agent1, agent2, mirror)."""
    ss = np.random.SeedSequence(seed)
    rng1, rng2 = (np.random.default_rng(s) for s in ss.spawn(2))
    dt = sim.dt_s
    if condition == HFOP:
        return SurrogateAgent(surrogate_cfg, rng1, dt), SurrogateAgent(surrogate_cfg, rng2, dt), False
    if condition == HRP:
        return SurrogateAgent(surrogate_cfg, rng1, dt), PartnerAgent(partner_cfg, rng2, dt), False
    if condition == ALONE:
        return SurrogateAgent(surrogate_cfg, rng1, dt), None, True
    if condition == ROBOT_ALONE:
        return PartnerAgent(partner_cfg, rng1, dt), None, True
    raise ConfigError(f"unknown condition: {condition!r}")


def run_trial(condition: str, script: PathScript, sim: SimParams,
              partner_cfg: PartnerConfig, surrogate_cfg: SurrogateConfig,
              seed: int) -> TrialLog:
    """Simulate one trial of a condition; deterministic under seed."""
    a1, a2, mirror = make_agents(condition, sim, partner_cfg, surrogate_cfg, seed)
    runner = TrialRunner(condition, script, sim, a1, a2, mirror, seed=seed,
                         cfg_hash=config_hash(sim, partner_cfg, surrogate_cfg))
    return runner.run()


# --- experiment configuration ------------------------------------------------

@dataclass
class ExperimentConfig:
    seed: int = 0
    ordering: str = "a"
    pairs: int = 1
    n_jobs: int = 1
    decimate: int = 1
    save_logs: bool = False
    welch: bool = False
    out_dir: str = "out"
    trial: TrialConfig = field(default_factory=TrialConfig)
    sim: SimParams = field(default_factory=SimParams)
    partner: PartnerConfig = field(default_factory=PartnerConfig)
    surrogate: SurrogateConfig = field(default_factory=SurrogateConfig)

    def __post_init__(self):
        if self.ordering not in ORDERINGS:
            raise ConfigError(f"ordering must be one of {sorted(ORDERINGS)}")
        if self.pairs < 1:
            raise ConfigError("pairs must be >= 1")
        if self.decimate < 1:
            raise ConfigError("decimate must be >= 1")
        if self.sim.lateral_limit_mm <= self.trial.x_max_mm:
            raise ConfigError("sim.lateral_limit_mm must exceed trial.x_max_mm")


_SECTIONS = {"trial": TrialConfig, "sim": SimParams,
             "partner": PartnerConfig, "surrogate": SurrogateConfig}


def _build_section(cls, d: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    if cls is TrialConfig and "decision_mix" in d:
        d = {**d, "decision_mix": tuple(d["decision_mix"])}
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where} section: {exc}") from exc


def config_from_dict(d: dict) -> ExperimentConfig:
    top = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(d) - top
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in d.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be an object")
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        else:
            kwargs[key] = value
    return ExperimentConfig(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def derive_seed(master: int, *key: int) -> int:
    """Documented split: SeedSequence over (master, *key) -> one uint64."""
    ss = np.random.SeedSequence((master,) + key)
    return int(ss.generate_state(1, np.uint64)[0])


def _schedule(cfg: ExperimentConfig) -> list[tuple]:
    """(pair, condition, occurrence, lane, training) for every simulation."""
    jobs = []
    for pair in range(cfg.pairs):
        seen: dict[str, int] = {}
        for cond in ORDERINGS[cfg.ordering]:
            occ = seen.get(cond, 0)
            seen[cond] = occ + 1
            lanes = (0,) if cond == HFOP else (0, 1)
            for lane in lanes:
                jobs.append((pair, cond, occ, lane, occ == 0))
    return jobs


def _run_job(cfg: ExperimentConfig, job: tuple) -> TrialLog:
    pair, cond, occ, lane, _training = job
    base = (pair, _COND_ID[cond], occ, lane)
    script = generate_script(derive_seed(cfg.seed, *base, 0), cfg.trial)
    return run_trial(cond, script, cfg.sim, cfg.partner, cfg.surrogate,
                     seed=derive_seed(cfg.seed, *base, 1))


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Execute the schedule, analyse non-training trials, write report files."""
    jobs = _schedule(cfg)
    if cfg.n_jobs > 1:
        from joblib import Parallel, delayed
        logs = Parallel(n_jobs=cfg.n_jobs)(delayed(_run_job)(cfg, j) for j in jobs)
    else:
        logs = [_run_job(cfg, j) for j in jobs]
    analysed = [log for log, job in zip(logs, jobs) if not job[4]]
    records = records_from_logs(analysed)
    report = analysis_report(records, welch=cfg.welch)
    report["seed"] = cfg.seed
    report["ordering"] = cfg.ordering
    report["pairs"] = cfg.pairs
    report["config_hash"] = config_hash(cfg.trial, cfg.sim, cfg.partner, cfg.surrogate)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_report(report, cfg.out_dir)
    if cfg.save_logs:
        for log, job in zip(logs, jobs):
            pair, cond, occ, lane, training = job
            tag = "train" if training else "main"
            name = f"pair{pair:02d}_{cond}_{tag}_lane{lane}.jsonl"
            save_log(log, os.path.join(cfg.out_dir, name), decimate=cfg.decimate)
    return report


def run_batch(condition: str, n_trials: int, cfg: ExperimentConfig,
              salt: int = 100) -> list[TrialLog]:
    """n independent trials of one condition (seeded off the master seed)."""
    jobs = []
    for i in range(n_trials):
        base = (salt, _COND_ID[condition], i, 0)
        jobs.append((generate_script(derive_seed(cfg.seed, *base, 0), cfg.trial),
                     derive_seed(cfg.seed, *base, 1)))
    if cfg.n_jobs > 1:
        from joblib import Parallel, delayed
        return Parallel(n_jobs=cfg.n_jobs)(
            delayed(run_trial)(condition, s, cfg.sim, cfg.partner, cfg.surrogate, seed)
            for s, seed in jobs)
    return [run_trial(condition, s, cfg.sim, cfg.partner, cfg.surrogate, seed)
            for s, seed in jobs]


# --- report files -------------------------------------------------------------

def write_report(report: dict, out_dir: str) -> list[str]:
    paths = []
    p = os.path.join(out_dir, "report.json")
    with open(p, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    paths.append(p)
    p = os.path.join(out_dir, "performance.csv")
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["condition", "decision_type", "n", "mean", "std"])
        for cond in sorted(report.get("performance", {})):
            for dt in ("SAME", "ONE", "OPPO"):
                cell = report["performance"][cond][dt]
                w.writerow([cond, dt, cell["n"], cell["mean"], cell["std"]])
    paths.append(p)
    p = os.path.join(out_dir, "tests.csv")
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scope", "group", "comparison", "t", "p", "n_a", "n_b"])
        for cond in sorted(report.get("decision_type_tests", {})):
            for comp, cell in report["decision_type_tests"][cond].items():
                w.writerow(["decision_type", cond, comp, cell["t"], cell["p"],
                            cell["n_a"], cell["n_b"]])
        for dt in ("SAME", "ONE", "OPPO"):
            for comp, cell in report.get("condition_tests", {}).get(dt, {}).items():
                w.writerow(["condition", dt, comp, cell["t"], cell["p"],
                            cell["n_a"], cell["n_b"]])
    paths.append(p)
    return paths


# --- log persistence ----------------------------------------------------------

def _r6(v: float) -> float:
    return float(f"{float(v):.6g}")


def save_log(log: TrialLog, path: str, decimate: int = 1) -> str:
    """Write header + frames as JSON Lines, annotations as a sidecar JSON.

    Decimation thins the stored frames only; statistics are computed from the
    in-memory full-rate log before any decimation."""
    if decimate < 1:
        raise ConfigError("decimate must be >= 1")
    header = {
        "kind": "header", "log_version": 1,
        "condition": log.condition, "seed": log.seed,
        "config_hash": log.config_hash, "dt_s": log.dt_s,
        "n_ticks": log.n_ticks, "decimate": decimate,
        "degraded": log.degraded,
        "script": script_to_dict(log.script),
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True))
        fh.write("\n")
        for k in range(0, log.n_ticks + 1, decimate):
            fh.write(json.dumps({
                "k": k, "t_s": _r6(k * log.dt_s),
                "x1_mm": _r6(log.x1[k]), "x2_mm": _r6(log.x2[k]),
                "v1_mm_s": _r6(log.v1[k]), "v2_mm_s": _r6(log.v2[k]),
                "f1_n": _r6(log.f1[k]), "f2_n": _r6(log.f2[k]),
                "fc_n": _r6(log.f_couple[k]),
                "cursor_mm": _r6(log.cursor[k]), "target_mm": _r6(log.target[k]),
                "color": COLOR_NAMES[Color(int(log.color[k]))],
                "phase": PHASE_NAMES[Phase(int(log.phase[k]))],
                "choice": int(log.choice_idx[k]),
            }, sort_keys=True))
            fh.write("\n")
    side = _sidecar_path(path)
    with open(side, "w") as fh:
        json.dump({
            "annotations_version": 1,
            "choices": [_ann_dict(a) for a in log.choices],
        }, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def _sidecar_path(path: str) -> str:
    base = path[:-6] if path.endswith(".jsonl") else path
    return base + ".annotations.json"


def _ann_dict(a: ChoiceAnnotation) -> dict:
    d = dataclasses.asdict(a)
    d["direction"] = side_name(a.direction)
    d["highlight_1"] = side_name(a.highlight_1)
    d["highlight_2"] = side_name(a.highlight_2)
    return d


def load_log(path: str) -> TrialLog:
    """Read a saved log back. Full-rate reads round-trip every statistic;
    decimated files reload with the stored stride."""
    from .pathgen import parse_side
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != "header" or header.get("log_version") != 1:
            raise ConfigError(f"not a v1 trial log: {path}")
        cols: dict[str, list] = {c: [] for c in
                                 ("x1_mm", "x2_mm", "v1_mm_s", "v2_mm_s", "f1_n",
                                  "f2_n", "fc_n", "cursor_mm", "target_mm")}
        colors, phases, choices_col = [], [], []
        name_to_color = {v: int(k) for k, v in COLOR_NAMES.items()}
        name_to_phase = {v: int(k) for k, v in PHASE_NAMES.items()}
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            for c in cols:
                cols[c].append(rec[c])
            colors.append(name_to_color[rec["color"]])
            phases.append(name_to_phase[rec["phase"]])
            choices_col.append(rec["choice"])
    script = script_from_dict(header["script"])
    log = TrialLog(
        condition=header["condition"], seed=header["seed"],
        config_hash=header["config_hash"], script=script,
        dt_s=header["dt_s"], n_ticks=header["n_ticks"],
        x1=np.array(cols["x1_mm"]), x2=np.array(cols["x2_mm"]),
        v1=np.array(cols["v1_mm_s"]), v2=np.array(cols["v2_mm_s"]),
        f1=np.array(cols["f1_n"]), f2=np.array(cols["f2_n"]),
        f_couple=np.array(cols["fc_n"]),
        cursor=np.array(cols["cursor_mm"]), target=np.array(cols["target_mm"]),
        color=np.array(colors, dtype=np.uint8),
        phase=np.array(phases, dtype=np.uint8),
        choice_idx=np.array(choices_col, dtype=np.int32),
        degraded=header.get("degraded", False),
        decimate=header.get("decimate", 1),
    )
    side = _sidecar_path(path)
    if os.path.exists(side):
        with open(side) as fh:
            ann = json.load(fh)
        log.choices = [ChoiceAnnotation(
            index=a["index"], t0_s=a["t0_s"], decision_type=a["decision_type"],
            highlight_1=parse_side(a["highlight_1"]),
            highlight_2=parse_side(a["highlight_2"]),
            direction=parse_side(a["direction"]) if a["direction"] else 0,
            rms_mm=a["rms_mm"], leader=a["leader"],
            start_time_1_s=a["start_time_1_s"], start_time_2_s=a["start_time_2_s"],
            initiative_1_s=a["initiative_1_s"], initiative_2_s=a["initiative_2_s"],
        ) for a in ann["choices"]]
    return log
