"""Parameter sweeps over the four experiment families.

* ``single_gradient``: one agent, one source, c x a, random phases, 50 seeds
* ``single_binary``: one agent, two sources (r = 0.95), c x a x motor link
* ``ternary``: ten agents, lattice over c + S + a_motor
* ``env_grid``: ten agents, quality ratio x heading spacing

Rows come back ordered by grid point, then repetition, whatever the number
of worker processes.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import Scenario
from .engine import FREEZE_RADIUS_CM, ConfigError, RunConfig, run
from .metrics import MetricSummary, summarize

log = logging.getLogger(__name__)

FAMILIES = ("single_gradient", "single_binary", "ternary", "env_grid")
SOURCE_LEFT = (-100.0, 0.0)
SOURCE_RIGHT = (100.0, 0.0)

BINARY_RATIO = 0.95
GROUP_RATIO = 0.8
GROUP_SPACING_DEG = 10.0
GROUP_SIZE = 10
TERNARY_C_MAX, TERNARY_S_MAX, TERNARY_A_MAX = 10.0, 5.0, 1.0
ENV_FIXED = {"c": 3.0, "S": 1.0, "a": 0.5}


def _a_values():
    # 0.05 .. 2.5 in steps of 0.05
    return [k / 20 for k in range(1, 51)]


def grid_single_gradient() -> list[dict]:
    return [{"c": c, "a": a} for c in (0.0, 5.0) for a in _a_values()]


def grid_single_binary() -> list[dict]:
    return [{"c": float(c), "a": a, "motor_coupled": m}
            for c in range(11) for a in _a_values() for m in (True, False)]


def ternary_lattice(resolution: int = 10) -> list[dict]:
    """Truncated simplex ``i + j + k = 2R``, ``0 <= i, j, k <= R``.

    Axis units map linearly onto c in [0, 10], S in [0, 5] and a_motor in
    [0, 1].
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    r = resolution
    points = []
    for i in range(r + 1):
        for j in range(r - i, r + 1):
            k = 2 * r - i - j
            points.append({"i": i, "j": j, "k": k, "c": TERNARY_C_MAX * i / r,
                           "S": TERNARY_S_MAX * j / r, "a_motor": TERNARY_A_MAX * k / r})
    return points


def ternary_raw_steps() -> list[dict]:
    """c in 0..10 step 0.5, S in 0..5 step 0.1, a_motor in 0..1 step 0.02,
    restricted to points whose axis scores (each out of 50) sum to 100."""
    points = []
    for ci in range(21):
        for si in range(51):
            for ai in range(51):
                # axis scores 2.5*ci + si + ai == 100, doubled to stay integral
                if 5 * ci + 2 * si + 2 * ai == 200:
                    points.append({"i": ci * 2.5, "j": float(si), "k": float(ai),
                                   "c": ci / 2, "S": si / 10, "a_motor": ai / 50})
    return points


def grid_env(r_steps: int = 51, angle_steps: int = 51) -> list[dict]:
    """Quality ratio 0..1 and adjacent heading spacing 0..18 degrees."""
    rs = [k / (r_steps - 1) for k in range(r_steps)] if r_steps > 1 else [0.0]
    angles = [18.0 * k / (angle_steps - 1) for k in range(angle_steps)] if angle_steps > 1 else [0.0]
    return [{"r": r, "spacing_deg": sp, **ENV_FIXED} for r in rs for sp in angles]


def point_seed(seed_base: int, point_index: int, repetition: int) -> int:
    """64-bit run seed derived from (seed_base, point, repetition)."""
    ss = np.random.SeedSequence([seed_base, point_index, repetition])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SweepSpec:
    family: str
    base: Scenario = field(default_factory=Scenario)
    runs_per_point: int | None = None
    seed_base: int = 0
    resolution: int = 10
    raw_steps: bool = False
    workers: int = 1
    grid: dict = field(default_factory=dict)

    @property
    def repetitions(self) -> int:
        if self.runs_per_point is not None:
            return self.runs_per_point
        return 50 if self.family == "single_gradient" else 1

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {list(FAMILIES)}", "sweep.family")
        if self.repetitions < 1:
            raise ConfigError("runs_per_point must be >= 1", "sweep.runs_per_point")
        if self.resolution < 1:
            raise ConfigError("resolution must be >= 1", "sweep.resolution")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", "sweep.workers")
        allowed = set(_GRID_AXES[self.family])
        unknown = set(self.grid) - allowed
        if unknown:
            raise ConfigError(f"unknown grid axis {sorted(unknown)}; {self.family} accepts {sorted(allowed)}",
                              "sweep.grid")
        if not self.points():
            raise ConfigError("sweep grid is empty", "sweep.grid")

    def points(self) -> list[dict]:
        g = self.grid
        if self.family == "single_gradient":
            pts = grid_single_gradient()
        elif self.family == "single_binary":
            pts = grid_single_binary()
        elif self.family == "ternary":
            pts = ternary_raw_steps() if self.raw_steps else ternary_lattice(self.resolution)
        else:
            pts = grid_env()
        for axis, values in g.items():
            keep = set(float(v) if not isinstance(v, bool) else v for v in values)
            pts = [p for p in pts if _match(p[axis], keep)]
        return pts

    def run_config(self, point: dict, repetition: int, point_index: int) -> RunConfig:
        """The run for one grid point and repetition."""
        seed = point_seed(self.seed_base, point_index, repetition)
        b = self.base
        if self.family == "single_gradient":
            sc = replace(b, n_agents=1, sources=(SOURCE_LEFT + (1.0,),), c=point["c"],
                         a_sensorimotor=point["a"], a_motor=point["a"], init_phase_mode="random",
                         freeze_radius=None, social_strength=0.0, seed=seed)
        elif self.family == "single_binary":
            a_motor = point["a"] if point["motor_coupled"] else 0.0
            sc = replace(b, n_agents=1, sources=(SOURCE_LEFT + (1.0,), SOURCE_RIGHT + (BINARY_RATIO,)),
                         c=point["c"], a_sensorimotor=point["a"], a_motor=a_motor, init_phase_mode="in_phase",
                         freeze_radius=None, social_strength=0.0, seed=seed)
        elif self.family == "ternary":
            sc = replace(b, n_agents=GROUP_SIZE, sources=(SOURCE_LEFT + (1.0,), SOURCE_RIGHT + (GROUP_RATIO,)),
                         c=point["c"], social_strength=point["S"], a_motor=point["a_motor"],
                         spacing_deg=GROUP_SPACING_DEG, init_phase_mode="in_phase",
                         freeze_radius=FREEZE_RADIUS_CM, seed=seed)
        else:
            sc = replace(b, n_agents=GROUP_SIZE, sources=(SOURCE_LEFT + (1.0,), SOURCE_RIGHT + (point["r"],)),
                         c=point["c"], social_strength=point["S"], a_sensorimotor=point["a"], a_motor=point["a"],
                         spacing_deg=point["spacing_deg"], init_phase_mode="in_phase",
                         freeze_radius=FREEZE_RADIUS_CM, seed=seed)
        return replace(sc.build(), scenario=sc)

    def section(self) -> dict:
        return {"family": self.family, "runs_per_point": self.runs_per_point, "seed_base": self.seed_base,
                "resolution": self.resolution, "raw_steps": self.raw_steps, "workers": self.workers,
                "grid": {k: list(v) for k, v in self.grid.items()}}


_GRID_AXES = {
    "single_gradient": ("c", "a"),
    "single_binary": ("c", "a", "motor_coupled"),
    "ternary": ("i", "j", "k", "c", "S", "a_motor"),
    "env_grid": ("r", "spacing_deg"),
}


def _match(value, keep) -> bool:
    if isinstance(value, bool):
        return value in keep
    return any(not isinstance(k, bool) and abs(value - k) <= 1e-9 for k in keep)


def parse_sweep_section(body: dict, base: Scenario) -> SweepSpec:
    from .config import _boolean, _pos_int, _seed

    def opt(key, conv, default):
        return conv(body[key], f"sweep.{key}") if key in body else default

    if "family" not in body:
        raise ConfigError("missing required field 'family'", "sweep.family")
    rpp = body.get("runs_per_point")
    grid = body.get("grid", {})
    if not isinstance(grid, dict) or not all(isinstance(v, list) for v in grid.values()):
        raise ConfigError("grid must map axis names to lists of values", "sweep.grid")
    return SweepSpec(
        family=body["family"],
        base=base,
        runs_per_point=None if rpp is None else _pos_int(rpp, "sweep.runs_per_point"),
        seed_base=opt("seed_base", _seed, 0),
        resolution=opt("resolution", _pos_int, 10),
        raw_steps=opt("raw_steps", _boolean, False),
        workers=opt("workers", _pos_int, 1),
        grid={k: list(v) for k, v in grid.items()},
    )


@dataclass(frozen=True)
class SweepRow:
    point_index: int
    repetition: int
    coords: dict
    seed: int
    summary: MetricSummary


@dataclass
class SweepResult:
    family: str
    rows: list[SweepRow]
    complete: bool = True


class SweepError(RuntimeError):
    """A sweep point failed; ``partial`` holds the rows finished before it."""

    def __init__(self, message, coords=None, partial=None):
        super().__init__(message)
        self.coords = coords
        self.partial = partial


def _run_task(task):
    cfg, opts = task
    return summarize(run(cfg), **opts)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Execute every (point, repetition) of ``spec``."""
    spec.validate()
    workers = spec.workers if workers is None else workers
    if workers < 1:
        raise ConfigError("workers must be >= 1", "sweep.workers")
    points = spec.points()
    opts = spec.base.metric_options()

    jobs = []
    for pi, point in enumerate(points):
        for rep in range(spec.repetitions):
            try:
                cfg = spec.run_config(point, rep, pi)
            except ConfigError as exc:
                raise SweepError(f"invalid configuration at {point}: {exc}", point, SweepResult(spec.family, [], False)) from exc
            jobs.append((pi, rep, point, cfg))
    log.info("sweep %s: %d points x %d repetitions on %d worker(s)", spec.family, len(points),
             spec.repetitions, workers)

    rows: list[SweepRow] = []
    tasks = [(cfg, opts) for _, _, _, cfg in jobs]
    try:
        if workers == 1:
            results = map(_run_task, tasks)
            _collect(jobs, results, rows)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                _collect(jobs, pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))), rows)
    except SweepError:
        raise
    except Exception as exc:
        failed = jobs[len(rows)][2]
        raise SweepError(f"run failed at {failed}: {exc}", failed, SweepResult(spec.family, rows, False)) from exc
    return SweepResult(spec.family, rows)


def _collect(jobs, results, rows):
    for (pi, rep, point, cfg), summary in zip(jobs, results):
        rows.append(SweepRow(pi, rep, dict(point), cfg.seed, summary))
