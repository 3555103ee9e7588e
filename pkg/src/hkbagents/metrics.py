"""Coordination-dynamics and performance measures.

Phase measures work on wrapped or unwrapped phases alike; only differences
and complex exponentials enter.  Standard deviations use the population
(1/N) convention.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .engine import SimulationRecord
from .oscillators import phase_difference

DEFAULT_WINDOW = 100   # ticks, 1 s at dt = 0.01
DEFAULT_STEP = 10      # ticks
INTRA_PAIRS = ((0, 3), (1, 2), (2, 3))


def kop(phases) -> float:
    """Kuramoto order parameter R = |<exp(iφ)>| of one set of phases."""
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        raise ValueError("kop needs at least one phase")
    return float(np.abs(np.mean(np.exp(1j * phases))))


def kop_series(phases) -> np.ndarray:
    """KOP at every sample of a (T, K) phase array."""
    phases = np.asarray(phases, dtype=float)
    if phases.ndim != 2 or phases.shape[1] == 0:
        raise ValueError(f"expected a (T, K) array with K >= 1, got shape {phases.shape}")
    return np.abs(np.mean(np.exp(1j * phases), axis=1))


def kop_series_and_metastability(series) -> tuple[float, float]:
    """Time-mean KOP and its standard deviation (metastability).

    ``series`` is either a (T, K) array or a sequence of K equal-length
    phase series.
    """
    if isinstance(series, np.ndarray):
        arr = series
    else:
        lengths = {len(s) for s in series}
        if len(lengths) > 1:
            raise ValueError(f"phase series have unequal lengths {sorted(lengths)}")
        arr = np.column_stack([np.asarray(s, dtype=float) for s in series])
    r = kop_series(arr)
    if r.size == 0:
        raise ValueError("empty phase series")
    return float(np.mean(r)), float(np.std(r))


def _windows(values: np.ndarray, window: int, stride: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("expected a non-empty 1-D series")
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be >= 1")
    if window > values.size:
        raise ValueError(f"window of {window} samples exceeds series length {values.size}")
    return sliding_window_view(values, window)[::stride]


def plv(diff, window: int = DEFAULT_WINDOW, stride: int = DEFAULT_STEP) -> tuple[np.ndarray, float]:
    """Sliding phase-locking value of a phase-difference series.

    Returns the per-window values and their mean.
    """
    w = _windows(diff, window, stride)
    values = np.abs(np.sum(np.exp(1j * w), axis=1)) / window
    return values, float(np.mean(values))


def _wpli_rows(w: np.ndarray) -> np.ndarray:
    im = np.sin(w)
    num = np.abs(np.sum(np.abs(im) * np.sign(im), axis=1))
    den = np.sum(np.abs(im), axis=1)
    out = np.zeros_like(den)
    np.divide(num, den, out=out, where=den > 0)
    return out


def wpli(diff, window: int = DEFAULT_WINDOW, stride: int = DEFAULT_STEP) -> tuple[np.ndarray, float]:
    """Sliding weighted phase-lag index; an all-zero-lag window scores 0."""
    values = _wpli_rows(_windows(diff, window, stride))
    return values, float(np.mean(values))


_MEASURES = {"plv": plv, "wpli": wpli}


def _measure(name):
    try:
        return _MEASURES[name]
    except KeyError:
        raise ValueError(f"unknown measure {name!r}; expected 'plv' or 'wpli'") from None


def _window_samples(record: SimulationRecord, window_ticks: int, step_ticks: int):
    stride = record.config.record_stride
    return max(1, round(window_ticks / stride)), max(1, round(step_ticks / stride))


def _start_sample(record: SimulationRecord, transient: float) -> int:
    if transient <= 0:
        return 0
    return min(record.n_samples - 1, math.ceil(transient / record.sample_interval - 1e-9))


def intra_agent_coupling(record: SimulationRecord, agent_index: int, measure: str = "plv", *,
                         window: int = DEFAULT_WINDOW, step: int = DEFAULT_STEP,
                         transient: float = 0.0) -> float:
    """Mean PLV or wPLI over the coupled node pairs (v1-v4, v2-v3, v3-v4) of one agent.

    ``window`` and ``step`` are in simulation ticks and are converted to
    record samples.
    """
    if not 0 <= agent_index < record.n_agents:
        raise IndexError(f"agent_index {agent_index} out of range for {record.n_agents} agents")
    fn = _measure(measure)
    w, s = _window_samples(record, window, step)
    ph = record.phases[_start_sample(record, transient):, agent_index]
    w = min(w, ph.shape[0])
    return float(np.mean([fn(phase_difference(ph[:, i], ph[:, j]), w, s)[1] for i, j in INTRA_PAIRS]))


def inter_agent_coupling(record: SimulationRecord, measure: str = "wpli", *, window: int = DEFAULT_WINDOW,
                         step: int = DEFAULT_STEP, transient: float = 0.0) -> float:
    """Mean measure over all agent pairs and all four homologous nodes."""
    if record.n_agents < 2:
        raise ValueError("inter-agent coupling needs at least two agents")
    fn = _measure(measure)
    w, s = _window_samples(record, window, step)
    ph = record.phases[_start_sample(record, transient):]
    w = min(w, ph.shape[0])
    vals = [fn(phase_difference(ph[:, m, i], ph[:, n, i]), w, s)[1]
            for m, n in combinations(range(record.n_agents), 2) for i in range(ph.shape[2])]
    return float(np.mean(vals))


def movement_alignment(record: SimulationRecord, transient: float = 0.0) -> tuple[float, float]:
    """Mean and SD over time of the KOP of all agents' headings."""
    if record.n_agents < 2:
        raise ValueError("movement alignment needs at least two agents")
    return kop_series_and_metastability(record.headings[_start_sample(record, transient):])


def _distances(record: SimulationRecord, sample: int) -> np.ndarray:
    """(n_agents, n_sources) distances at one sample."""
    p = record.positions[sample]
    src = record.config.environment.source_positions
    return np.hypot(p[:, None, 0] - src[None, :, 0], p[:, None, 1] - src[None, :, 1])


def _initial_distance(record: SimulationRecord) -> float:
    d0 = float(_distances(record, 0)[0, 0])
    if d0 == 0.0:
        raise ValueError("initial distance to the source is zero; performance undefined")
    return d0


def performance_gradient(record: SimulationRecord) -> float:
    """1 - D(end)/D(0) to the (first) source for the first agent."""
    d0 = _initial_distance(record)
    return float(1.0 - _distances(record, -1)[0, 0] / d0)


def performance_binary(record: SimulationRecord) -> float:
    """1 - min over sources of D(end), relative to the initial distance."""
    d0 = _initial_distance(record)
    return float(1.0 - np.min(_distances(record, -1)[0]) / d0)


def performance_collective(record: SimulationRecord, clamp: bool = False) -> float:
    """Group score for the source the agents ended up closest to on average.

    For each source the per-agent terms 1 - D_n(end)/D(0) are averaged; the
    best source's average is returned.  ``clamp`` floors each per-agent
    term at 0.
    """
    d0 = _initial_distance(record)
    terms = 1.0 - _distances(record, -1) / d0
    if clamp:
        terms = np.maximum(terms, 0.0)
    return float(np.max(np.mean(terms, axis=0)))


@dataclass(frozen=True)
class MetricSummary:
    performance: float
    mean_kop: float
    sd_kop: float
    mean_plv: float
    full_plv: float
    intra_wpli: float
    inter_wpli: float
    movement_mean_kop: float
    movement_sd_kop: float

    def as_dict(self) -> dict:
        return asdict(self)


def performance(record: SimulationRecord, clamp: bool = False) -> float:
    """Performance formula matching the record's setup."""
    if record.n_agents > 1:
        return performance_collective(record, clamp)
    if len(record.config.environment.sources) == 1:
        return performance_gradient(record)
    return performance_binary(record)


def summarize(record: SimulationRecord, *, window: int = DEFAULT_WINDOW, step: int = DEFAULT_STEP,
              transient: float = 0.0, clamp: bool = False) -> MetricSummary:
    """All metrics of one run.  Measures that need two agents are NaN otherwise."""
    start = _start_sample(record, transient)
    n = record.n_agents
    ph = record.phases[start:]
    kops = [kop_series_and_metastability(ph[:, k]) for k in range(n)]
    opts = dict(window=window, step=step, transient=transient)
    full = dict(window=ph.shape[0] * record.config.record_stride, step=1, transient=transient)
    nan = float("nan")
    if n > 1:
        inter = inter_agent_coupling(record, "wpli", **opts)
        move = movement_alignment(record, transient)
    else:
        inter, move = nan, (nan, nan)
    return MetricSummary(
        performance=performance(record, clamp),
        mean_kop=float(np.mean([k[0] for k in kops])),
        sd_kop=float(np.mean([k[1] for k in kops])),
        mean_plv=float(np.mean([intra_agent_coupling(record, k, "plv", **opts) for k in range(n)])),
        full_plv=float(np.mean([intra_agent_coupling(record, k, "plv", **full) for k in range(n)])),
        intra_wpli=float(np.mean([intra_agent_coupling(record, k, "wpli", **opts) for k in range(n)])),
        inter_wpli=inter,
        movement_mean_kop=move[0],
        movement_sd_kop=move[1],
    )
