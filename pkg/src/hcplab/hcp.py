"""Chain one-epoch runs into the hierarchical process and collect observables.

Observables are recorded at each epoch START (the state produced by the
previous epoch), matching the interval laws computed by the measure
analytics.  Point identity is preserved exactly: coordinates are carried
through untouched, so "the first point never moved" is a float equality.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import Boundary
from .epoch import _simulate_points
from .sampling import RenewalSpec, replica_rng, sample_spec
from .schedule import EpochSchedule


class WindowExhaustedError(RuntimeError):
    """The finite window ran out of intervals before the requested epoch."""

    def __init__(self, epoch: int):
        super().__init__(f"window exhausted at epoch {epoch}; enlarge the initial window")
        self.epoch = epoch


@dataclass(frozen=True)
class WindowPolicy:
    """How large the simulated window is and how edges are excluded.

    n_intervals : explicit initial interval count, or None to size from
        target_core: a pilot run estimates the per-run shrink factor and the
        initial count is target*shrink*safety plus the buffered edge cost.
    buffer_factor : length excluded near each truncated edge when reading
        interval statistics at epoch n is buffer_factor * sum_{j<=n} d(j).
    """

    n_intervals: int | None = None
    target_core: int | None = None
    buffer_factor: float = 16.0
    pilot_intervals: int = 4096
    safety: float = 1.6

    def __post_init__(self):
        if self.n_intervals is None and self.target_core is None:
            raise ValueError("window policy needs n_intervals or target_core")


@dataclass(frozen=True)
class EpochSummary:
    """Observables at the start of one epoch, possibly pooled over replicas.

    Arrays indexed by sample (z_samples) or by replica (everything else).
    """

    epoch: int
    d_n: float
    z_samples: np.ndarray
    first_point: np.ndarray
    y: np.ndarray
    first_point_survived: np.ndarray
    origin_alive: np.ndarray  # the marked point (origin of origin-containing specs)
    merges_prior: np.ndarray
    n_intervals: np.ndarray
    core_sizes: np.ndarray
    replica: np.ndarray

    @property
    def core_size(self) -> int:
        return int(self.z_samples.size)


def pool_summaries(runs: list[list[EpochSummary]]) -> list[EpochSummary]:
    """Concatenate per-replica summaries epoch by epoch (replica order, so the
    result is independent of execution order and parallelism degree)."""
    if not runs:
        return []
    n_epochs = len(runs[0])
    pooled = []
    for e in range(n_epochs):
        parts = [r[e] for r in runs]
        first = parts[0]
        pooled.append(EpochSummary(
            epoch=first.epoch,
            d_n=first.d_n,
            z_samples=np.concatenate([p.z_samples for p in parts]),
            first_point=np.concatenate([p.first_point for p in parts]),
            y=np.concatenate([p.y for p in parts]),
            first_point_survived=np.concatenate([p.first_point_survived for p in parts]),
            origin_alive=np.concatenate([p.origin_alive for p in parts]),
            merges_prior=np.concatenate([p.merges_prior for p in parts]),
            n_intervals=np.concatenate([p.n_intervals for p in parts]),
            core_sizes=np.concatenate([p.core_sizes for p in parts]),
            replica=np.concatenate([p.replica for p in parts]),
        ))
    return pooled


def _pilot_initial_count(spec, schedule, n_epochs, policy, rng) -> int:
    """Size the window from a pilot run: survivors-per-initial ratio plus the
    interval cost of the edge buffers."""
    pilot_n = policy.pilot_intervals
    for _ in range(4):
        try:
            summaries = run_hcp(spec, schedule, n_epochs,
                                WindowPolicy(n_intervals=pilot_n,
                                             buffer_factor=policy.buffer_factor),
                                rng.spawn(1)[0], _validate=False)
        except WindowExhaustedError:
            pilot_n *= 4
            continue
        final = summaries[-1]
        survivors = int(final.n_intervals.sum())
        if survivors < 8:
            pilot_n *= 4
            continue
        shrink = pilot_n / survivors
        buffered = int(final.n_intervals.sum() - final.core_sizes.sum())
        per_run_overhead = buffered + 4
        need_final = policy.target_core + per_run_overhead
        return int(math.ceil(need_final * shrink * policy.safety))
    raise WindowExhaustedError(n_epochs)


def run_hcp(spec: RenewalSpec, schedule: EpochSchedule, n_epochs: int,
            window: WindowPolicy, rng, replica: int = 0,
            _validate: bool = True) -> list[EpochSummary]:
    """Run the hierarchical process for ``n_epochs`` and return the summary
    recorded at the start of each epoch (epoch n runs only for n < n_epochs)."""
    if isinstance(rng, (int, np.integer)):
        rng = replica_rng(int(rng))
    if n_epochs < 1:
        raise ValueError("need at least one epoch")
    if _validate:
        schedule.validate(n_epochs)

    if window.n_intervals is not None:
        n0 = window.n_intervals
    else:
        n0 = _pilot_initial_count(spec, schedule, n_epochs, window, rng)
    config, marked_idx = sample_spec(spec, n0, rng)
    periodic = config.boundary is Boundary.PERIODIC
    circumference = config.circumference if periodic else None
    # work in coordinates anchored at the initial first point: lattice gaps
    # stay exact and point identity is plain float equality
    shift = config.first_point
    points = config.relative_points()
    first_rel = points[0]
    marked_rel = points[marked_idx]  # the origin for origin-containing specs

    summaries = []
    merges_prior = 0
    buffer_len = 0.0
    for n in range(1, n_epochs + 1):
        d_n = schedule.d(n)
        buffer_len += window.buffer_factor * d_n
        if points.size < (1 if periodic else 2):
            raise WindowExhaustedError(n)
        if periodic:
            gaps = np.empty(points.size)
            gaps[:-1] = np.diff(points)
            gaps[-1] = circumference - (points[-1] - points[0])
            core = np.ones(gaps.size, dtype=bool)
        else:
            gaps = np.diff(points)
            lo = points[0] if config.boundary is Boundary.LEFT_BOUNDED \
                else points[0] + buffer_len
            hi = points[-1] - buffer_len
            core = (points[:-1] >= lo) & (points[1:] <= hi)
        if gaps.size and gaps.min() < d_n * (1 - 1e-9) - 1e-9:
            raise AssertionError(
                f"epoch {n} start has interval {gaps.min()} below d({n})={d_n}")
        z = gaps[core] / d_n
        k = int(np.searchsorted(points, marked_rel))
        marked_alive = bool(k < points.size and points[k] == marked_rel)
        x0 = points[0] + shift
        summaries.append(EpochSummary(
            epoch=n,
            d_n=d_n,
            z_samples=z,
            first_point=np.array([x0]),
            y=np.array([x0 / d_n]),
            first_point_survived=np.array([points[0] == first_rel]),
            origin_alive=np.array([marked_alive]),
            merges_prior=np.array([merges_prior]),
            n_intervals=np.array([gaps.size]),
            core_sizes=np.array([int(core.sum())]),
            replica=np.array([replica]),
        ))
        if n < n_epochs:
            rates = schedule.rates_for(n)
            alive, log, _ = _simulate_points(points, periodic, circumference, rates, rng)
            points = points[alive]
            merges_prior = log.n_merges
    return summaries


def _replicate_worker(args):
    spec, schedule, n_epochs, window, base_seed, r = args
    return run_hcp(spec, schedule, n_epochs, window,
                   replica_rng(base_seed, r), replica=r, _validate=False)


def replicate(spec: RenewalSpec, schedule: EpochSchedule, n_epochs: int,
              n_replicas: int, base_seed: int, window: WindowPolicy,
              processes: int = 1) -> list[EpochSummary]:
    """Pool independent replicas; replica r uses the stream derived from
    (base_seed, r), so the pooled output is reproducible and does not depend
    on the execution order or the degree of parallelism."""
    if n_replicas < 1:
        raise ValueError("need at least one replica")
    schedule.validate(n_epochs)
    jobs = [(spec, schedule, n_epochs, window, base_seed, r) for r in range(n_replicas)]
    if processes > 1:
        with ProcessPoolExecutor(max_workers=processes) as ex:
            runs = list(ex.map(_replicate_worker, jobs, chunksize=max(1, n_replicas // (8 * processes))))
    else:
        runs = [_replicate_worker(j) for j in jobs]
    return pool_summaries(runs)
