"""Discrete-event core: run one coalescence epoch to its absorbing state.

Because a merged domain is never active again within an epoch (assumption
(A2)), every clock that will ever ring is known at epoch start: one
exponential clock per initially active domain, plus one direction coin.  The
event queue is therefore materialized as a time-sorted array and consumed
with lazy invalidation: a popped ring whose domain has lost an endpoint is
discarded.  The dynamics reduce to point erasures, so validity of a ring is
simply "both endpoints of the ringing domain are still alive".

Ties in ring times are broken by lower domain index; with a fixed seed the
whole epoch is reproducible bit for bit, and scaling both rate functions by
a common constant changes only the time axis, not the event order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .config import Boundary, IntervalConfiguration
from .rates import RateFamily, validate_rates

_USE_NUMBA = os.environ.get("HCPLAB_NO_NUMBA", "") == ""
if _USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        _USE_NUMBA = False


class StateSpaceError(ValueError):
    """Configuration outside the state space of the epoch (length < d_min)."""


class RateValidityError(ValueError):
    """Rate family failed validation."""


class CoreRegionEmptyError(ValueError):
    """Buffering removed every interval; a larger window is needed."""


@dataclass(frozen=True)
class MergeLog:
    """One row per merge: ring time, erased point, and direction (+1 when the
    ringing domain incorporated its right neighbor, -1 for its left)."""

    times: np.ndarray
    positions: np.ndarray
    directions: np.ndarray

    @property
    def n_merges(self) -> int:
        return int(self.times.size)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("time,position,direction\n")
            for t, p, d in zip(self.times, self.positions, self.directions):
                fh.write(f"{float(t)!r},{float(p)!r},{int(d)}\n")


@dataclass(frozen=True)
class EpochResult:
    final: IntervalConfiguration
    log: MergeLog
    clock: float                      # time of the last merge (0 if none)
    surviving_points: np.ndarray      # exact coordinates kept from the input


def _kernel_py(order, erase_left, alive, point_coords, periodic, n_points,
               times, log_t, log_pos, log_dir):
    n_log = 0
    t_last = 0.0
    for e in range(order.size):
        i = order[e]
        a = i
        b = i + 1
        if periodic and b == n_points:
            b = 0
        if alive[a] and alive[b]:
            victim = a if erase_left[i] else b
            alive[victim] = False
            t_last = times[i]
            log_t[n_log] = t_last
            log_pos[n_log] = point_coords[victim]
            log_dir[n_log] = -1 if erase_left[i] else 1
            n_log += 1
    return n_log, t_last


if _USE_NUMBA:
    _kernel_nb = _njit(cache=True)(_kernel_py)


def _simulate_points(points: np.ndarray, periodic: bool, circumference: float | None,
                     rates: RateFamily, rng) -> tuple[np.ndarray, MergeLog, float]:
    """Erase points of one epoch; returns (alive mask, merge log, last time)."""
    n_points = points.size
    if periodic:
        gaps = np.empty(n_points)
        gaps[:-1] = np.diff(points)
        gaps[-1] = circumference - (points[-1] - points[0])
    else:
        gaps = np.diff(points)
    if gaps.size and gaps.min() < rates.d_min * (1 - 1e-9) - 1e-12:
        raise StateSpaceError(
            f"interval of length {gaps.min()} below d_min={rates.d_min}")

    active = (gaps >= rates.d_min) & (gaps < rates.d_max)
    idx = np.flatnonzero(active)
    lam_l = np.asarray(rates.lambda_left(gaps[idx]), dtype=float)
    lam_r = np.asarray(rates.lambda_right(gaps[idx]), dtype=float)
    lam = lam_l + lam_r
    if np.any(lam <= 0):
        raise RateValidityError("active domain with zero total rate; validate_rates first")
    # standard exponentials divided by the rates: scaling every rate by a
    # common constant rescales the time axis without reordering any event
    times = rng.exponential(scale=1.0, size=idx.size) / lam
    erase_left = rng.random(idx.size) < (lam_r / lam)

    order_local = np.argsort(times, kind="stable")
    order = idx[order_local].astype(np.int64)
    times_by_domain = np.zeros(gaps.size)
    times_by_domain[idx] = times
    erase_left_by_domain = np.zeros(gaps.size, dtype=np.bool_)
    erase_left_by_domain[idx] = erase_left

    alive = np.ones(n_points, dtype=np.bool_)
    log_t = np.empty(idx.size)
    log_pos = np.empty(idx.size)
    log_dir = np.empty(idx.size, dtype=np.int64)
    kernel = _kernel_nb if _USE_NUMBA else _kernel_py
    n_log, t_last = kernel(order, erase_left_by_domain, alive, points,
                           periodic, n_points, times_by_domain,
                           log_t, log_pos, log_dir)
    log = MergeLog(log_t[:n_log].copy(), log_pos[:n_log].copy(), log_dir[:n_log].copy())
    return alive, log, float(t_last)


def run_epoch(config: IntervalConfiguration, rates: RateFamily, rng,
              validate: bool = True) -> EpochResult:
    """Run one epoch to its absorbing state.

    The returned configuration's point set is a subset of the input's (the
    coordinates are carried through exactly), and every final interval length
    is at least d_max.
    """
    if validate:
        report = validate_rates(rates)
        if not report.ok:
            raise RateValidityError("; ".join(report.violations))
    periodic = config.boundary is Boundary.PERIODIC
    points = config.points()
    circ = config.circumference if periodic else None
    alive, log, t_last = _simulate_points(points, periodic, circ, rates, rng)
    survivors = points[alive]
    if periodic:
        if survivors.size == 0:
            final = IntervalConfiguration(config.first_point, np.empty(0), Boundary.PERIODIC)
        else:
            gaps = np.empty(survivors.size)
            gaps[:-1] = np.diff(survivors)
            gaps[-1] = circ - (survivors[-1] - survivors[0])
            final = IntervalConfiguration(float(survivors[0]), gaps, Boundary.PERIODIC)
    else:
        # the outermost points cannot both vanish: the outer sentinel domains
        # are inactive, so at least one point survives between them
        final = IntervalConfiguration(float(survivors[0]), np.diff(survivors),
                                      config.boundary)
    if final.n_intervals:
        lengths_ok = final.lengths >= rates.d_max * (1 - 1e-9) - 1e-9
        if not np.all(lengths_ok):
            bad = final.lengths[~lengths_ok].min()
            raise AssertionError(
                f"absorbing state violated: final length {bad} < d_max={rates.d_max}")
    return EpochResult(final, log, t_last, survivors)


@dataclass(frozen=True)
class EpochObservables:
    origin_survived: bool | None
    first_point_displacement: float
    core_lengths: np.ndarray


def core_length_mask(config: IntervalConfiguration, buffer_length: float) -> np.ndarray:
    """Mask of intervals far enough from the truncated edges.

    Periodic configurations have no edges; left-bounded ones have a physical
    left edge and exclude only a right buffer; windows exclude both sides.
    """
    if config.boundary is Boundary.PERIODIC or config.n_intervals == 0:
        return np.ones(config.n_intervals, dtype=bool)
    pts = config.points()
    left_edge, right_edge = pts[0], pts[-1]
    lo = left_edge if config.boundary is Boundary.LEFT_BOUNDED else left_edge + buffer_length
    hi = right_edge - buffer_length
    return (pts[:-1] >= lo) & (pts[1:] <= hi)


def epoch_observables(initial: IntervalConfiguration, final: IntervalConfiguration,
                      buffer_length: float = 0.0) -> EpochObservables:
    """First-point displacement, origin survival, and buffered length samples."""
    initial_points = initial.points()
    has_origin = bool(np.any(initial_points == 0.0))
    origin_survived = bool(np.any(final.points() == 0.0)) if has_origin else None
    displacement = final.first_point - initial.first_point
    mask = core_length_mask(final, buffer_length)
    core = final.lengths[mask]
    if core.size == 0 and final.n_intervals > 0:
        raise CoreRegionEmptyError(
            "buffering removed every interval; enlarge the window or shrink the buffer")
    return EpochObservables(origin_survived, float(displacement), core)
