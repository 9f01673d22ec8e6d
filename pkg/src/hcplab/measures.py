"""Atomic measures with truncation accounting, and epoch-level interval-law analytics.

An :class:`AtomicMeasure` is a finite nonnegative measure stored as sorted
(position, mass) atoms together with a truncation bound ``l_max`` and a
``deficit``: mass known to lie beyond ``l_max``.  All analytic operations
(convolution, the one-epoch pushforward, the multi-epoch iteration, survival
probabilities) are exact for the stored atoms; truncated mass is carried in
the deficit so that totals are conserved.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

# Atom coalescing tolerance (relative on positions) and the clamp below which
# small negative masses from series cancellation are treated as zero.
POSITION_RTOL = 1e-12
MASS_ATOL = 1e-12

# Dense-vector convolution is used when both operands sit on a common lattice
# and the implied vector is not absurdly long.
_MAX_DENSE = 16_000_000
_FFT_THRESHOLD = 4_000_000  # switch np.convolve -> fftconvolve above this cost


class MeasureError(ValueError):
    """Invalid measure or measure operation."""


class NegativeMassError(MeasureError):
    """An operation produced an atom more negative than the mass clamp."""


class DeficitError(MeasureError):
    """Truncation deficit exceeded the configured bound in strict mode."""


def _coalesce(positions: np.ndarray, masses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort atoms and merge positions that agree within POSITION_RTOL."""
    if positions.size == 0:
        return positions, masses
    order = np.argsort(positions, kind="stable")
    pos = positions[order]
    mas = masses[order]
    gaps = np.diff(pos)
    tol = POSITION_RTOL * np.maximum(1.0, pos[1:])
    new_group = np.concatenate(([True], gaps > tol))
    starts = np.flatnonzero(new_group)
    out_pos = pos[starts]
    out_mas = np.add.reduceat(mas, starts)
    return out_pos, out_mas


def _detect_lattice(positions: np.ndarray) -> float | None:
    """Return a spacing delta such that positions ~= integer multiples of delta."""
    if positions.size == 0:
        return None
    if positions.size == 1:
        return float(positions[0])
    candidates = np.concatenate((np.diff(positions), positions[:1]))
    delta = float(np.min(candidates[candidates > 0]))
    for _ in range(8):
        idx = positions / delta
        frac = np.abs(idx - np.rint(idx))
        if np.all(frac < 1e-9 * np.maximum(1.0, idx)):
            return delta
        # shrink toward a common divisor using the worst offender
        bad = float(positions[np.argmax(frac)])
        r = bad - delta * math.floor(bad / delta)
        if r <= 1e-9 * delta:
            return None
        delta = min(r, delta - r) if min(r, delta - r) > 0 else r
        if delta <= 0:
            return None
    return None


@dataclass(frozen=True)
class AtomicMeasure:
    """Sorted-atom measure on (0, inf) with truncation bookkeeping.

    positions : strictly increasing, positive
    masses    : nonnegative, aligned with positions
    l_max     : truncation bound; all positions are <= l_max
    deficit   : mass known to lie beyond l_max
    """

    positions: np.ndarray
    masses: np.ndarray
    l_max: float
    deficit: float = 0.0

    def __post_init__(self):
        pos = np.atleast_1d(np.asarray(self.positions, dtype=np.float64))
        mas = np.atleast_1d(np.asarray(self.masses, dtype=np.float64))
        if pos.shape != mas.shape:
            raise MeasureError("positions and masses must have equal length")
        if pos.size and np.any(pos <= 0):
            raise MeasureError("atom positions must be positive")
        if pos.size and np.any(np.diff(pos) <= 0):
            pos, mas = _coalesce(pos, mas)
        if mas.size and np.any(mas < -MASS_ATOL):
            worst = pos[int(np.argmin(mas))]
            raise NegativeMassError(f"negative atom mass at position {worst!r}")
        mas = np.maximum(mas, 0.0)
        if self.deficit < -MASS_ATOL:
            raise MeasureError("deficit must be nonnegative")
        if pos.size and pos[-1] > self.l_max * (1 + POSITION_RTOL):
            raise MeasureError(f"atom at {pos[-1]} beyond l_max={self.l_max}")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", mas)
        object.__setattr__(self, "deficit", max(0.0, float(self.deficit)))

    # -- basic queries ------------------------------------------------------

    @property
    def n_atoms(self) -> int:
        return int(self.positions.size)

    @property
    def finite_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def total_mass(self) -> float:
        """Finite mass plus deficit."""
        return self.finite_mass + self.deficit

    def mass_on(self, lo: float, hi: float) -> float:
        """Mass of atoms with position in [lo, hi)."""
        i = np.searchsorted(self.positions, lo - POSITION_RTOL * max(1.0, lo))
        j = np.searchsorted(self.positions, hi - POSITION_RTOL * max(1.0, hi))
        return float(self.masses[i:j].sum())

    def restricted(self, lo: float, hi: float) -> "AtomicMeasure":
        """Restriction to [lo, hi); deficit is dropped (it lies beyond l_max)."""
        i = np.searchsorted(self.positions, lo - POSITION_RTOL * max(1.0, lo))
        j = np.searchsorted(self.positions, hi - POSITION_RTOL * max(1.0, hi))
        return AtomicMeasure(self.positions[i:j], self.masses[i:j], self.l_max, 0.0)

    def mean(self) -> float:
        if self.deficit > MASS_ATOL:
            return math.inf
        return float(self.positions @ self.masses)

    def rescaled(self, factor: float) -> "AtomicMeasure":
        """Pushforward under x -> factor * x."""
        if factor <= 0:
            raise MeasureError("rescale factor must be positive")
        return AtomicMeasure(self.positions * factor, self.masses.copy(),
                             self.l_max * factor, self.deficit)

    def normalized(self) -> "AtomicMeasure":
        t = self.total_mass
        if t <= 0:
            raise MeasureError("cannot normalize a null measure")
        return AtomicMeasure(self.positions, self.masses / t, self.l_max, self.deficit / t)

    # -- transforms ---------------------------------------------------------

    def transform(self, s) -> np.ndarray | float:
        """Laplace transform sum_i w_i exp(-s x_i) (deficit excluded)."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = np.exp(-np.outer(s_arr, self.positions)) @ self.masses
        return out if np.ndim(s) else float(out[0])

    def transform_derivative(self, s) -> np.ndarray | float:
        """d/ds of the transform: the position-weighted transform, exact."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = -(np.exp(-np.outer(s_arr, self.positions)) @ (self.positions * self.masses))
        return out if np.ndim(s) else float(out[0])

    def one_minus_transform(self, s) -> np.ndarray | float:
        """1*total - transform, evaluated stably via expm1; includes deficit."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = -(np.expm1(-np.outer(s_arr, self.positions)) @ self.masses) + self.deficit
        return out if np.ndim(s) else float(out[0])

    def cdf(self, x) -> np.ndarray | float:
        x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        cum = np.concatenate(([0.0], np.cumsum(self.masses)))
        idx = np.searchsorted(self.positions, x_arr * (1 + POSITION_RTOL), side="right")
        out = cum[idx]
        return out if np.ndim(x) else float(out[0])

    # -- serialization ------------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# l_max={self.l_max!r} deficit={self.deficit!r}\n")
            fh.write("position,mass\n")
            for p, w in zip(self.positions, self.masses):
                fh.write(f"{float(p)!r},{float(w)!r}\n")

    @classmethod
    def from_csv(cls, path) -> "AtomicMeasure":
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith("#"):
                raise MeasureError("measure CSV must start with an '# l_max=... deficit=...' line")
            meta = dict(tok.split("=", 1) for tok in header[1:].split())
            fh.readline()  # column header
            rows = [line.strip().split(",") for line in fh if line.strip()]
        pos = np.array([float(r[0]) for r in rows])
        mas = np.array([float(r[1]) for r in rows])
        return cls(pos, mas, float(meta["l_max"]), float(meta["deficit"]))


def dirac(position: float, l_max: float, mass: float = 1.0) -> AtomicMeasure:
    """Point mass at ``position``."""
    return AtomicMeasure(np.array([position]), np.array([mass]), l_max)


def from_pmf(positions, masses, l_max: float) -> AtomicMeasure:
    return AtomicMeasure(np.asarray(positions, float), np.asarray(masses, float), l_max)


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------

def _convolve_dense(m1: AtomicMeasure, m2: AtomicMeasure, delta: float,
                    l_max: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Lattice convolution on spacing delta; returns (positions, masses, overflow)."""
    i1 = np.rint(m1.positions / delta).astype(np.int64)
    i2 = np.rint(m2.positions / delta).astype(np.int64)
    v1 = np.zeros(int(i1[-1]) + 1)
    v2 = np.zeros(int(i2[-1]) + 1)
    np.add.at(v1, i1, m1.masses)  # distinct atoms may share a lattice cell
    np.add.at(v2, i2, m2.masses)
    if v1.size * v2.size > _FFT_THRESHOLD:
        from scipy.signal import fftconvolve
        out = fftconvolve(v1, v2)
        out[np.abs(out) < 1e-16 * max(1.0, out.max(initial=0.0))] = 0.0
    else:
        out = np.convolve(v1, v2)
    idx = np.flatnonzero(out)
    pos = idx * delta
    mas = out[idx]
    keep = pos <= l_max * (1 + POSITION_RTOL)
    overflow = float(mas[~keep].sum())
    return pos[keep], mas[keep], overflow


def _convolve_outer(m1: AtomicMeasure, m2: AtomicMeasure,
                    l_max: float) -> tuple[np.ndarray, np.ndarray, float]:
    pos = np.add.outer(m1.positions, m2.positions).ravel()
    mas = np.multiply.outer(m1.masses, m2.masses).ravel()
    keep = pos <= l_max * (1 + POSITION_RTOL)
    overflow = float(mas[~keep].sum())
    p, w = _coalesce(pos[keep], mas[keep])
    return p, w, overflow


def convolve(m1: AtomicMeasure, m2: AtomicMeasure) -> AtomicMeasure:
    """Convolution m1 * m2: atom at p1+p2 with mass w1*w2 for every atom pair.

    Mass landing beyond l_max (including anything involving an input deficit)
    is added to the output deficit.  Atoms at equal positions are coalesced
    within the position tolerance.
    """
    l_max = min(m1.l_max, m2.l_max)
    if m1.n_atoms == 0 or m2.n_atoms == 0:
        overflow = 0.0
        pos = np.empty(0)
        mas = np.empty(0)
    else:
        d1 = _detect_lattice(m1.positions)
        d2 = _detect_lattice(m2.positions)
        use_dense = (
            d1 is not None and d2 is not None
            and abs(d1 - d2) <= 1e-9 * max(d1, d2)
            and (m1.positions[-1] + m2.positions[-1]) / d1 < _MAX_DENSE
        )
        if use_dense:
            pos, mas, overflow = _convolve_dense(m1, m2, d1, l_max)
        else:
            pos, mas, overflow = _convolve_outer(m1, m2, l_max)
    deficit = (overflow
               + m1.deficit * m2.total_mass
               + m2.deficit * m1.finite_mass)
    return AtomicMeasure(pos, mas, l_max, deficit)


def convolution_power(m: AtomicMeasure, k: int) -> AtomicMeasure:
    """k-fold convolution power; k=0 is the unit (point mass at 0 is not
    representable here, so k must be >= 1)."""
    if k < 1:
        raise MeasureError("convolution power requires k >= 1")
    out = m
    for _ in range(k - 1):
        out = convolve(out, m)
    return out


# ---------------------------------------------------------------------------
# one-epoch pushforward and HCP iteration
# ---------------------------------------------------------------------------

def epoch_pushforward(mu: AtomicMeasure, d_min: float, d_max: float) -> AtomicMeasure:
    """Final interval law of one coalescence epoch with active range [d_min, d_max).

    With h = mu restricted to the active range, the output is

        mu_inf = sum_{k>=0} (mu * h^{*k}) / k!  -  sum_{k>=1} h^{*k} / k!

    a nonnegative measure supported on [d_max, inf).  The series is finite
    under truncation because h^{*k} is supported on [k*d_min, inf).  The two
    series are accumulated jointly as mu + sum_k ((mu - delta_0) * h^{*k})/k!
    so the cancellation below d_max happens atom by atom.
    """
    if 2 * d_min < d_max * (1 - 1e-12):
        raise MeasureError(f"active range violates 2*d_min >= d_max: [{d_min}, {d_max})")
    if mu.n_atoms and mu.positions[0] < d_min * (1 - 1e-12):
        raise MeasureError(f"law has mass at {mu.positions[0]} below d_min={d_min}")
    if d_max > mu.l_max:
        raise MeasureError("l_max must be at least d_max")

    h = mu.restricted(d_min, d_max)
    total_in = mu.total_mass
    if h.n_atoms == 0:
        return mu  # no active mass: the epoch is a no-op

    acc_pos = [mu.positions]
    acc_mas = [mu.masses]
    hk = h
    fact = 1.0
    k = 1
    while True:
        fact *= k
        # term ((mu * h^{*k}) - h^{*k}) / k!
        conv = convolve(mu, hk)
        acc_pos.append(conv.positions)
        acc_mas.append(conv.masses / fact)
        acc_pos.append(hk.positions)
        acc_mas.append(-hk.masses / fact)
        k += 1
        if (k * d_min > mu.l_max) or (hk.finite_mass / fact < 1e-18 * max(1.0, total_in)):
            break
        hk = convolve(hk, h)
        if hk.n_atoms == 0:
            break

    pos, mas = _coalesce(np.concatenate(acc_pos), np.concatenate(acc_mas))

    # Below d_max everything must cancel; clamp residues, flag real negatives.
    below = pos < d_max * (1 - 1e-12)
    bad = np.abs(mas) > MASS_ATOL
    if np.any(below & bad):
        where = pos[below & bad][0]
        raise NegativeMassError(
            f"pushforward left non-cancelled mass {mas[below & bad][0]:.3e} at {where}")
    if np.any(mas < -MASS_ATOL):
        where = pos[mas < -MASS_ATOL][0]
        raise NegativeMassError(f"pushforward produced negative atom at {where}")
    keep = (~below) & (mas > 0.0)
    pos, mas = pos[keep], mas[keep]
    deficit = max(0.0, total_in - float(mas.sum()))
    return AtomicMeasure(pos, mas, mu.l_max, deficit)


def iterate_hcp_measures(mu1: AtomicMeasure, thresholds, n_epochs: int,
                         deficit_bound: float = 1e-6, strict: bool = False
                         ) -> tuple[list[AtomicMeasure], list[float]]:
    """Iterate the epoch pushforward along a threshold sequence.

    thresholds : sequence with d(1) < d(2) < ... covering n_epochs + 1 entries,
                 or a callable n -> d(n) (1-based).
    Returns (laws, active_masses): laws[n-1] is the interval law at the start
    of epoch n; active_masses[n-1] is its mass on [d(n), d(n+1)).
    """
    d = _threshold_fn(thresholds)
    laws = [mu1]
    active = []
    for n in range(1, n_epochs + 1):
        mu = laws[-1]
        if mu.deficit > deficit_bound:
            msg = f"truncation deficit {mu.deficit:.3e} exceeds {deficit_bound:.1e} at epoch {n}"
            if strict:
                raise DeficitError(msg)
            warnings.warn(msg, stacklevel=2)
        active.append(mu.mass_on(d(n), d(n + 1)))
        if n < n_epochs:
            laws.append(epoch_pushforward(mu, d(n), d(n + 1)))
    return laws, active


def _threshold_fn(thresholds):
    if callable(thresholds):
        return thresholds
    seq = list(thresholds)
    return lambda n: seq[n - 1]


def survival_probability_exact(h_masses, n: int, gamma: float) -> float:
    """P(first point unchanged at the start of epoch n+1) given the active
    masses h_masses[j-1] = mu^(j)([d(j), d(j+1))) for j = 1..n:

        exp( - sum_{j=1}^{n} h_j / (1 + gamma) )
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if n > len(h_masses):
        raise ValueError(f"need {n} active masses, got {len(h_masses)}")
    s = float(np.sum(np.asarray(h_masses, dtype=float)[:n]))
    return math.exp(-s / (1.0 + gamma))


# ---------------------------------------------------------------------------
# discretization helper and the geometric-exponent test law
# ---------------------------------------------------------------------------

def discretize_cdf(cdf, lo: float, l_max: float, spacing: float) -> AtomicMeasure:
    """Bin a CDF onto a lattice: atom at lo + k*spacing carries the mass of
    ((k-1/2)*spacing, (k+1/2)*spacing] shifted by lo.  The discretization
    error is the caller's declared modeling choice."""
    grid = np.arange(lo, l_max + spacing / 2, spacing)
    edges = np.concatenate((grid - spacing / 2, [grid[-1] + spacing / 2]))
    edges[0] = min(edges[0], lo * (1 - 1e-12))
    cvals = np.asarray([cdf(e) for e in edges], dtype=float)
    masses = np.diff(cvals)
    deficit = max(0.0, 1.0 - float(cvals[-1]))
    keep = masses > 0
    return AtomicMeasure(grid[keep], masses[keep], l_max, deficit)


def exp_geometric_law(p: float, n_atoms: int, l_max: float | None = None) -> AtomicMeasure:
    """Law of exp(G) for G geometric on {1,2,...} with success probability p:
    atoms at e^k with masses p*(1-p)^(k-1), truncated to n_atoms atoms."""
    if not 0 < p < 1:
        raise MeasureError("p must lie in (0, 1)")
    if n_atoms < 1:
        raise MeasureError("need at least one atom")
    k = np.arange(1, n_atoms + 1)
    pos = np.exp(k.astype(float))
    mas = p * (1 - p) ** (k - 1.0)
    deficit = (1 - p) ** n_atoms
    if l_max is None:
        l_max = float(pos[-1])
    return AtomicMeasure(pos, mas, l_max, deficit)


def oscillating_tail_law(p: float, n_atoms: int,
                         l_max: float | None = None) -> AtomicMeasure:
    """The infinite-mean regime of :func:`exp_geometric_law`.

    Requires lambda = -log(1-p) in (0,1), i.e. (1-p)*e > 1, the regime in
    which the interval-law tail ratio -s g'(s)/(1-g(s)) has no limit.
    """
    lam = -math.log1p(-p)
    if not 0 < lam < 1:
        raise MeasureError(
            f"lambda=-log(1-p)={lam:.4f} outside (0,1): finite mean, not the "
            "oscillating regime")
    return exp_geometric_law(p, n_atoms, l_max)
