"""Inversion of the alternating convolution series and epoch transport.

The law p of a rescaled interval length Z >= 1 determines a nonnegative
measure m on [1, inf) through

    p = sum_{k>=1} (-1)^(k+1) m^{*k} / k!

``deconvolve_m`` inverts this interval by interval.  The step function
U(x) = sum_{atoms y <= 1+x} y * m({y}) is the primitive of the measure in the
complete-monotone representation of the Laplace transform of Z, and it is
transported across epochs by an affine change of variable (``un_transport``).
``c0_estimate`` extracts the small-s limit of -s g'(s)/(1-g(s)), the single
constant the universal limit law remembers from the initial condition.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .measures import (AtomicMeasure, MASS_ATOL, MeasureError, NegativeMassError,
                       _coalesce, convolve)

_njit = None
if os.environ.get("HCPLAB_NO_NUMBA", "") == "":
    try:  # optional compiled kernel for the large-lattice route
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        pass


class TransportRangeError(ValueError):
    """un_transport was asked for a point beyond the computed range."""


# ---------------------------------------------------------------------------
# interval-recursive deconvolution
# ---------------------------------------------------------------------------

def deconvolve_m(p: AtomicMeasure, j_max: float) -> AtomicMeasure:
    """Recover m on [1, j_max) from the law p of Z >= 1.

    On each integer interval [j, j+1) the identity

        m = p + sum_{k=2}^{j} (-1)^k m^{*k} / k!

    is exact (m^{*k} vanishes there for k > j) and the right-hand side only
    involves m already recovered on [1, j-k+2), so the atoms of m are filled
    in interval by interval.  A recovered atom more negative than the mass
    clamp means p is not a valid Z-law for this decomposition under the given
    truncation.
    """
    if p.n_atoms and p.positions[0] < 1 - 1e-12:
        raise MeasureError("law of Z must be supported on [1, inf)")
    j_top = int(math.ceil(j_max))
    m_pos: list[np.ndarray] = []
    m_mas: list[np.ndarray] = []

    def current_m() -> AtomicMeasure:
        if not m_pos:
            return AtomicMeasure(np.empty(0), np.empty(0), j_max)
        return AtomicMeasure(np.concatenate(m_pos), np.concatenate(m_mas), j_max)

    for j in range(1, j_top):
        hi = min(float(j + 1), j_max)
        seg = p.restricted(j, hi)
        pos_parts = [seg.positions]
        mas_parts = [seg.masses]
        if j >= 2:
            m_so_far = current_m()
            power = m_so_far
            fact = 1.0
            for k in range(2, j + 1):
                power = convolve(power, m_so_far)
                fact *= k
                piece = power.restricted(j, hi)
                sign = 1.0 if k % 2 == 0 else -1.0
                pos_parts.append(piece.positions)
                mas_parts.append(sign * piece.masses / fact)
        pos, mas = _coalesce(np.concatenate(pos_parts), np.concatenate(mas_parts))
        if np.any(mas < -MASS_ATOL):
            where = pos[mas < -MASS_ATOL][0]
            raise NegativeMassError(
                f"deconvolution produced negative mass at {where}: input is not "
                "a valid Z-law under this truncation")
        keep = mas > 0.0
        if np.any(keep):
            m_pos.append(pos[keep])
            m_mas.append(mas[keep])
    return current_m()


def reassemble_z_law(m: AtomicMeasure, j_max: float) -> AtomicMeasure:
    """Round-trip oracle: evaluate sum_{k>=1} (-1)^(k+1) m^{*k}/k! below j_max."""
    acc_pos = [m.positions]
    acc_mas = [m.masses]
    power = m
    fact = 1.0
    k = 1
    while True:
        k += 1
        if k > j_max:
            break
        power = convolve(power, m)
        if power.n_atoms == 0:
            break
        fact *= k
        sign = 1.0 if k % 2 == 1 else -1.0
        acc_pos.append(power.positions)
        acc_mas.append(sign * power.masses / fact)
    pos, mas = _coalesce(np.concatenate(acc_pos), np.concatenate(acc_mas))
    keep = np.abs(mas) > 1e-13
    return AtomicMeasure(pos[keep], np.maximum(mas[keep], 0.0),
                         min(m.l_max, j_max))


# ---------------------------------------------------------------------------
# step functions and transport
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepFunction:
    """Right-continuous nondecreasing step function, zero left of the support."""

    jump_at: np.ndarray     # strictly increasing jump locations
    cumulative: np.ndarray  # value at and right of each jump
    domain_max: float       # arguments above this are outside the computed range

    def __call__(self, x) -> np.ndarray | float:
        x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        idx = np.searchsorted(self.jump_at, x_arr * (1 + 1e-15) + 1e-300, side="right")
        vals = np.concatenate(([0.0], self.cumulative))[idx]
        return vals if np.ndim(x) else float(vals[0])

    def left_limit(self, x) -> np.ndarray | float:
        x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        idx = np.searchsorted(self.jump_at, x_arr * (1 - 1e-15), side="left")
        vals = np.concatenate(([0.0], self.cumulative))[idx]
        return vals if np.ndim(x) else float(vals[0])


def u1_from_m(m: AtomicMeasure) -> StepFunction:
    """Primitive U(x) = sum_{atoms y <= 1+x} y * m({y}), a step function
    jumping by y*m({y}) at x = y - 1."""
    jumps = m.positions - 1.0
    sizes = m.positions * m.masses
    return StepFunction(jumps, np.cumsum(sizes), float(m.l_max - 1.0))


def un_transport(u1: StepFunction, d_n: float, x: float) -> float:
    """Epoch-n primitive by affine transport of the first-epoch one:

        U_n(x) = (1/d_n) * [ U1(d_n*(1+x) - 1) - U1((d_n - 1)-) ]
    """
    if d_n < 1:
        raise ValueError("d_n must be >= 1")
    if x < 0:
        return 0.0
    arg = d_n * (1.0 + x) - 1.0
    if arg > u1.domain_max * (1 + 1e-12):
        raise TransportRangeError(
            f"argument {arg:.6g} beyond computed range; deconvolve with "
            f"j_max >= {arg + 1:.6g}")
    return (u1(arg) - u1.left_limit(d_n - 1.0)) / d_n


# ---------------------------------------------------------------------------
# large-scale lattice route
# ---------------------------------------------------------------------------

def _u1_lattice_py(base: np.ndarray, atom_idx: np.ndarray,
                   atom_mass: np.ndarray) -> np.ndarray:
    # c[i] = base[i] + sum_j c[i - a_j] * w_j, resolved in blocks of the
    # smallest atom index: every dependency then falls in an earlier block.
    c = base.copy()
    n = c.size
    step = int(atom_idx.min())
    for start in range(0, n, step):
        stop = min(start + step, n)
        for a, w in zip(atom_idx, atom_mass):
            src_lo = start - int(a)
            src_hi = stop - int(a)
            if src_hi <= 0:
                continue
            if src_lo < 0:
                src_lo = 0
            c[src_lo + int(a):stop] += c[src_lo:src_hi] * w
    return c


if _njit is not None:
    @_njit(cache=True)
    def _u1_lattice_nb(base, atom_idx, atom_mass):  # pragma: no cover
        n = base.size
        c = base.copy()
        for i in range(n):
            acc = c[i]
            for j in range(atom_idx.size):
                a = atom_idx[j]
                if a <= i:
                    acc += c[i - a] * atom_mass[j]
            c[i] = acc
        return c


def u1_on_lattice(p: AtomicMeasure, spacing: float, j_max: float) -> StepFunction:
    """Large-scale route to U1 for a law snapped to a lattice.

    Uses the derivative form of the series inversion: with c(x) = x*m({x}),

        c = x*p + c * p   (convolution, lower positions first)

    which recovers the same m as :func:`deconvolve_m` in one sweep and scales
    to lattices with millions of sites.  Positions of p are rounded to the
    lattice; the rounding is the declared discretization of the input law.
    """
    if p.n_atoms == 0:
        raise MeasureError("empty law")
    n = int(math.floor(j_max / spacing)) + 1
    idx = np.rint(p.positions / spacing).astype(np.int64)
    keep = idx < n
    pvec = np.zeros(n)
    np.add.at(pvec, idx[keep], p.masses[keep])
    xs = np.arange(n) * spacing
    atom_idx = np.unique(idx[keep & (idx > 0)])
    atom_mass = np.array([pvec[a] for a in atom_idx])
    nonzero = atom_mass > 0
    atom_idx, atom_mass = atom_idx[nonzero], atom_mass[nonzero]
    if atom_idx.size == 0:
        raise MeasureError("law has no mass below j_max")
    base = xs * pvec
    if _njit is not None:
        c = _u1_lattice_nb(base, atom_idx, atom_mass)
    else:
        c = _u1_lattice_py(base, atom_idx, atom_mass)
    jump_at = xs - 1.0
    keep = c > 0
    return StepFunction(jump_at[keep], np.cumsum(c[keep]), float(j_max - 1.0))


# ---------------------------------------------------------------------------
# c0 estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class C0Estimate:
    estimate: float
    converged: bool
    s_grid: np.ndarray
    ratio: np.ndarray

    def __iter__(self):
        return iter((self.estimate, self.converged))


def default_c0_grid(s_max: float = 1e-2, s_min: float = 1e-9,
                    per_decade: int = 20) -> np.ndarray:
    n = int(round(per_decade * math.log10(s_max / s_min))) + 1
    return np.geomspace(s_max, s_min, n)


def c0_estimate(g, s_grid, osc_tol: float = 1e-4) -> C0Estimate:
    """Tail limit of r(s) = -s g'(s) / (1 - g(s)) along a grid decreasing to 0.

    ``g`` may be an AtomicMeasure (transform and its derivative evaluated by
    exact summation, never finite differences) or any object exposing
    ``transform`` / ``transform_derivative``.

    The converged flag is false when the oscillation (max - min) of r over the
    last decade of the grid exceeds ``osc_tol``: a periodic-in-log tail ratio
    never settles and sweeps its amplitude within any decade.  When converged,
    the estimate extrapolates the last two ratios linearly to s = 0; otherwise
    it reports the center of the oscillation window.
    """
    s = np.asarray(s_grid, dtype=float)
    if np.any(s <= 0):
        raise ValueError("s grid must be positive (the limit is one-sided)")
    s = np.sort(s)[::-1]
    if hasattr(g, "one_minus_transform"):
        one_minus = np.asarray(g.one_minus_transform(s), dtype=float)
    else:
        one_minus = 1.0 - np.asarray(g.transform(s), dtype=float)
    gprime = np.asarray(g.transform_derivative(s), dtype=float)
    ratio = -s * gprime / one_minus
    window = ratio[s <= s[-1] * 10.0 * (1 + 1e-12)]
    if window.size < 2:
        window = ratio[-2:]
    converged = bool(window.max() - window.min() <= osc_tol)
    if converged and s.size >= 2:
        s1, s2 = s[-2], s[-1]
        r1, r2 = ratio[-2], ratio[-1]
        estimate = r2 - (r1 - r2) * s2 / (s1 - s2)
    else:
        estimate = float((window.max() + window.min()) / 2.0)
    estimate = float(min(1.0, max(0.0, estimate)))
    return C0Estimate(estimate, converged, s, ratio)


@dataclass(frozen=True)
class TransformPair:
    """Adapter exposing analytic transform callables to c0_estimate."""

    g: callable
    g_prime: callable

    def transform(self, s):
        return np.asarray([self.g(v) for v in np.atleast_1d(s)], dtype=float)

    def transform_derivative(self, s):
        return np.asarray([self.g_prime(v) for v in np.atleast_1d(s)], dtype=float)
