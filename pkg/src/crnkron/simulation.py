"""Time integration of network dynamics with invariant monitoring.

The adaptive integrator is Dormand-Prince 5(4) with its free 4th-order
dense output. Trial steps that leave the positive orthant are rejected and
retried with half the step, which keeps every accepted state strictly
positive without clipping (clipping would break mass conservation).
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .equilibria import lyapunov_value
from .kinetics import build_laplacian, complex_monomials
from .network import ReactionNetwork, build_structure
from .reduction import ReducedNetwork

__all__ = [
    "IntegrationError",
    "Trajectory",
    "InvariantReport",
    "ComparisonReport",
    "integrate",
    "network_field",
    "reduced_field",
    "simulate",
    "simulate_reduced",
    "monitor",
    "compare",
    "DEFAULT_POINTS",
]

DEFAULT_POINTS = 201

# Dormand-Prince tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# 5th minus embedded 4th order weights, over all 7 stages (FSAL)
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense output: y(t + s h) = y + h * K^T (P @ [s, s^2, s^3, s^4])
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float, state: np.ndarray):
        super().__init__(f"{message} at t = {t:.6g}")
        self.t = t
        self.state = state


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), m)
    species: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if not self.species:
            self.species = tuple(f"x{i}" for i in range(self.states.shape[1]))
        self.species = tuple(self.species)
        if self.states.shape != (self.times.size, len(self.species)):
            raise ValueError("states must have shape (len(times), len(species))")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.species.index(name)]

    def to_csv(self, path) -> None:
        """Header ``t,<species...>``; values at 17 significant digits."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *self.species])
            for t, row in zip(self.times, self.states):
                w.writerow([f"{t:.17g}", *(f"{v:.17g}" for v in row)])

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or not rows[0] or rows[0][0] != "t":
            raise ValueError(f"{path}: expected header starting with 't'")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        return cls(times=data[:, 0], states=data[:, 1:], species=tuple(rows[0][1:]))


def _rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate_fixed(f, x0, t_end, h):
    n = int(np.ceil(t_end / h - 1e-9))
    times = np.linspace(0.0, t_end, n + 1)
    states = np.empty((n + 1, x0.size))
    states[0] = x0
    x = x0
    for i in range(n):
        x = _rk4_step(f, x, times[i + 1] - times[i])
        if not np.all(np.isfinite(x)):
            raise IntegrationError("nonfinite state", times[i + 1], x)
        if np.any(x <= 0):
            raise IntegrationError("state left the positive orthant; reduce the step", times[i + 1], x)
        states[i + 1] = x
    meta = {"integrator": "rk4", "step": float(h), "steps": n}
    return times, states, meta


def _integrate_dopri(f, x0, t_end, t_eval, rtol, atol, h0, max_steps):
    h_min = 1e-14 * t_end
    t = 0.0
    x = x0.copy()
    fx = f(x)
    if not np.all(np.isfinite(fx)):
        raise IntegrationError("nonfinite derivative", t, x)
    if h0 is None:
        sc = atol + rtol * np.abs(x)
        d0 = np.linalg.norm(x / sc) / np.sqrt(x.size)
        d1 = np.linalg.norm(fx / sc) / np.sqrt(x.size)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h = min(h, t_end)
    else:
        h = min(float(h0), t_end)

    out = np.empty((t_eval.size, x0.size))
    k_out = 0
    while k_out < t_eval.size and t_eval[k_out] <= t:
        out[k_out] = x
        k_out += 1
    stats = {"accepted": 0, "rejected": 0, "positivity_rejections": 0, "sample_landings": 0}
    K = np.empty((7, x0.size))
    target = None  # sample time the next step must land on exactly

    while t < t_end:
        if stats["accepted"] + stats["rejected"] >= max_steps:
            raise IntegrationError(f"exceeded {max_steps} steps", t, x)
        h = min(h, t_end - t)
        if target is not None:
            h = min(h, target - t)
        if h < h_min:
            raise IntegrationError("step size underflow", t, x)
        K[0] = fx
        for s in range(1, 6):
            K[s] = f(x + h * (np.dot(_A[s], K[:s])))
        x_new = x + h * (_B @ K[:6])
        bad = not np.all(np.isfinite(x_new))
        if not bad and np.any(x_new <= 0):
            stats["positivity_rejections"] += 1
            stats["rejected"] += 1
            h *= 0.5
            continue
        if not bad:
            K[6] = f(x_new)
            bad = not np.all(np.isfinite(K[6]))
        if bad:
            stats["rejected"] += 1
            h *= 0.5
            continue
        sc = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
        err = np.linalg.norm(h * (_E @ K) / sc) / np.sqrt(x.size)
        if err <= 1.0:
            t_new = t + h
            if target is not None and t_new >= target - 1e-15 * max(1.0, target):
                t_new = target
            if t_new > t_end - 1e-15 * max(1.0, t_end):
                t_new = t_end
            Q = K.T @ _P
            samples = []
            j = k_out
            while j < t_eval.size and t_eval[j] <= t_new:
                if t_eval[j] == t_new:
                    samples.append(x_new)
                else:
                    s_ = (t_eval[j] - t) / h
                    samples.append(x + h * (Q @ np.cumprod(np.full(4, s_))))
                j += 1
            dip = next((i for i, v in enumerate(samples) if np.any(v <= 0)), None)
            if dip is not None:
                # the interpolant undershoots zero: step onto the sample time
                # instead, so the sample is an accepted (hence positive) state
                target = t_eval[k_out + dip]
                stats["sample_landings"] += 1
                h = target - t
                continue
            if samples:
                out[k_out:j] = samples
            k_out = j
            if target is not None and t_new >= target:
                target = None
            t, x, fx = t_new, x_new, K[6].copy()
            stats["accepted"] += 1
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
        else:
            stats["rejected"] += 1
            factor = max(0.2, 0.9 * err ** -0.2)
        h *= factor
    while k_out < t_eval.size:
        out[k_out] = x
        k_out += 1
    meta = {"integrator": "dopri5", "rtol": rtol, "atol": atol, **stats}
    return t_eval.copy(), out, meta


def integrate(field: Callable[[np.ndarray], np.ndarray], x0, t_end: float, *,
              t_eval: Optional[Sequence[float]] = None, rtol: float = 1e-8, atol: float = 1e-10,
              fixed_step: Optional[float] = None, h0: Optional[float] = None,
              max_steps: int = 1_000_000, species: Sequence[str] = ()) -> Trajectory:
    """Integrate the autonomous system ``dx/dt = field(x)`` from ``x0`` over ``[0, t_end]``.

    By default the adaptive Dormand-Prince pair is used and the solution is
    sampled on ``t_eval`` (201 uniform points when omitted). With
    ``fixed_step`` classical RK4 is used instead and every step is returned.

    Raises:
        IntegrationError: on step-size underflow (``1e-14 * t_end``), a
            nonfinite derivative, or (fixed step) a nonpositive state.
    """
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 <= 0) or not np.all(np.isfinite(x0)):
        raise ValueError("initial state must be finite and strictly positive")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if fixed_step is not None:
        if not fixed_step > 0:
            raise ValueError("fixed_step must be positive")
        times, states, meta = _integrate_fixed(field, x0, float(t_end), float(fixed_step))
    else:
        if t_eval is None:
            t_eval = np.linspace(0.0, t_end, DEFAULT_POINTS)
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval.size == 0 or np.any(np.diff(t_eval) <= 0) or t_eval[0] < 0 or t_eval[-1] > t_end:
            raise ValueError("t_eval must be strictly increasing within [0, t_end]")
        times, states, meta = _integrate_dopri(field, x0, float(t_end), t_eval, rtol, atol, h0, max_steps)
    return Trajectory(times, states, tuple(species), meta)


def network_field(net: ReactionNetwork) -> Callable[[np.ndarray], np.ndarray]:
    """Unchecked ``x -> -Z L Exp(Z^T Ln x)`` for use inside the integrator."""
    L = build_laplacian(net).matrix
    Z = net.Z
    ZL = -Z @ L

    def f(x):
        return ZL @ complex_monomials(Z, x)

    return f


def reduced_field(red: ReducedNetwork) -> Callable[[np.ndarray], np.ndarray]:
    """Unchecked reduced dynamics over the full species vector."""
    Z = red.Z
    ZL = -Z @ red.laplacian
    inv_gauge = 1.0 / complex_monomials(Z, red.anchor)

    def f(x):
        return ZL @ (complex_monomials(Z, x) * inv_gauge)

    return f


def simulate(net: ReactionNetwork, x0, t_end: float, **kwargs) -> Trajectory:
    kwargs.setdefault("species", net.species)
    return integrate(network_field(net), x0, t_end, **kwargs)


def simulate_reduced(red: ReducedNetwork, x0, t_end: float, **kwargs) -> Trajectory:
    """Species that only occur in deleted complexes stay at their initial value."""
    kwargs.setdefault("species", red.parent.species)
    return integrate(reduced_field(red), x0, t_end, **kwargs)


@dataclass(frozen=True)
class InvariantReport:
    lyapunov: tuple[float, ...]
    max_lyapunov_increase: float
    lyapunov_tolerance: float
    moiety_drift: tuple[float, ...]
    min_concentration: float

    @property
    def lyapunov_ok(self) -> bool:
        return self.max_lyapunov_increase <= self.lyapunov_tolerance

    @property
    def positive(self) -> bool:
        return self.min_concentration > 0

    @property
    def max_moiety_drift(self) -> float:
        return max(self.moiety_drift, default=0.0)


def monitor(traj: Trajectory, net: ReactionNetwork, xstar, moieties=None) -> InvariantReport:
    """Positivity, Lyapunov descent and moiety conservation along ``traj``.

    ``moieties`` are row vectors ``k`` with ``k S = 0`` (default: the
    orthonormal left-kernel basis of ``S``). Drift of ``k`` is
    ``max_t |k x(t) - k x0|`` divided by ``|k| x0``, which stays meaningful
    when ``k x0`` happens to be near zero. The allowed Lyapunov increase
    between samples is ``1e-7 (1 + G(x0))``.
    """
    if moieties is None:
        moieties = build_structure(net).moiety_basis.T
    moieties = np.atleast_2d(np.asarray(moieties, dtype=float))
    X = traj.states
    G = tuple(lyapunov_value(x, xstar) for x in X)
    jumps = np.diff(G)
    inc = float(max(jumps.max(initial=0.0), 0.0))
    conserved = X @ moieties.T
    denom = np.abs(moieties) @ X[0]
    drift = tuple(float(d) for d in (np.abs(conserved - conserved[0]).max(axis=0) / denom))
    return InvariantReport(
        lyapunov=G,
        max_lyapunov_increase=inc,
        lyapunov_tolerance=1e-7 * (1 + G[0]),
        moiety_drift=drift,
        min_concentration=float(X.min()),
    )


@dataclass(frozen=True)
class ComparisonReport:
    species: tuple[str, ...]
    grid: tuple[float, ...]
    sup_discrepancy: dict
    terminal_gap: dict
    moiety_drift_a: tuple[float, ...]
    moiety_drift_b: tuple[float, ...]

    def to_json(self, **kwargs) -> str:
        d = asdict(self)
        d["grid"] = [d["grid"][0], d["grid"][-1], len(d["grid"])]
        return json.dumps(d, **kwargs)


def _moiety_drift(traj: Trajectory, moieties) -> tuple[float, ...]:
    if moieties is None:
        return ()
    K = np.atleast_2d(np.asarray(moieties, dtype=float))
    vals = traj.states @ K.T
    return tuple(float(v) for v in np.abs(vals - vals[0]).max(axis=0) / (np.abs(K) @ traj.states[0]))


def compare(traj_a: Trajectory, traj_b: Trajectory, species: Sequence[str], *,
            grid: Optional[Sequence[float]] = None, moieties=None) -> ComparisonReport:
    """Per-species sup-norm gap between two trajectories on a common grid.

    Both trajectories are interpolated with cubic splines onto ``grid``
    (default: 201 uniform points over the overlap of their time spans).

    Raises:
        ValueError: if the time spans do not overlap or a species is missing.
    """
    lo = max(traj_a.times[0], traj_b.times[0])
    hi = min(traj_a.times[-1], traj_b.times[-1])
    if not hi > lo:
        raise ValueError("trajectory time grids do not overlap")
    grid = np.linspace(lo, hi, DEFAULT_POINTS) if grid is None else np.asarray(grid, dtype=float)
    if grid[0] < lo - 1e-12 or grid[-1] > hi + 1e-12:
        raise ValueError("comparison grid extends beyond the overlap of the trajectories")

    def resample(traj, name):
        y = traj.column(name)
        if traj.times.size == grid.size and np.array_equal(traj.times, grid):
            return y
        return CubicSpline(traj.times, y)(grid)

    sup, term = {}, {}
    for name in species:
        if name not in traj_a.species or name not in traj_b.species:
            raise ValueError(f"species {name!r} missing from a trajectory")
        ya, yb = resample(traj_a, name), resample(traj_b, name)
        sup[name] = float(np.abs(ya - yb).max())
        term[name] = float(abs(ya[-1] - yb[-1]))
    return ComparisonReport(
        species=tuple(species),
        grid=tuple(float(t) for t in grid),
        sup_discrepancy=sup,
        terminal_gap=term,
        moiety_drift_a=_moiety_drift(traj_a, moieties),
        moiety_drift_b=_moiety_drift(traj_b, moieties),
    )
