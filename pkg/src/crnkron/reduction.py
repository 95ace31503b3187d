"""Kron reduction of complex-balanced networks.

Deleting a set of complexes replaces the balanced Laplacian by its Schur
complement with respect to the deleted indices and drops the matching
columns of ``Z``. The result is again a balanced Laplacian, so the reduced
model is a mass-action network that keeps ``x*`` as a complex-equilibrium.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .kinetics import (
    GaugedLaplacian,
    as_concentration,
    build_laplacian,
    complex_monomials,
    gauge_laplacian,
    standard_form_field,
)
from .network import Reaction, ReactionNetwork, format_network, left_nullspace

__all__ = [
    "ReductionError",
    "IsolatedComplexWarning",
    "ReducedNetwork",
    "InclusionReport",
    "schur_complement",
    "reduce_network",
    "extract_rate_constants",
    "equilibria_inclusion_check",
    "EDGE_RTOL",
    "MAX_CONDITION",
]

EDGE_RTOL = 1e-12
MAX_CONDITION = 1e12


class ReductionError(ValueError):
    pass


class IsolatedComplexWarning(UserWarning):
    """A retained complex lost all its reactions in the reduction."""


def _normalize_deleted(deleted: Iterable[int], c: int) -> list[int]:
    out = sorted({int(i) for i in deleted})
    for i in out:
        if not 0 <= i < c:
            raise ReductionError(f"complex index {i} out of range [0, {c})")
    if len(out) == c:
        raise ReductionError("cannot delete every complex of the network")
    return out


def schur_complement(gauged, deleted: Iterable[int]) -> np.ndarray:
    """Schur complement of a balanced Laplacian with respect to ``deleted``.

    Retained complexes keep their original relative order.

    Raises:
        ReductionError: if the deleted block is singular (condition number
            above ``MAX_CONDITION``) or every complex is deleted.
    """
    M = gauged.matrix if isinstance(gauged, GaugedLaplacian) else np.asarray(gauged, dtype=float)
    c = M.shape[0]
    dele = _normalize_deleted(deleted, c)
    keep = [i for i in range(c) if i not in set(dele)]
    if not dele:
        return M.copy()
    M11 = M[np.ix_(keep, keep)]
    M12 = M[np.ix_(keep, dele)]
    M21 = M[np.ix_(dele, keep)]
    M22 = M[np.ix_(dele, dele)]
    cond = np.linalg.cond(M22)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ReductionError(
            f"block of deleted complexes {dele} is singular (condition number {cond:.3e}); "
            "a deleted set may not contain a whole linkage class"
        )
    return M11 - M12 @ np.linalg.solve(M22, M21)


@dataclass(frozen=True, eq=False)
class ReducedNetwork:
    """Reduced model ``dx/dt = -Zr Lr Exp(Zr^T Ln(x / x*))``.

    Attributes:
        parent: the full network.
        retained: original indices of the kept complexes, ascending.
        Z: columns of the parent ``Z`` at ``retained``.
        laplacian: reduced balanced Laplacian, indexed like ``retained``.
        anchor: the complex-equilibrium used for gauging.
        reactions: extracted reactions, indexed by *original* complex index.
    """

    parent: ReactionNetwork
    retained: tuple[int, ...]
    Z: np.ndarray
    laplacian: np.ndarray
    anchor: np.ndarray
    reactions: tuple[Reaction, ...]

    @property
    def deleted(self) -> tuple[int, ...]:
        kept = set(self.retained)
        return tuple(i for i in range(self.parent.n_complexes) if i not in kept)

    @property
    def n_complexes(self) -> int:
        return len(self.retained)

    def vector_field(self, x) -> np.ndarray:
        return standard_form_field(self.Z, self.laplacian, self.anchor, x)

    def field_scale(self, x) -> float:
        """Magnitude of the terms that cancel in :meth:`vector_field`."""
        x = as_concentration(x)
        w = np.exp(self.Z.T @ np.log(x / self.anchor))
        return float(np.max(np.abs(self.Z) @ (np.abs(self.laplacian) @ w), initial=0.0))

    def to_network(self) -> ReactionNetwork:
        """The reduced model as a standalone :class:`ReactionNetwork`.

        Complexes without reactions are left out; species are kept in full
        so states stay comparable with the parent.
        """
        used = sorted({i for r in self.reactions for i in (r.substrate, r.product)})
        pos = {orig: k for k, orig in enumerate(used)}
        return ReactionNetwork(
            species=self.parent.species,
            Z=self.parent.Z[:, used],
            reactions=tuple(Reaction(pos[r.substrate], pos[r.product], r.rate) for r in self.reactions),
        )

    def to_dsl(self) -> str:
        return format_network(self.to_network())


def _resolve_complexes(net: ReactionNetwork, deleted) -> list[int]:
    out = []
    for d in deleted:
        out.append(net.complex_index(d) if isinstance(d, str) else int(d))
    return out


def extract_rate_constants(red: ReducedNetwork) -> list[Reaction]:
    """Undo the gauge: ``k(s -> p) = -Lr[p, s] / exp(Z_s^T Ln x*)``.

    Off-diagonal entries with magnitude below ``EDGE_RTOL * ||Lr||_inf`` are
    treated as absent edges. Reaction indices refer to the parent network's
    complexes.
    """
    M = red.laplacian
    n = M.shape[0]
    if n == 0:
        return []
    gauge = complex_monomials(red.Z, red.anchor)
    thresh = EDGE_RTOL * np.abs(M).sum(axis=1).max()
    out = []
    for s in range(n):
        for p in range(n):
            if p != s and M[p, s] < -thresh:
                out.append(Reaction(red.retained[s], red.retained[p], float(-M[p, s] / gauge[s])))
    return out


def reduce_network(net: ReactionNetwork, xstar, deleted: Sequence) -> ReducedNetwork:
    """Delete complexes (indices or canonical names) from a complex-balanced network.

    Raises:
        NotComplexEquilibriumError: if ``xstar`` is not a complex-equilibrium.
        ReductionError: see :func:`schur_complement`.
    """
    gauged = gauge_laplacian(net, xstar, build_laplacian(net))
    dele = _normalize_deleted(_resolve_complexes(net, deleted), net.n_complexes)
    Lr = schur_complement(gauged, dele)
    kept = tuple(i for i in range(net.n_complexes) if i not in set(dele))

    diag = np.diag(Lr)
    lonely = [kept[k] for k in np.flatnonzero(diag <= EDGE_RTOL * np.abs(Lr).max(initial=0.0))]
    if lonely:
        names = [net.complex_names[i] for i in lonely]
        warnings.warn(
            f"retained complexes {names} have no reactions left after deletion",
            IsolatedComplexWarning,
            stacklevel=2,
        )
    Lr.setflags(write=False)
    Zr = net.Z[:, list(kept)]
    red = ReducedNetwork(net, kept, Zr, Lr, gauged.anchor, ())
    object.__setattr__(red, "reactions", tuple(extract_rate_constants(red)))
    return red


@dataclass(frozen=True)
class InclusionReport:
    residuals: tuple[float, ...]
    scales: tuple[float, ...]
    rtol: float

    @property
    def worst(self) -> float:
        """Largest residual relative to its scale."""
        return max((r / s if s > 0 else r for r, s in zip(self.residuals, self.scales)), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst <= self.rtol


def equilibria_inclusion_check(full: ReactionNetwork, reduced: ReducedNetwork, samples=20,
                               *, rng=None, theta_scale: float = 1.0, rtol: float = 1e-8) -> InclusionReport:
    """Check that equilibria of the full network are equilibria of the reduced one.

    ``samples`` is either a count, in which case members ``x* . Exp(N theta)``
    of the full equilibrium set are drawn with ``theta ~ U(-theta_scale,
    theta_scale)``, or an explicit array of states (one per row).
    """
    if np.isscalar(samples):
        rng = np.random.default_rng(rng)
        N = left_nullspace(full.S.astype(float))
        thetas = rng.uniform(-theta_scale, theta_scale, size=(int(samples), N.shape[1]))
        states = reduced.anchor * np.exp(thetas @ N.T)
    else:
        states = np.atleast_2d(np.asarray(samples, dtype=float))
    res, scales = [], []
    for x in states:
        res.append(float(np.abs(reduced.vector_field(x)).max(initial=0.0)))
        scales.append(reduced.field_scale(x))
    return InclusionReport(tuple(res), tuple(scales), rtol)
