"""Mass-action kinetics in Laplacian form.

The network ODE is ``dx/dt = -Z L Exp(Z^T Ln x)`` with ``L = Delta - A`` the
weighted Laplacian of the graph of complexes. At a complex-equilibrium
``x*`` the gauged Laplacian ``L K(x*)`` has zero row and column sums and the
ODE takes the standard form ``dx/dt = -Z Lg Exp(Z^T Ln(x / x*))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import ReactionNetwork

__all__ = [
    "NotComplexEquilibriumError",
    "WeightedLaplacian",
    "GaugedLaplacian",
    "as_concentration",
    "complex_monomials",
    "mass_action_rates",
    "build_laplacian",
    "vector_field",
    "complex_flux_balance",
    "gauge_laplacian",
    "standard_form_field",
    "GAUGE_RTOL",
]

GAUGE_RTOL = 1e-9


class NotComplexEquilibriumError(ValueError):
    def __init__(self, residual: float, scale: float):
        super().__init__(
            f"not a complex-equilibrium: ||L Exp(Z^T Ln x*)||_inf = {residual:.3e} "
            f"exceeds {GAUGE_RTOL:g} * {scale:.3e}"
        )
        self.residual = residual
        self.scale = scale


def as_concentration(x, m: int | None = None) -> np.ndarray:
    """Validate a strictly positive concentration vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"concentration must be a 1-D vector, got shape {x.shape}")
    if m is not None and x.shape[0] != m:
        raise ValueError(f"expected {m} concentrations, got {x.shape[0]}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("concentrations must be finite and strictly positive")
    return x


def complex_monomials(Z: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``prod_i x_i ** Z[i, a]`` for every complex ``a``; no positivity check."""
    return np.prod(x[:, None] ** Z, axis=0)


def mass_action_rates(net: ReactionNetwork, x) -> np.ndarray:
    """Reaction rates ``k_j * prod_i x_i ** Z[i, S_j]``."""
    x = as_concentration(x, net.n_species)
    return net.rates * complex_monomials(net.Z, x)[net.substrates]


@dataclass(frozen=True, eq=False)
class WeightedLaplacian:
    """``L = Delta - A`` for the graph of complexes.

    ``A[p, s]`` is the summed rate constant of reactions ``s -> p`` and
    ``degree`` holds the column sums of ``A`` (total outgoing rate constant).
    """

    matrix: np.ndarray
    adjacency: np.ndarray
    degree: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def build_laplacian(net: ReactionNetwork) -> WeightedLaplacian:
    c = net.n_complexes
    A = np.zeros((c, c))
    np.add.at(A, (net.products, net.substrates), net.rates)
    degree = A.sum(axis=0)
    L = np.diag(degree) - A
    for arr in (L, A, degree):
        arr.setflags(write=False)
    return WeightedLaplacian(matrix=L, adjacency=A, degree=degree)


def vector_field(net: ReactionNetwork, x, laplacian: WeightedLaplacian | None = None) -> np.ndarray:
    """``dx/dt = -Z L Exp(Z^T Ln x)``, evaluated with monomials."""
    x = as_concentration(x, net.n_species)
    L = (laplacian or build_laplacian(net)).matrix
    return -net.Z @ (L @ complex_monomials(net.Z, x))


def complex_flux_balance(net: ReactionNetwork, x, laplacian: WeightedLaplacian | None = None):
    """Net flux through every complex, ``B v(x) = -L Exp(Z^T Ln x)``.

    Returns ``(Bv, scale)`` where ``scale = ||Delta Exp(Z^T Ln x)||_inf``
    is the largest total outflow, the natural yardstick for ``Bv``.
    """
    x = as_concentration(x, net.n_species)
    lap = laplacian or build_laplacian(net)
    mono = complex_monomials(net.Z, x)
    return -lap.matrix @ mono, float(np.max(np.abs(lap.degree * mono), initial=0.0))


@dataclass(frozen=True, eq=False)
class GaugedLaplacian:
    """Balanced Laplacian ``L @ diag(gauge)`` anchored at a complex-equilibrium.

    ``gauge[a] = exp(Z_a^T Ln x*)`` is the value of complex ``a``'s monomial
    at the anchor.
    """

    matrix: np.ndarray
    anchor: np.ndarray
    gauge: np.ndarray

    def imbalance(self) -> float:
        """Largest absolute row or column sum."""
        M = self.matrix
        return float(max(np.abs(M.sum(axis=0)).max(), np.abs(M.sum(axis=1)).max()))


def gauge_laplacian(net: ReactionNetwork, xstar, laplacian: WeightedLaplacian | None = None) -> GaugedLaplacian:
    """Gauge ``L`` at ``x*``.

    Raises:
        NotComplexEquilibriumError: if ``||L Exp(Z^T Ln x*)||_inf`` exceeds
            ``GAUGE_RTOL * ||Delta Exp(Z^T Ln x*)||_inf``.
    """
    xstar = as_concentration(xstar, net.n_species)
    lap = laplacian or build_laplacian(net)
    Bv, scale = complex_flux_balance(net, xstar, lap)
    residual = float(np.abs(Bv).max())
    if residual > GAUGE_RTOL * scale:
        raise NotComplexEquilibriumError(residual, scale)
    K = complex_monomials(net.Z, xstar)
    M = lap.matrix * K[None, :]
    for arr in (M, K):
        arr.setflags(write=False)
    xs = xstar.copy()
    xs.setflags(write=False)
    return GaugedLaplacian(matrix=M, anchor=xs, gauge=K)


def standard_form_field(Z: np.ndarray, gauged, xstar, x) -> np.ndarray:
    """``-Z Lg Exp(Z^T Ln(x / x*))`` for a balanced ``Lg``.

    Works equally for a full network and for a reduced one (``Z`` with
    deleted columns and the Schur-complemented ``Lg``).
    """
    M = gauged.matrix if isinstance(gauged, GaugedLaplacian) else np.asarray(gauged)
    x = as_concentration(x)
    xstar = as_concentration(xstar, x.shape[0])
    Z = np.asarray(Z)
    return -Z @ (M @ np.exp(Z.T @ np.log(x / xstar)))
