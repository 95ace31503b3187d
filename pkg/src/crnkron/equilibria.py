"""Complex-equilibria, the equilibrium set and the Lyapunov function.

For a complex-balanced network every equilibrium ``x**`` satisfies
``S^T Ln(x**) = S^T Ln(x*)`` for any fixed complex-equilibrium ``x*``, and
each positive stoichiometric compatibility class contains exactly one of
them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .kinetics import (
    GaugedLaplacian,
    WeightedLaplacian,
    as_concentration,
    build_laplacian,
    complex_flux_balance,
)
from .network import ReactionNetwork, build_structure, left_nullspace

__all__ = [
    "ConvergenceError",
    "KernelVector",
    "ClassificationVerdict",
    "positive_kernel_vector",
    "find_complex_equilibrium",
    "equilibrium_membership",
    "sample_equilibrium_set",
    "unique_equilibrium_in_class",
    "lyapunov_value",
    "balanced_exp_form",
    "lyapunov_dissipation",
    "complex_equilibrium_residual",
]


class ConvergenceError(RuntimeError):
    """Newton iteration did not converge; ``trace`` lists ``||F||_inf`` per iteration."""

    def __init__(self, message: str, trace: list[float]):
        super().__init__(message)
        self.trace = trace


def _strongly_connected(A: np.ndarray, idx: tuple[int, ...]) -> bool:
    sub = A[np.ix_(idx, idx)]
    n, _ = connected_components(csr_matrix(sub > 0), directed=True, connection="strong")
    return n == 1


@dataclass(frozen=True, eq=False)
class KernelVector:
    """Result of :func:`positive_kernel_vector`.

    ``rho`` is None unless every class block has a strictly positive kernel
    vector. ``strongly_connected[i]`` and ``positive[i]`` refer to class ``i``.
    """

    rho: Optional[np.ndarray]
    strongly_connected: tuple[bool, ...]
    positive: tuple[bool, ...]


def positive_kernel_vector(L: WeightedLaplacian, classes) -> KernelVector:
    """Per-class kernel vector of ``L``, each class normalized to max entry 1."""
    M = L.matrix
    rho = np.zeros(M.shape[0])
    strong, positive = [], []
    for idx in classes:
        idx = tuple(idx)
        strong.append(_strongly_connected(L.adjacency, idx))
        block = M[np.ix_(idx, idx)]
        if len(idx) == 1:
            v = np.ones(1)
        else:
            _, _, Vt = np.linalg.svd(block)
            v = Vt[-1]
            v = v * np.sign(v[np.argmax(np.abs(v))])
            v = v / v.max()
        rho[list(idx)] = v
        positive.append(bool(np.all(v > 1e-12)))
    ok = all(positive)
    return KernelVector(rho=rho if ok else None, strongly_connected=tuple(strong), positive=tuple(positive))


@dataclass(frozen=True, eq=False)
class ClassificationVerdict:
    weakly_reversible: bool
    complex_balanced: bool
    deficiency: int
    witness: Optional[np.ndarray] = None
    rho: Optional[np.ndarray] = None
    residual: float = float("nan")


def find_complex_equilibrium(net: ReactionNetwork) -> ClassificationVerdict:
    """Decide complex-balancedness and return a witness complex-equilibrium.

    ``x*`` is a complex-equilibrium exactly when the complex monomials at
    ``x*`` lie in the kernel of ``L``, i.e. when on each linkage class they
    are a positive multiple of the class kernel vector ``rho``. Taking logs,
    this is the linear system ``S^T w = B^T Ln rho`` in ``w = Ln x*``.
    """
    struct = build_structure(net)
    lap = build_laplacian(net)
    kv = positive_kernel_vector(lap, struct.linkage_classes)
    weakly_reversible = all(kv.strongly_connected)
    if kv.rho is None:
        return ClassificationVerdict(weakly_reversible, False, struct.deficiency)

    S = struct.S.astype(float)
    rhs = struct.B.T @ np.log(kv.rho)
    w, *_ = scipy.linalg.lstsq(S.T, rhs, lapack_driver="gelsd")
    residual = float(np.abs(S.T @ w - rhs).max(initial=0.0))
    if residual > 1e-9 * (1 + np.abs(rhs).max(initial=0.0)):
        return ClassificationVerdict(weakly_reversible, False, struct.deficiency, rho=kv.rho, residual=residual)
    return ClassificationVerdict(
        weakly_reversible, True, struct.deficiency, witness=np.exp(w), rho=kv.rho, residual=residual
    )


def equilibrium_membership(S, xstar, xss) -> bool:
    """True iff ``S^T Ln(x** / x*)`` vanishes (relative tolerance 1e-9)."""
    S = np.asarray(S, dtype=float)
    xstar = as_concentration(xstar, S.shape[0])
    xss = as_concentration(xss, S.shape[0])
    lhs = S.T @ np.log(xss / xstar)
    scale = 1 + np.abs(S.T @ np.log(xstar)).max(initial=0.0)
    return bool(np.abs(lhs).max(initial=0.0) <= 1e-9 * scale)


def sample_equilibrium_set(S, xstar, theta) -> np.ndarray:
    """Member ``x* . Exp(N theta)`` of the equilibrium set.

    ``N`` is the orthonormal basis of ``ker S^T`` from
    :func:`crnkron.network.left_nullspace`; ``theta`` has one entry per
    basis vector.
    """
    N = left_nullspace(np.asarray(S, dtype=float))
    return np.asarray(xstar, dtype=float) * np.exp(N @ np.asarray(theta, dtype=float))


def unique_equilibrium_in_class(net: ReactionNetwork, xstar, x0, *, max_iter: int = 200,
                                full_output: bool = False):
    """Equilibrium ``x1`` reached from ``x0``: in the equilibrium set of ``x*``
    and in the compatibility class ``x0 + im S``.

    Writes ``x1 = x* . Exp(N theta)`` and solves
    ``F(theta) = N^T (x* . Exp(N theta) - x0) = 0`` by Newton's method with
    step halving. The Jacobian ``N^T diag(x1) N`` is symmetric positive
    definite.

    Returns:
        ``x1``, or ``(x1, info)`` with ``info = {"iterations", "residual",
        "trace"}`` when ``full_output`` is set.

    Raises:
        ConvergenceError: if ``||F||_inf <= 1e-12 (1 + ||x0||_inf)`` is not
            reached within ``max_iter`` iterations, or if the result leaves
            the compatibility class of ``x0`` by more than 1e-8.
    """
    m = net.n_species
    xstar = as_concentration(xstar, m)
    x0 = as_concentration(x0, m)
    N = left_nullspace(net.S.astype(float))
    tol = 1e-12 * (1 + np.abs(x0).max())

    def F(theta):
        x = xstar * np.exp(N @ theta)
        return N.T @ (x - x0), x

    theta = np.zeros(N.shape[1])
    f, x = F(theta)
    fnorm = np.abs(f).max(initial=0.0)
    trace = [fnorm]
    it = 0
    while fnorm > tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"Newton did not converge in {max_iter} iterations (||F|| = {fnorm:.3e})", trace
            )
        it += 1
        J = N.T @ (x[:, None] * N)
        step = scipy.linalg.solve(J, -f, assume_a="pos")
        # the Newton step is a descent direction for ||F||_2
        f2 = np.linalg.norm(f)
        t = 1.0
        while True:
            f_new, x_new = F(theta + t * step)
            if np.all(np.isfinite(f_new)) and np.linalg.norm(f_new) < f2:
                break
            t *= 0.5
            if t < 1e-12:
                raise ConvergenceError(f"line search stalled at ||F|| = {fnorm:.3e}", trace)
        theta = theta + t * step
        f, x = f_new, x_new
        fnorm = np.abs(f).max(initial=0.0)
        trace.append(fnorm)

    # (I - P_imS)(x1 - x0) = N N^T (x1 - x0) = N F
    off_class = np.abs(N @ f).max(initial=0.0)
    if off_class > 1e-8 or not equilibrium_membership(net.S, xstar, x):
        raise ConvergenceError(f"solution failed verification (off-class residual {off_class:.3e})", trace)
    if full_output:
        return x, {"iterations": it, "residual": fnorm, "trace": trace}
    return x


def lyapunov_value(x, xstar) -> float:
    """``G(x) = x^T Ln(x / x*) + (x* - x)^T 1``; zero only at ``x = x*``."""
    x = as_concentration(x)
    xstar = as_concentration(xstar, x.shape[0])
    return float(np.sum(x * np.log(x / xstar) + xstar - x))


def balanced_exp_form(gauged, gamma) -> float:
    """``gamma^T Lg Exp(gamma)``; nonnegative for balanced ``Lg``."""
    M = gauged.matrix if isinstance(gauged, GaugedLaplacian) else np.asarray(gauged, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    return float(gamma @ (M @ np.exp(gamma)))


def lyapunov_dissipation(net: ReactionNetwork, gauged: GaugedLaplacian, x) -> float:
    """Time derivative of ``G`` along the flow, ``-gamma^T Lg Exp(gamma)``
    with ``gamma = Z^T Ln(x / x*)``."""
    x = as_concentration(x, net.n_species)
    gamma = net.Z.T @ np.log(x / gauged.anchor)
    return -balanced_exp_form(gauged, gamma)


def complex_equilibrium_residual(net: ReactionNetwork, x) -> tuple[float, float]:
    """``(||B v(x)||_inf, ||Delta Exp(Z^T Ln x)||_inf)``."""
    Bv, scale = complex_flux_balance(net, x)
    return float(np.abs(Bv).max()), scale
