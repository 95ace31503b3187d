"""Small reference networks and McKeithan's T-cell receptor model."""

from __future__ import annotations

import numpy as np

from .network import ReactionNetwork, parse_network

__all__ = [
    "AB_DSL",
    "FIG2_DSL",
    "CHAIN3_DSL",
    "CYCLE3_DSL",
    "MCKEITHAN_KP",
    "MCKEITHAN_KOFF",
    "ab",
    "fig2",
    "chain3",
    "cycle3",
    "type2",
    "mckeithan_dsl",
    "mckeithan",
    "mckeithan_x0",
]

AB_DSL = """\
A -> B ; k = 1
B -> A ; k = 1
"""

FIG2_DSL = """\
X1 + 2 X2 <-> X3 ; kf = 1, kr = 1
X3 -> 2 X1 + X2 ; k = 1
2 X1 + X2 -> X4 ; k = 1
X3 -> X4 ; k = 1
"""

# detailed balanced: x* = (1, 2/3, 10/21)
CHAIN3_DSL = """\
X1 <-> X2 ; kf = 2, kr = 3
X2 <-> X3 ; kf = 5, kr = 7
"""

CYCLE3_DSL = """\
X1 -> X2 ; k = 1
X2 -> X3 ; k = 1
X3 -> X1 ; k = 1
"""

# phosphorylation steps k_{p,0..19} and dissociation rates k_{-1,0..19}
MCKEITHAN_KP = (52, 49, 41, 39, 37, 34, 31, 29, 25, 19, 16, 21, 20, 19, 18, 15, 24, 13, 7, 5)
MCKEITHAN_KOFF = (13, 29, 0.16, 1.4, 2.3, 2, 0.19, 0.33, 0.94, 0.67,
                  0.31, 0.21, 3, 5, 1, 11, 0.8, 7, 1, 17)


def ab() -> ReactionNetwork:
    return parse_network(AB_DSL)


def fig2() -> ReactionNetwork:
    return parse_network(FIG2_DSL)


def chain3() -> ReactionNetwork:
    return parse_network(CHAIN3_DSL)


def cycle3() -> ReactionNetwork:
    return parse_network(CYCLE3_DSL)


def type2(n: int = 3, k=None, k_back=None) -> ReactionNetwork:
    """Forward chain ``C0 -> C1 -> ... -> Cn`` where every ``Ci`` (i >= 1)
    also returns to ``C0``.

    ``k[i-1]`` is the rate of ``C(i-1) -> Ci`` and ``k_back[i-1]`` the rate
    of ``Ci -> C0``. Species ``C0..Cn`` each form their own complex.
    """
    k = tuple(k) if k is not None else tuple(float(i + 2) for i in range(n))
    k_back = tuple(k_back) if k_back is not None else tuple(float(i + 3) for i in range(n))
    lines = []
    for i in range(1, n + 1):
        lines.append(f"C{i - 1} -> C{i} ; k = {k[i - 1]!r}")
        lines.append(f"C{i} -> C0 ; k = {k_back[i - 1]!r}")
    return parse_network("\n".join(lines))


def mckeithan_dsl(kp=MCKEITHAN_KP, koff=MCKEITHAN_KOFF) -> str:
    n = len(kp) - 1
    lines = [f"# McKeithan T-cell receptor model, N = {n}",
             f"T + M -> C0 ; k = {kp[0]!r}",
             f"C0 -> T + M ; k = {koff[0]!r}"]
    for i in range(1, n + 1):
        lines.append(f"C{i - 1} -> C{i} ; k = {kp[i]!r}")
        lines.append(f"C{i} -> T + M ; k = {koff[i]!r}")
    return "\n".join(lines) + "\n"


def mckeithan(kp=MCKEITHAN_KP, koff=MCKEITHAN_KOFF) -> ReactionNetwork:
    """Species ``T, M, C0..CN``; complexes ``T+M, C0..CN``."""
    return parse_network(mckeithan_dsl(kp, koff))


def mckeithan_x0(n: int = 19) -> np.ndarray:
    """``T = 1``, ``M = 2``, every ``Ci = 0.01``."""
    return np.concatenate([[1.0, 2.0], np.full(n + 1, 0.01)])
