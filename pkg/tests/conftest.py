import numpy as np
import pytest

from crnkron import fixtures as fx
from crnkron.network import Reaction, ReactionNetwork, parse_network

MULTI_DSL = """\
A -> B ; k = 1
B -> C ; k = 2
C -> A ; k = 3
2 D <-> E ; kf = 1, kr = 4
"""


@pytest.fixture
def ab():
    return fx.ab()


@pytest.fixture
def fig2():
    return fx.fig2()


@pytest.fixture
def chain3():
    return fx.chain3()


@pytest.fixture
def cycle3():
    return fx.cycle3()


@pytest.fixture(scope="session")
def mck():
    return fx.mckeithan()


@pytest.fixture
def multi():
    return parse_network(MULTI_DSL)


def random_network(rng, max_m=6, max_c=6, max_r=6, max_coeff=2):
    """Random closed network with m, c, r <= the given bounds."""
    while True:
        m = int(rng.integers(1, max_m + 1))
        c = int(rng.integers(2, max_c + 1))
        cols = set()
        for _ in range(50):
            col = tuple(int(v) for v in rng.integers(0, max_coeff + 1, size=m))
            if any(col):
                cols.add(col)
            if len(cols) == c:
                break
        cols = sorted(cols)
        if len(cols) < 2:
            continue
        r = int(rng.integers(1, max_r + 1))
        pairs = []
        for _ in range(r):
            s, p = rng.choice(len(cols), size=2, replace=False)
            pairs.append((int(s), int(p)))
        used = sorted({i for sp in pairs for i in sp})
        pos = {u: k for k, u in enumerate(used)}
        Z = np.array([cols[u] for u in used]).T
        rxns = [Reaction(pos[s], pos[p], float(rng.uniform(0.1, 5))) for s, p in pairs]
        return ReactionNetwork(tuple(f"S{i}" for i in range(m)), Z, tuple(rxns))


def random_cycle_balanced(rng, c, n_cycles=None):
    """Balanced Laplacian built as a sum of positively weighted directed cycles.

    Each directed cycle has equal in- and out-weight at every vertex, so
    the sum is balanced. A Hamiltonian cycle makes it strongly connected.
    Returns ``(M, edges)`` with ``edges`` the set of ``(tail, head)`` pairs.
    """
    W = np.zeros((c, c))  # W[i, j]: weight of edge i -> j
    perm = rng.permutation(c)
    cycles = [list(perm)]
    n_cycles = int(rng.integers(0, 4)) if n_cycles is None else n_cycles
    for _ in range(n_cycles):
        k = int(rng.integers(2, c + 1))
        cycles.append(list(rng.choice(c, size=k, replace=False)))
    for cyc in cycles:
        w = rng.uniform(0.1, 10)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            W[a, b] += w
    # L[p, s] = -weight(s -> p); diagonal = out-weight
    M = np.diag(W.sum(axis=1)) - W.T
    edges = {(int(i), int(j)) for i, j in zip(*np.nonzero(W))}
    return M, edges


def mckeithan_backsub(kp=None, koff=None, c_last=1.0):
    """Equilibrium of McKeithan's model by back-substitution from C_N.

    Setting dC_i/dt = 0 from the last equation upward gives
    C_{i-1} = (k_{-1,i} + k_{p,i+1}) C_i / k_{p,i}, and dC_0/dt = 0 fixes
    the product [T][M]. Returns (T, M, C_0..C_N) with T = 1.
    """
    from crnkron import fixtures as fx
    kp = fx.MCKEITHAN_KP if kp is None else kp
    koff = fx.MCKEITHAN_KOFF if koff is None else koff
    n = len(kp) - 1
    C = [0.0] * (n + 1)
    C[n] = c_last
    for i in range(n, 0, -1):
        k_next = kp[i + 1] if i < n else 0.0
        C[i - 1] = (koff[i] + k_next) * C[i] / kp[i]
    tm = (koff[0] + kp[1]) * C[0] / kp[0]
    return np.array([1.0, tm, *C])
