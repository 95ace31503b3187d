"""Reaction network structure: DSL parsing, complexes, incidence and stoichiometry.

A network is stored in graph-of-complexes form. ``Z`` (species x complexes)
lists the species content of every complex, and each reaction is an edge
between two complexes carrying a positive rate constant. The incidence
matrix ``B`` and the stoichiometric matrix ``S = Z @ B`` are derived from
these on demand.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "NetworkSyntaxError",
    "DuplicateReactionWarning",
    "Reaction",
    "ReactionNetwork",
    "StructureReport",
    "parse_network",
    "build_structure",
    "canonical_complex_name",
    "numerical_rank",
    "left_nullspace",
    "format_network",
]

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_TERM_RE = re.compile(rf"^(?:(\d+)\s*)?({_NAME})$")
_FLOAT = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_K_RE = re.compile(rf"^k\s*=\s*({_FLOAT})$")
_KFKR_RE = re.compile(rf"^kf\s*=\s*({_FLOAT})\s*,\s*kr\s*=\s*({_FLOAT})$")


class NetworkSyntaxError(ValueError):
    """Raised when DSL text cannot be parsed.

    ``line`` and ``column`` are 1-based and point at the offending token.
    """

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DuplicateReactionWarning(UserWarning):
    """Two reactions share substrate and product; their rates add up in ``A``."""


@dataclass(frozen=True)
class Reaction:
    substrate: int
    product: int
    rate: float

    def __post_init__(self):
        if self.substrate == self.product:
            raise ValueError("substrate and product complex must differ")
        if not (self.rate > 0 and np.isfinite(self.rate)):
            raise ValueError(f"rate constant must be positive and finite, got {self.rate}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ReactionNetwork:
    """Closed mass-action network in graph-of-complexes form.

    Attributes:
        species: species names; position is the species index.
        Z: complex-stoichiometric matrix, shape (m, c), nonnegative integers.
        reactions: reactions between complex indices.
    """

    species: tuple[str, ...]
    Z: np.ndarray
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        Z = np.asarray(self.Z)
        if Z.ndim != 2 or Z.shape[0] != len(self.species):
            raise ValueError(f"Z must have shape ({len(self.species)}, c), got {Z.shape}")
        if not np.issubdtype(Z.dtype, np.integer):
            if not np.all(Z == np.round(Z)):
                raise ValueError("Z entries must be integers")
            Z = Z.round().astype(np.int64)
        if (Z < 0).any():
            raise ValueError("Z entries must be nonnegative")
        if len(set(self.species)) != len(self.species):
            raise ValueError("species names must be unique")
        c = Z.shape[1]
        if c and (Z.sum(axis=0) == 0).any():
            raise ValueError("empty complex (zero column of Z); only closed networks are supported")
        if len({tuple(col) for col in Z.T}) != c:
            raise ValueError("complexes (columns of Z) must be pairwise distinct")
        used = set()
        for rxn in self.reactions:
            if not (0 <= rxn.substrate < c and 0 <= rxn.product < c):
                raise ValueError(f"reaction {rxn} references a complex outside [0, {c})")
            used.update((rxn.substrate, rxn.product))
        if len(used) != c:
            raise ValueError("every complex must take part in at least one reaction")
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        object.__setattr__(self, "Z", _frozen(Z.astype(np.int64)))

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_complexes(self) -> int:
        return self.Z.shape[1]

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    @property
    def rates(self) -> np.ndarray:
        return np.array([r.rate for r in self.reactions], dtype=float)

    @property
    def substrates(self) -> np.ndarray:
        return np.array([r.substrate for r in self.reactions], dtype=np.int64)

    @property
    def products(self) -> np.ndarray:
        return np.array([r.product for r in self.reactions], dtype=np.int64)

    @property
    def B(self) -> np.ndarray:
        """Incidence matrix (c x r): -1 at the substrate, +1 at the product."""
        B = np.zeros((self.n_complexes, self.n_reactions), dtype=np.int64)
        cols = np.arange(self.n_reactions)
        B[self.substrates, cols] = -1
        B[self.products, cols] = 1
        return B

    @property
    def S(self) -> np.ndarray:
        return self.Z @ self.B

    @property
    def complex_names(self) -> list[str]:
        return [canonical_complex_name(col, self.species) for col in self.Z.T]

    def complex_index(self, name: str) -> int:
        """Index of the complex whose canonical formula is ``name``.

        The name is parsed, so ``"X1 + 2 X2"`` and ``"X1+2X2"`` both match.
        """
        coeffs = _parse_complex(name, {s: i for i, s in enumerate(self.species)}, strict=True)
        for j, col in enumerate(self.Z.T):
            if all(col[i] == coeffs.get(i, 0) for i in range(self.n_species)):
                return j
        raise KeyError(f"no complex {name!r} in network")

    def to_dsl(self) -> str:
        return format_network(self)

    def __repr__(self):
        return (
            f"ReactionNetwork(m={self.n_species}, c={self.n_complexes}, "
            f"r={self.n_reactions})"
        )


def canonical_complex_name(column: Sequence[int], species: Sequence[str]) -> str:
    """Formula string for a complex, e.g. ``"2X1+X2"``.

    Terms follow species order and a coefficient of 1 is omitted, so the
    result parses back to the same column.
    """
    parts = []
    for coeff, name in zip(column, species):
        coeff = int(coeff)
        if coeff == 1:
            parts.append(name)
        elif coeff > 1:
            parts.append(f"{coeff}{name}")
    return "+".join(parts)


def _parse_complex(text: str, species_index: dict, *, strict: bool = False,
                   line: int = 0, col0: int = 0) -> dict[int, int]:
    """Parse ``"2A + B"`` into ``{species index: coefficient}``.

    New species are appended to ``species_index`` unless ``strict``.
    """
    coeffs: dict[int, int] = {}
    offset = 0
    for raw in text.split("+"):
        term = raw.strip()
        col = col0 + offset + (len(raw) - len(raw.lstrip())) + 1
        offset += len(raw) + 1
        if not term:
            raise NetworkSyntaxError("empty complex or dangling '+'", line, col)
        m = _TERM_RE.match(term)
        if m is None:
            raise NetworkSyntaxError(f"bad term {term!r}", line, col)
        coeff = int(m.group(1)) if m.group(1) is not None else 1
        if coeff == 0:
            raise NetworkSyntaxError(f"zero coefficient in term {term!r}", line, col)
        name = m.group(2)
        if name not in species_index:
            if strict:
                raise KeyError(f"unknown species {name!r}")
            species_index[name] = len(species_index)
        idx = species_index[name]
        coeffs[idx] = coeffs.get(idx, 0) + coeff
    return coeffs


def _parse_rate(text: str, line: int, col: int) -> float:
    value = float(text)
    if not (value > 0 and np.isfinite(value)):
        raise NetworkSyntaxError(f"rate constant must be positive, got {text}", line, col)
    return value


def parse_network(text: str) -> ReactionNetwork:
    """Build a network from DSL text.

    One reaction per line::

        # comment
        X1 + 2 X2 <-> X3 ; kf = 1, kr = 1
        X3 -> X4 ; k = 0.5

    Species are indexed in order of first appearance and identical
    complexes share a column of ``Z``. A ``<->`` line yields two reactions,
    forward first. Repeated (substrate, product) pairs are kept as distinct
    reactions and reported with a :class:`DuplicateReactionWarning`.

    Raises:
        NetworkSyntaxError: on malformed lines, empty complexes or
            nonpositive rate constants.
    """
    species_index: dict[str, int] = {}
    complex_index: dict[tuple, int] = {}
    complexes: list[dict[int, int]] = []
    reactions: list[tuple[int, int, float, int]] = []

    def complex_id(coeffs: dict[int, int]) -> int:
        key = tuple(sorted(coeffs.items()))
        if key not in complex_index:
            complex_index[key] = len(complexes)
            complexes.append(coeffs)
        return complex_index[key]

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0]
        if not line.strip():
            continue
        if ";" not in line:
            raise NetworkSyntaxError("missing ';' before rate constants", lineno, len(line.rstrip()) + 1)
        lhs_rhs, rates = line.split(";", 1)
        rates_col = len(lhs_rhs) + 2
        if "<->" in lhs_rhs:
            arrow, reversible = "<->", True
        elif "->" in lhs_rhs:
            arrow, reversible = "->", False
        else:
            raise NetworkSyntaxError("missing arrow '->' or '<->'", lineno, 1)
        lhs, rhs = lhs_rhs.split(arrow, 1)
        if "->" in rhs:
            raise NetworkSyntaxError("more than one arrow", lineno, len(lhs) + len(arrow) + rhs.index("->") + 1)
        left = _parse_complex(lhs, species_index, line=lineno, col0=0)
        right = _parse_complex(rhs, species_index, line=lineno, col0=len(lhs) + len(arrow))
        if left == right:
            raise NetworkSyntaxError("substrate and product complex are identical", lineno, 1)

        rate_text = rates.strip()
        if reversible:
            m = _KFKR_RE.match(rate_text)
            if m is None:
                raise NetworkSyntaxError("expected 'kf = <float>, kr = <float>' for '<->'", lineno, rates_col)
            kf = _parse_rate(m.group(1), lineno, rates_col)
            kr = _parse_rate(m.group(2), lineno, rates_col)
        else:
            m = _K_RE.match(rate_text)
            if m is None:
                raise NetworkSyntaxError("expected 'k = <float>' for '->'", lineno, rates_col)
            kf = _parse_rate(m.group(1), lineno, rates_col)

        s, p = complex_id(left), complex_id(right)
        reactions.append((s, p, kf, lineno))
        if reversible:
            reactions.append((p, s, kr, lineno))

    if not reactions:
        raise NetworkSyntaxError("no reactions found", 1, 1)

    seen: dict[tuple[int, int], int] = {}
    for s, p, _, lineno in reactions:
        if (s, p) in seen:
            warnings.warn(
                f"line {lineno}: reaction duplicates the one on line {seen[(s, p)]}; "
                "rate constants add up in the Laplacian",
                DuplicateReactionWarning,
                stacklevel=2,
            )
        else:
            seen[(s, p)] = lineno

    species = sorted(species_index, key=species_index.get)
    Z = np.zeros((len(species), len(complexes)), dtype=np.int64)
    for j, coeffs in enumerate(complexes):
        for i, v in coeffs.items():
            Z[i, j] = v
    return ReactionNetwork(
        species=tuple(species),
        Z=Z,
        reactions=tuple(Reaction(s, p, k) for s, p, k, _ in reactions),
    )


def format_network(net: ReactionNetwork) -> str:
    """Serialize to the DSL, one ``->`` line per reaction, full-precision rates."""
    names = net.complex_names
    lines = [f"{names[r.substrate]} -> {names[r.product]} ; k = {r.rate!r}" for r in net.reactions]
    return "\n".join(lines) + "\n"


def numerical_rank(M: np.ndarray) -> int:
    """Rank by singular-value threshold ``max(shape) * eps * sigma_max``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    tol = max(M.shape) * np.finfo(float).eps * s[0]
    return int((s >= tol).sum())


def left_nullspace(M: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of ``{k : k @ M = 0}``."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape[1] == 0:
        return np.eye(n)
    U, s, _ = np.linalg.svd(M, full_matrices=True)
    rank = numerical_rank(M)
    return U[:, rank:].copy()


def _linkage_classes(net: ReactionNetwork) -> list[tuple[int, ...]]:
    c = net.n_complexes
    adj = csr_matrix(
        (np.ones(net.n_reactions), (net.substrates, net.products)), shape=(c, c)
    )
    n, labels = connected_components(adj, directed=True, connection="weak")
    # order classes by their smallest complex index
    classes = [tuple(int(i) for i in np.flatnonzero(labels == k)) for k in range(n)]
    return sorted(classes, key=lambda cl: cl[0])


def _positive_vector_in_span(N: np.ndarray) -> Optional[np.ndarray]:
    """Strictly positive vector in the column span of ``N``, or None.

    Solves ``max t  s.t.  N a >= t,  sum(N a) = 1`` and accepts the result
    when ``t`` is clearly positive.
    """
    m, p = N.shape
    if p == 0:
        return None
    # variables: a (p), t
    cost = np.zeros(p + 1)
    cost[-1] = -1.0
    A_ub = np.hstack([-N, np.ones((m, 1))])
    b_ub = np.zeros(m)
    A_eq = np.hstack([N.sum(axis=0, keepdims=True), np.zeros((1, 1))])
    res = linprog(
        cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
        bounds=[(None, None)] * p + [(None, 1.0)], method="highs",
    )
    if not res.success or res.x[-1] <= 1e-9 / m:
        return None
    u = N @ res.x[:p]
    u = u / u.min()
    snapped = np.round(u)
    if np.allclose(u, snapped, rtol=0, atol=1e-9):
        u = snapped
    return u


@dataclass(frozen=True, eq=False)
class StructureReport:
    """Structural invariants of a network.

    ``moiety_basis`` holds an orthonormal basis of the left kernel of ``S``
    as columns. ``mass_vector`` is a strictly positive member of that
    kernel (scaled to minimum entry 1) if one exists.
    """

    B: np.ndarray
    S: np.ndarray
    linkage_classes: tuple[tuple[int, ...], ...]
    rank_B: int
    rank_S: int
    deficiency: int
    moiety_basis: np.ndarray
    mass_vector: Optional[np.ndarray] = field(default=None)

    @property
    def n_linkage_classes(self) -> int:
        return len(self.linkage_classes)


def build_structure(net: ReactionNetwork) -> StructureReport:
    B = net.B
    S = net.S
    rank_B = numerical_rank(B)
    rank_S = numerical_rank(S)
    moieties = left_nullspace(S)
    return StructureReport(
        B=_frozen(B),
        S=_frozen(S),
        linkage_classes=tuple(_linkage_classes(net)),
        rank_B=rank_B,
        rank_S=rank_S,
        deficiency=rank_B - rank_S,
        moiety_basis=_frozen(moieties),
        mass_vector=_positive_vector_in_span(moieties),
    )
