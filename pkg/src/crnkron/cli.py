"""Command-line interface.

    crnkron analyze NET.crn
    crnkron equilibrium NET.crn --x0 1,2,...
    crnkron simulate NET.crn --x0 ... --t-end T [--rtol R] [--fixed-step H] --out traj.csv
    crnkron reduce NET.crn --delete C15,C16 [--anchor ...] --out reduced.crn
    crnkron compare a.csv b.csv --species T,M

Exit codes: 0 success, 1 parse error, 2 numerical failure, 3 bad arguments.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .equilibria import ConvergenceError, find_complex_equilibrium, unique_equilibrium_in_class
from .kinetics import NotComplexEquilibriumError
from .network import NetworkSyntaxError, ReactionNetwork, build_structure, parse_network
from .reduction import ReductionError, reduce_network
from .simulation import IntegrationError, Trajectory, compare, integrate, network_field

EXIT_PARSE, EXIT_NUMERICAL, EXIT_ARGS = 1, 2, 3


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_ARGS)


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _load(path: str) -> ReactionNetwork:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_network(text)


def _vector(values, net: ReactionNetwork, what: str) -> np.ndarray:
    if values.size != net.n_species:
        raise UsageError(f"{what} needs {net.n_species} values ({','.join(net.species)}), got {values.size}")
    if np.any(values <= 0):
        raise UsageError(f"{what} must be strictly positive")
    return values


def _anchor(net: ReactionNetwork, anchor_text=None) -> np.ndarray:
    if anchor_text is not None:
        return _vector(_floats(anchor_text), net, "--anchor")
    verdict = find_complex_equilibrium(net)
    if not verdict.complex_balanced:
        raise NumericalFailure("network is not complex-balanced; no complex-equilibrium found")
    return verdict.witness


def analysis_report(net: ReactionNetwork) -> dict:
    struct = build_structure(net)
    verdict = find_complex_equilibrium(net)
    return {
        "species": list(net.species),
        "complexes": net.complex_names,
        "m": net.n_species,
        "c": net.n_complexes,
        "r": net.n_reactions,
        "linkage_classes": [list(map(int, cl)) for cl in struct.linkage_classes],
        "n_linkage_classes": struct.n_linkage_classes,
        "rank_B": struct.rank_B,
        "rank_S": struct.rank_S,
        "deficiency": struct.deficiency,
        "weakly_reversible": verdict.weakly_reversible,
        "complex_balanced": verdict.complex_balanced,
        "witness": None if verdict.witness is None else verdict.witness.tolist(),
        "moiety_basis": struct.moiety_basis.T.tolist(),
        "mass_vector": None if struct.mass_vector is None else struct.mass_vector.tolist(),
    }


def cmd_analyze(args) -> int:
    print(json.dumps(analysis_report(_load(args.network)), indent=2))
    return 0


def cmd_equilibrium(args) -> int:
    net = _load(args.network)
    x0 = _vector(_floats(args.x0), net, "--x0")
    xstar = _anchor(net, args.anchor)
    x1, info = unique_equilibrium_in_class(net, xstar, x0, full_output=True)
    print(json.dumps({
        "species": list(net.species),
        "x1": x1.tolist(),
        "iterations": info["iterations"],
        "residual": info["residual"],
    }, indent=2))
    return 0


def cmd_simulate(args) -> int:
    net = _load(args.network)
    x0 = _vector(_floats(args.x0), net, "--x0")
    if not args.t_end > 0:
        raise UsageError("--t-end must be positive")
    kwargs = {"rtol": args.rtol, "atol": args.atol, "species": net.species}
    if args.fixed_step is not None:
        if not args.fixed_step > 0:
            raise UsageError("--fixed-step must be positive")
        kwargs["fixed_step"] = args.fixed_step
    else:
        kwargs["t_eval"] = np.linspace(0.0, args.t_end, args.points)
    traj = integrate(network_field(net), x0, args.t_end, **kwargs)
    traj.to_csv(args.out)
    return 0


def cmd_reduce(args) -> int:
    net = _load(args.network)
    names = [s.strip() for s in args.delete.split(",") if s.strip()]
    try:
        deleted = [net.complex_index(n) for n in names]
    except (KeyError, NetworkSyntaxError) as exc:
        raise UsageError(f"--delete: {exc}") from None
    red = reduce_network(net, _anchor(net, args.anchor), deleted)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# reduced network: deleted {','.join(names)}\n")
        fh.write(red.to_dsl())
    return 0


def cmd_compare(args) -> int:
    try:
        a = Trajectory.from_csv(args.a)
        b = Trajectory.from_csv(args.b)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    species = [s.strip() for s in args.species.split(",") if s.strip()]
    try:
        report = compare(a, b, species)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(report.to_json(indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crnkron", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="structural analysis and complex-balance test")
    a.add_argument("network")
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("equilibrium", help="equilibrium in the compatibility class of x0")
    e.add_argument("network")
    e.add_argument("--x0", required=True)
    e.add_argument("--anchor", help="complex-equilibrium to use instead of the computed witness")
    e.set_defaults(func=cmd_equilibrium)

    s = sub.add_parser("simulate", help="integrate the mass-action ODE and write a CSV trajectory")
    s.add_argument("network")
    s.add_argument("--x0", required=True)
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--rtol", type=float, default=1e-8)
    s.add_argument("--atol", type=float, default=1e-10)
    s.add_argument("--fixed-step", type=float)
    s.add_argument("--points", type=int, default=201, help="output samples (adaptive mode)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reduce", help="delete complexes by Kron reduction")
    r.add_argument("network")
    r.add_argument("--delete", required=True, help="comma-separated complex formulas, e.g. C15,C16")
    r.add_argument("--anchor")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_reduce)

    c = sub.add_parser("compare", help="compare two trajectory CSV files")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--species", required=True)
    c.set_defaults(func=cmd_compare)
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NetworkSyntaxError as exc:
        print(f"crnkron: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UsageError as exc:
        print(f"crnkron: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (NumericalFailure, ConvergenceError, IntegrationError, ReductionError,
            NotComplexEquilibriumError, np.linalg.LinAlgError) as exc:
        print(f"crnkron: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"crnkron: {exc}", file=sys.stderr)
        return EXIT_ARGS


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
