"""Command-line entry point: ``carpool solve|vcg|verify|inspect|oracle``.

JSON goes to stdout (or ``--output``), a short human summary to stderr.
Exit codes: 0 equilibrium found / all checks pass, 2 proven
nonexistence, 1 validation, guard or check failures.
"""
from __future__ import annotations

import argparse
import os
import random
import sys
import time
from fractions import Fraction

from . import io, oracle
from .auction import AuctionGuardExceeded, default_epsilon
from .equilibrium import equilibrium_exists, verify_equilibrium
from .generators import random_sp_market
from .network import (
    Leaf,
    NetworkError,
    NotSeriesParallel,
    Series,
    decompose_series_parallel,
    greedy_route_capacities,
    is_series_parallel,
    network_capacity,
)
from .preferences import (
    EnumerationGuard,
    InstanceError,
    check_gross_substitutes,
    check_monotonicity,
)
from .simplex import LPError
from .vcg import VcgPreconditionError, vcg_payments

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_EQUILIBRIUM = 2

USER_ERRORS = (
    io.SchemaError,
    InstanceError,
    NetworkError,
    EnumerationGuard,
    VcgPreconditionError,
    AuctionGuardExceeded,
)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(path: str, max_routes: int | None = None):
    return io.instance_from_dict(io.loads(_read_text(path), path), max_routes=max_routes)


def _emit(doc: dict, output: str | None) -> None:
    text = io.dump_json(doc)
    if output and output != "-":
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _say(message: str) -> None:
    print(message, file=sys.stderr)


def _fmt(value, as_float: bool):
    return None if value is None else io.format_rational(value, as_float)


def _capacities_doc(k, as_float: bool = False) -> list[dict]:
    return [
        {"route": list(r.edges), "travel_time": io.format_rational(r.travel_time, as_float), "capacity": c}
        for r, c in k.items()
    ]


def _fractional_doc(x: dict, instance, as_float: bool) -> list[dict]:
    ordered = sorted(x.items(), key=lambda kv: (kv[0][1].key, instance.sorted_group(kv[0][0])))
    return [
        {"riders": list(instance.sorted_group(g)), "route": list(r.edges), "weight": io.format_rational(v, as_float)}
        for (g, r), v in ordered
    ]


# --------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    instance = _load(args.instance, args.max_routes)
    epsilon = None
    if args.epsilon is not None:
        epsilon = io.parse_rational(args.epsilon, "--epsilon")
        n = len(instance.riders)
        if epsilon <= 0 or (n and epsilon >= Fraction(1, 2 * n)):
            raise io.SchemaError("--epsilon", f"must lie in (0, 1/{2 * n}) for {n} riders")
    f = args.float
    start = time.perf_counter()
    found = equilibrium_exists(instance, epsilon)
    diagnostics = {
        "lp_optimum": _fmt(found.lp_value, f),
        "ip_optimum": _fmt(found.ip_value, f),
        "series_parallel": is_series_parallel(instance.network),
        "k_star": _capacities_doc(greedy_route_capacities(instance.network), f),
        "max_flow": network_capacity(instance.network),
    }
    if args.seed is not None:
        diagnostics["seed"] = args.seed

    if not found.exists:
        doc = {
            "status": "no_equilibrium",
            "method": found.method,
            "diagnostics": {**diagnostics, "gap": _fmt(found.gap, f)},
            "lp_solution": _fractional_doc(found.lp_solution or {}, instance, f),
        }
        _emit(doc, args.output)
        _say(
            f"no equilibrium: LP optimum {found.lp_value} exceeds integer optimum {found.ip_value} "
            f"({time.perf_counter() - start:.3f}s)"
        )
        return EXIT_NO_EQUILIBRIUM

    if args.vcg:
        result = vcg_payments(instance, epsilon)
        outcome = result.outcome
        pipe = result.pipeline
        method = "vcg"
        diagnostics["vcg"] = {
            "welfare": io.format_rational(result.welfare, f),
            "revenue": io.format_rational(result.revenue, f),
            "welfare_without": io.rational_map(result.counterfactual_welfare, instance.rider_ids, f),
        }
    else:
        outcome = found.outcome
        pipe = found.pipeline
        method = found.method
        diagnostics["dual_rounds"] = found.dual.rounds
    if pipe is not None:
        auction = pipe.auction
        eps_used = epsilon if epsilon is not None else default_epsilon(instance)
        diagnostics["auction"] = {
            "iterations": auction.iterations,
            "iteration_bound": io.format_rational(auction.iteration_bound, f),
            # the increment is given in integer value units; value_scale converts back
            "epsilon": io.format_rational(eps_used, f),
            "value_scale": auction.scale // eps_used.denominator,
            "epsilon_value": io.format_rational(auction.state.epsilon, f),
            "welfare": io.format_rational(pipe.welfare, f),
        }

    report = verify_equilibrium(outcome, instance)
    doc = {
        "status": "equilibrium",
        "method": method,
        **io.outcome_to_dict(outcome, instance, f),
        "report": io.report_to_dict(report),
        "diagnostics": diagnostics,
    }
    _emit(doc, args.output)
    welfare = outcome.x.welfare(instance)
    _say(
        f"equilibrium ({method}): {len(outcome.x)} trip(s), welfare {welfare}, "
        f"checks {'pass' if report.ok else 'FAIL'} ({time.perf_counter() - start:.3f}s)"
    )
    for w in report.witnesses:
        _say(f"  {w['check']}: {w['detail']}")
    return EXIT_OK if report.ok else EXIT_ERROR


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    instance = _load(args.instance, args.max_routes)
    outcome = io.outcome_from_dict(io.loads(_read_text(args.outcome), args.outcome), instance)
    report = verify_equilibrium(outcome, instance)
    _emit(io.report_to_dict(report), args.output)
    failed = [k for k, v in report.flags.items() if not v]
    _say("all equilibrium checks pass" if report.ok else "failed: " + ", ".join(failed))
    if report.ok and failed:
        _say("  (reported only: " + ", ".join(failed) + ")")
    return EXIT_OK if report.ok else EXIT_ERROR


# --------------------------------------------------------------------------
# inspect


def _tree_doc(tree):
    if isinstance(tree, Leaf):
        return tree.edge
    kind = "series" if isinstance(tree, Series) else "parallel"
    return {kind: [_tree_doc(c) for c in tree.children]}


def _witness_doc(witness):
    return [list(w) if isinstance(w, tuple) else w for w in witness]


def cmd_inspect(args) -> int:
    instance = _load(args.instance, args.max_routes)
    network = instance.network
    wanted = {k for k in ("routes", "sp", "greedy", "gs_check") if getattr(args, k)}
    if not wanted:
        wanted = {"routes", "sp", "greedy"}
    f = args.float
    doc: dict = {}
    if "routes" in wanted:
        doc["routes"] = [
            {
                "route": list(r.edges),
                "travel_time": io.format_rational(r.travel_time, f),
                "bottleneck": min(network.edge_by_id[e].capacity for e in r.edges),
            }
            for r in network.routes
        ]
        _say(f"{len(network.routes)} route(s)")
    if "sp" in wanted:
        try:
            doc["series_parallel"] = {"ok": True, "decomposition": _tree_doc(decompose_series_parallel(network))}
            _say("series-parallel")
        except NotSeriesParallel as exc:
            doc["series_parallel"] = {"ok": False, "witness": sorted(exc.witness, key=network.edge_index.get)}
            _say(f"not series-parallel; irreducible edges {', '.join(doc['series_parallel']['witness'])}")
    if "greedy" in wanted:
        k = greedy_route_capacities(network)
        flow = network_capacity(network)
        doc["greedy"] = {"k_star": _capacities_doc(k, f), "total": k.total, "max_flow": flow}
        _say(f"greedy capacities total {k.total}, max-flow {flow}")
    if "gs_check" in wanted:
        rows = []
        for r in network.routes:
            gs = check_gross_substitutes(instance, r)
            mono = check_monotonicity(instance, r)
            rows.append(
                {
                    "route": list(r.edges),
                    "gross_substitutes": gs.ok,
                    "witness": None if gs.ok else _witness_doc(gs.witness),
                    "monotone": mono.ok,
                }
            )
            if not gs.ok:
                _say(f"{r.name}: gross substitutes violated, witness {gs.witness}")
        doc["gross_substitutes"] = rows
        if all(row["gross_substitutes"] for row in rows):
            _say("gross substitutes hold on every route")
    _emit(doc, args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# oracle


def compare_with_oracle(instance, epsilon=None) -> dict:
    """LP, both integer enumerators and (when it applies) the auction, side by side."""
    _, lp = oracle.solve_lp_relaxation(instance)
    _, ip = oracle.brute_force_ip(instance)
    naive = oracle.brute_force_ip_naive(instance)
    row = {"lp": lp, "ip": ip, "ip_naive": naive, "auction": None}
    if instance.homogeneous_gamma and is_series_parallel(instance.network):
        from .equilibrium import auction_pipeline

        row["auction"] = auction_pipeline(instance, epsilon).welfare
    row["consistent"] = lp >= ip and ip == naive
    if row["auction"] is not None:
        row["consistent"] = row["consistent"] and row["auction"] == ip == lp
    return row


def _oracle_row_doc(row: dict, f: bool) -> dict:
    return {k: (io.format_rational(v, f) if isinstance(v, Fraction) else v) for k, v in row.items()}


FIXTURES = {
    "wheatstone": oracle.wheatstone_fixture,
    "single_rider": oracle.single_rider_fixture,
    "one_slot": oracle.one_slot_fixture,
    "parallel": oracle.parallel_fixture,
}


def cmd_oracle(args) -> int:
    f = args.float
    if args.export_fixtures:
        os.makedirs(args.export_fixtures, exist_ok=True)
        for name, make in FIXTURES.items():
            with open(os.path.join(args.export_fixtures, f"{name}.json"), "w", encoding="utf-8") as fh:
                fh.write(io.dump_json(io.instance_to_dict(make())))
        _say(f"wrote {len(FIXTURES)} fixtures to {args.export_fixtures}")
        if not args.instance and not args.random:
            return EXIT_OK

    rows = []
    if args.instance:
        row = compare_with_oracle(_load(args.instance, args.max_routes))
        rows.append({"instance": args.instance, **_oracle_row_doc(row, f)})
    if args.random:
        rng = random.Random(args.seed if args.seed is not None else 0)
        for i in range(args.random):
            row = compare_with_oracle(random_sp_market(rng))
            rows.append({"instance": f"random[{i}]", **_oracle_row_doc(row, f)})
    if not rows:
        _say("nothing to compare: give an instance, --random N or --export-fixtures DIR")
        return EXIT_ERROR
    bad = [r["instance"] for r in rows if not r["consistent"]]
    _emit({"comparisons": rows, "inconsistent": bad}, args.output)
    _say(f"{len(rows) - len(bad)}/{len(rows)} consistent")
    return EXIT_OK if not bad else EXIT_ERROR


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carpool", description="Carpooling market equilibrium solver.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-routes", type=int, default=None, help="route enumeration cap")
    common.add_argument("--float", action="store_true", help="render rationals as decimals")
    common.add_argument("--output", "-o", default=None, help="write JSON here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (("solve", "decide existence and compute an equilibrium"),
                           ("vcg", "shorthand for solve --vcg")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("instance", help="instance JSON file, or - for stdin")
        if name == "solve":
            p.add_argument("--vcg", action="store_true", help="price with VCG payments and tolls")
        p.add_argument("--epsilon", default=None, help="auction bid increment, e.g. 1/7")
        p.add_argument("--seed", type=int, default=None, help="recorded in diagnostics")
        p.set_defaults(func=cmd_solve, vcg=name == "vcg")

    p = sub.add_parser("verify", parents=[common], help="check an outcome against an instance")
    p.add_argument("instance")
    p.add_argument("outcome", help="result document (trips, payments, tolls)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("inspect", parents=[common], help="routes, structure and preference checks")
    p.add_argument("instance")
    p.add_argument("--routes", action="store_true")
    p.add_argument("--sp", action="store_true", help="series-parallel decomposition or witness")
    p.add_argument("--greedy", action="store_true", help="greedy route capacities")
    p.add_argument("--gs-check", dest="gs_check", action="store_true", help="gross-substitutes check per route")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("oracle", parents=[common], help="compare solvers with brute force")
    p.add_argument("instance", nargs="?")
    p.add_argument("--random", type=int, default=0, metavar="N", help="also compare N random series-parallel markets")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--export-fixtures", default=None, metavar="DIR")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        _say(f"error: {exc}")
        return EXIT_ERROR
    except LPError as exc:
        _say(f"internal error: {exc}")
        return EXIT_ERROR
    except OSError as exc:
        _say(f"error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
