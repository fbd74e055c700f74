"""Batch command-line interface.

One JSON config document drives every command; flags override single fields.
All rationals cross the I/O boundary as strings "p/q".  Every run writes a
manifest echoing the resolved configuration next to its outputs.

Exit codes: 0 success, 2 config error, 3 verification failure, 4 resource
budget exceeded.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from typing import Dict, List, Optional

from .cartan import Weight, build_cartan_datum
from .charalg import CharacterAlgebra, TauPoint, tau_point
from .crystal import ModuleSpec, TensorNode, tensor_apply_e
from .errors import (
    ClosureError,
    DomainError,
    FormatError,
    HarmonicityError,
    NotFiniteTypeError,
    ResourceBudgetError,
    WeylwalkError,
)
from .exact import parse_rational
from . import markov as M
from . import montecarlo as MC
from . import paths as P

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_BUDGET = 4


class RunContext:
    """Resolved configuration plus the derived algebra objects."""

    def __init__(self, cfg: Dict):
        self.cfg = cfg
        type_spec = cfg.get("type", "C2")
        if isinstance(type_spec, dict):
            type_spec = type_spec.get("matrix")
        self.datum = build_cartan_datum(type_spec, max_rank=int(cfg.get("max_rank", 8)))
        self.algebra = CharacterAlgebra(self.datum)
        self.source = self._source(cfg)
        self.tau = self._tau(cfg)

    def _source(self, cfg):
        if "module" in cfg:
            summands = []
            for item in cfg["module"]:
                kappa = self.datum.weight(tuple(int(c) for c in item["kappa"]))
                summands.append((kappa, int(item.get("mult", 1))))
            spec = ModuleSpec(tuple(summands))
            if len(spec.summands) == 1 and spec.summands[0][1] == 1:
                return spec.summands[0][0]
            return spec
        kappa = cfg.get("kappa", [1] + [0] * (self.datum.rank - 1))
        return self.datum.weight(tuple(int(c) for c in kappa))

    def _tau(self, cfg) -> Optional[TauPoint]:
        if "tau_roots" in cfg and "tau" not in cfg:
            from .charalg import tau_point_from_roots

            return tau_point_from_roots(self.datum, [parse_rational(v) for v in cfg["tau_roots"]])
        if "tau" not in cfg:
            return None
        values = [parse_rational(v) for v in cfg["tau"]]
        roots = None
        if "tau_roots" in cfg:
            roots = [parse_rational(v) for v in cfg["tau_roots"]]
        return tau_point(self.datum, values, roots)

    def require_tau(self) -> TauPoint:
        if self.tau is None:
            raise FormatError("this command needs a tau value in the config")
        return self.tau

    def mu(self, default=None) -> Weight:
        coords = self.cfg.get("mu", default if default is not None else [0] * self.datum.rank)
        return self.datum.weight(tuple(int(c) for c in coords))

    def distribution(self) -> M.CrystalDistribution:
        return M.build_distribution(self.algebra, self.source, self.require_tau())

    def states(self, limit: Optional[int] = None) -> List[Weight]:
        limit = limit if limit is not None else int(self.cfg.get("state_limit", 4))
        dist = self.distribution()
        seeds = [self.datum.weight((0,) * self.datum.rank), self.mu()]
        return M.state_closure(dist, seeds, inside=M.coordinate_box(limit))


class OutputWriter:
    def __init__(self, cfg: Dict, command: str):
        self.dir = cfg.get("output_dir", ".")
        self.command = command
        self.outputs: List[str] = []
        os.makedirs(self.dir, exist_ok=True)

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.dir, name)
        with open(path, "w") as f:
            f.write(text)
        self.outputs.append(path)
        return path

    def manifest(self, cfg: Dict) -> None:
        payload = {
            "command": self.command,
            "config": cfg,
            "outputs": [os.path.basename(p) for p in self.outputs],
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        path = os.path.join(self.dir, f"{self.command}_manifest.json")
        with open(path, "w") as f:
            json.dump(payload, f, indent=2)


def _print_reports(reports) -> bool:
    ok = True
    for r in reports:
        status = "ok"
        if r.target is not None and not r.within(4.0):
            status = "FAIL(4sigma)"
            ok = False
        target = "" if r.target is None else f" target={float(r.target):.6g} z={r.z:+.2f}"
        print(f"  {r.name}: {r.estimate:.6g} (n={r.n}, se={r.stderr:.2g}){target} {status}")
    return ok


# -- commands ----------------------------------------------------------------------


def cmd_crystal(ctx: RunContext, out: OutputWriter) -> int:
    crystals = ctx.algebra.module_crystals(ctx.source)
    for crystal, _ in crystals:
        tag = "_".join(map(str, crystal.kappa.fw))
        out.write(f"crystal_{tag}.dot", crystal.to_dot(f"crystal_{tag}"))
        out.write(f"crystal_{tag}.json", crystal.to_json())
        print(f"crystal kappa={crystal.kappa.fw}: {len(crystal)} nodes, "
              f"{len(crystal.edges())} edges, kappa0={crystal.kappa0().fw}")
    return EXIT_OK


def cmd_character(ctx: RunContext, out: OutputWriter) -> int:
    rows = []
    for crystal, mult in ctx.algebra.module_crystals(ctx.source):
        poly = ctx.algebra.character_poly(crystal)
        print(f"S_{crystal.kappa.fw} = {poly}")
        for e, c in poly.sorted_terms():
            rows.append([str(crystal.kappa.fw), str(c)] + [str(x) for x in e])
    csv = "\n".join([",".join(["kappa", "coeff"] + [f"e{i+1}" for i in range(ctx.datum.rank)])]
                    + [",".join(r) for r in rows])
    out.write("characters.csv", csv)
    return EXIT_OK


def cmd_psi(ctx: RunContext, out: OutputWriter) -> int:
    tau = ctx.require_tau()
    tau.require_in_region()
    limit = int(ctx.cfg.get("mu_limit", 3))
    rows = []
    n = ctx.datum.rank
    from itertools import product as iproduct

    for coords in iproduct(range(limit + 1), repeat=n):
        mu = ctx.datum.weight(coords)
        val = ctx.algebra.psi(mu, tau)
        rows.append((coords, val))
        if len(rows) <= 12:
            print(f"  psi{coords} = {val} = {float(val):.6g}")
    csv_lines = ["mu,psi,psi_float"] + [
        f"\"{c}\",{v},{float(v)}" for c, v in rows
    ]
    out.write("psi_table.csv", "\n".join(csv_lines))
    poly = ctx.algebra.psi_poly(ctx.mu())
    out.write("psi_poly.txt", repr(poly))
    return EXIT_OK


def cmd_hchain(ctx: RunContext, out: OutputWriter) -> int:
    dist = ctx.distribution()
    states = ctx.states()
    table = M.hchain_matrix(dist, states, strict=False)
    out.write("hchain.csv", table.to_csv())
    out.write("hchain.json", table.to_json())
    print(f"hchain table on {len(states)} states "
          f"({sum(table.row_complete)} complete rows)")
    return EXIT_OK


def cmd_conditioned(ctx: RunContext, out: OutputWriter) -> int:
    dist = ctx.distribution()
    states = ctx.states()
    sub = M.restricted_table(dist, states, strict=False)
    psi_vals = {s: ctx.algebra.psi(s, dist.tau) for s in states}
    table = M.doob_transform(sub, psi_vals)
    out.write("conditioned.csv", table.to_csv())
    out.write("conditioned.json", table.to_json())
    hc = M.hchain_matrix(dist, states, strict=False)
    same = table.rows == hc.rows
    print(f"conditioned kernel on {len(states)} states; equals hchain: {same}")
    return EXIT_OK if same else EXIT_VERIFY


def cmd_pitman(ctx: RunContext, out: OutputWriter) -> int:
    literal = ctx.cfg.get("path")
    if literal is None:
        raise FormatError("pitman needs a \"path\" literal in the config")
    basis = ctx.cfg.get("basis", "ambient")
    path = P.path_from_literal(ctx.datum, literal, basis=basis)
    raised = M.pitman(ctx.datum, path)
    out.write("pitman.json", json.dumps(
        {"input": literal, "output": P.path_to_literal(ctx.datum, raised, basis=basis)},
        indent=2,
    ))
    print(f"endpoint {raised.endpoint()} dominant={P.is_dominant_path(raised)}")
    return EXIT_OK


def cmd_simulate(ctx: RunContext, out: OutputWriter) -> int:
    dist = ctx.distribution()
    mu = ctx.mu()
    horizon = int(ctx.cfg.get("horizon", 20))
    n = int(ctx.cfg.get("samples", 20000))
    seed = int(ctx.cfg.get("seed", 2024))
    small = min(horizon, int(ctx.cfg.get("ell", ctx.cfg.get("exact_horizon", 5))))
    exact_small = ctx.algebra.psi_ell(mu, ctx.source, dist.tau, small)
    psi_inf = ctx.algebra.psi(mu, dist.tau)
    summary = MC.simulate_exits(dist, mu, horizon, n, seed)
    truncation = exact_small - psi_inf
    reports = [
        MC._bernoulli_report(f"stay<=L={small}", summary.stay_count_continuous(small),
                             n, exact_small),
        MC._bernoulli_report(f"stay<=L={horizon}", summary.stay_count_continuous(horizon),
                             n, psi_inf, slack=float(truncation)),
    ]
    reports[-1].notes["truncation_bound"] = truncation
    ok = _print_reports(reports)
    out.write("simulate.json", json.dumps([r.as_dict() for r in reports], indent=2))
    csv = "\n".join(["L,estimate,stderr"] + [
        f"{ell},{summary.stay_count_continuous(ell) / n},{0.0}"
        for ell in range(1, horizon + 1)
    ])
    out.write("simulate_curve.csv", csv)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_sandwich(ctx: RunContext, out: OutputWriter) -> int:
    dist = ctx.distribution()
    mu = ctx.mu()
    horizon = int(ctx.cfg.get("horizon", 30))
    n = int(ctx.cfg.get("samples", 20000))
    seed = int(ctx.cfg.get("seed", 2024))
    report = MC.sandwich_check(dist, mu, horizon, n, seed)
    print(f"kappa0 = {report.kappa0}")
    print(f"limit bounds: {float(report.lower):.6g} <= discrete <= {float(report.upper):.6g}")
    print(f"finite-horizon upper bound (L0={report.exact_horizon}): "
          f"{float(report.upper_finite):.6g}")
    ok = _print_reports([report.discrete, report.continuous])
    ok = ok and report.bounds_hold and report.lemma_violations == 0
    print(f"lemma violations: {report.lemma_violations}; bounds hold: {report.bounds_hold}")
    out.write("sandwich.json", json.dumps({
        "mu": list(report.mu),
        "kappa0": list(report.kappa0),
        "lower": str(report.lower),
        "lower_float": float(report.lower),
        "upper": str(report.upper),
        "upper_float": float(report.upper),
        "upper_finite": str(report.upper_finite),
        "upper_finite_float": float(report.upper_finite),
        "exact_horizon": report.exact_horizon,
        "discrete": report.discrete.as_dict(),
        "continuous": report.continuous.as_dict(),
        "lemma_violations": report.lemma_violations,
        "bounds_hold": report.bounds_hold,
    }, indent=2))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_ratio(ctx: RunContext, out: OutputWriter) -> int:
    dist = ctx.distribution()
    mu = ctx.mu()
    top = int(ctx.cfg.get("ell", 14))
    ells = ctx.cfg.get("ells", list(range(4, top + 1, 2)))
    reports = MC.asymptotic_ratio(dist, mu, [int(e) for e in ells])
    if not reports:
        print("no admissible endpoint found; nothing to report")
        return EXIT_OK
    rows = ["ell,lambda,ratio,target,deviation"]
    for r in reports:
        print(f"  ell={r.ell} lambda={r.lam} ratio={float(r.ratio):.6g} "
              f"target={float(r.target):.6g} dev={float(r.deviation):.3g}")
        rows.append(f"{r.ell},\"{r.lam}\",{r.ratio},{r.target},{float(r.deviation)}")
    out.write("ratio.csv", "\n".join(rows))
    out.write("ratio.json", json.dumps([
        {"ell": r.ell, "lambda": list(r.lam), "ratio": str(r.ratio),
         "ratio_float": float(r.ratio), "target": str(r.target),
         "target_float": float(r.target), "deviation_float": float(r.deviation)}
        for r in reports
    ], indent=2))
    trend = reports[-1].deviation < reports[0].deviation
    print(f"deviation trend decreasing: {trend}")
    return EXIT_OK if trend else EXIT_VERIFY


def cmd_verify(ctx: RunContext, out: OutputWriter) -> int:
    """Exact self-checks of the central identities on the configured data."""
    tau = ctx.require_tau()
    tau.require_in_region()
    algebra = ctx.algebra
    datum = ctx.datum
    dist = ctx.distribution()
    group = algebra.group
    zero = datum.weight((0,) * datum.rank)
    results: List[tuple] = []

    def record(name, ok):
        results.append((name, bool(ok)))
        print(f"  [{'PASS' if ok else 'FAIL'}] {name}")

    # finite-horizon alternating identity
    for ell in (1, 2):
        left, right = algebra.master_identity_sides(ctx.mu(), ctx.source, tau, ell)
        record(f"alternating identity ell={ell}", left == right)
    # matrix identity
    states = ctx.states(limit=3)
    sub = M.restricted_table(dist, states, strict=False)
    psi_vals = {s: algebra.psi(s, tau) for s in states}
    try:
        doob = M.doob_transform(sub, psi_vals)
        hc = M.hchain_matrix(dist, states, strict=False)
        record("doob(psi) == hchain", doob.rows == hc.rows)
    except HarmonicityError as ex:
        record(f"doob(psi) == hchain ({ex})", False)
    # twisted coordinates leave the cube except at the identity
    ok = all(M.in_unit_cube(M.twisted_tau(datum, w, tau)) == w.is_identity() for w in group)
    record("twisted tau outside ]0,1[^n unless w=1", ok)
    # twisted node law equals the permuted law
    ok = True
    for crystal, _ in dist.crystals:
        for w in group:
            for idx in range(len(crystal)):
                direct = M.twisted_node_probability(dist, w, crystal, idx)
                img = crystal.weyl_action_on_node(w, idx)
                base = crystal.kappa
                p_img = tau.power((base - crystal.weights[img]).root) / \
                    algebra.character_value(base, tau)
                ok = ok and direct == p_img
    record("twisted law equals permuted law", ok)
    # tensor rule against path-level operators
    ok = True
    crystal = dist.crystals[0][0]
    for i0 in range(len(crystal)):
        for i1 in range(len(crystal)):
            node = TensorNode(((crystal, i0), (crystal, i1)))
            concat = P.concat(crystal.nodes[i0], crystal.nodes[i1])
            for i in range(datum.rank):
                te = tensor_apply_e(node, i)
                pe = P.apply_e(datum, concat, i)
                ok = ok and ((te is None) == (pe is None))
                if te is not None:
                    ok = ok and te.path() == pe
    record("tensor rule matches path operators (ell=2)", ok)

    payload = [{"check": n, "pass": p} for n, p in results]
    out.write("verify.json", json.dumps(payload, indent=2))
    return EXIT_OK if all(p for _, p in results) else EXIT_VERIFY


COMMANDS = {
    "crystal": cmd_crystal,
    "character": cmd_character,
    "psi": cmd_psi,
    "hchain": cmd_hchain,
    "conditioned": cmd_conditioned,
    "pitman": cmd_pitman,
    "simulate": cmd_simulate,
    "sandwich": cmd_sandwich,
    "ratio": cmd_ratio,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weylwalk",
        description="Exact crystal-path walks, their conditioned kernels and "
                    "Monte-Carlo checks.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--type", help="Cartan type label, e.g. C2")
    parser.add_argument("--kappa", help="comma-separated fw coordinates")
    parser.add_argument("--mu", help="comma-separated fw coordinates")
    parser.add_argument("--tau", help="comma-separated rationals p/q")
    parser.add_argument("--tau-roots", dest="tau_roots", help="comma-separated rationals")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--horizon", type=int)
    parser.add_argument("--ell", type=int)
    parser.add_argument("--output-dir", dest="output_dir")
    return parser


def resolve_config(args) -> Dict:
    cfg: Dict = {}
    if args.config:
        with open(args.config) as f:
            cfg = json.load(f)
    if args.type:
        cfg["type"] = args.type
    for key in ("seed", "samples", "horizon", "ell", "output_dir"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    if args.kappa:
        cfg["kappa"] = [int(c) for c in args.kappa.split(",")]
    if args.mu:
        cfg["mu"] = [int(c) for c in args.mu.split(",")]
    if args.tau:
        cfg["tau"] = args.tau.split(",")
    if args.tau_roots:
        cfg["tau_roots"] = args.tau_roots.split(",")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        ctx = RunContext(cfg)
        out = OutputWriter(cfg, args.command)
        code = COMMANDS[args.command](ctx, out)
        out.manifest(cfg)
        return code
    except (FormatError, NotFiniteTypeError, DomainError, json.JSONDecodeError,
            FileNotFoundError, KeyError, ValueError) as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceBudgetError as ex:
        print(f"resource budget exceeded: {ex}", file=sys.stderr)
        return EXIT_BUDGET
    except (ClosureError, HarmonicityError, WeylwalkError) as ex:
        print(f"verification failure: {ex}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
