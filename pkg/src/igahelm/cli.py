"""Batch experiment runner.

Subcommands:
    iga-helm run <config>            execute a refinement schedule end to end
    iga-helm validate <config>       dry-run configuration checks
    iga-helm export-domain <name> <n> <m> <path>

The IGA_HELM_LOG environment variable (DEBUG, INFO, ...) controls verbosity.
"""

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .assembly import assemble, save_matrix_market
from .boundary import build_lift
from .config import load_config, validate_config
from .errors import ConfigError, IgaError
from .fields import combine, error_norms, export_grid
from .geometry import BUILTIN_DOMAINS, builtin_domain, load_net, save_net
from .problems import helmholtz_variable_frequency, poisson_exp_cones, poisson_oscillatory
from .refine import apply_plan
from .solve import solve

log = logging.getLogger("igahelm")

TABLE_HEADER = "level,n,m,N,l2_error,h1_error,assembly_seconds,solve_seconds"


@dataclass(frozen=True)
class LevelRecord:
    level: int
    n: int
    m: int
    dof: int
    l2: float
    h1: float
    assembly_seconds: float
    solve_seconds: float

    def csv_row(self):
        return (
            f"{self.level},{self.n},{self.m},{self.dof},"
            f"{self.l2!r},{self.h1!r},"
            f"{self.assembly_seconds!r},{self.solve_seconds!r}"
        )


def _build_case(config, net):
    if config.problem_id == "p1":
        return poisson_oscillatory()
    if config.problem_id == "p2":
        a, b, g = config.cone_slopes
        return poisson_exp_cones(a, b, g, config.cone_anchors, net)
    return helmholtz_variable_frequency(config.m_oscillations, config.anchor, net)


def run_experiment(config, threads=None, quad_order=None):
    """Execute the schedule: refine, rebuild lift, assemble, solve, measure.

    Returns (records, final_state) where final_state carries the last
    level's space, net, case and field for exports.
    """
    diags = validate_config(config, check_domain=False)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ConfigError("; ".join(str(d) for d in errors))

    if config.domain_builtin is not None:
        net = builtin_domain(config.domain_builtin, config.domain_n, config.domain_m)
    else:
        net = load_net(config.base_dir / config.domain_file)
    case = _build_case(config, net)
    space = net.space()

    threads = config.threads if threads is None else threads
    order = config.assembly_order if quad_order is None else quad_order
    if not 2 <= order <= 10:
        raise ConfigError(f"assembly quadrature order {order} outside 2..10")

    records = []
    for level, spec in enumerate(config.schedule, start=1):
        plan = spec.resolve(space)
        space, net = apply_plan(plan, net)
        lift = build_lift(space, net, case.g)
        t0 = time.perf_counter()
        system = assemble(space, net, case, lift, order=order, threads=threads)
        t1 = time.perf_counter()
        report = solve(system)
        t2 = time.perf_counter()
        field = combine(space, lift, report.alpha)
        err = error_norms(field, case, net, quad_order=config.error_order)
        records.append(
            LevelRecord(
                level=level,
                n=space.n,
                m=space.m,
                dof=space.dimension,
                l2=err.l2,
                h1=err.h1,
                assembly_seconds=t1 - t0,
                solve_seconds=t2 - t1,
            )
        )
        log.info(
            "level %d: %dx%d dof, L2 %.6g, H1 %.6g (assemble %.2fs, solve %.2fs)",
            level, space.n, space.m, err.l2, err.h1, t1 - t0, t2 - t1,
        )

    final = {"space": space, "net": net, "case": case, "field": field, "system": system}
    return records, final


def write_table(records, path):
    lines = [TABLE_HEADER] + [r.csv_row() for r in records]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _resolve_out(path, output_dir, base_dir):
    p = Path(path)
    if p.is_absolute():
        return p
    root = Path(output_dir) if output_dir else base_dir
    return root / p


def _cmd_run(args):
    config = load_config(args.config)
    records, final = run_experiment(
        config, threads=args.threads, quad_order=args.quad_order
    )
    table = _resolve_out(config.table_path, args.output_dir, config.base_dir)
    write_table(records, table)
    log.info("wrote convergence table %s", table)
    if config.field_path:
        out = _resolve_out(config.field_path, args.output_dir, config.base_dir)
        out.parent.mkdir(parents=True, exist_ok=True)
        export_grid(
            final["field"], final["case"], final["net"],
            config.field_resolution, out, fmt=config.field_format,
        )
        log.info("wrote field export %s", out)
    if config.matrix_market_path:
        out = _resolve_out(config.matrix_market_path, args.output_dir, config.base_dir)
        out.parent.mkdir(parents=True, exist_ok=True)
        save_matrix_market(final["system"], out)
        log.info("wrote matrix dump %s", out)
    return 0


def _cmd_validate(args):
    config = load_config(args.config)
    diags = validate_config(config)
    for d in diags:
        print(d)
    if any(d.severity == "error" for d in diags):
        return 1
    print("configuration ok")
    return 0


def _cmd_export_domain(args):
    net = builtin_domain(args.name, args.n, args.m)
    save_net(net, args.path)
    print(f"wrote {args.name}({args.n}, {args.m}) to {args.path}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="iga-helm",
        description="Isogeometric Helmholtz solver experiments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--threads", type=int, default=None, help="assembly threads")
    p_run.add_argument(
        "--quad-order", type=int, default=None, help="override the assembly quadrature order"
    )
    p_run.add_argument("--output-dir", default=None, help="root for relative output paths")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="validate a config without solving")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_exp = sub.add_parser("export-domain", help="write a built-in domain to a net file")
    p_exp.add_argument("name", choices=BUILTIN_DOMAINS)
    p_exp.add_argument("n", type=int)
    p_exp.add_argument("m", type=int)
    p_exp.add_argument("path")
    p_exp.set_defaults(func=_cmd_export_domain)

    args = parser.parse_args(argv)

    level = os.environ.get("IGA_HELM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        return args.func(args)
    except IgaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
