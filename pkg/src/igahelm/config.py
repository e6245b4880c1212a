"""Experiment configuration: a declarative TOML file, schema version v1.

The schedule is stored as plan recipes (kind + parameters); uniform and
cluster recipes are resolved against the space of the level they apply to,
explicit recipes are fixed insertions.
"""

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .geometry import BUILTIN_DOMAINS
from .refine import RefinementPlan, cluster_plan, double_knot_plan, merge_plans, uniform_midpoint_plan

SCHEMA_VERSION = "v1"

PROBLEM_IDS = {
    "p1": "p1",
    "oscillatory": "p1",
    "p2": "p2",
    "exp_cones": "p2",
    "p3": "p3",
    "variable_frequency": "p3",
}

PLAN_KINDS = ("none", "uniform", "cluster", "double", "explicit")


@dataclass(frozen=True)
class PlanSpec:
    """One schedule entry; resolved to a RefinementPlan per level."""

    kind: str
    center: tuple = None
    knots_per_interval: int = 9
    double_center: bool = False
    xi: tuple = ()
    eta: tuple = ()

    def resolve(self, space):
        if self.kind == "none":
            return RefinementPlan(description="no refinement")
        if self.kind == "uniform":
            return uniform_midpoint_plan(space)
        if self.kind == "cluster":
            plan = cluster_plan(space, self.center, self.knots_per_interval)
            if self.double_center:
                plan = merge_plans(
                    plan,
                    double_knot_plan([self.center[0]], [self.center[1]]),
                    description=plan.description + " with doubled center",
                )
            return plan
        if self.kind == "double":
            return double_knot_plan(self.xi, self.eta)
        if self.kind == "explicit":
            return RefinementPlan(
                xi_insertions=tuple((float(v), int(m)) for v, m in self.xi),
                eta_insertions=tuple((float(v), int(m)) for v, m in self.eta),
                description="explicit insertions",
            )
        raise ConfigError(f"unknown plan kind {self.kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description."""

    base_dir: Path
    domain_builtin: str = None
    domain_file: Path = None
    domain_n: int = 0
    domain_m: int = 0
    problem_id: str = "p1"
    m_oscillations: int = 1
    anchor: tuple = (0.5, 0.5)
    cone_slopes: tuple = (7.0, 7.0, 7.0)
    cone_anchors: tuple = ((0.25, 0.25), (0.5, 0.5), (0.75, 0.75))
    schedule: tuple = field(default_factory=tuple)
    assembly_order: int = 3
    error_order: int = 5
    threads: int = 1
    table_path: str = "convergence.csv"
    field_path: str = None
    field_format: str = "csv"
    field_resolution: int = 33
    matrix_market_path: str = None


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    location: str
    message: str

    def __str__(self):
        return f"{self.severity}: [{self.location}] {self.message}"


def load_config(path):
    """Parse a TOML experiment file into an ExperimentConfig.

    Structural problems raise ConfigError; semantic checks live in
    :func:`validate_config`.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}")

    version = data.get("version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"{path}: schema version {version!r} unsupported (expected {SCHEMA_VERSION!r})"
        )

    dom = data.get("domain", {})
    prob = data.get("problem", {})
    quad = data.get("quadrature", {})
    solver = data.get("solver", {})
    out = data.get("output", {})

    schedule = []
    for idx, entry in enumerate(data.get("schedule", [])):
        kind = entry.get("kind", "none")
        if kind not in PLAN_KINDS:
            raise ConfigError(
                f"{path}: schedule[{idx}]: unknown kind {kind!r}; know {PLAN_KINDS}"
            )
        schedule.append(
            PlanSpec(
                kind=kind,
                center=tuple(entry.get("center", (0.5, 0.5))),
                knots_per_interval=int(entry.get("knots_per_interval", 9)),
                double_center=bool(entry.get("double_center", False)),
                xi=tuple(tuple(v) if isinstance(v, list) else v for v in entry.get("xi", [])),
                eta=tuple(tuple(v) if isinstance(v, list) else v for v in entry.get("eta", [])),
            )
        )

    problem_raw = str(prob.get("id", "p1"))
    problem_id = PROBLEM_IDS.get(problem_raw)
    if problem_id is None:
        raise ConfigError(
            f"{path}: unknown problem id {problem_raw!r}; know {sorted(set(PROBLEM_IDS))}"
        )

    return ExperimentConfig(
        base_dir=path.parent,
        domain_builtin=dom.get("builtin"),
        domain_file=Path(dom["file"]) if "file" in dom else None,
        domain_n=int(dom.get("n", 0)),
        domain_m=int(dom.get("m", 0)),
        problem_id=problem_id,
        m_oscillations=int(prob.get("M", 1)),
        anchor=tuple(prob.get("anchor", (0.5, 0.5))),
        cone_slopes=(
            float(prob.get("alpha", 7.0)),
            float(prob.get("beta", 7.0)),
            float(prob.get("gamma", 7.0)),
        ),
        cone_anchors=tuple(
            tuple(a) for a in prob.get("anchors", ((0.25, 0.25), (0.5, 0.5), (0.75, 0.75)))
        ),
        schedule=tuple(schedule),
        assembly_order=int(quad.get("assembly_order", 3)),
        error_order=int(quad.get("error_order", 5)),
        threads=int(solver.get("threads", 1)),
        table_path=out.get("table", "convergence.csv"),
        field_path=out.get("field"),
        field_format=out.get("field_format", "csv"),
        field_resolution=int(out.get("field_resolution", 33)),
        matrix_market_path=out.get("matrix_market"),
    )


def validate_config(config, check_domain=True):
    """Dry-run validation; returns diagnostics instead of raising.

    With ``check_domain`` the domain is constructed (or loaded) and its
    injectivity sampled, without assembling or solving anything.
    """
    diags = []

    if config.domain_builtin is None and config.domain_file is None:
        diags.append(Diagnostic("error", "domain", "neither builtin nor file given"))
    if config.domain_builtin is not None and config.domain_file is not None:
        diags.append(Diagnostic("error", "domain", "both builtin and file given"))
    if config.domain_builtin is not None:
        if config.domain_builtin not in BUILTIN_DOMAINS:
            diags.append(
                Diagnostic(
                    "error",
                    "domain",
                    f"unknown builtin {config.domain_builtin!r}; know {BUILTIN_DOMAINS}",
                )
            )
        elif config.domain_n < 4 or config.domain_m < 4:
            diags.append(Diagnostic("error", "domain", "builtin domains need n, m >= 4"))
    net_file = None
    if config.domain_file is not None:
        net_file = config.base_dir / config.domain_file
        if not net_file.is_file():
            diags.append(Diagnostic("error", "domain", f"net file {net_file} not found"))

    if not config.schedule:
        diags.append(Diagnostic("error", "schedule", "schedule must not be empty"))

    if config.problem_id == "p3":
        if config.m_oscillations < 1:
            diags.append(Diagnostic("error", "problem", "M must be >= 1"))
        if not all(0.0 < c < 1.0 for c in config.anchor):
            diags.append(
                Diagnostic("error", "problem", f"anchor {config.anchor} outside (0, 1)^2")
            )
    if config.problem_id == "p2":
        for a in config.cone_anchors:
            if not all(0.0 < c < 1.0 for c in a):
                diags.append(
                    Diagnostic("error", "problem", f"anchor {a} outside (0, 1)^2")
                )
        if len(config.cone_anchors) != 3:
            diags.append(Diagnostic("error", "problem", "exactly three anchors required"))

    for spec_idx, spec in enumerate(config.schedule):
        if spec.kind == "cluster" and not all(0.0 < c < 1.0 for c in spec.center):
            diags.append(
                Diagnostic(
                    "error",
                    f"schedule[{spec_idx}]",
                    f"cluster center {spec.center} outside (0, 1)^2",
                )
            )

    if not 2 <= config.assembly_order <= 10:
        diags.append(Diagnostic("error", "quadrature", "assembly_order must be in 2..10"))
    if not 2 <= config.error_order <= 10:
        diags.append(Diagnostic("error", "quadrature", "error_order must be in 2..10"))
    if config.field_format not in ("csv", "vtk"):
        diags.append(
            Diagnostic("error", "output", f"unknown field format {config.field_format!r}")
        )
    if config.threads < 1:
        diags.append(Diagnostic("error", "solver", "threads must be >= 1"))

    if check_domain and not any(d.severity == "error" for d in diags):
        from .geometry import load_net, validate_injectivity
        from .errors import IgaError

        try:
            if config.domain_builtin is not None:
                from .geometry import builtin_domain

                net = builtin_domain(config.domain_builtin, config.domain_n, config.domain_m)
            else:
                net = load_net(net_file)
            report = validate_injectivity(net, 3)
            if not report.passed:
                diags.append(
                    Diagnostic(
                        "error",
                        "domain",
                        f"injectivity sampling failed: min det {report.min_det:.3e} "
                        f"at {report.location}",
                    )
                )
        except IgaError as exc:
            diags.append(Diagnostic("error", "domain", str(exc)))

    return diags
