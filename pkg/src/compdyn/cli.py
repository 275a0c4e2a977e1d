"""Command-line front end.

Every subcommand builds a :class:`~compdyn.report.DynamicsReport` and
writes it as JSON (default) or CSV.  Options come from flags and from an
optional ``key = value`` config file; flags win.

Exit codes: 0 success, 2 invalid input, 3 budget exhausted, 4 numerical
self-check failure.
"""

from __future__ import annotations

import argparse
import re
import sys
import time
import warnings
from dataclasses import asdict, dataclass, fields

import numpy as np

from compdyn import compop, hardy
from compdyn.compop import Budget, CompositionOperator
from compdyn.errors import BudgetExhaustedError, CompdynError
from compdyn.hardy import QuadratureSpec
from compdyn.mobius import DiskAutomorphismParams, MobiusMap, classify, from_disk_params
from compdyn.report import (
    DynamicsReport,
    atomic_write,
    classification_to_data,
    orbit_csv,
    point_to_data,
    summary_csv,
    table_to_data,
    tables_csv,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_SELFCHECK = 4

COMMANDS = ("classify", "orbit", "kitai", "witness", "verdict", "norm", "approx")

FUNCTION_HELP = """\
function specs:
  poly:c0,c1,...     polynomial with ascending coefficients (complex literals
                     such as 1, -0.5, 2+1j are accepted)
  gn:z0re,z0im,n     z0 z^n - z^(n+1)
  bump:zre,zim,k     ((1 + conj(zeta) z) / 2)^k
  geom:cre,cim       1 / (1 - c z), |c| < 1
"""


class ConfigError(ValueError):
    """Malformed option or config file."""


@dataclass
class ExperimentConfig:
    command: str = "classify"
    auto_a: str | None = None
    auto_b: str = "1,0"
    matrix: str | None = None
    f: str | None = None
    g: str | None = None
    p: float = 2.0
    nodes: int = 4096
    nmax: int | None = None
    tol: float | None = None
    eps: float | None = None
    samples: int = 8
    kmax: int = 4096
    radius: float = 1.0
    seed: int = 0
    selfcheck: float = 1e-4
    format: str = "json"
    out: str | None = None
    timing: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.nmax is not None and self.nmax < 1:
            raise ConfigError("nmax must be positive")
        for name in ("tol", "eps"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        if self.samples < 0 or self.kmax < 1 or self.seed < 0:
            raise ConfigError("samples, kmax and seed must be nonnegative")
        QuadratureSpec(self.p, self.nodes, self.radius)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("timing")
        d.pop("out")
        return d


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    try:
        if "bool" in kind:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw.strip()


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES or key == "command":
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _pair(text: str, what: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"{what} must be 're,im', got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise ConfigError(f"{what} must be numeric, got {text!r}") from exc


def parse_function_spec(text: str) -> hardy.AnalyticFn:
    """Build an AnalyticFn from the mini-language (see ``--help``)."""
    kind, sep, body = text.partition(":")
    if not sep:
        raise ConfigError(f"function spec needs 'kind:args', got {text!r}")
    args = [a.strip() for a in body.split(",")] if body.strip() else []
    try:
        if kind == "poly":
            if not args:
                raise ConfigError("poly needs at least one coefficient")
            fn = hardy.Polynomial([complex(a.replace(" ", "")) for a in args])
        elif kind == "gn":
            if len(args) != 3:
                raise ConfigError("gn needs z0re,z0im,n")
            fn = hardy.gn_family(complex(float(args[0]), float(args[1])), int(args[2]))
        elif kind == "bump":
            if len(args) != 3:
                raise ConfigError("bump needs zre,zim,k")
            fn = hardy.bump(complex(float(args[0]), float(args[1])), int(args[2]))
        elif kind == "geom":
            if len(args) != 2:
                raise ConfigError("geom needs cre,cim")
            fn = hardy.Reciprocal1mCz(complex(float(args[0]), float(args[1])))
        else:
            raise ConfigError(f"unknown function kind {kind!r}")
    except ValueError as exc:
        if isinstance(exc, (ConfigError, CompdynError)):
            raise
        raise ConfigError(f"bad function spec {text!r}: {exc}") from exc
    fn.label = text
    return fn


def build_map(cfg: ExperimentConfig) -> MobiusMap:
    if cfg.matrix is not None:
        if cfg.auto_a is not None:
            raise ConfigError("give either --matrix or --auto-a/--auto-b, not both")
        try:
            v = [float(x) for x in cfg.matrix.split(",")]
        except ValueError as exc:
            raise ConfigError(f"matrix must be 8 numbers: {exc}") from exc
        if len(v) != 8:
            raise ConfigError(f"matrix needs 8 numbers, got {len(v)}")
        return MobiusMap(complex(v[0], v[1]), complex(v[2], v[3]),
                         complex(v[4], v[5]), complex(v[6], v[7]))
    if cfg.auto_a is None:
        raise ConfigError("an automorphism is required: --auto-a/--auto-b or --matrix")
    params = DiskAutomorphismParams(_pair(cfg.auto_a, "auto-a"), _pair(cfg.auto_b, "auto-b"))
    return from_disk_params(params)


def _require_f(cfg: ExperimentConfig) -> hardy.AnalyticFn:
    if cfg.f is None:
        raise ConfigError(f"{cfg.command} needs --f")
    return parse_function_spec(cfg.f)


def _spec(cfg: ExperimentConfig, nodes: int | None = None) -> QuadratureSpec:
    return QuadratureSpec(cfg.p, nodes or cfg.nodes)


def _budget(cfg: ExperimentConfig) -> Budget:
    kw = dict(sample_count=cfg.samples, k_max=cfg.kmax, seed=cfg.seed, nodes=cfg.nodes)
    if cfg.nmax is not None:
        kw["n_max"] = cfg.nmax
        kw["separation_n_max"] = cfg.nmax
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
        kw["parabolic_tol"] = cfg.tol
    if cfg.eps is not None:
        kw["witness_eps"] = cfg.eps
    return Budget(**kw)


def _witness_data(w: compop.TransitivityWitness) -> dict:
    return {"n": w.n, "err_start": w.err_start, "err_end": w.err_end,
            "k_bump": w.k_bump, "p": w.p}


def _witness_selfcheck(op, w, f, g, spec: QuadratureSpec) -> float:
    """Re-measure a witness at doubled N without merging ``C^n S^n``."""
    fine = spec.with_nodes(2 * spec.nodes)
    end_tree = w.u if w.n == 0 else hardy.ComposeMobius(w.u, op.power(w.n), check=False)
    start = hardy.hp_norm(w.u - f, fine)
    end = hardy.hp_norm(end_tree - g, fine)
    return max(abs(start - w.err_start), abs(end - w.err_end))


def _kitai_selfcheck(op, result, spec: QuadratureSpec, seed: int, samples: int) -> float:
    """Last table entries recomputed at doubled N."""
    fine = spec.with_nodes(2 * spec.nodes)
    s = compop.right_inverse(op)
    cls = op.classification
    rng = np.random.default_rng(seed)
    xs = compop.vanishing_samples(cls.attracting, samples, rng, "X0")
    ys = compop.vanishing_samples(cls.repelling, samples, rng, "Y0")
    d = 0.0
    for fn, t in zip(xs, result.x_tables):
        d = max(d, abs(hardy.hp_norm(compop.apply(op, fn, t.ns[-1]), fine) - t.last))
    for fn, t in zip(ys, result.y_tables):
        d = max(d, abs(hardy.hp_norm(compop.apply(s, fn, t.ns[-1]), fine) - t.last))
    return d


def _kitai_tables(result) -> list:
    return ([table_to_data(t, "X0") for t in result.x_tables]
            + [table_to_data(t, "Y0") for t in result.y_tables])


def cmd_classify(cfg: ExperimentConfig) -> DynamicsReport:
    op_map = build_map(cfg)
    return DynamicsReport("classify", cfg.echo(), classification_to_data(classify(op_map)))


def cmd_orbit(cfg: ExperimentConfig) -> DynamicsReport:
    op = CompositionOperator(build_map(cfg))
    f = _require_f(cfg)
    spec = _spec(cfg)
    nmax = cfg.nmax if cfg.nmax is not None else 120
    table = compop.orbit_norms(op, f, cfg.p, nmax, spec, label=cfg.f)
    last = compop.apply(op, f, table.ns[-1])
    _, disc = hardy.hp_norm_selfcheck(last, spec)
    return DynamicsReport("orbit", cfg.echo(), classification_to_data(op.classification),
                          tables=[table_to_data(table, "orbit")],
                          selfcheck={"orbit_last": disc})


def cmd_kitai(cfg: ExperimentConfig) -> DynamicsReport:
    op = CompositionOperator(build_map(cfg))
    parabolic = op.classification.kind.value == "parabolic"
    nmax = cfg.nmax if cfg.nmax is not None else (12000 if parabolic else 120)
    tol = cfg.tol if cfg.tol is not None else (1e-2 if parabolic else 1e-3)
    spec = _spec(cfg)
    res = compop.kitai_check(op, cfg.p, cfg.samples, nmax, tol, spec, cfg.seed)
    return DynamicsReport(
        "kitai", cfg.echo(), classification_to_data(op.classification),
        tables=_kitai_tables(res),
        result={"passed": res.passed(tol), "tol": tol,
                "max_roundtrip_error": res.max_roundtrip_error},
        selfcheck={"kitai_last": _kitai_selfcheck(op, res, spec, cfg.seed, cfg.samples)},
    )


def cmd_witness(cfg: ExperimentConfig) -> DynamicsReport:
    op = CompositionOperator(build_map(cfg))
    if op.is_mixing_class:
        df, dg = compop.default_positive_pair(op.classification)
    else:
        df = dg = None
    f = parse_function_spec(cfg.f) if cfg.f else df
    g = parse_function_spec(cfg.g) if cfg.g else dg
    eps = cfg.eps if cfg.eps is not None else 0.1
    spec = _spec(cfg)
    w = compop.transitivity_witness(op, f, g, cfg.p, eps, spec, cfg.kmax)
    return DynamicsReport("witness", cfg.echo(), classification_to_data(op.classification),
                          witness=_witness_data(w),
                          selfcheck={"witness": _witness_selfcheck(op, w, f, g, spec)})


def cmd_verdict(cfg: ExperimentConfig) -> DynamicsReport:
    op = CompositionOperator(build_map(cfg))
    spec = _spec(cfg)
    v = compop.theorem_verdict(op, cfg.p, _budget(cfg))
    rep = DynamicsReport("verdict", cfg.echo(), classification_to_data(v.classification),
                         verdict={"hypercyclic": v.hypercyclic, "mixing": v.mixing},
                         notes=list(v.notes))
    if v.kitai is not None:
        rep.tables = _kitai_tables(v.kitai)
        rep.result = {"kitai_passed": v.kitai.passed(v.kitai_tol), "tol": v.kitai_tol,
                      "max_roundtrip_error": v.kitai.max_roundtrip_error}
    if v.witness is not None:
        rep.witness = _witness_data(v.witness)
        f, g = compop.default_positive_pair(v.classification)
        rep.selfcheck["witness"] = _witness_selfcheck(op, v.witness, f, g, spec)
    if v.separation is not None:
        sb = v.separation
        rep.bound = {"bound": sb.bound, "measured_min": sb.measured_min,
                     "z0": point_to_data(sb.z0), "R": sb.R,
                     "holds": sb.measured_min >= sb.bound - 1e-9}
        f, g = compop.default_negative_pair(sb.z0)
        _, disc = hardy.hp_norm_selfcheck(f - g, spec)
        rep.selfcheck["separation"] = disc
    return rep


def cmd_norm(cfg: ExperimentConfig) -> DynamicsReport:
    f = _require_f(cfg)
    spec = QuadratureSpec(cfg.p, cfg.nodes, cfg.radius)
    value, disc = hardy.hp_norm_selfcheck(f, spec)
    return DynamicsReport("norm", cfg.echo(), result={"norm": value},
                          selfcheck={"norm": disc})


def cmd_approx(cfg: ExperimentConfig) -> DynamicsReport:
    f = _require_f(cfg)
    eps = cfg.eps if cfg.eps is not None else 1e-3
    spec = _spec(cfg)
    g, err = hardy.approximate_by_polynomial(f, cfg.p, eps, spec)
    fine = hardy.hp_norm(f - g, spec.with_nodes(2 * spec.nodes))
    coeffs = [point_to_data(c) for c in g.as_polynomial()]
    return DynamicsReport("approx", cfg.echo(),
                          result={"achieved_error": err, "degree": len(coeffs) - 1,
                                  "coefficients": coeffs},
                          selfcheck={"approx": abs(fine - err)})


HANDLERS = {
    "classify": cmd_classify,
    "orbit": cmd_orbit,
    "kitai": cmd_kitai,
    "witness": cmd_witness,
    "verdict": cmd_verdict,
    "norm": cmd_norm,
    "approx": cmd_approx,
}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("shared options")
    g.add_argument("--p", type=float, help="Hardy exponent (default 2)")
    g.add_argument("--nodes", type=int, help="quadrature nodes, power of two >= 64 (default 4096)")
    g.add_argument("--nmax", type=int, help="largest iterate")
    g.add_argument("--tol", type=float, help="decay tolerance")
    g.add_argument("--format", choices=("json", "csv"), help="output format (default json)")
    g.add_argument("--out", help="output path (default stdout)")
    g.add_argument("--seed", type=int, help="sampling seed (default 0)")
    g.add_argument("--config", help="key = value config file; flags override it")
    g.add_argument("--auto-a", dest="auto_a", metavar="RE,IM", help="automorphism parameter a")
    g.add_argument("--auto-b", dest="auto_b", metavar="RE,IM", help="automorphism parameter b (default 1,0)")
    g.add_argument("--matrix", metavar="ARE,AIM,BRE,BIM,CRE,CIM,DRE,DIM", help="raw matrix entries")
    g.add_argument("--f", help="function spec")
    g.add_argument("--g", help="second function spec (witness)")
    g.add_argument("--eps", type=float, help="target accuracy (witness, approx)")
    g.add_argument("--samples", type=int, help="random samples per set (kitai, verdict)")
    g.add_argument("--kmax", type=int, help="largest bump exponent")
    g.add_argument("--radius", type=float, help="circle radius for norm")
    g.add_argument("--selfcheck", type=float, help="self-check threshold for exit status 4")
    g.add_argument("--timing", action="store_true", default=None, help="include wall time")

    parser = argparse.ArgumentParser(
        prog="compdyn",
        description="Dynamics of composition operators induced by disk automorphisms.",
        epilog=FUNCTION_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "classify": "classify a Mobius map",
        "orbit": "orbit norms ||C^n f||_p",
        "kitai": "Kitai-criterion decay tables",
        "witness": "transitivity witness for (f, g)",
        "verdict": "hypercyclicity verdict with evidence",
        "norm": "H^p norm of a function",
        "approx": "polynomial approximation of a function",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[shared], help=helps[name], epilog=FUNCTION_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for name in _FIELD_TYPES:
        if name == "command":
            continue
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    cfg = ExperimentConfig(command=args.command, **values)
    cfg.validate()
    return cfg


def render(report: DynamicsReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    if report.command == "orbit":
        return orbit_csv(report.tables[0])
    if report.tables:
        return tables_csv(report.tables)
    return summary_csv(report)


_NEGATIVE_VALUE = re.compile(r"^-[0-9.]")


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--flag -0.5,0`` as ``--flag=-0.5,0`` so argparse accepts it."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NEGATIVE_VALUE.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_attach_negative_values(argv))
    try:
        cfg = resolve_config(args)
    except (ConfigError, CompdynError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            report = HANDLERS[cfg.command](cfg)
        except BudgetExhaustedError as exc:
            print(f"budget exhausted: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        except (ConfigError, CompdynError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
    seen = []
    for w in caught:
        msg = f"{w.category.__name__}: {w.message}"
        if msg not in seen:
            seen.append(msg)
            print(f"warning: {msg}", file=sys.stderr)
    report.notes.extend(seen)
    if cfg.timing:
        report.wall_time = time.perf_counter() - start
    text = render(report, cfg.format)
    if cfg.out:
        atomic_write(cfg.out, text)
    else:
        sys.stdout.write(text)
    worst = max(report.selfcheck.values(), default=0.0)
    if worst > cfg.selfcheck:
        print(f"self-check failed: discrepancy {worst:.3e} > {cfg.selfcheck:.1e}",
              file=sys.stderr)
        return EXIT_SELFCHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
