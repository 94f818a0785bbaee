"""``soblab`` command line.

Exit codes: 0 success, 1 some experiment failed its tolerance check,
2 bad arguments or config, 3 index or request outside the supported
hypotheses, 4 unknown corpus label, 5 quadrature tolerance not reached
(a partial report is still written).
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

from soblab.exponents import (
    INF,
    Answer,
    DomainKind,
    SobolevIndex,
    classify,
    partition_counts,
    region_sample,
    to_exact,
)
from soblab.experiments import (
    EmbeddingHolds,
    ExperimentReport,
    bbm_limit_sweep,
    bmo_chain,
    counterexample_run,
    estimate_embedding_constant,
    interpolation_over_corpus,
    lemma_scaling,
    verify_bounded_scaling_bounds,
    verify_interpolation,
    verify_scaling_identity,
)
from soblab.functions import (
    DEFAULT_MANIFEST,
    ScalingSpec,
    UnknownLabel,
    build_corpus,
    load_manifest,
    make_bump,
    make_tent,
)
from soblab.norms import (
    Ball,
    Box,
    WholeSpace,
    bmo_norm,
    full_norm,
    gagliardo_seminorm,
    grad_lp_norm,
    holder_seminorm,
    lp_norm,
)
from soblab.output import (
    CliConfig,
    ConfigError,
    csv_text,
    dumps,
    read_config,
    region_csv,
    region_svg,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_LABEL, EXIT_TOLERANCE = 0, 1, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# Argument parsing ------------------------------------------------------------------

def _pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected s,p but got {text!r}")
    try:
        return to_exact(parts[0]), to_exact(parts[1])
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _number(text: str):
    try:
        return to_exact(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _floats(text: str):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _domain_kind(text: str) -> DomainKind:
    table = {"rn": DomainKind.WHOLE_SPACE, "whole-space": DomainKind.WHOLE_SPACE,
             "bounded": DomainKind.BOUNDED}
    if text not in table:
        raise argparse.ArgumentTypeError("domain must be rn or bounded")
    return table[text]


def _concrete_domain(text: str, N: int):
    """``rn``, ``box:LO:HI`` or ``ball:CENTER:RADIUS`` (comma lists per coordinate)."""
    if text in ("rn", "whole-space"):
        return WholeSpace(N)
    kind, _, rest = text.partition(":")
    try:
        if kind == "box":
            lo, hi = rest.split(":")
            dom = Box([float(v) for v in lo.split(",")], [float(v) for v in hi.split(",")])
        elif kind == "ball":
            c, r = rest.split(":")
            dom = Ball([float(v) for v in c.split(",")], float(r))
        else:
            raise ValueError
    except ValueError:
        raise CliError(EXIT_USAGE, f"cannot read domain {text!r}; use rn, box:LO:HI or ball:C:R") from None
    if dom.N != N:
        raise CliError(EXIT_USAGE, f"domain {text!r} has dimension {dom.N}, expected {N}")
    return dom


def _index(N: int, s, p) -> SobolevIndex:
    try:
        return SobolevIndex(N, s, p)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None


def _corpus(args):
    manifest = load_manifest(args.manifest) if getattr(args, "manifest", None) else DEFAULT_MANIFEST
    return build_corpus(manifest)


def _function(args):
    corpus = _corpus(args)
    if args.fn not in corpus:
        raise UnknownLabel(args.fn)
    u = corpus[args.fn]
    if hasattr(args, "dim") and args.dim is not None and u.N != args.dim:
        raise CliError(EXIT_USAGE, f"{args.fn} lives in dimension {u.N}, not {args.dim}")
    return u


def _emit(text: str):
    sys.stdout.write(text)


def _report_exit(reports) -> int:
    if any(r.tolerance_unmet for r in reports):
        return EXIT_TOLERANCE
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


# Commands -----------------------------------------------------------------------------

def cmd_classify(args, cfg: CliConfig) -> int:
    src = _index(args.dim, *args.source)
    tgt = _index(args.dim, *args.target)
    verdict = classify(src, tgt, args.domain)
    _emit(dumps(verdict.as_dict()))
    if verdict.continuous is Answer.UNSUPPORTED:
        sys.stderr.write(f"unsupported: {verdict.reason}\n")
        return EXIT_UNSUPPORTED
    return EXIT_OK


def cmd_region(args, cfg: CliConfig) -> int:
    src = _index(args.dim, *args.source)
    n = args.resolution or cfg.resolution
    sample = region_sample(src, args.domain, args.mode, n_s=n, n_r=n)
    out = Path(args.out or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot create {out}: {exc}") from None
    stem = f"region-{args.domain.value}-{args.mode}"
    written = []
    try:
        if "csv" in cfg.formats:
            (out / f"{stem}.csv").write_text(region_csv(sample))
            written.append(out / f"{stem}.csv")
        if "svg" in cfg.formats:
            title = f"{src} {args.domain.value} {args.mode}"
            (out / f"{stem}.svg").write_text(region_svg(sample, title))
            written.append(out / f"{stem}.svg")
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot write to {out}: {exc}") from None
    for path in written:
        _emit(f"{path}\n")
    return EXIT_OK


_NORMS = ("full", "lp", "grad", "gagliardo", "holder", "bmo")


def cmd_norm(args, cfg: CliConfig) -> int:
    u = _function(args)
    dom = _concrete_domain(args.domain, u.N)
    tol = args.tol if args.tol is not None else cfg.tolerances.quadrature
    s, p = args.s, args.p
    kind = args.kind
    try:
        if kind == "full":
            rep = full_norm(u, dom, _index(u.N, s, p), tol)
        elif kind == "lp":
            rep = lp_norm(u, dom, float(p), tol)
        elif kind == "grad":
            rep = grad_lp_norm(u, dom, float(p), tol)
        elif kind == "gagliardo":
            rep = gagliardo_seminorm(u, dom, float(s), float(p), tol)
        elif kind == "holder":
            rep = holder_seminorm(u, dom, float(s), tol)
        else:
            rep = bmo_norm(u, dom, tol=tol)
    except NotImplementedError as exc:
        raise CliError(EXIT_UNSUPPORTED, str(exc)) from None
    doc = {"function": u.label, "norm": kind,
           "index": {"N": u.N, "s": s, "p": p}, "domain": args.domain, **rep.as_dict()}
    _emit(dumps(doc))
    return EXIT_TOLERANCE if rep.warning else EXIT_OK


def cmd_scaling(args, cfg: CliConfig) -> int:
    u = _function(args)
    idx = _index(u.N, args.s, args.p)
    eps = args.eps or (1.0, 0.5, 0.25, 0.125)
    if args.variant == "bounded-translate":
        dom = _concrete_domain(args.domain or ("box:" + ",".join(["-1"] * u.N) + ":"
                                               + ",".join(["1"] * u.N)), u.N)
        rep = verify_bounded_scaling_bounds(u, idx, args.gamma, eps, dom, cfg.tolerances)
    else:
        rep = verify_scaling_identity(u, idx, ScalingSpec(args.gamma, args.beta, 1.0), eps,
                                      cfg.tolerances)
    _emit(dumps(rep.as_dict()))
    return _report_exit([rep])


def cmd_counterexample(args, cfg: CliConfig) -> int:
    src = _index(args.dim, *args.source)
    tgt = _index(args.dim, *args.target)
    try:
        rep = counterexample_run(src, tgt, args.domain, args.eps or cfg.epsilons, cfg.tolerances)
    except EmbeddingHolds as exc:
        raise CliError(EXIT_UNSUPPORTED, f"no counterexample: {exc}") from None
    _emit(dumps(rep.as_dict()))
    return _report_exit([rep])


def cmd_interpolate(args, cfg: CliConfig) -> int:
    (s1, p1), (s2, p2) = args.first, args.second
    thetas = args.theta or (0.0, 0.25, 0.5, 0.75, 1.0)
    if args.fn == "all":
        corpus = _corpus(args)
        rep = interpolation_over_corpus(corpus, s1, p1, s2, p2, thetas, cfg.tolerances)
    else:
        u = _function(args)
        rep = verify_interpolation(u, s1, p1, s2, p2, thetas, None, cfg.tolerances)
    _emit(dumps(rep.as_dict()))
    return _report_exit([rep])


# Acceptance batch ------------------------------------------------------------------------

ACCEPTANCE_SOURCES = (SobolevIndex(2, Fraction(1, 2), 2), SobolevIndex(1, Fraction(1, 2), 2),
                      SobolevIndex(1, Fraction(9, 10), 2))


def partition_experiment(resolution: int = 100) -> ExperimentReport:
    """Every grid point lies in exactly one of the region and the complement cases."""
    names, violations = [], []
    grid = [Fraction(i, resolution - 1) for i in range(resolution)] if resolution > 1 else [Fraction(0)]
    for src in ACCEPTANCE_SOURCES:
        for kind in (DomainKind.WHOLE_SPACE, DomainKind.BOUNDED):
            bad = 0
            for r in grid:
                p = INF if r == 0 else 1 / r
                for s in grid:
                    inside, comps = partition_counts(src, SobolevIndex(src.N, s, p), kind)
                    bad += (int(inside) + len(comps)) != 1
            names.append(f"N={src.N},s={src.s},p={src.p},{kind.value}")
            violations.append(bad)
    return ExperimentReport(kind="partition", inputs={"resolution": resolution},
                            parameter="case", schedule=names, measured=violations,
                            predicted=[0] * len(names), passed=not any(violations))


def acceptance_batch(cfg: CliConfig):
    """``(name, thunk)`` pairs in a fixed order."""
    tol = cfg.tolerances
    half = Fraction(1, 2)
    idx = SobolevIndex(1, half, 2)
    jobs = [("partition", lambda: partition_experiment(cfg.resolution))]
    lemma_pairs = {f"lemma-2.{k}": lemma_scaling(k, 1, 0.5, 2.0) for k in (3, 4, 5, 6)}
    for fname, maker in (("tent", lambda: make_tent(1.0)), ("bump", lambda: make_bump(1, 1.0))):
        for lemma, (g, b) in lemma_pairs.items():
            jobs.append((f"scaling-{fname}-{lemma}",
                         lambda m=maker, g=g, b=b: verify_scaling_identity(
                             m(), idx, ScalingSpec(g, b, 1.0), (1.0, 0.5, 0.25, 0.125), tol)))
    jobs.append(("bounded-sandwich-bump",
                 lambda: verify_bounded_scaling_bounds(make_bump(1, 0.5), idx, 0.0,
                                                       (1.0, 0.5, 0.25), Box([-1.0], [1.0]), tol)))
    instances = [("counterexample-critical-p6", (1, half, 2), (half, 6), DomainKind.WHOLE_SPACE),
                 ("counterexample-lower-p", (1, half, 2), (half, 1), DomainKind.WHOLE_SPACE),
                 ("counterexample-critical-p4", (1, half, 2), (half, 4), DomainKind.WHOLE_SPACE),
                 ("counterexample-supercritical", (1, Fraction(9, 10), 2), (Fraction(9, 10), 4),
                  DomainKind.WHOLE_SPACE),
                 ("counterexample-bounded-p6", (1, half, 2), (half, 6), DomainKind.BOUNDED)]
    for name, src, tgt, kind in instances:
        jobs.append((name, lambda src=src, tgt=tgt, kind=kind: counterexample_run(
            SobolevIndex(*src), SobolevIndex(src[0], *tgt), kind, cfg.epsilons, tol)))
    jobs.append(("bbm-bump", lambda: bbm_limit_sweep(make_bump(1, 1.0), 2.0, tolerances=tol)))
    corpus = build_corpus()
    jobs.append(("interpolation-corpus", lambda: interpolation_over_corpus(
        corpus, 0, 2, Fraction(4, 5), 2, (0, 0.25, 0.5, 0.75, 1), tol)))
    jobs.append(("embedding-constant-box", lambda: estimate_embedding_constant(
        SobolevIndex(1, half, 2), SobolevIndex(1, Fraction(1, 4), 2), Box([-2.0], [2.0]),
        corpus, (1.0, 0.5, 0.25), tol)))
    jobs.append(("embedding-constant-line", lambda: estimate_embedding_constant(
        SobolevIndex(1, half, 2), SobolevIndex(1, Fraction(1, 4), 2), DomainKind.WHOLE_SPACE,
        corpus, cfg.epsilons, tol)))
    jobs.append(("bmo-chain", lambda: bmo_chain(corpus, half, 2, tol)))
    return jobs


def _summary_row(name: str, rep: ExperimentReport):
    params = " ".join(f"{k}={v}" for k, v in sorted(_flat_inputs(rep.inputs).items()))
    predicted = rep.details.get("predicted_exponent", "")
    fitted = rep.fitted_exponent if rep.fitted_exponent is not None else ""
    constant = rep.constant if rep.constant is not None else ""
    return [name, rep.kind, params, predicted, fitted, constant,
            "true" if rep.passed else "false", "true" if rep.tolerance_unmet else "false"]


def _flat_inputs(inputs: dict, prefix: str = "") -> dict:
    out = {}
    for key, val in inputs.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flat_inputs(val, name + "."))
        elif isinstance(val, (list, tuple)):
            out[name] = ";".join(str(v) for v in val)
        else:
            out[name] = str(val)
    return out


def cmd_report(args, cfg: CliConfig) -> int:
    out = Path(args.out or cfg.output_dir)
    try:
        (out / "experiments").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot create {out}: {exc}") from None
    rows, reports = [], []
    for k, (name, job) in enumerate(acceptance_batch(cfg)):
        rep = job()
        reports.append(rep)
        rows.append(_summary_row(name, rep))
        if "json" in cfg.formats:
            (out / "experiments" / f"{k:02d}-{name}.json").write_text(dumps(rep.as_dict()))
        if not args.quiet:
            sys.stderr.write(f"{'PASS' if rep.passed else 'FAIL'} {name}\n")
    if "csv" in cfg.formats:
        header = ["name", "kind", "params", "predicted", "fitted", "constant", "pass",
                  "tolerance_unmet"]
        (out / "summary.csv").write_text(csv_text(header, rows))
    _emit(f"{out / 'summary.csv'}\n")
    return _report_exit(reports)


# Entry point ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soblab", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help="flat key=value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    def pair_args(p, names):
        p.add_argument("--dim", type=int, required=True)
        for name in names:
            p.add_argument(f"--{name}", type=_pair, required=True, metavar="S,P")

    p = sub.add_parser("classify", help="classify an embedding")
    pair_args(p, ("source", "target"))
    p.add_argument("--domain", type=_domain_kind, required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("region", help="write the verdict grid as CSV and SVG")
    pair_args(p, ("source",))
    p.add_argument("--domain", type=_domain_kind, required=True)
    p.add_argument("--mode", choices=("continuous", "compact"), default="continuous")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("norm", help="evaluate a norm of a corpus function")
    p.add_argument("--fn", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--s", type=_number, default=Fraction(0))
    p.add_argument("--p", type=_number, default=Fraction(2))
    p.add_argument("--kind", choices=_NORMS, default="full")
    p.add_argument("--domain", default="rn")
    p.add_argument("--tol", type=float)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("scaling", help="check the scaling law of a corpus function")
    p.add_argument("--fn", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--s", type=_number, required=True)
    p.add_argument("--p", type=_number, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--beta", type=float, default=-1.0)
    p.add_argument("--variant", choices=("whole-space", "bounded-translate"), default="whole-space")
    p.add_argument("--domain")
    p.add_argument("--eps", type=_floats)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("counterexample", help="fit the blow-up rate of a failing embedding")
    pair_args(p, ("source", "target"))
    p.add_argument("--domain", type=_domain_kind, required=True)
    p.add_argument("--eps", type=_floats)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("interpolate", help="interpolation ratios along theta")
    p.add_argument("--fn", required=True, help="corpus label, or 'all'")
    p.add_argument("--dim", type=int)
    p.add_argument("--first", type=_pair, required=True, metavar="S1,P1")
    p.add_argument("--second", type=_pair, required=True, metavar="S2,P2")
    p.add_argument("--theta", type=_floats)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("report", help="run the acceptance batch")
    p.add_argument("--out")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = read_config(args.config) if args.config else CliConfig()
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"config: {exc}\n")
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except CliError as exc:
        sys.stderr.write(f"{exc}\n")
        return exc.code
    except UnknownLabel as exc:
        sys.stderr.write(f"unknown corpus label {exc.args[0]!r}\n")
        return EXIT_LABEL
    except NotImplementedError as exc:
        sys.stderr.write(f"unsupported: {exc}\n")
        return EXIT_UNSUPPORTED
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
