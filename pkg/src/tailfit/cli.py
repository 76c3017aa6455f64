"""
Command line front end.

    tailfit eval tpa --a2 90 --w 0.83 --dmin 2 --degrees 2..1000 -o tpa.csv
    tailfit renorm whois.txt --dmin 2 -o whois_d2.csv
    tailfit fit tpa whois.txt --dmin 2 -o tpa_fit.txt
    tailfit sample pled --b 1.63 --c 350 --n 1000000 --seed 7 -o sample.txt
    tailfit compare whois.txt --dmin 2 -o compare.txt

Exit codes: 0 ok, 2 invalid input or unmet precondition, 3 I/O failure,
4 parse error, 5 search failure.
"""

from __future__ import annotations

import argparse
import shlex
import sys

import numpy as np

from . import __version__
from .distributions import PledParams, TpaParams, tabulate
from .empirical import parse_histogram, read_table, truncate_renormalize
from .errors import (
    DomainError,
    EmptySupportError,
    InsufficientDataError,
    InvalidParameterError,
    ParseError,
    SearchFailureError,
)
from .fitting import (
    MIN_FIT_DEGREES,
    FitConfig,
    fit_pled,
    fit_tpa,
    log_ccdf_residuals,
    r_squared,
)
from .report import (
    file_digest,
    render_manifest,
    render_sections,
    render_table,
    write_atomic,
)
from .sampler import RNG_ALGORITHM, SampleSpec, sample

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_SEARCH = 5

_DEFAULT_DMIN = {"tpa": 1, "pled": 2}


class _UsageError(Exception):
    pass


def parse_degrees(text: str) -> list[int]:
    """Parse ``"a..b"`` inclusive ranges and comma lists, e.g. ``1..3,10``."""
    out = set()
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise InvalidParameterError(f"empty item in degree list {text!r}")
        lo, sep, hi = item.partition("..")
        try:
            if sep:
                lo_i, hi_i = int(lo), int(hi)
                if lo_i > hi_i:
                    raise InvalidParameterError(f"empty degree range {item!r}")
                out.update(range(lo_i, hi_i + 1))
            else:
                out.add(int(item))
        except ValueError:
            raise InvalidParameterError(f"bad degree item {item!r}") from None
    return sorted(out)


def _pair(cast):
    def parse(text):
        parts = text.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
        try:
            return cast(parts[0]), cast(parts[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None

    return parse


def _token(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _add_model_params(p):
    p.add_argument("--a2", type=int, help="TPA tail threshold")
    p.add_argument("--w", type=float, help="TPA tempering parameter")
    p.add_argument("--a1", type=int, help="TPA A1, recorded as metadata only")
    p.add_argument("--b", type=float, help="PLED power-law exponent")
    p.add_argument("--c", type=float, help="PLED exponential decay scale")
    p.add_argument("--dmin", type=int, help="smallest degree in the support")


def _add_config(p):
    d = FitConfig()
    p.add_argument("--a2-range", type=_pair(int), default=d.a2_range, metavar="LO,HI")
    p.add_argument("--w-range", type=_pair(float), default=d.w_range, metavar="LO,HI")
    p.add_argument("--b-range", type=_pair(float), default=d.b_range, metavar="LO,HI")
    p.add_argument("--c-range", type=_pair(float), default=d.c_range, metavar="LO,HI")
    p.add_argument("--grid-density", type=int, default=d.grid_density)
    p.add_argument("--refine-iterations", type=int, default=d.refine_iterations)
    p.add_argument("--refine-shrink", type=float, default=d.refine_shrink)
    p.add_argument("--r-space", choices=("log", "linear"), default=d.r_space)


def _output(p):
    p.add_argument("-o", "--output", default="-", help="output path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailfit",
        description="Evaluate and fit TPA and PLED degree distributions.",
    )
    parser.add_argument("--version", action="version", version=f"tailfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="tabulate pmf and ccdf of a model")
    p.add_argument("model", choices=("tpa", "pled"))
    _add_model_params(p)
    p.add_argument("--degrees", required=True, help="e.g. 1..100 or 1,2,5,10..20")
    _output(p)

    p = sub.add_parser("renorm", help="truncate a histogram below dmin and renormalize")
    p.add_argument("input")
    p.add_argument("--dmin", type=int, default=2)
    _output(p)

    p = sub.add_parser("fit", help="fit a model to an empirical ccdf")
    p.add_argument("model", choices=("tpa", "pled"))
    p.add_argument("input")
    p.add_argument("--dmin", type=int, default=2)
    _add_config(p)
    _output(p)

    p = sub.add_parser("sample", help="draw a synthetic degree histogram")
    p.add_argument("model", choices=("tpa", "pled"))
    _add_model_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _output(p)

    p = sub.add_parser("compare", help="fit TPA and PLED to the same data")
    p.add_argument("input")
    p.add_argument("--dmin", type=int, default=2)
    _add_config(p)
    p.add_argument("--tpa-a2", type=int, help="score TPA at this a2 instead of fitting")
    p.add_argument("--tpa-w", type=float)
    p.add_argument("--pled-b", type=float, help="score PLED at this b instead of fitting")
    p.add_argument("--pled-c", type=float)
    _output(p)
    return parser


def _model_params(args):
    dmin = args.dmin if args.dmin is not None else _DEFAULT_DMIN[args.model]
    if args.model == "tpa":
        if args.a2 is None or args.w is None:
            raise _UsageError("tpa needs --a2 and --w")
        params = TpaParams(args.a2, args.w, dmin, args.a1)
        items = [("model", "tpa"), ("a2", params.a2), ("w", params.w), ("dmin", dmin)]
        argv = ["tpa", f"--a2={_token(params.a2)}", f"--w={_token(params.w)}"]
        if params.a1_meta is not None:
            items.append(("a1", params.a1_meta))
            argv += [f"--a1={_token(params.a1_meta)}"]
    else:
        if args.b is None or args.c is None:
            raise _UsageError("pled needs --b and --c")
        params = PledParams(args.b, args.c, dmin)
        items = [("model", "pled"), ("b", params.b), ("c", params.c), ("dmin", dmin)]
        argv = ["pled", f"--b={_token(params.b)}", f"--c={_token(params.c)}"]
    argv += [f"--dmin={dmin}"]
    return params, items, argv


def _config(args):
    config = FitConfig(
        a2_range=args.a2_range,
        w_range=args.w_range,
        b_range=args.b_range,
        c_range=args.c_range,
        grid_density=args.grid_density,
        refine_iterations=args.refine_iterations,
        refine_shrink=args.refine_shrink,
        r_space=args.r_space,
    )
    argv = [
        f"--a2-range={config.a2_range[0]},{config.a2_range[1]}",
        f"--w-range={config.w_range[0]!r},{config.w_range[1]!r}",
        f"--b-range={config.b_range[0]!r},{config.b_range[1]!r}",
        f"--c-range={config.c_range[0]!r},{config.c_range[1]!r}",
        f"--grid-density={config.grid_density}",
        f"--refine-iterations={config.refine_iterations}",
        f"--refine-shrink={config.refine_shrink!r}",
        f"--r-space={config.r_space}",
    ]
    return config, [("config", config.digest())], argv


def _read_input(path):
    with open(path, "rb") as fh:
        data = fh.read()
    text = data.decode("utf-8")
    return text, file_digest(data)


def _load(path, dmin):
    """Empirical distribution at ``dmin`` from a histogram or a degree,pmf,ccdf table."""
    text, digest = _read_input(path)
    first = next(
        (ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")),
        "",
    )
    if first.replace(" ", "") == "degree,pmf,ccdf":
        table = read_table(text, source_label=path)
        if dmin < table.d_min:
            raise InvalidParameterError(
                f"table starts at degree {table.d_min}; cannot renormalize to dmin={dmin}"
            )
        dist = truncate_renormalize(table, dmin)
        kind = "table"
    else:
        dist = truncate_renormalize(parse_histogram(text, source_label=path), dmin)
        kind = "histogram"
    items = [("input", path), ("input_kind", kind), ("input_digest", digest), ("dmin", dmin)]
    return dist, items


def _emit(args, manifest, argv, body_lines):
    lines = [f"# tailfit {__version__}", f"# command = {args.command}"]
    lines += render_manifest(manifest)
    lines.append("# argv = " + shlex.join([args.command] + argv))
    text = "\n".join(lines + body_lines) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        write_atomic(args.output, text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_eval(args):
    params, items, argv = _model_params(args)
    degrees = parse_degrees(args.degrees)
    ev = tabulate(params, np.array(degrees, dtype=np.int64))
    rows = [(int(d), float(p), float(c)) for d, p, c in zip(ev.degrees, ev.pmf, ev.ccdf)]
    canon = args.degrees.replace(" ", "")
    items.append(("degrees", canon))
    argv += [f"--degrees={canon}"]
    _emit(args, items, argv, render_table(("degree", "pmf", "ccdf"), rows))


def cmd_renorm(args):
    dist, items = _load(args.input, args.dmin)
    items += [("eta", float(dist.eta))]
    if dist.n_total is not None:
        items += [("n_total", dist.n_total), ("n_kept", dist.n_kept)]
    rows = [(int(d), float(p), float(c)) for d, p, c in zip(dist.degrees, dist.pmf, dist.ccdf)]
    argv = [args.input, f"--dmin={args.dmin}"]
    _emit(args, items, argv, render_table(("degree", "pmf", "ccdf"), rows))


def _params_section(report_or_params):
    params = report_or_params
    if isinstance(params, TpaParams):
        return [("model", "TPA"), ("a2", params.a2), ("w", params.w),
                ("q", params.q), ("gamma", params.gamma), ("d_min", params.d_min)]
    return [("model", "PLED"), ("b", params.b), ("c", params.c), ("d_min", params.d_min)]


def _fit_section(rep, source="fitted"):
    return _params_section(rep.params) + [
        ("source", source),
        ("r", rep.r),
        ("r_squared", rep.r_squared),
        ("sse_log_ccdf", rep.sse_log_ccdf),
        ("n_residuals", len(rep.residuals)),
    ]


def _check_fit_input(dist):
    if len(dist.degrees) < MIN_FIT_DEGREES:
        raise InsufficientDataError(
            f"need at least {MIN_FIT_DEGREES} distinct degrees >= dmin, got {len(dist.degrees)}"
        )


def cmd_fit(args):
    dist, items = _load(args.input, args.dmin)
    _check_fit_input(dist)
    config, cfg_items, cfg_argv = _config(args)
    rep = (fit_tpa if args.model == "tpa" else fit_pled)(dist, config)
    sections = [
        ("fit", _fit_section(rep)),
        ("residuals", (("degree", "log10_empirical_ccdf", "log10_model_ccdf"), rep.residuals)),
    ]
    argv = [args.model, args.input, f"--dmin={args.dmin}"] + cfg_argv
    _emit(args, [("model", args.model)] + items + cfg_items, argv, render_sections(sections))


class _Scored:
    """A FitReport-like record for parameters supplied on the command line."""

    def __init__(self, params, dist, space):
        self.params = params
        self.residuals = log_ccdf_residuals(params, dist)
        diff = np.array([m - e for _, e, m in self.residuals])
        self.sse_log_ccdf = float(np.dot(diff, diff))
        self.r, self.r_squared = r_squared(params, dist, space)


def cmd_compare(args):
    dist, items = _load(args.input, args.dmin)
    _check_fit_input(dist)
    config, cfg_items, cfg_argv = _config(args)
    argv = [args.input, f"--dmin={args.dmin}"] + cfg_argv

    if (args.tpa_a2 is None) != (args.tpa_w is None):
        raise _UsageError("--tpa-a2 and --tpa-w must be given together")
    if (args.pled_b is None) != (args.pled_c is None):
        raise _UsageError("--pled-b and --pled-c must be given together")
    if args.tpa_a2 is not None:
        tpa = _Scored(TpaParams(args.tpa_a2, args.tpa_w, args.dmin), dist, config.r_space)
        tpa_source = "fixed"
        argv += [f"--tpa-a2={_token(args.tpa_a2)}", f"--tpa-w={_token(tpa.params.w)}"]
    else:
        tpa, tpa_source = fit_tpa(dist, config), "fitted"
    if args.pled_b is not None:
        pled = _Scored(PledParams(args.pled_b, args.pled_c, args.dmin), dist, config.r_space)
        pled_source = "fixed"
        argv += [f"--pled-b={_token(pled.params.b)}", f"--pled-c={_token(pled.params.c)}"]
    else:
        pled, pled_source = fit_pled(dist, config), "fitted"

    pled_model = {d: m for d, _, m in pled.residuals}
    rows = [(d, e, m, pled_model[d]) for d, e, m in tpa.residuals if d in pled_model]
    better = "TPA" if tpa.r_squared >= pled.r_squared else "PLED"
    sections = [
        ("tpa", _fit_section(tpa, tpa_source)),
        ("pled", _fit_section(pled, pled_source)),
        ("comparison", [
            ("r_squared_tpa", tpa.r_squared),
            ("r_squared_pled", pled.r_squared),
            ("sse_difference", tpa.sse_log_ccdf - pled.sse_log_ccdf),
            ("better_r_squared", better),
        ]),
        ("residuals", (
            ("degree", "log10_empirical_ccdf", "log10_tpa_ccdf", "log10_pled_ccdf"),
            rows,
        )),
    ]
    _emit(args, items + cfg_items, argv, render_sections(sections))


def cmd_sample(args):
    params, items, argv = _model_params(args)
    spec = SampleSpec(params, args.n, args.seed)
    hist = sample(spec)
    items += [("n", spec.n), ("seed", spec.seed), ("rng", RNG_ALGORITHM)]
    argv += [f"--n={spec.n}", f"--seed={spec.seed}"]
    body = [f"{d} {c}" for d, c in hist.entries]
    _emit(args, items, argv, body)


_COMMANDS = {
    "eval": cmd_eval,
    "renorm": cmd_renorm,
    "fit": cmd_fit,
    "sample": cmd_sample,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args)
    except (ParseError, UnicodeDecodeError) as exc:
        print(f"tailfit: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SearchFailureError as exc:
        print(f"tailfit: search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except (
        _UsageError,
        InvalidParameterError,
        DomainError,
        EmptySupportError,
        InsufficientDataError,
    ) as exc:
        print(f"tailfit: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"tailfit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
