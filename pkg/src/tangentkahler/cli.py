"""``verify``: run the verification experiments and emit text, JSON or CSV reports.

Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 inconclusive (and nothing
failed), 64 usage error, 65 invalid parameters, 74 I/O error.

Configuration precedence is command-line flags, then the ``--config`` JSON file, then
built-in defaults.  ``TANGENTKAHLER_SEED`` sets the default seed.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
from dataclasses import dataclass

from . import __version__
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, ExperimentReport
from .spaceform import DomainError

SCHEMA_VERSION = 1
SEED_ENV = "TANGENTKAHLER_SEED"

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_DATAERR, EXIT_IOERR = 64, 65, 74

# flag destination -> ExperimentConfig field
FLAG_FIELDS = {
    "K": "K",
    "m": "m",
    "c1": "c1",
    "c2": "c2",
    "seed": "seed",
    "samples": "sample_count",
    "perturb": "perturb",
    "radius_cap": "radius_cap",
    "loops": "loop_count",
    "loop_eps": "loop_eps",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: dict
    version: str
    timestamp: str | None = None

    def to_dict(self) -> dict:
        return {"command": self.command, "config": self.config, "version": self.version,
                "timestamp": self.timestamp}

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(d["command"], d["config"], d["version"], d.get("timestamp"))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--K", type=float, help="base curvature (default -1)")
    common.add_argument("--m", type=int, help="base dimension (default 2)")
    common.add_argument("--c1", type=float, help="integrability constant c1 > 0 (default 1)")
    common.add_argument("--c2", type=float, help="symplectic scale c2 > 0 (default 1)")
    common.add_argument("--seed", type=int, help=f"RNG seed (default ${SEED_ENV} or 0)")
    common.add_argument("--samples", type=int, help="sample points per check (default 200)")
    common.add_argument("--perturb", type=float,
                        help="slope factor p in a^2 = c1 + p K r^2 for the integrability subject (default 1)")
    common.add_argument("--radius-cap", dest="radius_cap", type=float,
                        help="largest sampled fibre radius as a fraction of r0 (default 0.95)")
    common.add_argument("--loops", type=int, help="holonomy loops (default 200)")
    common.add_argument("--loop-eps", dest="loop_eps", type=float,
                        help="holonomy loop side (default 1e-3; also run at half)")
    common.add_argument("--config", help="JSON file with ExperimentConfig fields")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--no-timestamp", dest="no_timestamp", action="store_true",
                        help="omit timestamp and runtimes (byte-reproducible output)")

    parser = _Parser(prog="verify", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, fn in EXPERIMENTS.items():
        doc = (fn.__doc__ or name).strip().splitlines()[0]
        sub.add_parser(name, parents=[common], help=doc)
    sub.add_parser("all", parents=[common], help="run every experiment")
    return parser


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path!r} must hold a JSON object")
    return data


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {"seed": _default_seed()}
    if args.config:
        values.update(_load_config_file(args.config))
    for flag, fieldname in FLAG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[fieldname] = v
    try:
        return ExperimentConfig.from_dict(values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def overall_verdict(reports: list[ExperimentReport]) -> str:
    verdicts = {r.verdict for r in reports}
    if "fail" in verdicts:
        return "fail"
    if "inconclusive" in verdicts:
        return "inconclusive"
    return "pass"


def exit_code(verdict: str) -> int:
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[verdict]


# -- emitters -----------------------------------------------------------------------------


def report_document(manifest: RunManifest, reports, include_runtime: bool = True) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest.to_dict(),
        "verdict": overall_verdict(reports),
        "reports": [r.to_dict(include_runtime) for r in reports],
    }


def emit_json(manifest, reports, include_runtime=True) -> str:
    return json.dumps(report_document(manifest, reports, include_runtime), indent=2,
                      sort_keys=True) + "\n"


def _singular_value_rows(report: ExperimentReport):
    for key, val in sorted(report.details.items()):
        if isinstance(val, dict) and "singular_values" in val:
            for k, s in enumerate(val["singular_values"]):
                yield [report.name, f"singular values ({key})", f"sv[{k}]", repr(float(s)),
                       repr(val["threshold"]), "info", "info"]


def emit_csv(manifest, reports, include_runtime=True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["experiment", "check", "statistic", "value", "tolerance", "expect", "status"])
    for r in reports:
        for c in r.checks:
            for stat in ("max", "mean", "min", "count"):
                w.writerow([r.name, c.name, stat, repr(getattr(c, stat)),
                            "" if c.tolerance is None else repr(c.tolerance), c.expect, c.status])
        for row in _singular_value_rows(r):
            w.writerow(row)
        if include_runtime:
            w.writerow([r.name, "runtime", "seconds", repr(r.runtime), "", "info", "info"])
    return buf.getvalue()


def emit_text(manifest, reports, include_runtime=True) -> str:
    cfg = manifest.config
    lines = [f"verify {manifest.command}  K={cfg['K']:g} m={cfg['m']} c1={cfg['c1']:g} "
             f"c2={cfg['c2']:g} seed={cfg['seed']}"]
    for r in reports:
        head = f"{r.name}: {r.verdict.upper()}"
        if include_runtime:
            head += f" ({r.runtime:.2f} s)"
        lines.append(head)
        for c in r.checks:
            tol = "-" if c.tolerance is None else f"{c.tolerance:.3g}"
            stat = "min" if c.expect == "above" else "max"
            val = c.min if c.expect == "above" else c.max
            cmp = {"below": "<=", "above": ">", "info": "  "}[c.expect]
            lines.append(f"  [{c.status:<12}] {c.name}: {stat} {val:.3e} {cmp} {tol}")
    lines.append(f"overall: {overall_verdict(reports).upper()}")
    return "\n".join(lines) + "\n"


EMITTERS = {"text": emit_text, "json": emit_json, "csv": emit_csv}


def emit_report(manifest, reports, fmt: str, include_runtime: bool = True) -> str:
    return EMITTERS[fmt](manifest, reports, include_runtime)


# -- entry point ----------------------------------------------------------------------------


def dispatch(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return EXIT_USAGE
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"verify: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except OSError as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return EXIT_IOERR

    names = list(EXPERIMENTS) if args.command == "all" else [args.command]
    try:
        reports = [EXPERIMENTS[n](config) for n in names]
    except (DomainError, ValueError) as exc:
        print(f"verify: invalid parameters for {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATAERR

    stamp = None
    if not args.no_timestamp:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    manifest = RunManifest(args.command, config.to_dict(), __version__, stamp)
    text = emit_report(manifest, reports, args.format, include_runtime=not args.no_timestamp)
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"verify: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IOERR
    return exit_code(overall_verdict(reports))


def main(argv=None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
