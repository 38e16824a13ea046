"""Command-line entry point: verb dispatch onto the check registry, config
loading, report emission, and summary figures."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .report import (
    CHECKS,
    RunConfig,
    emit_report,
    load_config,
    render_figures,
    run_suite,
)

CONFIG_ENV = "DEPTHPROJ_CONFIG"

VERB_PARTS = {
    "verify": {"stab": "verify.stab", "euler": "verify.euler",
               "convex": "verify.convex"},
    "mp": {"spec": "mp.spec", "region": "mp.region", "jumps": "mp.jumps"},
    "sl2": {"convolve": "sl2.convolve", "projector": "sl2.projector",
            "rlog-check": "sl2.rlog-check",
            "indicator-check": "sl2.indicator-check"},
}

VERB_CHECKS = {
    "apartment": ["apartment.partition", "apartment.upsilon"],
    "fourier": ["fourier.identities"],
    "steinberg": ["steinberg.finite"],
    "suite": sorted(CHECKS),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="depthproj",
        description="Verification workbench for the depth-r projector "
                    "identities on the Bruhat-Tits apartment.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--check", action="append", default=None,
                        help="restrict to a check id (repeatable)")
    common.add_argument("--strict", action="store_true",
                        help="treat skipped checks as failures")
    common.add_argument("--out", help="report output path")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("apartment", "fourier", "steinberg", "suite"):
        sub.add_parser(verb, parents=[common])
    for verb, parts in VERB_PARTS.items():
        sp = sub.add_parser(verb, parents=[common])
        sp.add_argument("part", nargs="?", choices=sorted(parts),
                        help="sub-check (default: all for this verb)")
    return parser


def _load(args):
    path = args.config or os.environ.get(CONFIG_ENV)
    if path is None:
        return RunConfig()
    with open(path) as fh:
        return load_config(json.load(fh))


def _selected(args):
    if args.verb in VERB_CHECKS:
        wanted = list(VERB_CHECKS[args.verb])
    else:
        parts = VERB_PARTS[args.verb]
        part = getattr(args, "part", None)
        wanted = [parts[part]] if part else sorted(parts.values())
    if args.check:
        unknown = [c for c in args.check if c not in CHECKS]
        if unknown:
            raise ValueError("unknown check id: %r" % unknown[0])
        wanted = [c for c in wanted if c in args.check]
    return wanted


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _load(args)
        selected = _selected(args)
        reports = run_suite(config, selected)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    text = emit_report(reports, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        base = os.path.splitext(args.out)[0]
        for path in render_figures(reports, base):
            print("figure: %s" % path, file=sys.stderr)
    else:
        sys.stdout.write(text)
    bad = {"fail", "skip"} if args.strict else {"fail"}
    return 1 if any(r.verdict in bad for r in reports) else 0


if __name__ == "__main__":
    sys.exit(main())
