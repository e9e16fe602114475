"""Command-line entry point: ``deltaspec <command> TARGET [flags]``.

Exit codes: 0 success, 2 input error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import __version__
from .delta import TruthFormatError
from .experiments import EmptyPool, UndefinedScore
from .experiments import report as R
from .minilang import DiagnosticError, unit_text
from .mutation import generate_mutants, mutants_json
from .pipeline import (
    InputError,
    InvariantViolation,
    RunOptions,
    dump_json,
    experiment_inputs,
    load_commit,
    load_source,
    match_truth,
    report_from_json,
    run_pipeline,
    run_rq3,
    run_rq4,
    write_run_outputs,
)
from .testgen import generate_suite

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3

# flag name -> (option field, type)
_KEYS = {
    "seed": int,
    "candidates": int,
    "min_support": int,
    "mode": str,
    "relevance": str,
    "reps": int,
    "out": str,
    "svg": bool,
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("target", help="commit directory (or a .dl file for parse/testgen)")
    common.add_argument("--seed", type=int)
    common.add_argument("--candidates", type=int, help="candidate budget per program point")
    common.add_argument("--min-support", dest="min_support", type=int)
    common.add_argument("--mode", choices=("paper", "strict"))
    common.add_argument("--relevance", choices=("literal", "refined"))
    common.add_argument("--reps", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--svg", action="store_const", const=True, default=None)
    common.add_argument("--config", help="INI file with a [deltaspec] section")

    p = argparse.ArgumentParser(prog="deltaspec", description="Infer and diff specifications across a commit.")
    p.add_argument("--version", action="version", version=f"deltaspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "run": "full pipeline; writes delta, statuses, suites, candidates and manifest",
        "parse": "parse and check a DL file, print its canonical form",
        "testgen": "generate test suites",
        "infer": "classify candidates on both versions",
        "mutants": "list post-version mutants",
        "relevance": "list post-version mutants with commit relevance",
        "kills": "kill matrix of post-VALID assertions against mutants",
        "rq3": "rMS of fixed-size selections from the added and preserved pools",
        "rq4": "assertions drawn until a target rMS is met",
        "match-truth": "compare the delta with truth.delta",
    }
    for name, h in helps.items():
        sub.add_parser(name, parents=[common], help=h)
    return p


def _read_config(path: Path) -> dict:
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not cp.has_section("deltaspec"):
        return {}
    sec = cp["deltaspec"]
    out = {}
    for raw in sec:
        key = raw.replace("-", "_")
        if key not in _KEYS:
            raise InputError(f"{path}: unknown key {raw!r}")
        typ = _KEYS[key]
        try:
            out[key] = sec.getboolean(raw) if typ is bool else typ(sec[raw])
        except ValueError as exc:
            raise InputError(f"{path}: bad value for {raw!r}: {exc}") from exc
    return out


def resolve_settings(args: argparse.Namespace, config_file: Optional[Path]) -> dict:
    """Defaults, overridden by the INI file, overridden by flags."""
    settings = {"out": None, "svg": False}
    if args.config:
        settings.update(_read_config(Path(args.config)))
    elif config_file is not None:
        settings.update(_read_config(config_file))
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = v
    return settings


def _options(settings: dict) -> RunOptions:
    fields = {k: settings[k] for k in ("seed", "candidates", "min_support", "mode", "relevance", "reps")
              if k in settings}
    opts = replace(RunOptions(), **fields)
    if opts.candidates < 1 or opts.reps < 1 or opts.min_support < 0:
        raise InputError("--candidates and --reps must be >= 1, --min-support >= 0")
    if opts.mode not in ("paper", "strict") or opts.relevance not in ("literal", "refined"):
        raise InputError("bad --mode or --relevance value")
    return opts


def _out_dir(settings: dict, name: str) -> Path:
    out = Path(settings["out"]) if settings.get("out") else Path("deltaspec-out") / name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


# --- commands ----------------------------------------------------------------


def cmd_parse(args, settings) -> int:
    path = Path(args.target)
    unit = load_source(path)
    sys.stdout.write(unit_text(unit))
    return EXIT_OK


def cmd_testgen(args, settings) -> int:
    target = Path(args.target)
    opts = _options(settings)
    if target.is_file():
        unit = load_source(target)
        out = _out_dir(settings, unit.name)
        dump_json(out / "suite.json", generate_suite(unit, opts.gen_config()).to_json())
        print(out / "suite.json")
        return EXIT_OK
    commit = load_commit(target)
    out = _out_dir(settings, commit.name)
    for side, f in (("pre", commit.pre_file), ("post", commit.post_file)):
        dump_json(out / f"suite.{side}.json", generate_suite(load_source(f), opts.gen_config()).to_json())
    print(out)
    return EXIT_OK


def _commit_and_settings(args):
    commit = load_commit(args.target)
    settings = resolve_settings(args, commit.config_file)
    return commit, settings, _options(settings)


def cmd_run(args, settings) -> int:
    commit, settings, opts = _commit_and_settings(args)
    res = run_pipeline(commit, opts)
    out = _out_dir(settings, commit.name)
    write_run_outputs(res, out)
    rep = res.report
    print(f"{commit.name}: added {len(rep.added)}, removed {len(rep.removed)}, "
          f"preserved {len(rep.preserved)}, undetermined {len(rep.undetermined)} -> {out}")
    return EXIT_OK


def cmd_infer(args, settings) -> int:
    commit, settings, opts = _commit_and_settings(args)
    res = run_pipeline(commit, opts)
    out = _out_dir(settings, commit.name)
    dump_json(out / "status.pre.json", res.inf_pre.table.to_json())
    dump_json(out / "status.post.json", res.inf_post.table.to_json())
    dump_json(out / "candidates.json", res.candidates.to_json())
    print(out)
    return EXIT_OK


def cmd_mutants(args, settings) -> int:
    commit, settings, opts = _commit_and_settings(args)
    post = load_source(commit.post_file)
    out = _out_dir(settings, commit.name)
    dump_json(out / "mutants.json", mutants_json(generate_mutants(post)))
    print(out / "mutants.json")
    return EXIT_OK


def cmd_relevance(args, settings) -> int:
    commit, settings, opts = _commit_and_settings(args)
    res = run_pipeline(commit, opts)
    inputs = experiment_inputs(res)
    out = _out_dir(settings, commit.name)
    dump_json(out / "mutants.json", mutants_json(inputs.mutants, inputs.relevance))
    print(out / "mutants.json")
    return EXIT_OK


def cmd_kills(args, settings) -> int:
    commit, settings, opts = _commit_and_settings(args)
    res = run_pipeline(commit, opts)
    inputs = experiment_inputs(res)
    out = _out_dir(settings, commit.name)
    _write(out / "kills.csv", inputs.matrix.to_csv())
    dump_json(out / "kills_summary.json", inputs.matrix.summary(inputs.relevance))
    dump_json(out / "mutants.json", mutants_json(inputs.mutants, inputs.relevance))
    print(out / "kills.csv")
    return EXIT_OK


def cmd_rq3(args, settings) -> int:
    commit, settings, opts = _commit_and_settings(args)
    res = run_pipeline(commit, opts)
    cfg, sim = run_rq3(experiment_inputs(res), opts.seed, opts.reps)
    out = _out_dir(settings, commit.name)
    _write(out / "rq3.csv", R.rq3_csv(sim))
    _write(out / "rq3_stats.csv", R.rq3_stats_csv(sim))
    _write(out / "summary.md", R.summary_markdown(commit.name, sim=sim, sizes=cfg.sizes))
    if settings.get("svg"):
        _write(out / "rq3.svg", R.rms_svg(sim, cfg.sizes))
    print(out / "rq3.csv")
    return EXIT_OK


def cmd_rq4(args, settings) -> int:
    commit, settings, opts = _commit_and_settings(args)
    res = run_pipeline(commit, opts)
    cfg, cost = run_rq4(experiment_inputs(res), opts.seed, opts.reps)
    out = _out_dir(settings, commit.name)
    _write(out / "rq4.csv", R.rq4_csv(cost))
    _write(out / "summary.md", R.summary_markdown(commit.name, cost=cost, targets=cfg.target_grid))
    print(out / "rq4.csv")
    return EXIT_OK


def cmd_match_truth(args, settings) -> int:
    commit, settings, opts = _commit_and_settings(args)
    if commit.truth_file is None:
        raise InputError(f"{commit.path}: no truth.delta (missing truth)")
    out = _out_dir(settings, commit.name)
    res = run_pipeline(commit, opts)
    saved = out / "delta.json"
    report = res.report
    if saved.is_file():
        # judge the delta written by an earlier `run` when it came from the same options
        data = json.loads(saved.read_text(encoding="utf-8"))
        if data.get("provenance", {}).get("options") == res.report.provenance["options"]:
            report = report_from_json(data, res.post.name)
    m = match_truth(report, commit, res.scopes, res.post.name)
    dump_json(out / "truth_match.json", m.to_json())
    print(f"{commit.name}: recall {m.recall:.3f} ({m.matched}/{m.expressible} expressible)")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "parse": cmd_parse,
    "testgen": cmd_testgen,
    "infer": cmd_infer,
    "mutants": cmd_mutants,
    "relevance": cmd_relevance,
    "kills": cmd_kills,
    "rq3": cmd_rq3,
    "rq4": cmd_rq4,
    "match-truth": cmd_match_truth,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        settings = resolve_settings(args, None)
        return COMMANDS[args.command](args, settings)
    except (InputError, TruthFormatError) as exc:
        print(f"deltaspec: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DiagnosticError as exc:
        print(f"deltaspec: error: {exc.format(args.target)}", file=sys.stderr)
        return EXIT_INPUT
    except (EmptyPool, UndefinedScore) as exc:
        print(f"deltaspec: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"deltaspec: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
