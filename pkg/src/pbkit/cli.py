"""Command-line front end: ``pbkit aggregate | simulate | report``.

Exit codes: 0 success, 2 invalid input or option combination, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

from pbkit import analysis
from pbkit.ballots import FORMAT_ORDER, InputFormat
from pbkit.model import Category, District, RuleTag, validate_instance
from pbkit.rules import InvalidBallotsError, check_ballots, run_rule
from pbkit import serialize as ser
from pbkit.simulation import PolarisedConfig, gen_multiformat, gen_uniform, sample_polarised

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 2, 3

RULE_NAMES = {
    "greedy": RuleTag.GREEDY,
    "mes": RuleTag.MES,
    "eco-greedy": RuleTag.ECONOMICAL_GREEDY,
    "eco-mes": RuleTag.ECONOMICAL_MES,
}
KINDS = ("sweep", "divergence", "stats", "concentration", "consistency", "explain")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from exc


def _write(path, text: str) -> None:
    try:
        ser.write_atomic(path, text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from exc


def _load_instance(path: str, budget: int | None = None):
    try:
        inst = ser.load_instance(_read(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"{path}: malformed instance: {exc}") from exc
    if budget is not None:
        inst = inst.with_budget(budget)
    problems = validate_instance(inst)
    if problems:
        raise CliError(f"{path}: invalid instance: " + "; ".join(map(str, problems)))
    return inst


def _load_ballots(path: str, instance):
    text = _read(path)
    try:
        fmt, ballots = ser.load_ballots(text)
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise CliError(f"{path}: malformed ballot file: {exc}") from exc
    if not ballots:
        raise CliError(f"{path}: no ballots")
    try:
        check_ballots(ballots, instance)
    except InvalidBallotsError as exc:
        lines = []
        for i, voter, violations in exc.problems:
            line = ser.ballot_line(text, i)
            where = f"{path}:{line}" if line else f"{path}: ballot #{i}"
            lines.append(f"{where}: voter {voter}: " + "; ".join(map(str, violations)))
        raise CliError("\n".join(lines)) from exc
    return fmt, ballots


def _rule(name: str) -> RuleTag:
    if name in RULE_NAMES:
        return RULE_NAMES[name]
    try:
        return RuleTag(name)
    except ValueError:
        raise CliError(f"unknown rule {name!r}; choose from {', '.join(RULE_NAMES)}") from None


def _rules(spec: str) -> list[RuleTag]:
    return [_rule(r.strip()) for r in spec.split(",") if r.strip()]


def _budgets(spec: str) -> list[int]:
    try:
        values = [int(b) for b in spec.split(",") if b.strip()]
    except ValueError:
        raise CliError(f"budgets must be integers: {spec!r}") from None
    if not values or any(b <= 0 for b in values):
        raise CliError("budgets must be positive")
    return sorted(values)


def _finish(report: dict, manifest: dict) -> str:
    return ser.dump_report({"manifest": manifest, **report})


# -- aggregate ---------------------------------------------------------------

def cmd_aggregate(args) -> int:
    inst = _load_instance(args.instance, args.budget)
    _, ballots = _load_ballots(args.ballots, inst)
    rule = _rule(args.rule)
    outcome = run_rule(inst, ballots, rule, step=args.step, validate=False)
    params = {"rule": rule.value, "budget": inst.budget, "step": args.step}
    report = ser.outcome_to_dict(outcome)
    _write(ser.resolve_out(args.out), _finish(report, ser.manifest("aggregate", [args.instance, args.ballots], parameters=params)))
    return EXIT_OK


# -- simulate ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    inst = _load_instance(args.instance)
    if args.agents is not None and args.agents < 1:
        raise CliError("--agents must be positive")
    out = ser.resolve_out(args.out)
    params: dict = {"model": args.model}
    inputs = [args.instance]
    profiles = None

    if args.model == "uniform":
        n = args.agents or 200
        try:
            ballots = gen_uniform(inst, n, args.seed)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
        params["agents"] = n
        files = {out: ser.dump_ballots(ballots)}
    elif args.model == "polarised":
        cfg = {}
        if args.config:
            inputs.append(args.config)
            try:
                cfg = json.loads(_read(args.config))
                allowed = {f.name for f in fields(PolarisedConfig)}
                if set(cfg) - allowed:
                    raise ValueError(f"unknown keys {sorted(set(cfg) - allowed)}")
            except ValueError as exc:
                raise CliError(f"{args.config}: {exc}") from exc
        cfg["seed"] = args.seed
        if args.agents is not None:
            cfg["num_agents"] = args.agents
        try:
            config = PolarisedConfig(**cfg)
            ballots, profiles = sample_polarised(inst, config)
        except (ValueError, TypeError) as exc:
            raise CliError(f"invalid polarised config: {exc}") from exc
        params.update(asdict(config))
        files = {out: ser.dump_ballots(ballots)}
    else:
        n = args.agents or 180
        try:
            by_format, profiles = gen_multiformat(inst, n, args.seed, sn_extra_prob=args.sn_extra)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
        params.update(agents=n, sn_extra_prob=args.sn_extra)
        files = {out / f"{f.value}.json": ser.dump_ballots(by_format[f], f) for f in FORMAT_ORDER}

    if profiles is not None and args.profiles_out:
        files[ser.resolve_out(args.profiles_out)] = ser.dump_profiles(profiles)
    for path, text in files.items():
        _write(path, text)
    man = ser.manifest("simulate", inputs, seed=args.seed, parameters=params)
    man["outputs"] = [str(p) for p in files]
    _write(out.with_name(out.name + ".manifest.json"), ser.dump_report(man))
    return EXIT_OK


# -- report ------------------------------------------------------------------

def _frac_map(d) -> dict:
    return {str(getattr(k, "value", k)): ser.rational(v) for k, v in d.items()}


def _report_sweep(args, inst, by_format):
    rules = _rules(args.rules) if args.rules else list(RuleTag)
    budgets = _budgets(args.budgets) if args.budgets else list(analysis.DISPLAY_BUDGETS)
    sweep = analysis.budget_sweep(inst, by_format, rules, budgets, workers=args.workers, step=args.step)
    report = {
        "kind": "sweep",
        "budgets": list(sweep.budgets),
        "rows": [
            {"rule": r.value, "format": f.value, "winners": {str(b): list(w) for b, w in cells.items()}}
            for (r, f), cells in sweep.cells.items()
        ],
    }
    ids = inst.ids
    csv_rows = [
        [r.value, f.value, b] + [int(p in w) for p in ids]
        for (r, f), cells in sweep.cells.items()
        for b, w in cells.items()
    ]
    if len(by_format) >= 2:
        hb = _budgets(args.hamming_budgets) if args.hamming_budgets else list(analysis.HAMMING_BUDGETS)
        hsweep = analysis.budget_sweep(inst, by_format, rules, hb, workers=args.workers, step=args.step)
        ham = {}
        for r in rules:
            pairs = analysis.pairwise_hamming(hsweep, r)
            avg = analysis.avg_pairwise_hamming(hsweep, r)
            ham[r.value] = {
                "average": ser.rational(avg),
                "average_display": float(avg),
                "pairs": [
                    {"formats": [f.value, g.value], "mean": ser.rational(v), "mean_display": float(v)}
                    for (f, g), v in pairs.items()
                ],
            }
        report["hamming"] = {"budgets": hb, "rules": ham}
    return report, {"sweep.csv": ser.to_csv(["rule", "format", "budget"] + [str(p) for p in ids], csv_rows)}


def _report_divergence(args, inst, by_format):
    if len(by_format) < 2:
        raise CliError("divergence needs ballots in at least two formats")
    dists = {f: analysis.point_distribution(b, inst) for f, b in by_format.items()}
    matrix = analysis.divergence_matrix(dists)
    fmts = list(dists)
    report = {
        "kind": "divergence",
        "log_base": 2,
        "formats": [f.value for f in fmts],
        "distributions": {f.value: _frac_map(d.shares) for f, d in dists.items()},
        "matrix": [[matrix[f, g] for g in fmts] for f in fmts],
    }
    csvs = {
        "divergence.csv": ser.to_csv(
            ["format"] + [f.value for f in fmts], [[f.value] + [matrix[f, g] for g in fmts] for f in fmts]
        ),
        "distribution.csv": ser.to_csv(
            ["project"] + [f.value for f in fmts],
            [[p] + [float(dists[f].shares[p]) for f in fmts] for p in inst.ids],
        ),
    }
    return report, csvs


def _report_stats(args, inst, by_format):
    stats = {f: analysis.ballot_count_stats(b) for f, b in by_format.items()}
    report = {"kind": "stats", "std_convention": "population", "formats": {f.value: asdict(s) for f, s in stats.items()}}
    header = ["format", "mode", "mode_frequency", "mean", "median", "std", "n"]
    rows = [[f.value, s.mode, s.mode_frequency, s.mean, s.median, s.std, s.n] for f, s in stats.items()]
    return report, {"stats.csv": ser.to_csv(header, rows)}


def _profiles(args):
    if not args.profiles:
        return None
    try:
        return ser.load_profiles(_read(args.profiles))
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"{args.profiles}: malformed profiles: {exc}") from exc


def _report_concentration(args, inst, by_format):
    profiles = _profiles(args)
    if profiles is None:
        raise CliError("concentration needs --profiles")
    results = {}
    try:
        for f, b in by_format.items():
            results[f] = analysis.concentration(b, profiles, inst)
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from exc
    report = {
        "kind": "concentration",
        "std_convention": "population",
        "formats": {
            f.value: {
                "district": asdict(r.district),
                "category": asdict(r.category),
                "per_voter": {v: [ser.rational(d), ser.rational(c)] for v, (d, c) in r.per_voter.items()},
            }
            for f, r in results.items()
        },
    }
    rows = [
        [f.value, v, float(d), float(c)] for f, r in results.items() for v, (d, c) in r.per_voter.items()
    ]
    return report, {"concentration.csv": ser.to_csv(["format", "voter_id", "district_fraction", "category_fraction"], rows)}


def _report_consistency(args, inst, by_format):
    missing = [f.value for f in FORMAT_ORDER if f not in by_format]
    if missing:
        raise CliError(f"consistency needs all six formats; missing {missing}")
    try:
        flags = analysis.consistency_checks(by_format)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    names = [f.name for f in fields(analysis.ConsistencyFlags)]
    n = len(flags)
    report = {
        "kind": "consistency",
        "voters": n,
        "counts": {k: sum(getattr(x, k) for x in flags.values()) for k in names},
        "per_voter": {v: asdict(x) for v, x in flags.items()},
    }
    rows = [[v] + [int(getattr(x, k)) for k in names] for v, x in flags.items()]
    return report, {"consistency.csv": ser.to_csv(["voter_id"] + names, rows)}


def _report_explain(args, inst, by_format):
    if len(by_format) != 1:
        raise CliError("explain takes exactly one ballots file")
    rules = _rules(args.rules) if args.rules else [RuleTag.GREEDY, RuleTag.MES]
    if len(rules) != 2:
        raise CliError("explain needs exactly two rules (outcome A and outcome B)")
    (ballots,) = by_format.values()
    a = run_rule(inst, ballots, rules[0], step=args.step, validate=False)
    b = run_rule(inst, ballots, rules[1], step=args.step, validate=False)
    profiles = _profiles(args)
    try:
        st = analysis.explanation_stats(inst, ballots, a, b, profiles)
    except KeyError as exc:
        raise CliError(f"no profile for voter {exc.args[0]!r}") from exc

    def individual(x):
        return {
            "histogram": {str(k): v for k, v in x.histogram.items()},
            "mean_fraction": ser.rational(x.mean_fraction),
            "mean_fraction_display": float(x.mean_fraction),
            "share_with_funded": ser.rational(x.share_with_funded),
            "share_zero": ser.rational(x.share_zero),
            "per_voter": x.utilities,
        }

    report = {
        "kind": "explain",
        "outcomes": {"A": ser.outcome_to_dict(a), "B": ser.outcome_to_dict(b)},
        "individual": {k: individual(x) for k, x in st.individual.items()},
        "group": {
            k: {"district": _frac_map(g.district_budget), "category": _frac_map(g.category_budget)}
            for k, g in st.group.items()
        },
        "population": {"district": _frac_map(st.population_district), "category": _frac_map(st.population_category)},
    }
    if st.profile_district is not None:
        report["profiles"] = {"district": _frac_map(st.profile_district), "category": _frac_map(st.profile_category)}
    rows = []
    for dim, keys, pop, attr in (
        ("district", District, st.population_district, "district_budget"),
        ("category", Category, st.population_category, "category_budget"),
    ):
        for k in keys:
            rows.append(
                [dim, k.value, float(pop[k])]
                + [float(getattr(st.group[lab], attr)[k]) for lab in ("A", "B")]
            )
    return report, {"explain.csv": ser.to_csv(["dimension", "slice", "population_votes", "A", "B"], rows)}


_REPORTS = {
    "sweep": _report_sweep,
    "divergence": _report_divergence,
    "stats": _report_stats,
    "concentration": _report_concentration,
    "consistency": _report_consistency,
    "explain": _report_explain,
}


def cmd_report(args) -> int:
    inst = _load_instance(args.instance, args.budget)
    by_format = {}
    for path in args.ballots:
        fmt, ballots = _load_ballots(path, inst)
        if fmt in by_format:
            raise CliError(f"two ballot files for format {fmt.value}")
        by_format[fmt] = ballots
    by_format = {f: by_format[f] for f in FORMAT_ORDER if f in by_format}
    report, csvs = _REPORTS[args.kind](args, inst, by_format)
    params = {
        k: getattr(args, k)
        for k in ("kind", "rules", "budgets", "hamming_budgets", "budget", "step")
        if getattr(args, k, None) is not None
    }
    inputs = [args.instance, *args.ballots] + ([args.profiles] if args.profiles else [])
    out = ser.resolve_out(args.out)
    _write(out / f"{args.kind}.json", _finish(report, ser.manifest("report", inputs, parameters=params)))
    for name, text in csvs.items():
        _write(out / name, text)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pbkit", description="Participatory budgeting aggregation and analysis.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("aggregate", help="run one rule on one ballot file")
    a.add_argument("instance")
    a.add_argument("ballots")
    a.add_argument("--rule", required=True, choices=list(RULE_NAMES))
    a.add_argument("--budget", type=int, help="override the instance budget")
    a.add_argument("--step", type=int, default=1, help="Add1 increment per voter in CHF")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_aggregate)

    s = sub.add_parser("simulate", help="generate a synthetic electorate")
    s.add_argument("instance")
    s.add_argument("--model", required=True, choices=["uniform", "polarised", "multiformat"])
    s.add_argument("--agents", type=int)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--config", help="JSON file with polarised generator settings")
    s.add_argument("--sn-extra", type=float, default=0.3, help="multiformat: SN extra-approval probability")
    s.add_argument("--profiles-out", help="also write voter district/category profiles")
    s.add_argument("--out", required=True, help="ballot file (a directory for multiformat)")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="analysis reports as JSON + CSV")
    r.add_argument("instance")
    r.add_argument("ballots", nargs="+")
    r.add_argument("--kind", required=True, choices=KINDS)
    r.add_argument("--rules", help="comma-separated rules (sweep: all four; explain: greedy,mes)")
    r.add_argument("--budgets", help="comma-separated sweep budgets")
    r.add_argument("--hamming-budgets", help="comma-separated budgets for Hamming averages")
    r.add_argument("--budget", type=int, help="override the instance budget")
    r.add_argument("--profiles", help="voter profile file (concentration, explain)")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--step", type=int, default=1)
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
