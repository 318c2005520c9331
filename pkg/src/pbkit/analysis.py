"""Measurements for comparing formats and outcomes.

Vote-share distributions and Jensen-Shannon divergence between formats,
Hamming distances across budget sweeps, ballot size statistics, how much
voters concentrate on their own district or category, cross-format
consistency, and the data behind the individual and group explanations.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from pbkit.ballots import FORMAT_ORDER, Ballot, InputFormat, to_utility_profile
from pbkit.model import Category, District, Instance, Outcome, RuleTag
from pbkit.rules import apply_rule, scheme_for

DISPLAY_BUDGETS = (10_000, 20_000, 60_000, 90_000)
HAMMING_BUDGETS = tuple(range(10_000, 50_001, 5_000))


def _single_format(ballots: Sequence[Ballot]) -> InputFormat:
    if not ballots:
        raise ValueError("empty ballot list")
    formats = {b.format for b in ballots}
    if len(formats) != 1:
        raise ValueError(f"mixed ballot formats: {sorted(f.value for f in formats)}")
    return formats.pop()


@dataclass(frozen=True)
class PointDistribution:
    shares: dict[int, Fraction]
    format: InputFormat

    def as_list(self) -> list[float]:
        return [float(s) for s in self.shares.values()]


def point_totals(ballots: Sequence[Ballot], instance: Instance) -> dict[int, int]:
    totals = {pid: 0 for pid in instance.ids}
    for b in ballots:
        for p, s in b.point_view().items():
            totals[p] += s
    return totals


def point_distribution(ballots: Sequence[Ballot], instance: Instance) -> PointDistribution:
    fmt = _single_format(ballots)
    totals = point_totals(ballots, instance)
    grand = sum(totals.values())
    if grand == 0:
        raise ValueError("ballots assign no points")
    return PointDistribution({p: Fraction(t, grand) for p, t in totals.items()}, fmt)


def js_divergence(p, q) -> float:
    """Jensen-Shannon divergence with base-2 logs, so the value lies in [0, 1].

    Accepts two PointDistributions (or mappings) over the same projects, or
    two equal-length sequences of probabilities.
    """
    if isinstance(p, PointDistribution):
        p = p.shares
    if isinstance(q, PointDistribution):
        q = q.shares
    if isinstance(p, Mapping) or isinstance(q, Mapping):
        if not (isinstance(p, Mapping) and isinstance(q, Mapping)) or set(p) != set(q):
            raise ValueError("distributions are over different project sets")
        keys = list(p)
        p, q = [p[k] for k in keys], [q[k] for k in keys]
    if len(p) != len(q):
        raise ValueError("distributions have different lengths")

    def kl_to_mid(a, b):
        total = 0.0
        for x, y in zip(a, b):
            x = float(x)
            if x > 0:
                total += x * math.log2(2 * x / (x + float(y)))
        return total

    value = 0.5 * kl_to_mid(p, q) + 0.5 * kl_to_mid(q, p)
    return min(max(value, 0.0), 1.0)


def divergence_matrix(dists: Mapping[InputFormat, PointDistribution]) -> dict[tuple[InputFormat, InputFormat], float]:
    out = {}
    for f in dists:
        for g in dists:
            out[f, g] = 0.0 if f == g else js_divergence(dists[f], dists[g])
    return out


def hamming(w1: Iterable[int], w2: Iterable[int]) -> int:
    return len(set(w1) ^ set(w2))


@dataclass(frozen=True)
class SweepTable:
    """Winner sets per (rule, format) row and budget column."""

    budgets: tuple[int, ...]
    cells: dict[tuple[RuleTag, InputFormat], dict[int, tuple[int, ...]]]

    def formats(self, rule: RuleTag) -> list[InputFormat]:
        return [f for (r, f) in self.cells if r == rule]

    def rules(self) -> list[RuleTag]:
        return list(dict.fromkeys(r for r, _ in self.cells))


def budget_sweep(
    instance: Instance,
    ballots_by_format: Mapping[InputFormat, Sequence[Ballot]],
    rules: Sequence[RuleTag | str] = tuple(RuleTag),
    budgets: Sequence[int] = DISPLAY_BUDGETS,
    *,
    workers: int = 1,
    step=1,
) -> SweepTable:
    """Rerun every rule on every format at every budget.

    Cells are computed independently (optionally on a thread pool) and
    assembled in rule, format, ascending-budget order.
    """
    budgets = tuple(int(b) for b in budgets)
    if any(b <= 0 for b in budgets) or list(budgets) != sorted(budgets):
        raise ValueError("budgets must be positive and ascending")
    rules = [RuleTag(r) for r in rules]
    formats = [f for f in FORMAT_ORDER if f in ballots_by_format]
    profiles = {}
    for r in rules:
        for f in formats:
            key = (scheme_for(r), f)
            if key not in profiles:
                profiles[key] = to_utility_profile(list(ballots_by_format[f]), instance, key[0])

    jobs = [(r, f, b) for r in rules for f in formats for b in budgets]

    def run(job):
        r, f, b = job
        outcome = apply_rule(instance.with_budget(b), profiles[scheme_for(r), f], r, step=step)
        return tuple(sorted(outcome.winners))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    cells: dict[tuple[RuleTag, InputFormat], dict[int, tuple[int, ...]]] = {}
    for (r, f, b), winners in zip(jobs, results):
        cells.setdefault((r, f), {})[b] = winners
    return SweepTable(budgets, cells)


def pairwise_hamming(
    sweep: SweepTable, rule: RuleTag | str, budgets: Sequence[int] | None = None
) -> dict[tuple[InputFormat, InputFormat], Fraction]:
    """Mean Hamming distance over budgets for every unordered format pair."""
    rule = RuleTag(rule)
    budgets = sweep.budgets if budgets is None else tuple(budgets)
    rows = {f: sweep.cells[rule, f] for f in sweep.formats(rule)}
    out = {}
    for f, g in combinations(rows, 2):
        out[f, g] = Fraction(sum(hamming(rows[f][b], rows[g][b]) for b in budgets), len(budgets))
    return out


def avg_pairwise_hamming(sweep: SweepTable, rule: RuleTag | str, budgets: Sequence[int] | None = None) -> Fraction:
    pairs = pairwise_hamming(sweep, rule, budgets)
    if not pairs:
        raise ValueError("need at least two formats for this rule")
    return sum(pairs.values(), Fraction(0)) / len(pairs)


@dataclass(frozen=True)
class CountStats:
    """Statistics of how many projects each ballot selects.

    ``std`` is the population standard deviation (divide by n).
    """

    mode: int
    mode_frequency: int
    mean: float
    median: float
    std: float
    n: int


def ballot_count_stats(ballots: Sequence[Ballot]) -> CountStats:
    if not ballots:
        raise ValueError("empty ballot list")
    counts = [len(b.support()) for b in ballots]
    freq = Counter(counts)
    top = max(freq.values())
    mode = min(c for c, k in freq.items() if k == top)
    return CountStats(
        mode=mode,
        mode_frequency=top,
        mean=statistics.fmean(counts),
        median=float(statistics.median(counts)),
        std=statistics.pstdev(counts),
        n=len(counts),
    )


@dataclass(frozen=True)
class Summary:
    mean: float
    median: float
    std: float

    @classmethod
    def of(cls, values: Sequence) -> "Summary":
        values = [float(v) for v in values]
        return cls(statistics.fmean(values), float(statistics.median(values)), statistics.pstdev(values))


@dataclass(frozen=True)
class ConcentrationResult:
    format: InputFormat
    per_voter: dict[str, tuple[Fraction, Fraction]]
    district: Summary
    category: Summary


def concentration(ballots: Sequence[Ballot], profiles: Mapping, instance: Instance) -> ConcentrationResult:
    """Share of each voter's points that go to their own district and category.

    ``profiles`` maps voter id to an object with ``district`` and
    ``category`` attributes (see :class:`pbkit.simulation.VoterProfile`).
    """
    fmt = _single_format(ballots)
    by_id = {p.id: p for p in instance.projects}
    per_voter = {}
    for b in ballots:
        if b.voter_id not in profiles:
            raise KeyError(f"no profile for voter {b.voter_id!r}")
        prof = profiles[b.voter_id]
        pts = b.point_view()
        total = sum(pts.values())
        own_d = sum(s for p, s in pts.items() if by_id[p].district == District(prof.district))
        own_c = sum(s for p, s in pts.items() if by_id[p].category == Category(prof.category))
        per_voter[b.voter_id] = (Fraction(own_d, total), Fraction(own_c, total))
    return ConcentrationResult(
        fmt,
        per_voter,
        Summary.of([d for d, _ in per_voter.values()]),
        Summary.of([c for _, c in per_voter.values()]),
    )


@dataclass(frozen=True)
class ConsistencyFlags:
    s5_nested_in_sn: bool  # S5 is a subset or a superset of SN
    d10_covers_d5: bool  # every project gets at least as many D10 as D5 points
    s5_equals_s5r: bool
    s5_near_s5r: bool  # at most one project swapped between S5 and S5R
    s5r_order_kept_in_s5d10: bool  # ranked above implies at least as many points


def consistency_checks(
    ballots_by_format: Mapping[InputFormat, Sequence[Ballot]],
) -> dict[str, ConsistencyFlags]:
    by_voter: dict[str, dict[InputFormat, Ballot]] = {}
    for fmt, ballots in ballots_by_format.items():
        for b in ballots:
            by_voter.setdefault(b.voter_id, {})[InputFormat(fmt)] = b
    out = {}
    for voter, mine in by_voter.items():
        missing = [f.value for f in FORMAT_ORDER if f not in mine]
        if missing:
            raise ValueError(f"voter {voter!r} has no ballot for {missing}")
        sn = set(mine[InputFormat.SN].approvals)
        s5 = set(mine[InputFormat.S5].approvals)
        d5 = mine[InputFormat.D5].points
        d10 = mine[InputFormat.D10].points
        ranking = mine[InputFormat.S5R].ranking
        s5d10 = mine[InputFormat.S5D10].points
        s5r = set(ranking)
        out[voter] = ConsistencyFlags(
            s5_nested_in_sn=s5 <= sn or sn <= s5,
            d10_covers_d5=all(d10.get(p, 0) >= s for p, s in d5.items()),
            s5_equals_s5r=s5 == s5r,
            s5_near_s5r=max(len(s5 - s5r), len(s5r - s5)) <= 1,
            s5r_order_kept_in_s5d10=all(
                s5d10.get(a, 0) >= s5d10.get(b, 0) for a, b in combinations(ranking, 2)
            ),
        )
    return out


@dataclass(frozen=True)
class IndividualStats:
    utilities: dict[str, int]  # per voter: total cost of funded projects they supported
    histogram: dict[int, int]
    mean_fraction: Fraction  # mean share of the spending that a voter supported
    share_with_funded: Fraction
    share_zero: Fraction


@dataclass(frozen=True)
class GroupStats:
    district_budget: dict[District, Fraction]
    category_budget: dict[Category, Fraction]


@dataclass(frozen=True)
class ExplanationStats:
    individual: dict[str, IndividualStats]
    group: dict[str, GroupStats]
    population_district: dict[District, Fraction]
    population_category: dict[Category, Fraction]
    profile_district: dict[District, Fraction] | None = None
    profile_category: dict[Category, Fraction] | None = None


def _individual(ballots: Sequence[Ballot], instance: Instance, outcome: Outcome) -> IndividualStats:
    costs = instance.costs
    winners = outcome.winner_set
    spent = sum(costs[p] for p in winners)
    utilities = {}
    for b in ballots:
        utilities[b.voter_id] = sum(costs[p] for p in set(b.support()) & winners)
    n = len(utilities)
    hist = Counter(utilities.values())
    mean_fraction = (
        sum((Fraction(u, spent) for u in utilities.values()), Fraction(0)) / n if spent else Fraction(0)
    )
    return IndividualStats(
        utilities,
        dict(sorted(hist.items())),
        mean_fraction,
        Fraction(sum(1 for u in utilities.values() if u > 0), n),
        Fraction(sum(1 for u in utilities.values() if u == 0), n),
    )


def _shares(weights: Mapping, keys) -> dict:
    total = sum(weights.values())
    return {k: Fraction(weights.get(k, 0), total) if total else Fraction(0) for k in keys}


def _group(instance: Instance, outcome: Outcome) -> GroupStats:
    d, c = Counter(), Counter()
    for p in instance.projects:
        if p.id in outcome.winner_set:
            d[p.district] += p.cost
            c[p.category] += p.cost
    return GroupStats(_shares(d, District), _shares(c, Category))


def explanation_stats(
    instance: Instance,
    ballots: Sequence[Ballot],
    outcome_a: Outcome,
    outcome_b: Outcome,
    profiles: Mapping | None = None,
) -> ExplanationStats:
    """Data for the two statistics-based explanations of outcomes A and B.

    Individual: for each voter, the total cost of funded projects they
    supported, as a histogram and summary shares. Group: each outcome's
    spending split by district and category, next to the electorate's vote
    shares over the same slices. With ``profiles`` the electorate is also
    split by self-identified district and category.
    """
    _single_format(ballots)
    totals = point_totals(ballots, instance)
    d, c = Counter(), Counter()
    for p in instance.projects:
        d[p.district] += totals[p.id]
        c[p.category] += totals[p.id]
    prof_d = prof_c = None
    if profiles is not None:
        prof_d = _shares(Counter(District(profiles[b.voter_id].district) for b in ballots), District)
        prof_c = _shares(Counter(Category(profiles[b.voter_id].category) for b in ballots), Category)
    return ExplanationStats(
        individual={"A": _individual(ballots, instance, outcome_a), "B": _individual(ballots, instance, outcome_b)},
        group={"A": _group(instance, outcome_a), "B": _group(instance, outcome_b)},
        population_district=_shares(d, District),
        population_category=_shares(c, Category),
        profile_district=prof_d,
        profile_category=prof_c,
    )
