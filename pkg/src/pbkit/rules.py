"""Greedy and the Method of Equal Shares (MES) with Add1 completion.

All MES arithmetic is exact. Budgets, prices and payments are computed with
gmpy2 rationals when available and handed back as Fractions.
Ties between equally good projects go to the cheaper project, then to the
lower id; the tied ids are kept in the outcome diagnostics.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from pbkit.ballots import Ballot, UtilityProfile, UtilityScheme, to_utility_profile, validate_ballot
from pbkit.model import Instance, MesDiagnostics, MesRound, Outcome, Project, RuleTag, Violation

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


class InvalidBallotsError(ValueError):
    """Raised when ballots handed to a rule fail validation.

    ``problems`` holds ``(index, voter_id, violations)`` triples.
    """

    def __init__(self, problems: list[tuple[int, str, list[Violation]]]):
        self.problems = problems
        first = problems[0]
        super().__init__(
            f"{len(problems)} invalid ballot(s); first: #{first[0]} voter {first[1]!r}: "
            + "; ".join(str(v) for v in first[2])
        )


def greedy(instance: Instance, profile: UtilityProfile, rule: RuleTag = RuleTag.GREEDY) -> Outcome:
    scores = {p.id: Fraction(profile.total(p.id), p.cost) for p in instance.projects}
    ranked = sorted(
        (p for p in instance.projects if scores[p.id] > 0),
        key=lambda p: (-scores[p.id], p.cost, p.id),
    )
    winners = []
    spent = 0
    for p in ranked:
        if spent + p.cost <= instance.budget:
            winners.append(p.id)
            spent += p.cost

    ties = []
    i = 0
    while i < len(ranked):
        j = i
        while j + 1 < len(ranked) and scores[ranked[j + 1].id] == scores[ranked[i].id]:
            j += 1
        if j > i:
            ties.append(tuple(p.id for p in ranked[i : j + 1]))
        i = j + 1
    return Outcome(rule, tuple(winners), spent, greedy_ties=tuple(ties))


def _solve_q(cost: int, supporters: Sequence[tuple[str, int]], budgets: Mapping[str, Fraction]):
    """Smallest q with sum(min(q*u_i, b_i)) == cost, or None if unaffordable.

    Supporters are visited in order of b_i / u_i. Those who run out before
    the equal-price level is reached pay their whole budget; the rest share
    the remainder in proportion to utility.
    """
    if sum(budgets[v] for v, _ in supporters) < cost:
        return None
    order = sorted(supporters, key=lambda vu: budgets[vu[0]] / vu[1])
    paid = _Q(0)
    weight = sum(u for _, u in supporters)
    for v, u in order:
        q = (cost - paid) / weight
        if q * u <= budgets[v]:
            return q
        paid += budgets[v]
        weight -= u
    raise AssertionError("affordable project without a solution")  # pragma: no cover


def min_q(project: Project, profile: UtilityProfile, budgets: Mapping[str, Fraction]):
    """Minimal price per unit of utility at which ``project`` is affordable.

    Returns a Fraction, or None when the supporters' budgets together fall
    short of the cost. Voters with zero utility never pay.
    """
    q = _solve_q(project.cost, profile.supporters(project.id), {v: _Q(b) for v, b in budgets.items()})
    return None if q is None else _frac(q)


def _frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def mes_fixed(
    instance: Instance,
    profile: UtilityProfile,
    start_budget,
    rule: RuleTag = RuleTag.MES,
) -> Outcome:
    start_budget = Fraction(start_budget)
    if start_budget < 0:
        raise ValueError("start budget must be non-negative")
    share = _Q(start_budget.numerator, start_budget.denominator)
    budgets = {v: share for v in profile.voters}
    supporters = {p.id: profile.supporters(p.id) for p in instance.projects}
    by_id = {p.id: p for p in instance.projects}
    # q only grows as budgets shrink, so a cached value is a lower bound.
    bound = {pid: _Q(0) for pid, s in supporters.items() if s}

    winners: list[int] = []
    rounds: list[MesRound] = []
    spent = 0
    while bound:
        best = None  # (q, cost, id)
        fresh = {}
        for pid in sorted(bound, key=lambda p: (bound[p], by_id[p].cost, p)):
            if best is not None and bound[pid] > best[0]:
                break
            q = _solve_q(by_id[pid].cost, supporters[pid], budgets)
            if q is None:
                del bound[pid]
                continue
            bound[pid] = fresh[pid] = q
            key = (q, by_id[pid].cost, pid)
            if best is None or key < best:
                best = key
        if best is None:
            break
        q, cost, pid = best
        payments = {}
        for v, u in supporters[pid]:
            pay = min(q * u, budgets[v])
            payments[v] = pay
            budgets[v] -= pay
        tied = tuple(sorted(p for p, fq in fresh.items() if fq == q and p != pid))
        rounds.append(MesRound(pid, _frac(q), {v: _frac(x) for v, x in payments.items()}, tied))
        winners.append(pid)
        spent += cost
        del bound[pid]

    diag = MesDiagnostics(start_budget, tuple(rounds), {v: _frac(b) for v, b in budgets.items()})
    return Outcome(rule, tuple(winners), spent, mes=diag)


def mes_add1(
    instance: Instance,
    profile: UtilityProfile,
    step=1,
    rule: RuleTag = RuleTag.MES,
) -> Outcome:
    """MES with Add1 completion.

    Starts from an equal share ``budget / n`` and raises every voter's share
    by ``step`` CHF while the selected set still fits in the budget. Stops at
    the first overshoot, or once every project with a supporter is selected.
    """
    n = len(profile)
    if n == 0:
        return Outcome(rule, (), 0, mes=MesDiagnostics(Fraction(0), ()))
    step = Fraction(step)
    if step <= 0:
        raise ValueError("step must be positive")
    selectable = {p.id for p in instance.projects if profile.supporters(p.id)}
    share = Fraction(instance.budget, n)
    best = mes_fixed(instance, profile, share, rule)
    while best.winner_set != selectable:
        share += step
        trial = mes_fixed(instance, profile, share, rule)
        if trial.total_cost > instance.budget:
            break
        best = trial
    return best


_SCHEMES = {
    RuleTag.GREEDY: UtilityScheme.COST,
    RuleTag.MES: UtilityScheme.COST,
    RuleTag.ECONOMICAL_GREEDY: UtilityScheme.CARDINALITY,
    RuleTag.ECONOMICAL_MES: UtilityScheme.CARDINALITY,
}


def check_ballots(ballots: list[Ballot], instance: Instance) -> None:
    problems = []
    for i, b in enumerate(ballots):
        report = validate_ballot(b, instance)
        if report:
            problems.append((i, b.voter_id, report))
    if problems:
        raise InvalidBallotsError(problems)


def apply_rule(instance: Instance, profile: UtilityProfile, rule: RuleTag | str, step=1) -> Outcome:
    rule = RuleTag(rule)
    if rule in (RuleTag.GREEDY, RuleTag.ECONOMICAL_GREEDY):
        return greedy(instance, profile, rule)
    return mes_add1(instance, profile, step=step, rule=rule)


def run_rule(
    instance: Instance,
    ballots: list[Ballot],
    rule: RuleTag | str,
    *,
    step=1,
    validate: bool = True,
) -> Outcome:
    """Validate ballots, translate them with the rule's utility scheme, aggregate.

    Greedy and MES use cost utilities; the economical variants use
    cardinality utilities.
    """
    rule = RuleTag(rule)
    if validate:
        check_ballots(ballots, instance)
    profile = to_utility_profile(ballots, instance, _SCHEMES[rule])
    return apply_rule(instance, profile, rule, step=step)


def scheme_for(rule: RuleTag | str) -> UtilityScheme:
    return _SCHEMES[RuleTag(rule)]
