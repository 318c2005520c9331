from fractions import Fraction

from pbkit.ballots import UtilityProfile, UtilityScheme
from pbkit.model import Category, District, Instance, Project


def make_instance(costs, budget):
    """Instance from {pid: cost}; district and category are irrelevant here."""
    return Instance(
        tuple(Project(pid, f"p{pid}", c, District.NORD, Category.CULTURE) for pid, c in costs.items()),
        budget,
    )


def make_profile(utilities, scheme=UtilityScheme.COST):
    return UtilityProfile({str(v): {p: u for p, u in us.items() if u > 0} for v, us in utilities.items()}, scheme)


def add1_oracle(costs, utilities, budget, brute_mes):
    """Add1 by brute force: sweep start budgets upward one unit at a time."""
    n = len(utilities)
    selectable = {p for p in costs if any(u.get(p, 0) > 0 for u in utilities.values())}
    share = Fraction(budget, n)
    best = brute_mes(costs, utilities, share)
    best_share = share
    while {p for p, _, _ in best} != selectable:
        share += 1
        trial = brute_mes(costs, utilities, share)
        if sum(costs[p] for p, _, _ in trial) > budget:
            break
        best, best_share = trial, share
    return best, best_share
