"""Projects, instances and outcomes of a bounded discrete PB election.

Money is kept as whole CHF integers throughout; rule code upgrades to
:class:`fractions.Fraction` only where per-voter shares require it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any


class District(str, Enum):
    NORD = "Nord"
    OST = "Ost"
    SUED = "Süd"
    WEST = "West"


class Category(str, Enum):
    TRANSPORTATION = "Transportation"
    CULTURE = "Culture"
    NATURE = "Nature"


class RuleTag(str, Enum):
    GREEDY = "Greedy"
    MES = "MES"
    ECONOMICAL_GREEDY = "EconomicalGreedy"
    ECONOMICAL_MES = "EconomicalMES"


@dataclass(frozen=True)
class Project:
    id: int
    name: str
    cost: int
    district: District
    category: Category


@dataclass(frozen=True)
class Instance:
    projects: tuple[Project, ...]
    budget: int

    def __post_init__(self):
        object.__setattr__(self, "projects", tuple(self.projects))

    def project(self, project_id: int) -> Project:
        for p in self.projects:
            if p.id == project_id:
                return p
        raise KeyError(project_id)

    @property
    def ids(self) -> list[int]:
        return [p.id for p in self.projects]

    @property
    def costs(self) -> dict[int, int]:
        return {p.id: p.cost for p in self.projects}

    def with_budget(self, budget: int) -> "Instance":
        return Instance(self.projects, budget)


@dataclass(frozen=True)
class Violation:
    """One broken invariant found by a validator."""

    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class MesRound:
    """One selection step of MES: who paid how much for which project.

    ``tied_with`` lists other projects that had exactly the same minimal
    price in this round and lost only on the tie-break.
    """

    project: int
    q: Fraction
    payments: dict[str, Fraction]
    tied_with: tuple[int, ...] = ()


@dataclass(frozen=True)
class MesDiagnostics:
    final_start_budget: Fraction
    rounds: tuple[MesRound, ...]
    remaining_budgets: dict[str, Fraction] = field(default_factory=dict)


@dataclass(frozen=True)
class Outcome:
    """A feasible winner set, in selection order."""

    rule: RuleTag
    winners: tuple[int, ...]
    total_cost: int
    mes: MesDiagnostics | None = None
    greedy_ties: tuple[tuple[int, ...], ...] = ()

    @property
    def winner_set(self) -> frozenset[int]:
        return frozenset(self.winners)


def validate_instance(instance: Instance) -> list[Violation]:
    report = []
    if instance.budget <= 0:
        report.append(Violation("non-positive-budget", f"budget is {instance.budget}"))
    seen: set[int] = set()
    for p in instance.projects:
        if p.id in seen:
            report.append(Violation("duplicate-id", f"project id {p.id} appears more than once"))
        seen.add(p.id)
        if p.cost <= 0:
            report.append(Violation("non-positive-cost", f"project {p.id} has cost {p.cost}"))
    return report


# Names for the eight projects that appear in the published example ballot.
# Everything else in the fixture is a placeholder.
_KNOWN_NAMES = {
    5: "Safe Bike Paths around Irchel Park",
    6: "More Night Buses to Oerlikon",
    7: "Free Open Badi Space in Wollishofen",
    12: "Car Sharing System for Young People",
    14: "More Trees in Bellevue Sechseläutenplatz",
    16: "Multicultural Festival at Sechseläutenplatz",
    17: "Bike Lanes on Seefeldstrasse",
    22: "Sustainable Cooking Workshop with Kids",
}

# Display order. The district and category orders are chosen so that the
# eight known project ids land in a district and category matching their names.
FIXTURE_DISTRICTS = (District.NORD, District.SUED, District.OST, District.WEST)
FIXTURE_CATEGORIES = (Category.NATURE, Category.CULTURE, Category.TRANSPORTATION)
FIXTURE_BUDGET = 60_000


def zurich_fixture() -> Instance:
    """The 24-project Zürich instance: 4 districts x 3 categories x {5000, 10000}.

    Ids run district-major, category-minor, cheap before expensive, so
    odd ids cost 5000 and even ids cost 10000.
    """
    projects = []
    pid = 1
    for district in FIXTURE_DISTRICTS:
        for category in FIXTURE_CATEGORIES:
            for cost in (5_000, 10_000):
                name = _KNOWN_NAMES.get(
                    pid, f"Fixture: {category.value} project {pid} ({district.value})"
                )
                projects.append(Project(pid, name, cost, district, category))
                pid += 1
    return Instance(tuple(projects), FIXTURE_BUDGET)


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    return {
        "budget": instance.budget,
        "projects": [
            {
                "id": p.id,
                "name": p.name,
                "cost": p.cost,
                "district": p.district.value,
                "category": p.category.value,
            }
            for p in instance.projects
        ],
    }


def instance_from_dict(data: dict[str, Any]) -> Instance:
    projects = tuple(
        Project(
            id=int(p["id"]),
            name=str(p["name"]),
            cost=int(p["cost"]),
            district=District(p["district"]),
            category=Category(p["category"]),
        )
        for p in data["projects"]
    )
    return Instance(projects, int(data["budget"]))
