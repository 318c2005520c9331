"""Ballots for the six input formats and their translation into utilities."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from pbkit.model import Instance, Violation


class InputFormat(str, Enum):
    SN = "SN"
    S5 = "S5"
    D5 = "D5"
    D10 = "D10"
    S5R = "S5R"
    S5D10 = "S5D10"

    @property
    def kind(self) -> str:
        """Which content key a ballot of this format carries."""
        if self in (InputFormat.SN, InputFormat.S5):
            return "approvals"
        if self is InputFormat.S5R:
            return "ranking"
        return "points"


# Canonical ordering used in every report.
FORMAT_ORDER = tuple(InputFormat)

_POINT_TOTALS = {InputFormat.D5: 5, InputFormat.D10: 10, InputFormat.S5D10: 10}


class UtilityScheme(str, Enum):
    COST = "Cost"
    CARDINALITY = "Cardinality"


@dataclass(frozen=True, eq=True)
class Ballot:
    """One voter's submission. Exactly one of the content fields is set."""

    voter_id: str
    format: InputFormat
    approvals: tuple[int, ...] | None = None
    points: Mapping[int, int] | None = None
    ranking: tuple[int, ...] | None = None

    @classmethod
    def approval(cls, voter_id, fmt, projects: Iterable[int]) -> "Ballot":
        return cls(str(voter_id), InputFormat(fmt), approvals=tuple(projects))

    @classmethod
    def point(cls, voter_id, fmt, points: Mapping[int, int]) -> "Ballot":
        return cls(str(voter_id), InputFormat(fmt), points=dict(points))

    @classmethod
    def ranked(cls, voter_id, projects: Iterable[int]) -> "Ballot":
        return cls(str(voter_id), InputFormat.S5R, ranking=tuple(projects))

    def support(self) -> list[int]:
        """Projects this voter selected (approved, ranked or gave >= 1 point)."""
        if self.approvals is not None:
            return list(self.approvals)
        if self.ranking is not None:
            return list(self.ranking)
        return [p for p, s in self.points.items() if s > 0]

    def point_view(self) -> dict[int, int]:
        """Points per project: approvals count 1, rankings use 6 - position."""
        if self.format.kind == "approvals":
            return {p: 1 for p in self.approvals}
        if self.format.kind == "ranking":
            return ranking_to_points(self)
        return dict(self.points)


def validate_ballot(ballot: Ballot, instance: Instance) -> list[Violation]:
    fmt = ballot.format
    report: list[Violation] = []

    present = [k for k in ("approvals", "points", "ranking") if getattr(ballot, k) is not None]
    if present != [fmt.kind]:
        report.append(
            Violation("content", f"{fmt.value} ballot must carry exactly '{fmt.kind}', found {present}")
        )
        return report

    known = set(instance.ids)
    if fmt.kind == "points":
        referenced = list(ballot.points)
    else:
        referenced = list(getattr(ballot, fmt.kind))
    unknown = sorted({p for p in referenced if p not in known})
    if unknown:
        report.append(Violation("unknown-project", f"unknown project ids {unknown}"))
    if fmt.kind != "points" and len(set(referenced)) != len(referenced):
        report.append(Violation("duplicate-selection", "a project is listed more than once"))

    if fmt is InputFormat.SN and len(ballot.approvals) < 1:
        report.append(Violation("count", "expected at least 1 selection"))
    elif fmt is InputFormat.S5 and len(ballot.approvals) != 5:
        report.append(Violation("count", "expected exactly 5 selections"))
    elif fmt is InputFormat.S5R and not 1 <= len(ballot.ranking) <= 5:
        report.append(Violation("count", "expected between 1 and 5 ranked projects"))
    elif fmt.kind == "points":
        total = _POINT_TOTALS[fmt]
        values = list(ballot.points.values())
        if any(not isinstance(v, int) or isinstance(v, bool) for v in values):
            report.append(Violation("points-type", "points must be whole numbers"))
        elif any(v < 0 or v > total for v in values):
            report.append(Violation("points-range", f"each project takes 0..{total} points"))
        elif sum(values) != total:
            report.append(Violation("points-sum", f"points must sum to {total}, got {sum(values)}"))
        if fmt is InputFormat.S5D10 and len(ballot.points) != 5:
            report.append(
                Violation("count", f"expected points over exactly 5 projects, got {len(ballot.points)}")
            )
    return report


def ranking_to_points(ballot: Ballot) -> dict[int, int]:
    """Borda-style scoring of a ranked ballot: position k (1-based) gets 6 - k."""
    if ballot.format is not InputFormat.S5R or ballot.ranking is None:
        raise ValueError(f"expected an S5R ballot, got {ballot.format.value}")
    return {p: 5 - k for k, p in enumerate(ballot.ranking)}


@dataclass(frozen=True)
class UtilityProfile:
    """Additive utilities per voter. Values are non-negative integers."""

    utilities: dict[str, dict[int, int]]
    scheme: UtilityScheme

    @property
    def voters(self) -> list[str]:
        return list(self.utilities)

    def __len__(self):
        return len(self.utilities)

    def utility(self, voter: str, project: int) -> int:
        return self.utilities[voter].get(project, 0)

    def bundle_utility(self, voter: str, winners: Iterable[int]) -> int:
        u = self.utilities[voter]
        return sum(u.get(p, 0) for p in winners)

    def total(self, project: int) -> int:
        return sum(u.get(project, 0) for u in self.utilities.values())

    def supporters(self, project: int) -> list[tuple[str, int]]:
        return [(v, u[project]) for v, u in self.utilities.items() if u.get(project, 0) > 0]


def to_utility_profile(
    ballots: list[Ballot], instance: Instance, scheme: UtilityScheme | str
) -> UtilityProfile:
    scheme = UtilityScheme(scheme)
    if not ballots:
        raise ValueError("empty ballot list")
    formats = {b.format for b in ballots}
    if len(formats) > 1:
        raise ValueError(f"mixed ballot formats: {sorted(f.value for f in formats)}")
    costs = instance.costs
    utilities: dict[str, dict[int, int]] = {}
    for b in ballots:
        if b.voter_id in utilities:
            raise ValueError(f"duplicate voter id {b.voter_id!r}")
        points = b.point_view()
        if scheme is UtilityScheme.COST:
            u = {p: costs[p] * s for p, s in points.items() if s > 0}
        else:
            u = {p: s for p, s in points.items() if s > 0}
        utilities[b.voter_id] = u
    return UtilityProfile(utilities, scheme)
