"""Seeded electorate generators.

Every generator draws from ``numpy.random.Generator(PCG64(seed))`` in a
fixed order, so output depends only on the arguments. PCG64 is specified
independently of platform, which keeps generated files reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pbkit.ballots import Ballot, InputFormat
from pbkit.model import Category, District, Instance, Project


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, kw_only=True)
class PolarisedConfig:
    num_agents: int = 200
    focus_weight: int = 6
    base_weight: int = 1
    draws: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.num_agents < 1:
            raise ValueError("num_agents must be positive")
        if self.focus_weight <= 0 or self.base_weight <= 0:
            raise ValueError("weights must be positive")
        if self.draws < 1:
            raise ValueError("draws must be at least 1")


@dataclass(frozen=True)
class VoterProfile:
    """A voter's self-identified district and category."""

    district: District
    category: Category


def _voter_ids(n: int) -> list[str]:
    width = len(str(n))
    return [f"v{i:0{width}d}" for i in range(1, n + 1)]


def gen_uniform(instance: Instance, num_agents: int, seed: int) -> list[Ballot]:
    """S5 ballots, each a uniformly random 5-subset of the projects."""
    m = len(instance.projects)
    if m < 5:
        raise ValueError(f"need at least 5 projects, instance has {m}")
    if num_agents < 1:
        raise ValueError("num_agents must be positive")
    rng = make_rng(seed)
    # The first 5 columns of a random permutation are a uniform 5-subset.
    keys = rng.random((num_agents, m))
    picks = np.argsort(keys, axis=1, kind="stable")[:, :5]
    ids = np.array(instance.ids)
    return [
        Ballot.approval(v, InputFormat.S5, sorted(int(p) for p in ids[row]))
        for v, row in zip(_voter_ids(num_agents), picks)
    ]


def _focus_masks(instance: Instance) -> dict[tuple[District, Category], np.ndarray]:
    masks = {}
    for d in District:
        for c in Category:
            mask = np.array([p.district is d and p.category is c for p in instance.projects])
            if not mask.any():
                raise ValueError(f"no project for district {d.value} / category {c.value}")
            masks[d, c] = mask
    return masks


def sample_polarised(
    instance: Instance, config: PolarisedConfig
) -> tuple[list[Ballot], dict[str, VoterProfile]]:
    """Polarised point ballots together with each agent's focus profile.

    Each agent gets a uniform district and an independent uniform category.
    Projects matching both get ``focus_weight``, all others ``base_weight``,
    and ``draws`` projects are sampled with replacement in proportion to
    weight, one point per draw.
    """
    fmt = {5: InputFormat.D5, 10: InputFormat.D10}.get(config.draws)
    if fmt is None:
        raise ValueError(f"no point format totals {config.draws} points")
    masks = _focus_masks(instance)
    districts, categories = list(District), list(Category)
    rng = make_rng(config.seed)
    n = config.num_agents
    d_idx = rng.integers(len(districts), size=n)
    c_idx = rng.integers(len(categories), size=n)
    u = rng.random((n, config.draws))

    ids = instance.ids
    voters = _voter_ids(n)
    ballots, profiles = [], {}
    for k in range(n):
        profile = VoterProfile(districts[d_idx[k]], categories[c_idx[k]])
        weights = np.where(masks[profile.district, profile.category], config.focus_weight, config.base_weight)
        cdf = np.cumsum(weights)
        drawn = np.searchsorted(cdf, u[k] * cdf[-1], side="right")
        points: dict[int, int] = {}
        for j in sorted(drawn):
            points[ids[j]] = points.get(ids[j], 0) + 1
        ballots.append(Ballot.point(voters[k], fmt, points))
        profiles[voters[k]] = profile
    return ballots, profiles


def gen_polarised(instance: Instance, config: PolarisedConfig) -> list[Ballot]:
    return sample_polarised(instance, config)[0]


def focus_probability(instance: Instance, config: PolarisedConfig) -> float:
    """Per-draw probability of hitting a focus project, averaged over profiles."""
    masks = _focus_masks(instance)
    m = len(instance.projects)
    probs = []
    for mask in masks.values():
        k = int(mask.sum())
        probs.append(k * config.focus_weight / (k * config.focus_weight + (m - k) * config.base_weight))
    return float(np.mean(probs))


def gen_multiformat(
    instance: Instance,
    num_agents: int,
    seed: int,
    *,
    focus_weight: float = 6.0,
    popularity_spread: float = 1.0,
    sn_extra_prob: float = 0.3,
) -> tuple[dict[InputFormat, list[Ballot]], dict[str, VoterProfile]]:
    """One ballot per format per agent, all derived from a shared latent taste.

    Each project gets a log-normal popularity shared by the electorate
    (``popularity_spread`` is the log-scale standard deviation), and each
    agent a polarised focus profile as in :func:`sample_polarised`; an
    agent's weight for a project is popularity times focus weight.
    S5 and S5R take the top 5 of a Plackett-Luce ordering under those
    weights. D5 and D10 are 5 and 10 weighted draws with replacement.
    S5D10 spreads 10 draws over the ranked 5 with weights 5..1. SN is the
    S5 set plus every other project independently with probability
    ``sn_extra_prob``, which makes it a noisy superset of S5.
    """
    if num_agents < 1:
        raise ValueError("num_agents must be positive")
    masks = _focus_masks(instance)
    districts, categories = list(District), list(Category)
    rng = make_rng(seed)
    ids = instance.ids
    m = len(ids)
    voters = _voter_ids(num_agents)
    out: dict[InputFormat, list[Ballot]] = {f: [] for f in InputFormat}
    profiles = {}
    rank_w = np.array([5.0, 4.0, 3.0, 2.0, 1.0])
    popularity = np.exp(popularity_spread * rng.standard_normal(m))

    def draw(weights, k):
        cdf = np.cumsum(weights)
        return np.searchsorted(cdf, rng.random(k) * cdf[-1], side="right")

    for v in voters:
        prof = VoterProfile(districts[rng.integers(4)], categories[rng.integers(3)])
        profiles[v] = prof
        w = popularity * np.where(masks[prof.district, prof.category], focus_weight, 1.0)
        gumbel = np.log(w) + rng.gumbel(size=m)
        top = [ids[j] for j in np.argsort(-gumbel, kind="stable")[:5]]
        out[InputFormat.S5].append(Ballot.approval(v, InputFormat.S5, sorted(top)))
        out[InputFormat.S5R].append(Ballot.ranked(v, top))
        for fmt, k in ((InputFormat.D5, 5), (InputFormat.D10, 10)):
            pts: dict[int, int] = {}
            for j in sorted(draw(w, k)):
                pts[ids[j]] = pts.get(ids[j], 0) + 1
            out[fmt].append(Ballot.point(v, fmt, pts))
        pts = {p: 0 for p in top}
        for j in draw(rank_w, 10):
            pts[top[j]] += 1
        out[InputFormat.S5D10].append(Ballot.point(v, InputFormat.S5D10, pts))
        extra = rng.random(m) < sn_extra_prob
        sn = sorted(set(top) | {ids[j] for j in np.flatnonzero(extra)})
        out[InputFormat.SN].append(Ballot.approval(v, InputFormat.SN, sn))
    return out, profiles


def random_instance(rng: np.random.Generator, max_projects: int = 24, cost_levels=None) -> Instance:
    """A small synthetic instance with random costs and a budget that binds."""
    m = int(rng.integers(1, max_projects + 1))
    if cost_levels is None:
        costs = rng.integers(1, 21, size=m) * 5
    else:
        costs = rng.choice(np.asarray(cost_levels), size=m)
    districts, categories = list(District), list(Category)
    projects = tuple(
        Project(
            i + 1,
            f"Synthetic {i + 1}",
            int(costs[i]),
            districts[int(rng.integers(4))],
            categories[int(rng.integers(3))],
        )
        for i in range(m)
    )
    total = int(costs.sum())
    budget = int(rng.integers(max(1, int(costs.min()) // 2), total + 1))
    return Instance(projects, budget)


def random_ballots(
    instance: Instance, fmt: InputFormat | str, num_agents: int, rng: np.random.Generator
) -> list[Ballot]:
    """Valid random ballots of one format over ``instance``."""
    fmt = InputFormat(fmt)
    ids = instance.ids
    m = len(ids)
    if fmt in (InputFormat.S5, InputFormat.S5D10) and m < 5:
        raise ValueError(f"{fmt.value} needs at least 5 projects")
    ballots = []
    for v in _voter_ids(num_agents):
        if fmt is InputFormat.SN:
            k = int(rng.integers(1, m + 1))
            ballots.append(Ballot.approval(v, fmt, sorted(rng.choice(ids, k, replace=False).tolist())))
        elif fmt is InputFormat.S5:
            ballots.append(Ballot.approval(v, fmt, sorted(rng.choice(ids, 5, replace=False).tolist())))
        elif fmt is InputFormat.S5R:
            k = int(rng.integers(1, min(5, m) + 1))
            ballots.append(Ballot.ranked(v, rng.choice(ids, k, replace=False).tolist()))
        else:
            total = 5 if fmt is InputFormat.D5 else 10
            pool = rng.choice(ids, 5, replace=False).tolist() if fmt is InputFormat.S5D10 else ids
            pts = {int(p): 0 for p in pool} if fmt is InputFormat.S5D10 else {}
            for p in rng.choice(pool, total, replace=True).tolist():
                pts[int(p)] = pts.get(int(p), 0) + 1
            ballots.append(Ballot.point(v, fmt, dict(sorted(pts.items()))))
    return ballots
