"""Acceptance gate: one test per criterion, each logging a PASS/FAIL line."""

import itertools
import json
import math
import time
from fractions import Fraction

import numpy as np

from helpers import make_instance, make_profile
from oracles import brute_mes, vote_count_walk
from pbkit import serialize as ser
from pbkit.analysis import ballot_count_stats, hamming, js_divergence, point_distribution
from pbkit.ballots import Ballot, InputFormat, UtilityScheme, to_utility_profile
from pbkit.cli import main
from pbkit.model import RuleTag, zurich_fixture
from pbkit.rules import greedy, mes_fixed, run_rule
from pbkit.simulation import (
    PolarisedConfig,
    focus_probability,
    gen_multiformat,
    gen_uniform,
    make_rng,
    random_ballots,
    random_instance,
    sample_polarised,
)

F = InputFormat


def test_c1_polarised_calibration(record):
    inst = zurich_fixture()
    cfg = PolarisedConfig(num_agents=10_000, seed=2024)
    t0 = time.perf_counter()
    ballots, profiles = sample_polarised(inst, cfg)
    elapsed = time.perf_counter() - t0
    by_id = {p.id: p for p in inst.projects}
    focus_points = [
        sum(
            s for pid, s in b.points.items()
            if by_id[pid].district is profiles[b.voter_id].district
            and by_id[pid].category is profiles[b.voter_id].category
        )
        for b in ballots
    ]
    mean = float(np.mean(focus_points))
    expected = 5 * focus_probability(inst, cfg)
    ok = abs(mean - 1.7647) <= 0.05 and elapsed < 5 and abs(expected - 1.7647) < 1e-4
    record("C1 polarised calibration", ok, f"mean={mean:.4f} analytic={expected:.4f} t={elapsed:.2f}s")


def _fuzz_case(case):
    rng = make_rng(case)
    inst = random_instance(rng, 24)
    fmts = [f for f in F if len(inst.projects) >= 5 or f not in (F.S5, F.S5D10)]
    fmt = fmts[int(rng.integers(len(fmts)))]
    ballots = random_ballots(inst, fmt, int(rng.integers(1, 51)), rng)
    return inst, ballots


def test_c2_feasibility_fuzz(record):
    cases, bad = 1000, []
    t0 = time.perf_counter()
    for case in range(cases):
        inst, ballots = _fuzz_case(case)
        for rule in RuleTag:
            out = run_rule(inst, ballots, rule)
            if out.total_cost > inst.budget or out.total_cost != sum(inst.project(p).cost for p in out.winners):
                bad.append((case, rule.value, "budget"))
            if out.mes is not None:
                for r in out.mes.rounds:
                    if sum(r.payments.values(), Fraction(0)) != inst.project(r.project).cost:
                        bad.append((case, rule.value, f"payments {r.project}"))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    record("C2 feasibility fuzz", ok, f"cases={cases} rules=4 failures={bad[:3]} t={elapsed:.1f}s")


def test_c3_greedy_is_vote_count_walk(record):
    mismatches = []
    for case in range(500):
        rng = make_rng(10_000 + case)
        inst = random_instance(rng, 24)
        fmt = F.S5 if len(inst.projects) >= 5 and rng.random() < 0.5 else F.SN
        ballots = random_ballots(inst, fmt, int(rng.integers(1, 51)), rng)
        out = greedy(inst, to_utility_profile(ballots, inst, UtilityScheme.COST))
        walk = vote_count_walk(inst.projects, [b.approvals for b in ballots], inst.budget)
        if out.winner_set != frozenset(walk):
            mismatches.append(case)
    record("C3 greedy = vote-count walk", not mismatches, f"500 cases, mismatches={mismatches[:5]}")


COST_PATTERNS = ((3, 5, 2, 4), (4, 4, 4, 4))
START_BUDGETS = (1, 2, 3, 4, 5, 7, 10, 13, 16, 20)


def _utility_matrices(n, m):
    cells = n * m
    if 3**cells <= 81:
        yield from itertools.product(range(3), repeat=cells)
        return
    rng = make_rng(1000 * n + m)
    for _ in range(60):
        yield tuple(int(x) for x in rng.integers(0, 3, size=cells))


def test_c4_mes_matches_bruteforce(record):
    cases, diffs = 0, []
    t0 = time.perf_counter()
    for n, m in itertools.product(range(1, 5), repeat=2):
        for flat in _utility_matrices(n, m):
            utilities = {f"v{i}": {p + 1: flat[i * m + p] for p in range(m)} for i in range(n)}
            for pattern in COST_PATTERNS:
                costs = {p + 1: pattern[p] for p in range(m)}
                inst = make_instance(costs, 10**6)
                profile = make_profile(utilities)
                for start in START_BUDGETS:
                    cases += 1
                    got = mes_fixed(inst, profile, start)
                    expected = brute_mes(costs, utilities, Fraction(start))
                    got_log = [(r.project, r.q, dict(r.payments)) for r in got.mes.rounds]
                    if got_log != expected or list(got.winners) != [p for p, _, _ in expected]:
                        diffs.append((n, m, flat, pattern, start))
    elapsed = time.perf_counter() - t0
    ok = not diffs and cases >= 10_000 and elapsed < 120
    record("C4 MES = brute force", ok, f"cases={cases} diffs={diffs[:2]} t={elapsed:.1f}s")


def test_c5_instance_separation(record):
    inst = zurich_fixture()
    t0 = time.perf_counter()
    h1, h2 = [], []
    for seed in range(100):
        uniform = gen_uniform(inst, 200, seed)
        polarised, _ = sample_polarised(inst, PolarisedConfig(num_agents=200, seed=seed))
        for ballots, sink in ((uniform, h1), (polarised, h2)):
            g = run_rule(inst, ballots, RuleTag.GREEDY)
            m = run_rule(inst, ballots, RuleTag.MES)
            sink.append(hamming(g.winners, m.winners))
    elapsed = time.perf_counter() - t0
    m1, m2 = np.mean(h1), np.mean(h2)
    ok = m2 > m1 and elapsed < 600
    record("C5 instance separation", ok, f"mean hamming I1={m1:.2f} I2={m2:.2f} t={elapsed:.1f}s")


def test_c6_jsd_axioms(record):
    rng = make_rng(6)
    problems = []
    for i in range(1000):
        k = int(rng.integers(2, 25))
        p = rng.dirichlet(np.ones(k))
        q = p.copy() if i % 10 == 0 else rng.dirichlet(np.ones(k))
        if i % 7 == 0:
            p[rng.integers(k)] = 0
            p /= p.sum()
        pq, qp = js_divergence(p, q), js_divergence(q, p)
        if pq != qp or not 0 <= pq <= 1:
            problems.append((i, "symmetry/range"))
        if (pq == 0) != bool(np.array_equal(p, q)):
            problems.append((i, "zero-iff-equal"))
        if js_divergence(p, p) != 0:
            problems.append((i, "self"))
    hand = js_divergence([1, 0], [0.5, 0.5])
    # H(M) - (H(P) + H(Q)) / 2 with M = (3/4, 1/4), H(P) = 0, H(Q) = 1
    analytic = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25)) - 0.5
    ok = not problems and abs(hand - 0.31128) <= 1e-5 and abs(hand - analytic) < 1e-12
    record("C6 JSD axioms", ok, f"1000 pairs, problems={problems[:3]} hand={hand:.6f}")


def _sn_outlier_margin(seed):
    inst = zurich_fixture()
    by_format, _ = gen_multiformat(inst, 180, seed)
    dists = {f: point_distribution(by_format[f], inst) for f in F}
    others = [f for f in F if f is not F.SN]
    sn = np.mean([js_divergence(dists[F.SN], dists[f]) for f in others])
    rest = np.mean([js_divergence(dists[a], dists[b]) for a, b in itertools.combinations(others, 2)])
    return sn, rest


def test_c7_sn_outlier(record):
    failing = []
    ratios = []
    for seed in range(50):
        sn, rest = _sn_outlier_margin(seed)
        ratios.append(sn / rest)
        if not sn > rest:
            failing.append(seed)
    record("C7 SN outlier", not failing, f"seeds 0-49, failing seeds={failing} min ratio={min(ratios):.2f}")


def test_c8_ballot_statistics(record):
    rng = make_rng(8)
    inst = zurich_fixture()
    s5_ok = all(
        (s.mean, s.std, s.mode, s.median) == (5.0, 0.0, 5, 5.0)
        for s in (ballot_count_stats(random_ballots(inst, F.S5, int(rng.integers(1, 300)), rng)) for _ in range(50))
    )
    # supports of size 1, 2, 2, 5: mean 2.5, median 2, population std 1.5
    d5 = [
        Ballot.point("a", F.D5, {1: 5}),
        Ballot.point("b", F.D5, {1: 4, 2: 1}),
        Ballot.point("c", F.D5, {3: 2, 4: 3}),
        Ballot.point("d", F.D5, {1: 1, 2: 1, 3: 1, 4: 1, 5: 1}),
    ]
    s = ballot_count_stats(d5)
    hand_ok = (s.mode, s.mode_frequency, s.mean, s.median, s.std, s.n) == (2, 2, 2.5, 2.0, 1.5, 4)
    # zero-point entries on S5D10 do not count as selections: sizes 5, 3, 1 -> std sqrt(8/3)
    s5d10 = [
        Ballot.point("a", F.S5D10, {1: 2, 2: 2, 3: 2, 4: 2, 5: 2}),
        Ballot.point("b", F.S5D10, {1: 5, 2: 3, 3: 2, 4: 0, 5: 0}),
        Ballot.point("c", F.S5D10, {1: 10, 2: 0, 3: 0, 4: 0, 5: 0}),
    ]
    t = ballot_count_stats(s5d10)
    hand_ok = hand_ok and (t.mean, t.median, t.mode) == (3.0, 3.0, 1) and abs(t.std - math.sqrt(8 / 3)) < 1e-12
    record("C8 ballot statistics", s5_ok and hand_ok, f"S5 constant={s5_ok} hand cases={hand_ok}")


def _strip_timestamps(text):
    return "\n".join(line for line in text.splitlines() if '"timestamp"' not in line)


def _report_snapshot(out_dir):
    snap = {}
    for path in sorted(out_dir.iterdir()):
        text = path.read_text(encoding="utf-8")
        snap[path.name] = _strip_timestamps(text) if path.suffix == ".json" else text
    return snap


def test_c9_round_trip_and_determinism(record, tmp_path):
    inst = zurich_fixture()
    by_format, profiles = gen_multiformat(inst, 40, 9)
    trips = [ser.load_instance(ser.dump_instance(inst)) == inst]
    trips.append(ser.load_profiles(ser.dump_profiles(profiles)) == profiles)
    for fmt, ballots in by_format.items():
        trips.append(ser.load_ballots(ser.dump_ballots(ballots)) == (fmt, ballots))
        for rule in RuleTag:
            out = run_rule(inst, ballots, rule)
            trips.append(ser.outcome_from_dict(json.loads(ser.dump_report(ser.outcome_to_dict(out)))) == out)
    round_trip = all(trips)

    inst_path = tmp_path / "inst.json"
    inst_path.write_text(ser.dump_instance(inst), encoding="utf-8")
    paths = []
    for fmt in (F.S5, F.D10, F.S5D10):
        p = tmp_path / f"{fmt.value}.json"
        p.write_text(ser.dump_ballots(by_format[fmt]), encoding="utf-8")
        paths.append(str(p))

    snaps = {}
    for label, workers in (("run1", 1), ("run2", 1), ("threads8", 8)):
        out = tmp_path / label
        code = main([
            "report", str(inst_path), *paths, "--kind", "sweep",
            "--budgets", "10000,30000,60000", "--hamming-budgets", "20000,40000",
            "--workers", str(workers), "--out", str(out),
        ])
        assert code == 0
        snaps[label] = _report_snapshot(out)
    same = snaps["run1"] == snaps["run2"] == snaps["threads8"]
    record("C9 round trip + determinism", round_trip and same,
           f"schemas round-trip={round_trip} reports identical (2 runs, workers 1/8)={same}")
