from fractions import Fraction

from hypothesis import given, strategies as st

from pbkit import serialize as ser
from pbkit.ballots import InputFormat
from pbkit.model import RuleTag, zurich_fixture
from pbkit.rules import run_rule
from pbkit.simulation import gen_multiformat, make_rng, random_ballots, random_instance, sample_polarised, PolarisedConfig

F = InputFormat


def test_instance_round_trip(fixture_instance):
    text = ser.dump_instance(fixture_instance)
    assert ser.load_instance(text) == fixture_instance
    assert "Süd" in text  # written as UTF-8, not escaped


@given(st.integers(0, 10_000))
def test_random_instance_round_trip(seed):
    inst = random_instance(make_rng(seed))
    assert ser.load_instance(ser.dump_instance(inst)) == inst


def test_ballot_round_trip_all_formats(fixture_instance):
    by_format, profiles = gen_multiformat(fixture_instance, 25, 4)
    for fmt, ballots in by_format.items():
        text = ser.dump_ballots(ballots)
        assert ser.load_ballots(text) == (fmt, ballots)
        # one ballot per line, after the header line
        assert ser.ballot_line(text, 0) == 2
        assert ser.ballot_line(text, 24) == 26
    assert ser.load_profiles(ser.dump_profiles(profiles)) == profiles


def test_outcome_round_trip(fixture_instance):
    by_format, _ = gen_multiformat(fixture_instance, 40, 2)
    for rule in RuleTag:
        out = run_rule(fixture_instance, by_format[F.D10], rule)
        assert ser.outcome_from_dict(ser.outcome_to_dict(out)) == out


def test_outcome_schema(fixture_instance):
    ballots, _ = sample_polarised(fixture_instance, PolarisedConfig(num_agents=30, seed=1))
    d = ser.outcome_to_dict(run_rule(fixture_instance, ballots, "MES"))
    assert set(d) >= {"rule", "winners", "total_cost", "mes"}
    rnd = d["mes"]["rounds"][0]
    assert set(rnd) >= {"project", "q", "payments"}
    num, den = rnd["q"].split("/")
    assert int(den) > 0 and Fraction(int(num), int(den)) == Fraction(rnd["q"])


@given(st.fractions())
def test_rational_round_trip(x):
    assert ser.parse_rational(ser.rational(x)) == x


@given(st.integers(0, 5000), st.sampled_from(list(F)))
def test_random_ballots_round_trip(seed, fmt):
    rng = make_rng(seed)
    inst = random_instance(rng, 24)
    if len(inst.projects) < 5:
        return
    ballots = random_ballots(inst, fmt, 5, rng)
    assert ser.load_ballots(ser.dump_ballots(ballots)) == (fmt, ballots)


def test_write_atomic_leaves_no_temp(tmp_path):
    target = tmp_path / "sub" / "x.json"
    ser.write_atomic(target, "hello\n")
    assert target.read_text() == "hello\n"
    assert [p.name for p in target.parent.iterdir()] == ["x.json"]


def test_resolve_out_env(monkeypatch, tmp_path):
    monkeypatch.setenv(ser.OUTPUT_DIR_ENV, str(tmp_path))
    assert ser.resolve_out("a.json") == tmp_path / "a.json"
    assert ser.resolve_out("/abs/a.json") == ser.Path("/abs/a.json")
