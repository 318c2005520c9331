"""JSON and CSV I/O for instances, ballots, outcomes and reports.

JSON is canonical. Rationals are written as ``"num/den"`` strings so that
nothing is rounded; fields ending in ``_display`` are decimal renderings
for humans only.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from pbkit import __version__
from pbkit.ballots import Ballot, InputFormat
from pbkit.model import (
    Category,
    District,
    Instance,
    MesDiagnostics,
    MesRound,
    Outcome,
    RuleTag,
    instance_from_dict,
    instance_to_dict,
)
from pbkit.simulation import VoterProfile

OUTPUT_DIR_ENV = "PBKIT_OUTPUT_DIR"


def rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str | int) -> Fraction:
    return Fraction(s) if isinstance(s, int) else Fraction(str(s))


# -- instances ---------------------------------------------------------------

def dump_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, ensure_ascii=False) + "\n"


def load_instance(text: str) -> Instance:
    return instance_from_dict(json.loads(text))


# -- ballots -----------------------------------------------------------------

def ballot_to_dict(b: Ballot) -> dict[str, Any]:
    d: dict[str, Any] = {"voter_id": b.voter_id}
    if b.approvals is not None:
        d["approvals"] = list(b.approvals)
    if b.points is not None:
        d["points"] = {str(p): s for p, s in b.points.items()}
    if b.ranking is not None:
        d["ranking"] = list(b.ranking)
    return d


def ballot_from_dict(d: Mapping[str, Any], fmt: InputFormat) -> Ballot:
    keys = [k for k in ("approvals", "points", "ranking") if k in d]
    if len(keys) != 1:
        raise ValueError(f"ballot for voter {d.get('voter_id')!r} must have exactly one content key, got {keys}")
    voter = str(d["voter_id"])
    if "approvals" in d:
        return Ballot(voter, fmt, approvals=tuple(int(p) for p in d["approvals"]))
    if "ranking" in d:
        return Ballot(voter, fmt, ranking=tuple(int(p) for p in d["ranking"]))
    return Ballot(voter, fmt, points={int(p): s for p, s in d["points"].items()})


def dump_ballots(ballots: Sequence[Ballot], fmt: InputFormat | str | None = None) -> str:
    """Ballot file text, one ballot per line so errors can point at a line."""
    if fmt is None:
        formats = {b.format for b in ballots}
        if len(formats) != 1:
            raise ValueError("cannot infer a single format")
        fmt = formats.pop()
    fmt = InputFormat(fmt)
    lines = [json.dumps(ballot_to_dict(b), ensure_ascii=False) for b in ballots]
    body = ",\n".join(lines)
    return f'{{"format": "{fmt.value}", "ballots": [\n{body}\n]}}\n'


def load_ballots(text: str) -> tuple[InputFormat, list[Ballot]]:
    data = json.loads(text)
    fmt = InputFormat(data["format"])
    return fmt, [ballot_from_dict(d, fmt) for d in data["ballots"]]


def ballot_line(text: str, index: int) -> int | None:
    """1-based line of the ``index``-th ballot, found by its voter_id key."""
    pos = -1
    for _ in range(index + 1):
        pos = text.find('"voter_id"', pos + 1)
        if pos < 0:
            return None
    return text.count("\n", 0, pos) + 1


# -- voter profiles ----------------------------------------------------------

def dump_profiles(profiles: Mapping[str, VoterProfile]) -> str:
    data = {v: {"district": p.district.value, "category": p.category.value} for v, p in profiles.items()}
    return json.dumps(data, indent=1, ensure_ascii=False) + "\n"


def load_profiles(text: str) -> dict[str, VoterProfile]:
    return {
        v: VoterProfile(District(p["district"]), Category(p["category"]))
        for v, p in json.loads(text).items()
    }


# -- outcomes ----------------------------------------------------------------

def outcome_to_dict(o: Outcome) -> dict[str, Any]:
    d: dict[str, Any] = {"rule": o.rule.value, "winners": list(o.winners), "total_cost": o.total_cost}
    if o.greedy_ties:
        d["greedy_ties"] = [list(t) for t in o.greedy_ties]
    if o.mes is not None:
        d["mes"] = {
            "final_start_budget": rational(o.mes.final_start_budget),
            "final_start_budget_display": float(o.mes.final_start_budget),
            "rounds": [
                {
                    "project": r.project,
                    "q": rational(r.q),
                    "payments": {v: rational(x) for v, x in r.payments.items()},
                    "tied_with": list(r.tied_with),
                }
                for r in o.mes.rounds
            ],
            "remaining_budgets": {v: rational(x) for v, x in o.mes.remaining_budgets.items()},
        }
    return d


def outcome_from_dict(d: Mapping[str, Any]) -> Outcome:
    mes = None
    if "mes" in d:
        m = d["mes"]
        mes = MesDiagnostics(
            parse_rational(m["final_start_budget"]),
            tuple(
                MesRound(
                    int(r["project"]),
                    parse_rational(r["q"]),
                    {v: parse_rational(x) for v, x in r["payments"].items()},
                    tuple(r.get("tied_with", ())),
                )
                for r in m["rounds"]
            ),
            {v: parse_rational(x) for v, x in m.get("remaining_budgets", {}).items()},
        )
    return Outcome(
        RuleTag(d["rule"]),
        tuple(int(p) for p in d["winners"]),
        int(d["total_cost"]),
        mes=mes,
        greedy_ties=tuple(tuple(t) for t in d.get("greedy_ties", ())),
    )


# -- files and manifests -----------------------------------------------------

def resolve_out(path: str | os.PathLike) -> Path:
    """Relative output paths land under $PBKIT_OUTPUT_DIR when it is set."""
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def file_digest(path: str | os.PathLike) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(command: str, inputs: Iterable[str], *, seed=None, parameters=None) -> dict[str, Any]:
    return {
        "command": command,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "seed": seed,
        "parameters": parameters or {},
        "engine_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def dump_report(data: Mapping[str, Any]) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()
