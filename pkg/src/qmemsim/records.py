"""Experiment records and their CSV / JSON persistence."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields

MEMORY_TIME = "memory-time"
THRESHOLD = "threshold"
CHUNK = "chunk"
DECODE = "decode"

# mandatory leading columns per experiment kind; "duration" always trails
CSV_COLUMNS = {
    MEMORY_TIME: ["code", "L", "beta", "seed", "sample", "t_fail", "kind"],
    THRESHOLD: ["code", "L", "p", "seed", "trials", "failures"],
    CHUNK: ["code", "L", "p", "seed", "sample", "level"],
    DECODE: ["code", "L", "seed", "sample", "verdict"],
}
_CSV_FIELD = {"kind": "outcome", "verdict": "outcome"}
_INT = {"L", "seed", "sample", "trials", "failures", "level"}
_FLOAT = {"beta", "p", "t_fail", "duration"}


def sig(x: float, digits: int) -> float:
    return float(f"{x:.{digits}g}")


@dataclass(frozen=True)
class ExperimentRecord:
    """One measured outcome.

    ``outcome`` holds the failure kind of a memory-time sample, a decode
    verdict, or is unused.  Failure times keep 9 significant digits and
    durations 6, so that text round trips are exact.
    """

    experiment: str
    code: str
    L: int
    seed: int
    beta: float | None = None
    p: float | None = None
    sample: int | None = None
    t_fail: float | None = None
    outcome: str | None = None
    trials: int | None = None
    failures: int | None = None
    level: int | None = None
    duration: float = 0.0

    def __post_init__(self):
        if self.t_fail is not None:
            object.__setattr__(self, "t_fail", sig(self.t_fail, 9))
        object.__setattr__(self, "duration", sig(self.duration, 6))

    @property
    def key(self) -> tuple:
        return (self.experiment, self.code, self.L, self.beta, self.p, self.seed, self.sample)

    @property
    def fraction(self) -> float:
        return self.failures / self.trials if self.trials else float("nan")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentRecord":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def _fmt(name, value):
    if value is None:
        return ""
    if name == "t_fail":
        return f"{value:.9g}"
    if name in _FLOAT:
        return repr(float(value))
    return str(value)


def _parse(name, text):
    if text == "":
        return None
    if name in _INT:
        return int(text)
    if name in _FLOAT:
        return float(text)
    return text


def write_csv(records, out=None) -> str:
    """Write records of a single experiment kind; returns the text."""
    records = list(records)
    kinds = {r.experiment for r in records}
    if len(kinds) > 1:
        raise ValueError(f"mixed experiment kinds: {sorted(kinds)}")
    exp = kinds.pop() if kinds else MEMORY_TIME
    cols = CSV_COLUMNS[exp] + ["duration"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        w.writerow([_fmt(_CSV_FIELD.get(c, c), getattr(r, _CSV_FIELD.get(c, c))) for c in cols])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(source) -> list:
    """Parse CSV text or a path written by :func:`write_csv`."""
    if "\n" not in str(source):
        with open(source, newline="") as fh:
            source = fh.read()
    rows = list(csv.reader(io.StringIO(source)))
    header = rows[0]
    exp = next(k for k, cols in CSV_COLUMNS.items() if header[:len(cols)] == cols)
    out = []
    for row in rows[1:]:
        vals = {}
        for c, text in zip(header, row):
            name = _CSV_FIELD.get(c, c)
            vals[name] = _parse(name, text)
        if vals.get("duration") is None:
            vals["duration"] = 0.0
        out.append(ExperimentRecord(experiment=exp, **vals))
    return out


def write_json(records, out=None) -> str:
    text = json.dumps([r.to_dict() for r in records], indent=1)
    if out is not None:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def read_json(source) -> list:
    if not str(source).lstrip().startswith("["):
        with open(source) as fh:
            source = fh.read()
    return [ExperimentRecord.from_dict(d) for d in json.loads(source)]
