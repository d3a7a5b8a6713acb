"""Quartic field tables: remote ingestion, a JSONL cache and running averages of h3.

Records follow a small LMFDB-like schema. The cache is line-delimited JSON whose
first line is a schema header; records are appended once per label.
"""

from __future__ import annotations

import fcntl
import json
import logging
import time
import urllib.error
import urllib.parse
import urllib.request
from bisect import bisect_right
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .arith import is_fundamental
from .quadfield import class_group, three_torsion

__all__ = [
    "FieldRecord",
    "FieldQuery",
    "FetchResult",
    "RecordParseError",
    "DataIntegrityError",
    "FieldCache",
    "AverageReport",
    "FamilyAverages",
    "parse_remote_record",
    "fetch",
    "empirical_average",
    "d4_signature",
    "relative_unit_rank",
]

log = logging.getLogger(__name__)

SCHEMA = "torsion3.fieldrecords"
SCHEMA_VERSION = 1
DEFAULT_ENDPOINT = "https://www.lmfdb.org/api/nf_fields/"
D4_LABEL = "4T3"
D4_AUT_PERM = 8  # |N_{S4}(D4)|, the number of D4-structures on one quartic field
COMPLETENESS_TOLERANCE = 0.05


class RecordParseError(ValueError):
    def __init__(self, label: str, reason: str):
        super().__init__(f"{label}: {reason}")
        self.label = label
        self.reason = reason


class DataIntegrityError(ValueError):
    """h3(F) does not divide h3(K) for a record."""


@dataclass(frozen=True)
class FieldRecord:
    label: str
    degree: int
    disc: int
    galois_label: str
    class_group: tuple[int, ...]
    r1: int
    r2: int
    subfield_discs: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "class_group", tuple(int(x) for x in self.class_group))
        object.__setattr__(self, "subfield_discs", tuple(int(x) for x in self.subfield_discs))
        if self.r1 < 0 or self.r2 < 0 or self.r1 + 2 * self.r2 != self.degree:
            raise RecordParseError(self.label, "r1 + 2 r2 != degree")
        if any(x < 1 for x in self.class_group):
            raise RecordParseError(self.label, "class group invariants must be positive")
        if self.disc == 0 or (self.disc < 0) != (self.r2 % 2 == 1):
            raise RecordParseError(self.label, "discriminant sign disagrees with r2")
        if self.galois_label == D4_LABEL and len(self.quadratic_subfields) != 1:
            raise RecordParseError(self.label, "a D4 quartic needs exactly one quadratic subfield")

    @property
    def quadratic_subfields(self) -> tuple[int, ...]:
        return tuple(d for d in self.subfield_discs if is_fundamental(d))

    @property
    def h3(self) -> int:
        return 3 ** sum(1 for x in self.class_group if x % 3 == 0)

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "FieldRecord":
        obj = json.loads(line)
        return cls(**obj)


# ---------------------------------------------------------------------------
# remote schema


def parse_remote_record(obj: dict) -> FieldRecord:
    """One record of the remote JSON schema; schema drift raises RecordParseError."""
    label = str(obj.get("label", "<no label>"))
    try:
        degree = int(obj["degree"])
        disc = int(obj["disc_sign"]) * int(obj["disc_abs"])
        r2 = int(obj["r2"])
        subs = obj.get("subfield_discs", obj.get("subfields", []))
        return FieldRecord(
            label=label,
            degree=degree,
            disc=disc,
            galois_label=str(obj["galois_label"]),
            class_group=tuple(int(x) for x in obj["class_group"]),
            r1=degree - 2 * r2,
            r2=r2,
            subfield_discs=tuple(int(x) for x in subs),
        )
    except RecordParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordParseError(label, f"{type(exc).__name__}: {exc}") from None


# ---------------------------------------------------------------------------
# cache


class FieldCache:
    """Append-only JSONL cache keyed by label; one writer at a time (flock)."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def _header(self) -> str:
        return json.dumps({"schema": SCHEMA, "version": SCHEMA_VERSION})

    def load(self) -> list[FieldRecord]:
        if not self.path.exists():
            return []
        with self.path.open() as fh:
            head = fh.readline()
            if head.strip():
                meta = json.loads(head)
                if meta.get("schema") != SCHEMA or meta.get("version") != SCHEMA_VERSION:
                    raise ValueError(f"{self.path}: unsupported cache header {meta}")
            return [FieldRecord.from_json(line) for line in fh if line.strip()]

    def labels(self) -> set[str]:
        return {r.label for r in self.load()}

    def add(self, records: Iterable[FieldRecord]) -> int:
        """Append records whose label is new; returns how many were written."""
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a+") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                fh.seek(0)
                lines = fh.read().splitlines()
                known = {json.loads(l)["label"] for l in lines[1:] if l.strip()}
                if not lines:
                    fh.write(self._header() + "\n")
                n = 0
                for r in records:
                    if r.label in known:
                        continue
                    fh.write(r.to_json() + "\n")
                    known.add(r.label)
                    n += 1
                fh.flush()
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)
        return n

    def __len__(self) -> int:
        return len(self.load())


# ---------------------------------------------------------------------------
# fetching


@dataclass(frozen=True)
class FieldQuery:
    degree: int = 4
    galois_label: str = D4_LABEL
    disc_min: int = 1
    disc_max: int = 10 ** 4

    def params(self, offset: int) -> dict:
        return {
            "degree": self.degree,
            "galois_label": self.galois_label,
            "disc_abs": f"{self.disc_min}-{self.disc_max}",
            "_format": "json",
            "_offset": offset,
        }

    def matches(self, r: FieldRecord) -> bool:
        return (
            r.degree == self.degree
            and r.galois_label == self.galois_label
            and self.disc_min <= abs(r.disc) <= self.disc_max
        )


@dataclass
class FetchResult:
    records: list[FieldRecord]
    next_token: int | None
    degraded: bool = False
    errors: list[RecordParseError] = field(default_factory=list)
    added: int = 0


Transport = Callable[[str, dict], dict]


def urllib_transport(url: str, params: dict, timeout: float = 30.0) -> dict:
    full = url + "?" + urllib.parse.urlencode(params)
    with urllib.request.urlopen(full, timeout=timeout) as resp:
        return json.load(resp)


_last_request = [0.0]


def fetch(
    query: FieldQuery,
    page_token: int | None = 0,
    *,
    cache: FieldCache | None = None,
    transport: Transport | None = None,
    network: bool = True,
    endpoint: str = DEFAULT_ENDPOINT,
    rate_limit: float = 1.0,
    retries: int = 3,
) -> FetchResult:
    """One page of records; falls back to the cache when the network is off or fails."""

    def from_cache() -> FetchResult:
        recs = [r for r in cache.load() if query.matches(r)] if cache is not None else []
        return FetchResult(recs, None, degraded=True)

    if not network:
        return from_cache()
    transport = transport or urllib_transport
    payload = None
    for attempt in range(retries):
        wait = _last_request[0] + 1.0 / rate_limit - time.monotonic() if rate_limit > 0 else 0
        if wait > 0:
            time.sleep(wait)
        _last_request[0] = time.monotonic()
        try:
            payload = transport(endpoint, query.params(page_token or 0))
            break
        except (urllib.error.URLError, OSError, TimeoutError, json.JSONDecodeError) as exc:
            log.warning("fetch attempt %d failed: %s", attempt + 1, exc)
    if payload is None:
        log.warning("network unavailable; serving %s from cache", query)
        return from_cache()
    records, errors = [], []
    for obj in payload.get("data", []):
        try:
            records.append(parse_remote_record(obj))
        except RecordParseError as exc:
            errors.append(exc)
    nxt = payload.get("next")
    added = cache.add(records) if cache is not None else 0
    return FetchResult(records, int(nxt) if nxt is not None else None, False, errors, added)


# ---------------------------------------------------------------------------
# averages


def d4_signature(r: FieldRecord) -> str:
    """Class of complex conjugation in <(1234), (24)> for a D4 quartic record."""
    (dF,) = r.quadratic_subfields
    if r.r1 == 4:
        return "()"
    if r.r1 == 2:
        return "(24)"
    return "(13)(24)" if dF > 0 else "(12)(34)"


def relative_unit_rank(r: FieldRecord) -> int:
    (dF,) = r.quadratic_subfields
    return (r.r1 + r.r2 - 1) - (1 if dF > 0 else 0)


_h3F: dict[int, int] = {}


def _h3_quadratic(d: int) -> int:
    if d not in _h3F:
        _h3F[d] = three_torsion(d) if d < 0 else class_group(d).h3
    return _h3F[d]


def relative_h3(r: FieldRecord) -> int:
    """h3(K/F) = h3(K) / h3(F), with h3(F) computed here."""
    (dF,) = r.quadratic_subfields
    hF = _h3_quadratic(dF)
    if r.h3 % hF:
        raise DataIntegrityError(f"{r.label}: h3(F) = {hF} does not divide h3(K) = {r.h3}")
    return r.h3 // hF


@dataclass(frozen=True)
class FamilyAverages:
    family: str
    u: int
    counts: tuple[int, ...]
    avg_h3: tuple[float | None, ...]
    avg_h3_relative: tuple[float | None, ...]
    expected_counts: tuple[float, ...]
    incomplete: tuple[bool, ...]
    predictions: dict[str, Fraction | float] = field(default_factory=dict)


@dataclass(frozen=True)
class AverageReport:
    grouping: str
    X: tuple[int, ...]
    families: tuple[FamilyAverages, ...]

    @property
    def empty(self) -> bool:
        return not any(f.counts and f.counts[-1] for f in self.families)

    def rows(self) -> list[dict]:
        out = []
        for f in self.families:
            for i, x in enumerate(self.X):
                row = {
                    "family": f.family,
                    "u": f.u,
                    "X": x,
                    "count": f.counts[i],
                    "expected": round(f.expected_counts[i], 2),
                    "incomplete": f.incomplete[i],
                    "avg_h3": f.avg_h3[i],
                    "avg_h3_rel": f.avg_h3_relative[i],
                }
                row.update({k: None if v is None else float(v) for k, v in f.predictions.items()})
                out.append(row)
        return out


def _family_predictions(grouping: str, key: str, proven_truncation: int | None):
    from . import wreath

    if grouping == "unit_rank":
        u = int(key)
        return u, {"cm_relative": wreath.cm_relative_prediction(u)}
    G = wreath.d4()
    sig = wreath.parse_signature(G, key)
    rep = wreath.predict(G, sig)
    preds: dict = {"cm_relative": rep.cm_relative, "cm_full": rep.cm_full}
    if proven_truncation:
        from .constants import eval_constant

        preds["proven_weighted"] = eval_constant(f"CD4:{key}", proven_truncation).estimate
    return rep.u_rel, preds


def _family_density(grouping: str, key: str, truncation: int) -> float:
    """Expected fields per unit of X: D_{D4,Sigma} / |Aut_perm(D4)|, summed over the family."""
    from .constants import D4_SIGNATURES, eval_constant
    from . import wreath

    if grouping == "signature":
        sigs = [key]
    else:
        G = wreath.d4()
        sigs = [s for s in D4_SIGNATURES if wreath.u_of_signature(G, wreath.parse_signature(G, s)) == int(key)]
    return sum(eval_constant(f"DD4:{s}", truncation).estimate for s in sigs) / D4_AUT_PERM


def empirical_average(
    records: Sequence[FieldRecord],
    grouping: str = "signature",
    X: Sequence[int] = (10 ** 4,),
    *,
    density_truncation: int = 10 ** 4,
    proven_truncation: int | None = None,
) -> AverageReport:
    """Running averages of h3(K) and h3(K/F) over D4 quartic records, per family.

    A count that differs from D_{D4,Sigma} X / 8 by more than 5% marks the range as
    incomplete. Averages are reported as trends; no tolerance is applied.
    """
    if grouping not in ("signature", "unit_rank"):
        raise ValueError("grouping must be 'signature' or 'unit_rank'")
    X = tuple(sorted(int(x) for x in X))
    recs = [r for r in records if r.galois_label == D4_LABEL]
    if not recs:
        return AverageReport(grouping, X, ())
    keyf = d4_signature if grouping == "signature" else (lambda r: str(relative_unit_rank(r)))
    groups: dict[str, list[FieldRecord]] = {}
    for r in recs:
        groups.setdefault(keyf(r), []).append(r)
    families = []
    for key in sorted(groups):
        rs = sorted(groups[key], key=lambda r: abs(r.disc))
        discs = [abs(r.disc) for r in rs]
        h3 = [r.h3 for r in rs]
        rel = [relative_h3(r) for r in rs]
        u, preds = _family_predictions(grouping, key, proven_truncation)
        density = _family_density(grouping, key, density_truncation)
        counts, a_abs, a_rel, exp, flags = [], [], [], [], []
        for x in X:
            n = bisect_right(discs, x)
            counts.append(n)
            a_abs.append(sum(h3[:n]) / n if n else None)
            a_rel.append(sum(rel[:n]) / n if n else None)
            e = density * x
            exp.append(e)
            flags.append(abs(n - e) > COMPLETENESS_TOLERANCE * e)
        families.append(
            FamilyAverages(key, u, tuple(counts), tuple(a_abs), tuple(a_rel), tuple(exp), tuple(flags), preds)
        )
    return AverageReport(grouping, X, tuple(families))
