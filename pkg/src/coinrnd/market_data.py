"""Snapshot ingestion: instrument names, quote records, chain filtering.

Snapshot files are UTF-8 JSON lines, one best bid/ask per instrument::

    {"instrument": "BTC-29MAR19-4000-C", "bid": 0.0525, "ask": 0.0600, "ts": 1544501400}

``bid`` and ``ask`` may be absent. ``ts`` is UNIX seconds.
"""

from __future__ import annotations

import datetime as dt
import enum
import io
import json
import math
import os
import re
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .errors import (
    EmptySnapshot,
    MalformedInstrument,
    MalformedLine,
    NoExchangeOnline,
    NoQuotesForMaturity,
)

MONTHS = ("JAN", "FEB", "MAR", "APR", "MAY", "JUN",
          "JUL", "AUG", "SEP", "OCT", "NOV", "DEC")

#: Options and futures settle at 08:00 UTC on the maturity date.
SETTLEMENT_HOUR_UTC = 8

_NAME_RE = re.compile(
    r"^(?P<sym>[A-Z][A-Z0-9]*)-(?P<day>\d{1,2})(?P<mon>[A-Z]{3})(?P<yr>\d{2})"
    r"(?:-(?P<strike>\d+)-(?P<kind>[CP]))?$"
)


class Kind(enum.Enum):
    CALL = "C"
    PUT = "P"
    FUTURE = "F"


@dataclass(frozen=True)
class InstrumentSpec:
    underlying: str
    maturity: dt.date
    strike: int | None
    kind: Kind

    @property
    def is_option(self) -> bool:
        return self.kind is not Kind.FUTURE


@dataclass(frozen=True)
class QuoteRecord:
    instrument: InstrumentSpec
    bid: float | None
    ask: float | None
    timestamp: int

    @property
    def mid(self) -> float | None:
        if self.bid is None or self.ask is None:
            return None
        return 0.5 * (self.bid + self.ask)


@dataclass(frozen=True)
class OptionChain:
    """Filtered option quotes of one maturity at one snapshot time."""

    maturity: dt.date
    snapshot_time: int
    quotes: tuple[QuoteRecord, ...]
    time_to_maturity: float  # minutes

    @property
    def strikes(self) -> list[int]:
        return sorted({q.instrument.strike for q in self.quotes})


def format_maturity(d: dt.date) -> str:
    return f"{d.day:02d}{MONTHS[d.month - 1]}{d.year % 100:02d}"


def parse_maturity(code: str) -> dt.date:
    m = re.fullmatch(r"(\d{1,2})([A-Z]{3})(\d{2})", code)
    if not m or m.group(2) not in MONTHS:
        raise ValueError(f"bad maturity code {code!r}")
    return dt.date(2000 + int(m.group(3)), MONTHS.index(m.group(2)) + 1, int(m.group(1)))


def parse_instrument(name: str) -> InstrumentSpec:
    """Parse ``SYM-DDMMMYY[-STRIKE-(C|P)]``.

    >>> parse_instrument("BTC-29MAR19-4000-C")
    InstrumentSpec(underlying='BTC', maturity=datetime.date(2019, 3, 29), strike=4000, kind=<Kind.CALL: 'C'>)
    """
    m = _NAME_RE.match(name) if isinstance(name, str) else None
    if m is None or m.group("mon") not in MONTHS:
        raise MalformedInstrument(name)
    try:
        maturity = dt.date(2000 + int(m.group("yr")),
                           MONTHS.index(m.group("mon")) + 1,
                           int(m.group("day")))
    except ValueError:
        raise MalformedInstrument(name) from None
    if m.group("strike") is None:
        return InstrumentSpec(m.group("sym"), maturity, None, Kind.FUTURE)
    strike = int(m.group("strike"))
    if strike <= 0:
        raise MalformedInstrument(name)
    return InstrumentSpec(m.group("sym"), maturity, strike, Kind(m.group("kind")))


def format_instrument(spec: InstrumentSpec) -> str:
    base = f"{spec.underlying}-{format_maturity(spec.maturity)}"
    if spec.kind is Kind.FUTURE:
        return base
    return f"{base}-{spec.strike}-{spec.kind.value}"


def _price(value, line_no, key):
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedLine(line_no, f"{key} is not a number")
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise MalformedLine(line_no, f"{key} must be a finite non-negative number")
    return value


def load_snapshot(source: IO | str | os.PathLike) -> list[QuoteRecord]:
    """Read one snapshot file into quote records, preserving line order.

    ``source`` is a path or an open binary/text stream. Blank lines are
    skipped; anything else that does not parse raises :class:`MalformedLine`
    with its 1-based line number.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return load_snapshot(fh)
    data = source.read()
    text = data.decode("utf-8") if isinstance(data, bytes) else data

    records = []
    for line_no, line in enumerate(io.StringIO(text), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(line_no, str(exc)) from None
        if not isinstance(obj, dict) or "instrument" not in obj or "ts" not in obj:
            raise MalformedLine(line_no, "missing 'instrument' or 'ts'")
        try:
            spec = parse_instrument(obj["instrument"])
        except MalformedInstrument as exc:
            raise MalformedLine(line_no, str(exc)) from None
        ts = obj["ts"]
        if isinstance(ts, bool) or not isinstance(ts, (int, float)):
            raise MalformedLine(line_no, "ts is not a number")
        records.append(QuoteRecord(
            instrument=spec,
            bid=_price(obj.get("bid"), line_no, "bid"),
            ask=_price(obj.get("ask"), line_no, "ask"),
            timestamp=int(ts),
        ))
    if not records:
        raise EmptySnapshot("snapshot contains no records")
    return records


def dump_snapshot(records: Iterable[QuoteRecord], stream: IO[str]) -> None:
    """Write records in the line format read by :func:`load_snapshot`."""
    for r in records:
        obj = {"instrument": format_instrument(r.instrument)}
        if r.bid is not None:
            obj["bid"] = r.bid
        if r.ask is not None:
            obj["ask"] = r.ask
        obj["ts"] = r.timestamp
        stream.write(json.dumps(obj) + "\n")


def settlement_time(maturity: dt.date) -> int:
    t = dt.datetime(maturity.year, maturity.month, maturity.day,
                    SETTLEMENT_HOUR_UTC, tzinfo=dt.timezone.utc)
    return int(t.timestamp())


def maturities(records: Sequence[QuoteRecord]) -> list[dt.date]:
    """Option maturities present in ``records``, ascending."""
    return sorted({r.instrument.maturity for r in records if r.instrument.is_option})


def _usable(r: QuoteRecord) -> bool:
    return (r.bid is not None and r.ask is not None
            and r.bid > 0 and r.ask >= r.bid)


def filter_chain(records: Sequence[QuoteRecord], maturity: dt.date) -> OptionChain:
    """Keep options of ``maturity`` quoted on both sides with an uncrossed book."""
    kept = tuple(r for r in records
                 if r.instrument.is_option and r.instrument.maturity == maturity
                 and _usable(r))
    if not kept:
        raise NoQuotesForMaturity(f"no two-sided option quotes for {maturity}")
    snapshot_time = max(r.timestamp for r in kept)
    tau = (settlement_time(maturity) - snapshot_time) / 60.0
    if tau <= 0:
        raise NoQuotesForMaturity(f"maturity {maturity} has already settled")
    return OptionChain(maturity, snapshot_time, kept, tau)


def index_average(quotes: Iterable[tuple[str, float, bool]]) -> float:
    """Exchange index from ``(exchange_id, price, online)`` triples.

    With four or more exchanges online the single highest and single lowest
    price are dropped and the rest averaged equally; with three or fewer all
    online prices are averaged.
    """
    prices = sorted(float(p) for _, p, online in quotes if online)
    if not prices:
        raise NoExchangeOnline("no exchange online")
    if len(prices) >= 4:
        prices = prices[1:-1]
    # the division can round one ulp outside the quoted range
    return min(max(math.fsum(prices) / len(prices), prices[0]), prices[-1])
