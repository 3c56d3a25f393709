"""Decoded transaction logs as an in-memory property graph.

The input universe is a line-delimited file of already-decoded transactions
(one JSON object per line, events nested).  Loading produces an immutable
:class:`PropertyGraph` holding Transaction, Event and EventProperty nodes.
Identical property values appearing in different events are linked through a
value index: the index stands in for materialized SAME_VALUE edges, which
would blow up quadratically on common values, and also yields the unique
property pair nodes (one per value shared by two or more events).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatVersionError, SchemaError

GRAPH_FORMAT = "chainflow-graph/1"

_HASH_RE = re.compile(r"0x[0-9a-f]{64}$")
_ADDR_RE = re.compile(r"0x[0-9a-f]{40}$")


def canonical_hash(value: str) -> str:
    v = str(value).lower()
    if not _HASH_RE.match(v):
        raise SchemaError(f"not a 32-byte hex hash: {value!r}")
    return v


def canonical_address(value: str) -> str:
    v = str(value).lower()
    if not _ADDR_RE.match(v):
        raise SchemaError(f"not a 20-byte hex address: {value!r}")
    return v


def is_address(value: str) -> bool:
    return bool(_ADDR_RE.match(str(value).lower()))


def canonical_value(value) -> str:
    """Canonical string form for an event property value.

    Addresses become lowercase hex, integers become decimal strings (wei
    amounts stay exact), everything else is kept verbatim.
    """
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    s = str(value)
    if is_address(s):
        return s.lower()
    return s


@dataclass(frozen=True)
class EventRecord:
    tx_hash: str
    log_index: int
    name: str
    properties: tuple[tuple[str, str], ...]  # ordered (key, canonical value)


@dataclass(frozen=True)
class TxRecord:
    tx_hash: str
    block_number: int
    tx_index: int
    from_addr: str
    to_addr: str
    value: str  # decimal wei string
    timestamp: int
    events: tuple[EventRecord, ...]


@dataclass(frozen=True)
class LineError:
    line_number: int
    message: str


@dataclass(frozen=True)
class PropertyGraph:
    """Immutable canonical graph over transactions, events and properties."""

    transactions: tuple[TxRecord, ...]
    errors: tuple[LineError, ...] = field(default=(), compare=False)

    # derived indexes, excluded from equality
    _tx_by_hash: dict = field(default_factory=dict, compare=False, repr=False)
    _from_index: dict = field(default_factory=dict, compare=False, repr=False)
    _value_index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for tx in self.transactions:
            self._tx_by_hash[tx.tx_hash] = tx
            self._from_index.setdefault(tx.from_addr, []).append(tx.tx_hash)
            for ev in tx.events:
                for key, value in ev.properties:
                    self._value_index.setdefault(value, []).append(
                        (tx.tx_hash, ev.log_index, key)
                    )

    # -- lookups -----------------------------------------------------------

    def tx(self, tx_hash: str) -> TxRecord:
        return self._tx_by_hash[tx_hash]

    def has_tx(self, tx_hash: str) -> bool:
        return tx_hash in self._tx_by_hash

    def txs_from(self, address: str) -> list[TxRecord]:
        return [self._tx_by_hash[h] for h in self._from_index.get(address, [])]

    def txs_with_property_value(self, value: str) -> list[TxRecord]:
        """Transactions containing >= 1 event property with this canonical value."""
        seen: dict[str, None] = {}
        for tx_hash, _log_index, _key in self._value_index.get(value, []):
            seen.setdefault(tx_hash, None)
        return [self._tx_by_hash[h] for h in seen]

    def property_sites(self, value: str) -> list[tuple[str, int, str]]:
        """(tx_hash, log_index, key) locations carrying this canonical value."""
        return list(self._value_index.get(value, []))

    def property_values(self) -> list[str]:
        return list(self._value_index.keys())

    # -- node / edge accounting --------------------------------------------

    def node_counts(self) -> dict[str, int]:
        n_events = sum(len(tx.events) for tx in self.transactions)
        n_props = sum(len(ev.properties) for tx in self.transactions for ev in tx.events)
        return {
            "Transaction": len(self.transactions),
            "Event": n_events,
            "EventProperty": n_props,
            "UniquePropertyPair": len(self.unique_property_pairs()),
        }

    def edge_counts(self) -> dict[str, int]:
        n_events = sum(len(tx.events) for tx in self.transactions)
        n_props = sum(len(ev.properties) for tx in self.transactions for ev in tx.events)
        return {
            "EMITS": n_events,
            "HAS": n_props,
            "SAME_VALUE": self.same_value_link_count(),
        }

    def unique_property_pairs(self) -> list[str]:
        """Canonical values shared by properties of two or more distinct events."""
        out = []
        for value, sites in self._value_index.items():
            events = {(h, i) for h, i, _ in sites}
            if len(events) > 1:
                out.append(value)
        return out

    def same_value_links(self):
        """Yield unordered pairs of property sites linked by an identical value.

        Pairs within the same event are excluded: the links exist to connect
        property information across events.
        """
        for value, sites in self._value_index.items():
            for i in range(len(sites)):
                for j in range(i + 1, len(sites)):
                    a, b = sites[i], sites[j]
                    if (a[0], a[1]) != (b[0], b[1]):
                        yield value, a, b

    def same_value_link_count(self) -> int:
        total = 0
        for _value, sites in self._value_index.items():
            n = len(sites)
            all_pairs = n * (n - 1) // 2
            per_event: dict[tuple[str, int], int] = {}
            for h, i, _ in sites:
                per_event[(h, i)] = per_event.get((h, i), 0) + 1
            intra = sum(c * (c - 1) // 2 for c in per_event.values())
            total += all_pairs - intra
        return total


# ---------------------------------------------------------------------------
# loading


_REQUIRED_TX_FIELDS = ("tx_hash", "block_number", "tx_index", "from", "to", "value", "timestamp")


def _parse_line(obj: dict) -> TxRecord:
    for name in _REQUIRED_TX_FIELDS:
        if name not in obj:
            raise SchemaError(f"missing required field {name!r}")
    tx_hash = canonical_hash(obj["tx_hash"])
    from_addr = canonical_address(obj["from"])
    to_addr = canonical_address(obj["to"])
    try:
        block_number = int(obj["block_number"])
        tx_index = int(obj["tx_index"])
        timestamp = int(obj["timestamp"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"non-integer block/index/timestamp: {exc}") from exc
    if block_number < 0 or tx_index < 0:
        raise SchemaError("block_number and tx_index must be non-negative")
    if timestamp <= 0:
        raise SchemaError("timestamp must be strictly positive")
    try:
        value = str(int(str(obj["value"])))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"value is not a decimal integer: {obj['value']!r}") from exc

    events = []
    seen_logs = set()
    raw_events = obj.get("events", [])
    if not isinstance(raw_events, list):
        raise SchemaError("events must be a list")
    for ev in raw_events:
        if not isinstance(ev, dict):
            raise SchemaError("event entries must be objects")
        if "log_index" not in ev or "name" not in ev:
            raise SchemaError("event missing log_index or name")
        try:
            log_index = int(ev["log_index"])
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"non-integer log_index: {ev['log_index']!r}") from exc
        if log_index < 0:
            raise SchemaError("log_index must be non-negative")
        if log_index in seen_logs:
            raise SchemaError(f"duplicate log_index {log_index}")
        seen_logs.add(log_index)
        raw_props = ev.get("properties", {})
        if not isinstance(raw_props, dict):
            raise SchemaError("event properties must be an object")
        props = []
        for key, value_ in raw_props.items():
            if not key:
                raise SchemaError("empty property key")
            props.append((str(key), canonical_value(value_)))
        events.append(
            EventRecord(
                tx_hash=tx_hash,
                log_index=log_index,
                name=str(ev["name"]),
                properties=tuple(props),
            )
        )
    events.sort(key=lambda e: e.log_index)
    return TxRecord(
        tx_hash=tx_hash,
        block_number=block_number,
        tx_index=tx_index,
        from_addr=from_addr,
        to_addr=to_addr,
        value=value,
        timestamp=timestamp,
        events=tuple(events),
    )


def _canonicalize(records: list[TxRecord]) -> tuple[TxRecord, ...]:
    return tuple(sorted(records, key=lambda t: (t.block_number, t.tx_index, t.tx_hash)))


def load_dataset(path: str | Path, strict: bool = False) -> PropertyGraph:
    """Parse a line-delimited decoded-transaction file into a PropertyGraph.

    Malformed lines are skipped and collected into ``graph.errors``; with
    ``strict`` the first schema violation raises instead.  The resulting graph
    is canonical: shuffling input lines yields an identical graph.
    """
    records: list[TxRecord] = []
    errors: list[LineError] = []
    seen_hashes: set[str] = set()
    seen_slots: set[tuple[int, int]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise SchemaError("line is not a JSON object")
                tx = _parse_line(obj)
                if tx.tx_hash in seen_hashes:
                    raise SchemaError(f"duplicate tx_hash {tx.tx_hash}")
                slot = (tx.block_number, tx.tx_index)
                if slot in seen_slots:
                    raise SchemaError(f"duplicate (block_number, tx_index) {slot}")
            except json.JSONDecodeError as exc:
                err = SchemaError(f"invalid JSON: {exc}")
                if strict:
                    raise err from exc
                errors.append(LineError(lineno, str(err)))
                continue
            except SchemaError as exc:
                if strict:
                    raise
                errors.append(LineError(lineno, str(exc)))
                continue
            seen_hashes.add(tx.tx_hash)
            seen_slots.add((tx.block_number, tx.tx_index))
            records.append(tx)
    return PropertyGraph(transactions=_canonicalize(records), errors=tuple(errors))


def graph_from_records(objs: list[dict]) -> PropertyGraph:
    """Build a graph from in-memory transaction dicts (same schema as the file)."""
    records = []
    for obj in objs:
        records.append(_parse_line(obj))
    return PropertyGraph(transactions=_canonicalize(records))


def distinct_addresses(g: PropertyGraph) -> list[str]:
    """All 20-byte addresses seen as senders, receivers or property values, sorted."""
    found: set[str] = set()
    for tx in g.transactions:
        found.add(tx.from_addr)
        found.add(tx.to_addr)
    for value in g.property_values():
        if is_address(value):
            found.add(value)
    return sorted(found)


# ---------------------------------------------------------------------------
# persistence


def _dump(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=True, separators=(",", ":"))


def save_graph(g: PropertyGraph, directory: str | Path) -> None:
    """Persist the graph as header + line-delimited node and edge files.

    Output is byte-stable: saving the same graph twice produces identical
    files.  SAME_VALUE links and unique property pair nodes are derived from
    the value index on load and are not written out.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "header.json").write_text(_dump({"format": GRAPH_FORMAT}) + "\n", encoding="utf-8")

    node_lines = []
    edge_lines = []
    for tx in g.transactions:
        node_lines.append(
            _dump(
                {
                    "type": "Transaction",
                    "tx_hash": tx.tx_hash,
                    "block_number": tx.block_number,
                    "tx_index": tx.tx_index,
                    "from": tx.from_addr,
                    "to": tx.to_addr,
                    "value": tx.value,
                    "timestamp": tx.timestamp,
                }
            )
        )
        for ev in tx.events:
            node_lines.append(
                _dump(
                    {
                        "type": "Event",
                        "tx_hash": tx.tx_hash,
                        "log_index": ev.log_index,
                        "name": ev.name,
                    }
                )
            )
            edge_lines.append(
                _dump({"type": "EMITS", "tx_hash": tx.tx_hash, "log_index": ev.log_index})
            )
            for key, value in ev.properties:
                node_lines.append(
                    _dump(
                        {
                            "type": "EventProperty",
                            "tx_hash": tx.tx_hash,
                            "log_index": ev.log_index,
                            "key": key,
                            "value": value,
                        }
                    )
                )
                edge_lines.append(
                    _dump(
                        {
                            "type": "HAS",
                            "tx_hash": tx.tx_hash,
                            "log_index": ev.log_index,
                            "key": key,
                        }
                    )
                )
    (directory / "nodes.jsonl").write_text("\n".join(node_lines) + ("\n" if node_lines else ""), encoding="utf-8")
    (directory / "edges.jsonl").write_text("\n".join(edge_lines) + ("\n" if edge_lines else ""), encoding="utf-8")


def load_graph(directory: str | Path) -> PropertyGraph:
    directory = Path(directory)
    header_path = directory / "header.json"
    if not header_path.exists():
        raise FormatVersionError(f"no graph header in {directory}")
    header = json.loads(header_path.read_text(encoding="utf-8"))
    if header.get("format") != GRAPH_FORMAT:
        raise FormatVersionError(f"unsupported graph format: {header.get('format')!r}")

    txs: dict[str, dict] = {}
    events: dict[tuple[str, int], dict] = {}
    with open(directory / "nodes.jsonl", "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            node = json.loads(line)
            kind = node.pop("type")
            if kind == "Transaction":
                node["events"] = []
                txs[node["tx_hash"]] = node
            elif kind == "Event":
                node["properties"] = []
                events[(node["tx_hash"], node["log_index"])] = node
                txs[node["tx_hash"]]["events"].append(node)
            elif kind == "EventProperty":
                events[(node["tx_hash"], node["log_index"])]["properties"].append(
                    (node["key"], node["value"])
                )
            else:
                raise FormatVersionError(f"unknown node type {kind!r}")

    records = []
    for tx in txs.values():
        evs = tuple(
            EventRecord(
                tx_hash=tx["tx_hash"],
                log_index=ev["log_index"],
                name=ev["name"],
                properties=tuple(ev["properties"]),
            )
            for ev in sorted(tx["events"], key=lambda e: e["log_index"])
        )
        records.append(
            TxRecord(
                tx_hash=tx["tx_hash"],
                block_number=tx["block_number"],
                tx_index=tx["tx_index"],
                from_addr=tx["from"],
                to_addr=tx["to"],
                value=tx["value"],
                timestamp=tx["timestamp"],
                events=evs,
            )
        )
    return PropertyGraph(transactions=_canonicalize(records))
