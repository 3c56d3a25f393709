"""Timestamp-ordered event sequences for wallet addresses and NFT token ids.

An address has two kinds of sequence entries: transactions it submitted
(FromAddress) and transactions submitted by someone else that mention the
address as an event property value (PropertyMatch).  Token sequences are
always property matches.  Entries carry an extracted payload (token, asset,
ticket and pack ids, related addresses, raw values) pulled out of the event
properties through configurable key sets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .config import ExtractionKeys
from .ingest import PropertyGraph, TxRecord, is_address


class Origin(enum.Enum):
    FROM_ADDRESS = "FromAddress"
    PROPERTY_MATCH = "PropertyMatch"


@dataclass(frozen=True)
class StepData:
    """Payload extracted from one entry's event properties."""

    token_ids: tuple[str, ...] = ()
    asset_ids: tuple[str, ...] = ()
    ticket_ids: tuple[str, ...] = ()
    pack_ids: tuple[str, ...] = ()
    related_addresses: tuple[str, ...] = ()
    values: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "token_ids": list(self.token_ids),
            "asset_ids": list(self.asset_ids),
            "ticket_ids": list(self.ticket_ids),
            "pack_ids": list(self.pack_ids),
            "related_addresses": list(self.related_addresses),
            "values": list(self.values),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StepData":
        return cls(
            token_ids=tuple(doc.get("token_ids", ())),
            asset_ids=tuple(doc.get("asset_ids", ())),
            ticket_ids=tuple(doc.get("ticket_ids", ())),
            pack_ids=tuple(doc.get("pack_ids", ())),
            related_addresses=tuple(doc.get("related_addresses", ())),
            values=tuple(doc.get("values", ())),
        )


@dataclass(frozen=True)
class EventSeqEntry:
    tx_hash: str
    timestamp: int
    block_number: int
    tx_index: int
    event_names: tuple[str, ...]  # ordered by log_index
    origin: Origin
    data: StepData


@dataclass(frozen=True)
class AddressSequences:
    address: str
    entries: tuple[EventSeqEntry, ...]


@dataclass(frozen=True)
class TokenSequences:
    token_id: str
    key: str  # token_id, or "contract:token_id" under contract+id keying
    entries: tuple[EventSeqEntry, ...]
    is_multiple: bool


def extract_step_data(tx: TxRecord, keys: ExtractionKeys) -> StepData:
    """Pull the payload id lists out of a transaction's event properties.

    Each list is deduplicated in first-seen order across the transaction's
    events so bulk events merging chunk values do not double count.
    """
    token_ids: dict[str, None] = {}
    asset_ids: dict[str, None] = {}
    ticket_ids: dict[str, None] = {}
    pack_ids: dict[str, None] = {}
    related: dict[str, None] = {}
    values: dict[str, None] = {}
    for ev in tx.events:
        for key, value in ev.properties:
            if key in keys.token_keys:
                token_ids.setdefault(value, None)
            if key in keys.asset_keys:
                asset_ids.setdefault(value, None)
            if key in keys.ticket_keys:
                ticket_ids.setdefault(value, None)
            if key in keys.pack_keys:
                pack_ids.setdefault(value, None)
            if key in keys.value_keys:
                values.setdefault(value, None)
            if is_address(value):
                related.setdefault(value, None)
    return StepData(
        token_ids=tuple(token_ids),
        asset_ids=tuple(asset_ids),
        ticket_ids=tuple(ticket_ids),
        pack_ids=tuple(pack_ids),
        related_addresses=tuple(related),
        values=tuple(values),
    )


def _entry(tx: TxRecord, origin: Origin, keys: ExtractionKeys) -> EventSeqEntry:
    return EventSeqEntry(
        tx_hash=tx.tx_hash,
        timestamp=tx.timestamp,
        block_number=tx.block_number,
        tx_index=tx.tx_index,
        event_names=tuple(ev.name for ev in tx.events),
        origin=origin,
        data=extract_step_data(tx, keys),
    )


def _sort_entries(entries: list[EventSeqEntry]) -> tuple[EventSeqEntry, ...]:
    return tuple(sorted(entries, key=lambda e: (e.timestamp, e.block_number, e.tx_index)))


def sequences_for_address(
    g: PropertyGraph, address: str, keys: ExtractionKeys | None = None
) -> AddressSequences:
    """Both sequence kinds for one address, sorted by (timestamp, block, index).

    A transaction submitted by the address never reappears as a property
    match, and a property-matched transaction is counted once no matter how
    many of its properties carry the address.
    """
    keys = keys or ExtractionKeys()
    entries: list[EventSeqEntry] = []
    submitted: set[str] = set()
    for tx in g.txs_from(address):
        submitted.add(tx.tx_hash)
        entries.append(_entry(tx, Origin.FROM_ADDRESS, keys))
    for tx in g.txs_with_property_value(address):
        if tx.tx_hash in submitted:
            continue
        entries.append(_entry(tx, Origin.PROPERTY_MATCH, keys))
    return AddressSequences(address=address, entries=_sort_entries(entries))


def _token_key(tx: TxRecord, token_id: str, mode: str) -> str:
    if mode == "tokenid-only":
        return token_id
    return f"{tx.to_addr}:{token_id}"


def sequences_for_token(
    g: PropertyGraph, token_id: str, keys: ExtractionKeys | None = None
) -> TokenSequences:
    """All transactions carrying the token id under a configured tokenId key."""
    keys = keys or ExtractionKeys()
    entries: list[EventSeqEntry] = []
    seen: set[str] = set()
    for tx_hash, log_index, key in g.property_sites(token_id):
        if key not in keys.token_keys or tx_hash in seen:
            continue
        seen.add(tx_hash)
        entries.append(_entry(g.tx(tx_hash), Origin.PROPERTY_MATCH, keys))
    ordered = _sort_entries(entries)
    return TokenSequences(
        token_id=token_id,
        key=token_id,
        entries=ordered,
        is_multiple=_is_multiple(g, ordered),
    )


def _is_multiple(g: PropertyGraph, entries: tuple[EventSeqEntry, ...]) -> bool:
    if len(entries) > 1:
        return True
    addresses = {g.tx(e.tx_hash).from_addr for e in entries}
    return len(addresses) > 1


def all_token_sequences(
    g: PropertyGraph, keys: ExtractionKeys | None = None
) -> dict[str, TokenSequences]:
    """Token sequences for every token id in the graph, keyed per config.

    Under ``contract+id`` keying the same numeric id used against two
    different contracts yields two independent sequences; ``tokenid-only``
    reproduces the weaker id-level keying.
    """
    keys = keys or ExtractionKeys()
    buckets: dict[str, dict] = {}
    for value in g.property_values():
        for tx_hash, log_index, key in g.property_sites(value):
            if key not in keys.token_keys:
                continue
            tx = g.tx(tx_hash)
            token_key = _token_key(tx, value, keys.token_key_mode)
            bucket = buckets.setdefault(token_key, {"token_id": value, "hashes": {}})
            bucket["hashes"].setdefault(tx_hash, None)
    out: dict[str, TokenSequences] = {}
    for token_key in sorted(buckets):
        bucket = buckets[token_key]
        entries = _sort_entries(
            [_entry(g.tx(h), Origin.PROPERTY_MATCH, keys) for h in bucket["hashes"]]
        )
        out[token_key] = TokenSequences(
            token_id=bucket["token_id"],
            key=token_key,
            entries=entries,
            is_multiple=_is_multiple(g, entries),
        )
    return out
