"""Dataset manifests, corpus ingestion, validation, and temporal block splits.

The canonical on-disk format is UTF-8 JSON lines, one message per line.
Raw datasets are not redistributed; a manifest registry records the expected
(events, texts) statistics of each supported dataset and ``convert_tsv``
turns the commonly published tab-separated exports into canonical records.
"""

from __future__ import annotations

import ast
import json
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import (
    DuplicateIdError,
    EmptyCorpusError,
    InvalidPolicyError,
    ParseError,
    SchemaError,
)

logger = logging.getLogger(__name__)

MESSAGE_FIELDS = (
    "id", "text", "timestamp", "user_id", "entities", "hashtags", "mentions", "event_id",
)

#: Twitter-style source columns used by most of the supported datasets.
TWITTER_FIELD_MAP = {
    "tweet_id": "id",
    "text": "text",
    "created_at": "timestamp",
    "user_id": "user_id",
    "entities": "entities",
    "hashtags": "hashtags",
    "user_mentions": "mentions",
    "event_id": "event_id",
}

#: Generic columns for document-style corpora (no social attributes).
GENERIC_FIELD_MAP = {
    "id": "id",
    "text": "text",
    "timestamp": "timestamp",
    "event_id": "event_id",
}


@dataclass(frozen=True)
class Message:
    """One social-media post.

    ``hashtags`` are stored lowercased with the leading '#' stripped.
    ``event_id`` is a dense integer label (0..E-1) in labeled corpora and
    ``None`` in unlabeled ones.
    """

    id: str
    text: str
    timestamp: int
    user_id: str = ""
    entities: tuple[str, ...] = ()
    hashtags: tuple[str, ...] = ()
    mentions: tuple[str, ...] = ()
    event_id: Optional[int] = None

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "text": self.text,
            "timestamp": self.timestamp,
            "user_id": self.user_id,
            "entities": list(self.entities),
            "hashtags": list(self.hashtags),
            "mentions": list(self.mentions),
        }
        if self.event_id is not None:
            rec["event_id"] = self.event_id
        return rec


@dataclass(frozen=True)
class DatasetManifest:
    """Expected statistics and source-column mapping for one dataset."""

    name: str
    expected_events: int
    expected_texts: int
    language: str = "English"
    field_mapping: Mapping[str, str] = field(default_factory=lambda: dict(TWITTER_FIELD_MAP))

    def __post_init__(self):
        if self.expected_events <= 0 or self.expected_texts <= 0:
            raise SchemaError(f"manifest {self.name!r}: expected counts must be positive")
        covered = set(self.field_mapping.values())
        missing = {"id", "text", "event_id"} - covered
        if missing:
            raise SchemaError(
                f"manifest {self.name!r}: field_mapping must cover {sorted(missing)}"
            )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "expected_events": self.expected_events,
            "expected_texts": self.expected_texts,
            "language": self.language,
            "field_mapping": dict(self.field_mapping),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DatasetManifest":
        return cls(
            name=d["name"],
            expected_events=int(d["expected_events"]),
            expected_texts=int(d["expected_texts"]),
            language=d.get("language", "English"),
            field_mapping=dict(d.get("field_mapping", TWITTER_FIELD_MAP)),
        )


def _manifest(name, events, texts, language="English", mapping=None):
    return DatasetManifest(
        name=name,
        expected_events=events,
        expected_texts=texts,
        language=language,
        field_mapping=dict(mapping if mapping is not None else TWITTER_FIELD_MAP),
    )


#: Built-in dataset registry. Counts are (distinct events, total texts).
MANIFESTS: dict[str, DatasetManifest] = {
    m.name: m
    for m in (
        _manifest("Event2012", 503, 68841),
        _manifest("Event2018", 257, 64516, language="French"),
        _manifest("ArabicTwitter", 7, 9070, language="Arabic"),
        _manifest("MAVEN", 164, 10242, mapping=GENERIC_FIELD_MAP),
        _manifest("CrisisLexT26", 26, 27933),
        _manifest("CrisisLexT6", 6, 60082),
        _manifest("CrisisMMD", 7, 18082),
        _manifest("CrisisNLP", 11, 25976),
        _manifest("HumAID", 19, 76484),
        _manifest("MixData", 5, 78489, mapping=GENERIC_FIELD_MAP),
        _manifest("KBP", 100, 85569, mapping=GENERIC_FIELD_MAP),
        _manifest("Event2012_100", 100, 15019),
        _manifest("Event2018_100", 100, 19944, language="French"),
        _manifest("Arabic_7", 7, 3022, language="Arabic"),
    )
}


def get_manifest(name: str) -> DatasetManifest:
    try:
        return MANIFESTS[name]
    except KeyError:
        known = ", ".join(sorted(MANIFESTS))
        raise SchemaError(f"unknown dataset {name!r}; registered: {known}") from None


@dataclass(frozen=True)
class Corpus:
    """Ordered, immutable message collection.

    Messages are sorted by (timestamp, id); event ids in a labeled corpus are
    dense integers 0..E-1 assigned in first-appearance order.
    """

    name: str
    messages: tuple[Message, ...]
    labeled: bool
    manifest: Optional[DatasetManifest] = None

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self) -> Iterator[Message]:
        return iter(self.messages)

    @property
    def message_ids(self) -> list[str]:
        return [m.id for m in self.messages]

    @property
    def event_labels(self) -> Optional[list[int]]:
        if not self.labeled:
            return None
        return [m.event_id for m in self.messages]

    @property
    def n_events(self) -> int:
        if not self.labeled:
            return 0
        return len({m.event_id for m in self.messages})

    @classmethod
    def build(cls, name: str, messages: Iterable[Message],
              manifest: Optional[DatasetManifest] = None) -> "Corpus":
        """Sort, re-encode event ids densely, and validate invariants."""
        msgs = sorted(messages, key=lambda m: (m.timestamp, m.id))
        if not msgs:
            raise EmptyCorpusError(f"corpus {name!r} has zero messages")

        seen: set[str] = set()
        for m in msgs:
            if not m.id:
                raise SchemaError("message with empty id")
            if m.id in seen:
                raise DuplicateIdError(m.id)
            seen.add(m.id)

        n_labeled = sum(1 for m in msgs if m.event_id is not None)
        if 0 < n_labeled < len(msgs):
            raise SchemaError(
                f"mixed labeling: {n_labeled} of {len(msgs)} messages carry event_id"
            )
        labeled = n_labeled == len(msgs)

        if labeled:
            remap: dict[int, int] = {}
            for m in msgs:
                if m.event_id not in remap:
                    remap[m.event_id] = len(remap)
            msgs = [replace(m, event_id=remap[m.event_id]) for m in msgs]
            if manifest is not None and len(remap) > manifest.expected_events:
                raise SchemaError(
                    f"corpus {name!r} has {len(remap)} distinct events, "
                    f"manifest expects at most {manifest.expected_events}"
                )
        return cls(name=name, messages=tuple(msgs), labeled=labeled, manifest=manifest)


# ---------------------------------------------------------------------------
# record parsing

_LIST_FIELDS = ("entities", "hashtags", "mentions")


def _as_string_list(value, field_name, line):
    if value is None:
        return []
    if isinstance(value, str):
        # tolerate serialized lists ("['a','b']" / '["a"]') and delimited strings
        text = value.strip()
        if not text:
            return []
        for parser in (json.loads, ast.literal_eval):
            try:
                parsed = parser(text)
            except (ValueError, SyntaxError):
                continue
            if isinstance(parsed, (list, tuple)):
                return [str(v) for v in parsed]
        sep = "," if "," in text else None
        return [t for t in (p.strip() for p in text.split(sep)) if t]
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    raise SchemaError(f"field {field_name!r} is not a list", line=line)


def _parse_timestamp(value, line):
    """Accept epoch seconds or ISO-8601 text; naive datetimes are taken as UTC."""
    if isinstance(value, bool):
        raise SchemaError("timestamp is not a number", line=line)
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return int(float(text))
        except ValueError:
            pass
        try:
            dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
        except ValueError:
            raise SchemaError(f"unparseable timestamp {value!r}", line=line) from None
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise SchemaError(f"unparseable timestamp {value!r}", line=line)


def _normalize_hashtag(tag: str) -> str:
    return tag.lstrip("#").lower()


def _record_to_message(raw: Mapping, mapping: Mapping[str, str], line: int) -> Message:
    fields: dict = {}
    for src, dst in mapping.items():
        if src in raw:
            fields[dst] = raw[src]
    for required in ("id", "text"):
        if required not in fields or fields[required] in (None, ""):
            raise SchemaError(f"missing required field {required!r}", line=line)

    event_id = fields.get("event_id")
    if event_id is not None:
        try:
            event_id = int(event_id)
        except (TypeError, ValueError):
            raise SchemaError(f"event_id {event_id!r} is not an integer", line=line) from None
        if event_id < 0:
            raise SchemaError(f"event_id {event_id} is negative", line=line)

    timestamp = _parse_timestamp(fields.get("timestamp", 0), line)
    lists = {f: _as_string_list(fields.get(f), f, line) for f in _LIST_FIELDS}
    return Message(
        id=str(fields["id"]),
        text=str(fields["text"]),
        timestamp=timestamp,
        user_id=str(fields.get("user_id", "") or ""),
        entities=tuple(lists["entities"]),
        hashtags=tuple(_normalize_hashtag(h) for h in lists["hashtags"]),
        mentions=tuple(lists["mentions"]),
        event_id=event_id,
    )


def load_corpus(path: Union[str, Path], manifest: Optional[DatasetManifest] = None,
                name: Optional[str] = None) -> Corpus:
    """Load a canonical JSON-lines corpus file.

    Records missing required fields are rejected with a SchemaError carrying
    the line number; they are never skipped silently.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    # canonical keys always recognized; manifest source columns take precedence
    mapping = {f: f for f in MESSAGE_FIELDS}
    if manifest is not None:
        mapping.update(manifest.field_mapping)

    messages = []
    seen_ids: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            stripped = raw_line.strip()
            if not stripped:
                continue
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON record: {exc.msg}", line=lineno) from None
            if not isinstance(record, dict):
                raise ParseError("record is not an object", line=lineno)
            msg = _record_to_message(record, mapping, lineno)
            if msg.id in seen_ids:
                raise DuplicateIdError(msg.id, line=lineno)
            seen_ids.add(msg.id)
            messages.append(msg)

    if not messages:
        raise EmptyCorpusError(f"{path}: no records")
    corpus_name = name or (manifest.name if manifest else path.stem)
    return Corpus.build(corpus_name, messages, manifest=manifest)


def save_corpus(corpus: Corpus, path: Union[str, Path]) -> None:
    """Write the canonical JSON-lines representation."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for m in corpus.messages:
            fh.write(json.dumps(m.to_record(), ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# manifest validation

@dataclass(frozen=True)
class ValidationReport:
    dataset: str
    actual_events: int
    actual_texts: int
    expected_events: int
    expected_texts: int

    @property
    def field_matches(self) -> dict[str, bool]:
        return {
            "events": self.actual_events == self.expected_events,
            "texts": self.actual_texts == self.expected_texts,
        }

    @property
    def matches(self) -> bool:
        return all(self.field_matches.values())

    def summary(self) -> str:
        status = "OK" if self.matches else "MISMATCH"
        return (
            f"{self.dataset}: {self.actual_events:,} events / {self.actual_texts:,} texts "
            f"(expected {self.expected_events:,} / {self.expected_texts:,}) [{status}]"
        )


def validate_manifest(corpus: Corpus, manifest: DatasetManifest) -> ValidationReport:
    """Compare corpus statistics against a manifest. Never mutates the corpus."""
    return ValidationReport(
        dataset=manifest.name,
        actual_events=corpus.n_events,
        actual_texts=len(corpus),
        expected_events=manifest.expected_events,
        expected_texts=manifest.expected_texts,
    )


# ---------------------------------------------------------------------------
# temporal block splitting

@dataclass(frozen=True)
class FixedCount:
    k: int


@dataclass(frozen=True)
class FixedWindow:
    seconds: int


@dataclass(frozen=True)
class BlockSplit:
    """Disjoint, temporally ordered index ranges covering the whole corpus."""

    boundaries: tuple[int, ...]
    blocks: tuple[tuple[int, int], ...]

    def indices(self, i: int) -> range:
        start, stop = self.blocks[i]
        return range(start, stop)

    def __len__(self) -> int:
        return len(self.blocks)


def split_blocks(corpus: Corpus, policy: Union[FixedCount, FixedWindow]) -> BlockSplit:
    """Split a timestamp-sorted corpus into ordered blocks.

    ``FixedCount`` produces k blocks whose sizes differ by at most one, with
    remainder messages going to the earliest blocks. ``FixedWindow`` buckets
    messages into consecutive windows of the given width; empty windows
    produce no block.
    """
    n = len(corpus)
    if isinstance(policy, FixedCount):
        k = policy.k
        if k <= 0:
            raise InvalidPolicyError(f"fixed_count k={k} must be positive")
        if k > n:
            raise InvalidPolicyError(f"fixed_count k={k} exceeds corpus size {n}")
        base, rem = divmod(n, k)
        blocks = []
        start = 0
        for i in range(k):
            size = base + (1 if i < rem else 0)
            blocks.append((start, start + size))
            start += size
        boundaries = tuple(corpus.messages[s].timestamp for s, _ in blocks)
        return BlockSplit(boundaries=boundaries, blocks=tuple(blocks))

    if isinstance(policy, FixedWindow):
        w = policy.seconds
        if w <= 0:
            raise InvalidPolicyError(f"fixed_window seconds={w} must be positive")
        t0 = corpus.messages[0].timestamp
        blocks = []
        boundaries = []
        start = 0
        for i, m in enumerate(corpus.messages):
            window = (m.timestamp - t0) // w
            current = (corpus.messages[start].timestamp - t0) // w
            if window != current:
                blocks.append((start, i))
                boundaries.append(t0 + current * w)
                start = i
        blocks.append((start, n))
        boundaries.append(t0 + ((corpus.messages[start].timestamp - t0) // w) * w)
        return BlockSplit(boundaries=tuple(boundaries), blocks=tuple(blocks))

    raise InvalidPolicyError(f"unknown split policy {policy!r}")


# ---------------------------------------------------------------------------
# TSV converter for published dataset exports

def convert_tsv(source: Union[str, Path], manifest: DatasetManifest,
                out_path: Union[str, Path]) -> Corpus:
    """Convert a tab-separated export into the canonical JSON-lines format.

    The first row must name the source columns; columns are mapped through
    the manifest's field_mapping. Returns the loaded canonical corpus.
    """
    import csv

    source = Path(source)
    if not source.exists():
        raise FileNotFoundError(source)

    messages = []
    seen: set[str] = set()
    with source.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyCorpusError(f"{source}: empty file") from None
        for lineno, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} columns, found {len(row)}", line=lineno
                )
            record = dict(zip(header, row))
            msg = _record_to_message(record, manifest.field_mapping, lineno)
            if msg.id in seen:
                raise DuplicateIdError(msg.id, line=lineno)
            seen.add(msg.id)
            messages.append(msg)

    if not messages:
        raise EmptyCorpusError(f"{source}: no records")
    corpus = Corpus.build(manifest.name, messages, manifest=manifest)
    save_corpus(corpus, out_path)
    logger.info("converted %d records from %s", len(corpus), source)
    return corpus
