"""Event assignments: the partition a detector outputs over a corpus."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

from .errors import SchemaError


def dense_encode(labels: Sequence) -> list[int]:
    """Re-encode arbitrary labels to 0..C-1 in first-appearance order."""
    remap: dict = {}
    out = []
    for lab in labels:
        if lab not in remap:
            remap[lab] = len(remap)
        out.append(remap[lab])
    return out


@dataclass(frozen=True)
class EventAssignment:
    """Message id -> predicted event id, with dense ids 0..C-1."""

    message_ids: tuple[str, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        if len(self.message_ids) != len(self.labels):
            raise SchemaError(
                f"{len(self.message_ids)} ids vs {len(self.labels)} labels"
            )
        if len(set(self.message_ids)) != len(self.message_ids):
            raise SchemaError("duplicate message ids in assignment")
        distinct = set(self.labels)
        if distinct != set(range(len(distinct))):
            raise SchemaError(f"event ids are not dense 0..C-1: {sorted(distinct)[:10]}")

    @classmethod
    def from_labels(cls, message_ids: Iterable[str], labels: Sequence) -> "EventAssignment":
        ids = tuple(message_ids)
        return cls(message_ids=ids, labels=tuple(dense_encode(labels)))

    @property
    def n_events(self) -> int:
        return len(set(self.labels))

    def __len__(self) -> int:
        return len(self.message_ids)

    def label_of(self, message_id: str) -> int:
        return self.as_dict()[message_id]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.message_ids, self.labels))

    def save_tsv(self, path: Union[str, Path]) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for mid, lab in zip(self.message_ids, self.labels):
                fh.write(f"{mid}\t{lab}\n")

    @classmethod
    def load_tsv(cls, path: Union[str, Path]) -> "EventAssignment":
        ids, labels = [], []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            mid, lab = line.split("\t")
            ids.append(mid)
            labels.append(int(lab))
        return cls(message_ids=tuple(ids), labels=tuple(labels))
