"""Clustering agreement metrics: NMI, AMI (hypergeometric model), and ARI.

Conventions pinned here because library ecosystems disagree:
  * NMI uses arithmetic-mean normalization, 2*I/(H_T+H_P).
  * If both labelings have zero entropy the score is 1; if exactly one does,
    the score is 0.
  * AMI's expected mutual information uses the permutation model; when the
    denominator vanishes the result is 1 for structurally identical
    partitions and 0 otherwise.
  * ARI is evaluated in exact rational arithmetic; a vanishing denominator
    (both single-cluster, or both all-singletons) yields 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .assignment import EventAssignment
from .corpus import Corpus
from .errors import (
    CoverageMismatchError,
    EmptyInputError,
    LengthMismatchError,
    UnlabeledCorpusError,
)

#: Denominators closer to zero than this are treated as exactly degenerate.
_DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class ContingencyTable:
    """Co-occurrence counts between two labelings of the same items."""

    counts: np.ndarray          # (R, C) int64
    row_marginals: np.ndarray   # (R,)
    col_marginals: np.ndarray   # (C,)
    n: int

    @classmethod
    def from_labels(cls, true_labels: Sequence, pred_labels: Sequence) -> "ContingencyTable":
        if len(true_labels) != len(pred_labels):
            raise LengthMismatchError(
                f"{len(true_labels)} true labels vs {len(pred_labels)} predicted"
            )
        if len(true_labels) == 0:
            raise EmptyInputError("empty label vectors")
        _, ti = np.unique(np.asarray(true_labels, dtype=object), return_inverse=True)
        _, pi = np.unique(np.asarray(pred_labels, dtype=object), return_inverse=True)
        r, c = int(ti.max()) + 1, int(pi.max()) + 1
        counts = np.zeros((r, c), dtype=np.int64)
        np.add.at(counts, (ti, pi), 1)
        return cls(
            counts=counts,
            row_marginals=counts.sum(axis=1),
            col_marginals=counts.sum(axis=0),
            n=len(true_labels),
        )

    def is_identical_partition(self) -> bool:
        """True when the two labelings induce the same partition."""
        nonzero_per_row = (self.counts > 0).sum(axis=1)
        nonzero_per_col = (self.counts > 0).sum(axis=0)
        return bool((nonzero_per_row == 1).all() and (nonzero_per_col == 1).all()
                    and self.counts.shape[0] == self.counts.shape[1])


def _entropy(marginals: np.ndarray, n: int) -> float:
    p = marginals[marginals > 0] / n
    return float(-(p * np.log(p)).sum())


def _mutual_information(table: ContingencyTable) -> float:
    n = table.n
    mi = 0.0
    for i in range(table.counts.shape[0]):
        a = table.row_marginals[i]
        for j in range(table.counts.shape[1]):
            nij = table.counts[i, j]
            if nij > 0:
                mi += (nij / n) * math.log(n * nij / (a * table.col_marginals[j]))
    return mi


def _expected_mutual_information(table: ContingencyTable) -> float:
    """E[MI] under the permutation (hypergeometric) model.

    The base hypergeometric probability of each cell is evaluated once via
    lgamma and then advanced with a cancellation-free multiplicative
    recurrence, keeping the sum accurate at large n.
    """
    n = table.n
    lg = math.lgamma
    log_cn = [lg(n + 1)]  # placeholder to keep locals tight

    emi = 0.0
    for a in table.row_marginals.tolist():
        for b in table.col_marginals.tolist():
            lo = max(0, a + b - n)
            hi = min(a, b)
            # P(lo) = C(a, lo) * C(n-a, b-lo) / C(n, b)
            log_p = (
                lg(a + 1) - lg(lo + 1) - lg(a - lo + 1)
                + lg(n - a + 1) - lg(b - lo + 1) - lg(n - a - b + lo + 1)
                - (lg(n + 1) - lg(b + 1) - lg(n - b + 1))
            )
            p = math.exp(log_p)
            for nij in range(lo, hi + 1):
                if nij > lo:
                    p *= ((a - nij + 1) * (b - nij + 1)) / (nij * (n - a - b + nij))
                if nij > 0:
                    emi += p * (nij / n) * (math.log(n * nij) - math.log(a * b))
    return emi


def nmi(true_labels: Sequence, pred_labels: Sequence) -> float:
    """Normalized mutual information, 2*I/(H_T+H_P), in [0, 1]."""
    table = ContingencyTable.from_labels(true_labels, pred_labels)
    h_t = _entropy(table.row_marginals, table.n)
    h_p = _entropy(table.col_marginals, table.n)
    if h_t == 0.0 and h_p == 0.0:
        return 1.0
    if h_t == 0.0 or h_p == 0.0:
        return 0.0
    value = 2.0 * _mutual_information(table) / (h_t + h_p)
    return min(1.0, max(0.0, value))


def ami(true_labels: Sequence, pred_labels: Sequence) -> float:
    """Adjusted mutual information: (I - E[I]) / (mean(H_T, H_P) - E[I])."""
    table = ContingencyTable.from_labels(true_labels, pred_labels)
    h_t = _entropy(table.row_marginals, table.n)
    h_p = _entropy(table.col_marginals, table.n)
    if h_t == 0.0 and h_p == 0.0:
        return 1.0
    if h_t == 0.0 or h_p == 0.0:
        return 0.0
    mi = _mutual_information(table)
    emi = _expected_mutual_information(table)
    denominator = 0.5 * (h_t + h_p) - emi
    if abs(denominator) < _DEGENERATE_EPS:
        return 1.0 if table.is_identical_partition() else 0.0
    return (mi - emi) / denominator


def ari(true_labels: Sequence, pred_labels: Sequence) -> float:
    """Adjusted Rand index in [-1, 1], exact rational evaluation."""
    table = ContingencyTable.from_labels(true_labels, pred_labels)

    def comb2(x: int) -> int:
        return x * (x - 1) // 2

    index = sum(comb2(int(v)) for v in table.counts.ravel())
    sum_a = sum(comb2(int(v)) for v in table.row_marginals)
    sum_b = sum(comb2(int(v)) for v in table.col_marginals)
    pairs = comb2(table.n)
    if pairs == 0:
        return 1.0
    expected = Fraction(sum_a * sum_b, pairs)
    max_term = Fraction(sum_a + sum_b, 2)
    if max_term == expected:
        # both single-cluster or both all-singletons
        return 1.0
    return float(Fraction(index) - expected) / float(max_term - expected)


@dataclass(frozen=True)
class MetricReport:
    """NMI/AMI/ARI plus cluster counts for one detector run."""

    nmi: float
    ami: float
    ari: float
    predicted_clusters: int
    true_clusters: int
    n: int
    matched_accuracy: Optional[float] = None

    def to_dict(self) -> dict:
        d = {
            "nmi": self.nmi,
            "ami": self.ami,
            "ari": self.ari,
            "predicted_clusters": self.predicted_clusters,
            "true_clusters": self.true_clusters,
            "n": self.n,
        }
        if self.matched_accuracy is not None:
            d["matched_accuracy"] = self.matched_accuracy
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        return cls(
            nmi=d["nmi"], ami=d["ami"], ari=d["ari"],
            predicted_clusters=d["predicted_clusters"],
            true_clusters=d["true_clusters"], n=d["n"],
            matched_accuracy=d.get("matched_accuracy"),
        )

    def to_text(self) -> str:
        lines = [
            f"nmi = {self.nmi:.6f}",
            f"ami = {self.ami:.6f}",
            f"ari = {self.ari:.6f}",
            f"predicted_clusters = {self.predicted_clusters}",
            f"true_clusters = {self.true_clusters}",
            f"n = {self.n}",
        ]
        if self.matched_accuracy is not None:
            lines.append(f"matched_accuracy = {self.matched_accuracy:.6f}")
        return "\n".join(lines)


def _hungarian_accuracy(table: ContingencyTable) -> float:
    from scipy.optimize import linear_sum_assignment

    rows, cols = linear_sum_assignment(-table.counts)
    return float(table.counts[rows, cols].sum()) / table.n


def evaluate(assignment: EventAssignment, corpus: Corpus,
             matched_accuracy: bool = False) -> MetricReport:
    """Score an assignment against corpus ground truth. Pure function.

    ``matched_accuracy`` additionally reports Hungarian-matched cluster
    accuracy (an extension beyond the core metrics).
    """
    if not corpus.labeled:
        raise UnlabeledCorpusError(f"corpus {corpus.name!r} has no event labels")
    if len(assignment) != len(corpus) or set(assignment.message_ids) != set(corpus.message_ids):
        raise CoverageMismatchError(
            f"assignment covers {len(assignment)} messages, corpus has {len(corpus)}"
        )
    lookup = assignment.as_dict()
    preds = [lookup[mid] for mid in corpus.message_ids]
    truths = corpus.event_labels

    table = ContingencyTable.from_labels(truths, preds)
    return MetricReport(
        nmi=nmi(truths, preds),
        ami=ami(truths, preds),
        ari=ari(truths, preds),
        predicted_clusters=len(set(preds)),
        true_clusters=len(set(truths)),
        n=len(preds),
        matched_accuracy=_hungarian_accuracy(table) if matched_accuracy else None,
    )
