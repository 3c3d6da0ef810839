"""Tokenization, vocabulary, TF-IDF vectors, and message/keyword graphs."""

from __future__ import annotations

import logging
import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .corpus import Corpus
from .errors import DimensionMismatchError, EmptyVocabularyError, SchemaError

logger = logging.getLogger(__name__)

RELATIONS = ("hashtag", "entity", "mention", "user")

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_MENTION_RE = re.compile(r"@\w+")


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenizer behaviour for URLs and user mentions.

    Policies are "drop" or "sentinel". Sentinel tokens survive re-tokenization
    so tokenize(" ".join(tokens)) == tokens holds either way.
    """

    url_policy: str = "drop"
    mention_policy: str = "drop"
    url_token: str = "<url>"
    mention_token: str = "<mention>"

    def __post_init__(self):
        for policy in (self.url_policy, self.mention_policy):
            if policy not in ("drop", "sentinel"):
                raise SchemaError(f"unknown tokenizer policy {policy!r}")


def tokenize_text(text: str, rules: Optional[TokenizerConfig] = None) -> list[str]:
    """Lowercased word tokens with Unicode-aware boundaries.

    URLs and @mentions are dropped or replaced by sentinel tokens per the
    config; hashtags lose their '#' and stay as plain word tokens;
    punctuation is stripped.
    """
    rules = rules or TokenizerConfig()
    text = _URL_RE.sub(rules.url_token if rules.url_policy == "sentinel" else " ", text)
    text = _MENTION_RE.sub(rules.mention_token if rules.mention_policy == "sentinel" else " ", text)
    word_re = re.compile(
        "|".join((re.escape(rules.url_token), re.escape(rules.mention_token), r"\w+"))
    )
    return [t for t in word_re.findall(text.lower())]


def load_stopwords(path: Union[str, Path]) -> set[str]:
    """One stopword per line; '#' starts a comment."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        token = line.split("#", 1)[0].strip().lower()
        if token:
            words.add(token)
    return words


def tokenize_corpus(corpus: Corpus, rules: Optional[TokenizerConfig] = None) -> list[list[str]]:
    return [tokenize_text(m.text, rules) for m in corpus.messages]


@dataclass(frozen=True)
class Vocabulary:
    """Dense token index ordered by (descending document frequency, token)."""

    index: dict[str, int]
    doc_freq: dict[str, int]
    total_documents: int

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @property
    def tokens(self) -> list[str]:
        ordered = [None] * len(self.index)
        for tok, i in self.index.items():
            ordered[i] = tok
        return ordered


def build_vocabulary(corpus: Corpus, min_count: int = 1,
                     stopwords: Optional[set[str]] = None,
                     tokenizer: Optional[TokenizerConfig] = None,
                     docs: Optional[Sequence[Sequence[str]]] = None) -> Vocabulary:
    """Document-frequency filtered vocabulary with deterministic indices.

    ``docs`` may carry pre-tokenized messages to avoid re-tokenizing.
    """
    if min_count < 1:
        raise SchemaError(f"min_count={min_count} must be >= 1")
    stopwords = stopwords or set()
    if docs is None:
        docs = tokenize_corpus(corpus, tokenizer)

    df: Counter = Counter()
    for tokens in docs:
        df.update(set(tokens) - stopwords)

    kept = [(tok, n) for tok, n in df.items() if n >= min_count]
    if not kept:
        raise EmptyVocabularyError(
            f"no token has document frequency >= {min_count} after filtering"
        )
    kept.sort(key=lambda item: (-item[1], item[0]))
    index = {tok: i for i, (tok, _) in enumerate(kept)}
    return Vocabulary(index=index, doc_freq=dict(kept), total_documents=len(docs))


@dataclass(frozen=True)
class DocVector:
    """Sparse L2-normalized document vector over a vocabulary of size dim."""

    indices: tuple[int, ...]
    weights: tuple[float, ...]
    dim: int

    @property
    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights))

    def dense(self) -> np.ndarray:
        v = np.zeros(self.dim)
        if self.indices:
            v[list(self.indices)] = self.weights
        return v


def tfidf_vectorize(corpus: Corpus, vocab: Vocabulary,
                    tokenizer: Optional[TokenizerConfig] = None,
                    docs: Optional[Sequence[Sequence[str]]] = None) -> list[DocVector]:
    """Smoothed TF-IDF: weight = tf * (ln((1+N)/(1+df)) + 1), then L2 norm.

    Out-of-vocabulary tokens are ignored; an all-OOV document yields the
    zero vector.
    """
    if docs is None:
        docs = tokenize_corpus(corpus, tokenizer)
    n = vocab.total_documents
    idf = {tok: math.log((1 + n) / (1 + df)) + 1.0 for tok, df in vocab.doc_freq.items()}

    vectors = []
    for tokens in docs:
        counts = Counter(t for t in tokens if t in vocab.index)
        if not counts:
            vectors.append(DocVector(indices=(), weights=(), dim=len(vocab)))
            continue
        pairs = sorted((vocab.index[t], c * idf[t]) for t, c in counts.items())
        norm = math.sqrt(sum(w * w for _, w in pairs))
        vectors.append(
            DocVector(
                indices=tuple(i for i, _ in pairs),
                weights=tuple(w / norm for _, w in pairs),
                dim=len(vocab),
            )
        )
    return vectors


def doc_vectors_matrix(vectors: Sequence[DocVector]) -> np.ndarray:
    """Stack sparse document vectors into a dense (N, V) matrix."""
    if not vectors:
        return np.zeros((0, 0))
    return np.vstack([v.dense() for v in vectors])


# ---------------------------------------------------------------------------
# graphs

class MessageGraph:
    """Undirected weighted graph over message ids or keyword tokens.

    No self-loops; weights are strictly positive and symmetric. Node order is
    insertion order, which downstream algorithms use for deterministic
    tie-breaking.
    """

    def __init__(self):
        self._adj: dict = {}
        self._degree: dict = {}

    def add_node(self, node) -> None:
        if node not in self._adj:
            self._adj[node] = {}
            self._degree[node] = 0.0

    def add_edge(self, u, v, weight: float) -> None:
        if u == v:
            raise SchemaError(f"self-loop on node {u!r}")
        if weight <= 0:
            raise SchemaError(f"edge ({u!r}, {v!r}) weight {weight} must be > 0")
        self.add_node(u)
        self.add_node(v)
        old = self._adj[u].get(v, 0.0)
        self._adj[u][v] = self._adj[v][u] = weight
        self._degree[u] += weight - old
        self._degree[v] += weight - old

    @property
    def nodes(self) -> list:
        return list(self._adj)

    def __contains__(self, node) -> bool:
        return node in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def neighbors(self, node) -> dict:
        return self._adj[node]

    def degree(self, node) -> float:
        return self._degree[node]

    @property
    def total_weight(self) -> float:
        """Sum of weighted degrees (twice the total edge weight)."""
        return sum(self._degree.values())

    def edges(self):
        """Each undirected edge once, in deterministic insertion order."""
        seen = set()
        for u in self._adj:
            for v, w in self._adj[u].items():
                if (v, u) not in seen:
                    seen.add((u, v))
                    yield u, v, w

    @property
    def n_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj.values()) // 2

    def check_degrees(self) -> bool:
        """Degree cache equals recomputed weighted degree."""
        for u in self._adj:
            if not math.isclose(self._degree[u], sum(self._adj[u].values()), abs_tol=1e-9):
                return False
        return True

    def write_edgelist(self, path: Union[str, Path]) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for u, v, w in sorted(self.edges(), key=lambda e: (str(e[0]), str(e[1]))):
                fh.write(f"{u}\t{v}\t{w:.10g}\n")


def _message_attributes(message, relation):
    if relation == "hashtag":
        return set(message.hashtags)
    if relation == "entity":
        return set(message.entities)
    if relation == "mention":
        return set(message.mentions)
    if relation == "user":
        return {message.user_id} if message.user_id else set()
    raise SchemaError(f"unknown relation {relation!r}; valid: {RELATIONS}")


def construct_graph(corpus: Corpus, relations: Iterable[str] = RELATIONS,
                    semantic_knn: Optional[tuple[Sequence, int]] = None) -> MessageGraph:
    """Message graph from shared social attributes and optional kNN edges.

    Edge weight counts shared attribute values across the selected relations,
    plus one for each unordered pair related by cosine k-nearest neighbours
    (union over directions). Zero vectors take part in no semantic edge.
    """
    relations = list(relations)
    for r in relations:
        if r not in RELATIONS:
            raise SchemaError(f"unknown relation {r!r}; valid: {RELATIONS}")

    graph = MessageGraph()
    for m in corpus.messages:
        graph.add_node(m.id)

    weights: dict[tuple, float] = defaultdict(float)
    for relation in relations:
        buckets: dict = defaultdict(list)
        for i, m in enumerate(corpus.messages):
            for value in _message_attributes(m, relation):
                buckets[value].append(i)
        for members in buckets.values():
            for i, j in combinations(members, 2):
                weights[(i, j)] += 1.0

    if semantic_knn is not None:
        vectors, k = semantic_knn
        mat = np.asarray(
            [v.dense() if isinstance(v, DocVector) else np.asarray(v, dtype=float) for v in vectors]
        )
        if mat.shape[0] != len(corpus):
            raise DimensionMismatchError(
                f"{mat.shape[0]} vectors for {len(corpus)} messages"
            )
        if k >= len(corpus):
            raise DimensionMismatchError(f"k={k} must be < corpus size {len(corpus)}")
        if k > 0:
            norms = np.linalg.norm(mat, axis=1)
            nonzero = norms > 0
            unit = np.zeros_like(mat)
            unit[nonzero] = mat[nonzero] / norms[nonzero, None]
            sims = unit @ unit.T
            np.fill_diagonal(sims, -np.inf)
            sims[:, ~nonzero] = -np.inf
            pairs = set()
            for i in np.nonzero(nonzero)[0]:
                order = np.argsort(-sims[i], kind="stable")
                for j in order[:k]:
                    pairs.add((min(i, int(j)), max(i, int(j))))
            for pair in pairs:
                weights[pair] += 1.0

    ids = corpus.message_ids
    for (i, j), w in weights.items():
        graph.add_edge(ids[i], ids[j], w)
    return graph


def build_keyword_graph(corpus: Corpus, min_cooccur: int = 1,
                        vocab: Optional[Vocabulary] = None,
                        tokenizer: Optional[TokenizerConfig] = None,
                        stopwords: Optional[set[str]] = None,
                        docs: Optional[Sequence[Sequence[str]]] = None) -> MessageGraph:
    """Keyword co-occurrence graph over vocabulary tokens.

    Edge weight is the number of documents where both tokens appear
    (per-document set semantics, so weights never exceed the corpus size);
    edges with weight below min_cooccur are removed.
    """
    if min_cooccur < 1:
        raise SchemaError(f"min_cooccur={min_cooccur} must be >= 1")
    if docs is None:
        docs = tokenize_corpus(corpus, tokenizer)
    if vocab is None:
        vocab = build_vocabulary(corpus, min_count=1, stopwords=stopwords, docs=docs)

    graph = MessageGraph()
    for token in vocab.tokens:
        graph.add_node(token)

    cooccur: Counter = Counter()
    for tokens in docs:
        present = sorted({vocab.index[t] for t in tokens if t in vocab.index})
        for a, b in combinations(present, 2):
            cooccur[(a, b)] += 1

    order = vocab.tokens
    for (a, b), count in cooccur.items():
        if count >= min_cooccur:
            graph.add_edge(order[a], order[b], float(count))
    return graph
