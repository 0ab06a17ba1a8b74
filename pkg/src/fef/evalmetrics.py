"""Detection and rationale-quality evaluation metrics.

Detection: threshold accuracy, fake-class F1, and rank-statistic AUC.
Text: BLEU-4, ROUGE-L, exact-match METEOR, corpus CIDEr, and cosine
semantic similarity over supplied embedding vectors (with a tf-idf
fallback vectorizer when no embeddings are given).

Tokenization is pinned for determinism: lowercase, alphanumeric runs,
everything else is a boundary. METEOR runs in exact-match-only mode
(no stemming or synonym resources); reports carry a note saying so.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import (
    CorpusTooSmall,
    DegenerateClasses,
    DimensionMismatch,
    EmptyInput,
    SchemaError,
    ZeroVector,
)

METEOR_MODE_NOTE = "METEOR computed in exact-match-only mode (no stemming or synonym matching)"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass
class DetectionRecord:
    truth: str
    score: float
    predicted: str | None = None

    def __post_init__(self) -> None:
        if self.truth not in ("real", "fake"):
            raise SchemaError(f"truth must be 'real' or 'fake', got {self.truth!r}")
        if not 0.0 <= self.score <= 1.0:
            raise SchemaError(f"score {self.score} outside [0, 1]")


@dataclass
class TextPair:
    candidate: str
    references: list[str]

    def __post_init__(self) -> None:
        if not self.references:
            raise SchemaError("a text pair needs at least one reference")


@dataclass
class EvalReport:
    detection: dict = field(default_factory=dict)
    text: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "detection": self.detection,
            "text": self.text,
            "counts": self.counts,
            "notes": self.notes,
        }


# --- detection metrics ------------------------------------------------------


def accuracy_f1(records: Sequence[DetectionRecord], threshold: float = 0.5) -> tuple[float, float]:
    """Threshold accuracy and F1 on the fake class (0 when P + R = 0)."""
    if not records:
        raise EmptyInput("no detection records")
    tp = fp = fn = correct = 0
    for r in records:
        r.predicted = "fake" if r.score >= threshold else "real"
        if r.predicted == r.truth:
            correct += 1
        if r.predicted == "fake" and r.truth == "fake":
            tp += 1
        elif r.predicted == "fake" and r.truth == "real":
            fp += 1
        elif r.predicted == "real" and r.truth == "fake":
            fn += 1
    acc = correct / len(records)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return acc, f1


def auc(records: Sequence[DetectionRecord]) -> float:
    """P(score of a random fake > score of a random real), ties count 0.5."""
    fakes = sorted(r.score for r in records if r.truth == "fake")
    reals = sorted(r.score for r in records if r.truth == "real")
    if not fakes or not reals:
        raise DegenerateClasses("AUC needs at least one fake and one real record")
    wins = 0.0
    for s in fakes:
        below = _bisect_left(reals, s)
        above = _bisect_right(reals, s)
        wins += below + 0.5 * (above - below)
    return wins / (len(fakes) * len(reals))


def _bisect_left(values: list[float], x: float) -> int:
    lo, hi = 0, len(values)
    while lo < hi:
        mid = (lo + hi) // 2
        if values[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _bisect_right(values: list[float], x: float) -> int:
    lo, hi = 0, len(values)
    while lo < hi:
        mid = (lo + hi) // 2
        if values[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


# --- text metrics --------------------------------------------------------


def _ngrams(tokens: list[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def bleu4(pair: TextPair) -> float:
    """Geometric mean of clipped 1..4-gram precisions times brevity penalty.

    Each precision is floored at 1e-9; the brevity penalty uses the
    reference length closest to the candidate (ties to the shorter).
    """
    cand = tokenize(pair.candidate)
    if not cand:
        raise EmptyInput("candidate is empty after tokenization")
    refs = [tokenize(r) for r in pair.references]

    log_sum = 0.0
    for n in range(1, 5):
        cand_grams = _ngrams(cand, n)
        total = sum(cand_grams.values())
        clipped = 0
        for gram, count in cand_grams.items():
            best = max(_ngrams(ref, n).get(gram, 0) for ref in refs)
            clipped += min(count, best)
        precision = clipped / total if total else 0.0
        log_sum += math.log(max(precision, 1e-9))

    c = len(cand)
    r = min((abs(len(ref) - c), len(ref)) for ref in refs)[1]
    brevity = min(1.0, math.exp(1.0 - r / c))
    return brevity * math.exp(log_sum / 4.0)


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for token in a:
        row = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                row.append(prev[j - 1] + 1)
            else:
                row.append(max(prev[j], row[-1]))
        prev = row
    return prev[-1]


def rouge_l(pair: TextPair, beta: float = 1.2) -> float:
    """LCS F-measure, best reference wins."""
    cand = tokenize(pair.candidate)
    if not cand:
        raise EmptyInput("candidate is empty after tokenization")
    best = 0.0
    for reference in pair.references:
        ref = tokenize(reference)
        if not ref:
            continue
        lcs = _lcs_length(cand, ref)
        if lcs == 0:
            continue
        recall = lcs / len(ref)
        precision = lcs / len(cand)
        score = ((1 + beta**2) * recall * precision) / (recall + beta**2 * precision)
        best = max(best, score)
    return best


def meteor_exact(pair: TextPair) -> float:
    """Exact-match METEOR: harmonic mean weighted toward recall, with a
    fragmentation penalty of 0.5 * (chunks / matches)^3."""
    cand = tokenize(pair.candidate)
    if not cand:
        raise EmptyInput("candidate is empty after tokenization")
    best = 0.0
    for reference in pair.references:
        ref = tokenize(reference)
        if not ref:
            continue
        matches, chunks = _align_exact(cand, ref)
        if matches == 0:
            continue
        precision = matches / len(cand)
        recall = matches / len(ref)
        f_mean = 10 * precision * recall / (recall + 9 * precision)
        penalty = 0.5 * (chunks / matches) ** 3
        best = max(best, f_mean * (1.0 - penalty))
    return best


def _align_exact(cand: list[str], ref: list[str]) -> tuple[int, int]:
    """Greedy left-to-right alignment preferring contiguous reference runs."""
    available: dict[str, list[int]] = {}
    for pos, token in enumerate(ref):
        available.setdefault(token, []).append(pos)
    matches = 0
    chunks = 0
    prev_ref_pos = -2
    for token in cand:
        positions = available.get(token)
        if not positions:
            continue
        if prev_ref_pos + 1 in positions:
            pos = prev_ref_pos + 1
        else:
            pos = positions[0]
        positions.remove(pos)
        matches += 1
        if pos != prev_ref_pos + 1:
            chunks += 1
        prev_ref_pos = pos
    return matches, chunks


def cider(pairs: Sequence[TextPair]) -> float:
    """Corpus CIDEr: mean over pairs of the n-averaged tf-idf cosine, x10.

    Document frequency counts the pairs whose reference set contains the
    n-gram; idf = ln(corpus_size / (1 + df)).
    """
    if len(pairs) < 2:
        raise CorpusTooSmall("CIDEr needs a corpus of at least 2 pairs")
    size = len(pairs)
    ref_tokens = [[tokenize(r) for r in p.references] for p in pairs]
    cand_tokens = [tokenize(p.candidate) for p in pairs]

    scores = []
    for n in range(1, 5):
        df: dict[tuple[str, ...], int] = {}
        for refs in ref_tokens:
            seen: set[tuple[str, ...]] = set()
            for ref in refs:
                seen.update(_ngrams(ref, n))
            for gram in seen:
                df[gram] = df.get(gram, 0) + 1
        idf = {gram: math.log(size / (1 + count)) for gram, count in df.items()}

        per_pair = []
        for cand, refs in zip(cand_tokens, ref_tokens):
            cand_vec = {
                gram: count * idf.get(gram, math.log(size))
                for gram, count in _ngrams(cand, n).items()
            }
            sims = []
            for ref in refs:
                ref_vec = {
                    gram: count * idf.get(gram, math.log(size))
                    for gram, count in _ngrams(ref, n).items()
                }
                sims.append(_cosine_sparse(cand_vec, ref_vec))
            per_pair.append(sum(sims) / len(sims) if sims else 0.0)
        scores.append(per_pair)

    totals = [sum(scores[n][i] for n in range(4)) / 4.0 for i in range(size)]
    return 10.0 * sum(totals) / size


def _cosine_sparse(a: dict, b: dict) -> float:
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    dot = sum(v * b.get(k, 0.0) for k, v in a.items())
    return dot / (na * nb)


def css(candidate_vec: Sequence[float], reference_vec: Sequence[float]) -> float:
    """Cosine similarity between two semantic vectors."""
    if len(candidate_vec) != len(reference_vec):
        raise DimensionMismatch(
            f"vector dims differ: {len(candidate_vec)} vs {len(reference_vec)}"
        )
    na = math.sqrt(sum(v * v for v in candidate_vec))
    nb = math.sqrt(sum(v * v for v in reference_vec))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity is undefined for zero vectors")
    dot = sum(a * b for a, b in zip(candidate_vec, reference_vec))
    return dot / (na * nb)


def tfidf_fallback_vectors(pairs: Sequence[TextPair]) -> list[tuple[list[float], list[float]]]:
    """Unigram tf-idf vectors for (candidate, concatenated references).

    The document population is every candidate plus every reference;
    idf = ln(n_docs / (1 + df)). Used when no embeddings are supplied.
    """
    docs: list[list[str]] = []
    for p in pairs:
        docs.append(tokenize(p.candidate))
        docs.extend(tokenize(r) for r in p.references)
    vocab = sorted({t for doc in docs for t in doc})
    index = {t: i for i, t in enumerate(vocab)}
    df = [0] * len(vocab)
    for doc in docs:
        for t in set(doc):
            df[index[t]] += 1
    n_docs = len(docs)
    idf = [math.log(n_docs / (1 + d)) for d in df]

    def vector(tokens: list[str]) -> list[float]:
        vec = [0.0] * len(vocab)
        for t in tokens:
            vec[index[t]] += 1.0
        return [v * w for v, w in zip(vec, idf)]

    out = []
    for p in pairs:
        ref_tokens = [t for r in p.references for t in tokenize(r)]
        out.append((vector(tokenize(p.candidate)), vector(ref_tokens)))
    return out


# --- report assembly ------------------------------------------------------


def read_eval_jsonl(path: str | Path) -> list[dict]:
    rows: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {lineno}: invalid JSON: {exc}") from exc
    if not rows:
        raise EmptyInput(f"no rows in {path}")
    return rows


def evaluate_rows(rows: list[dict], threshold: float = 0.5) -> EvalReport:
    """Full report over eval JSONL rows (see External Interfaces docs)."""
    report = EvalReport(notes=[METEOR_MODE_NOTE])

    records = [
        DetectionRecord(truth=row["truth"], score=float(row["score"]))
        for row in rows
        if "truth" in row and "score" in row
    ]
    if records:
        acc, f1 = accuracy_f1(records, threshold)
        try:
            auc_value: float | None = auc(records)
        except DegenerateClasses:
            auc_value = None
            report.notes.append("AUC omitted: records contain a single class")
        report.detection = {"acc": acc, "auc": auc_value, "f1": f1}

    pairs = [
        TextPair(candidate=row["candidate"], references=list(row["references"]))
        for row in rows
        if row.get("candidate") and row.get("references")
    ]
    if pairs:
        bleu_scores = [bleu4(p) for p in pairs]
        rouge_scores = [rouge_l(p) for p in pairs]
        meteor_scores = [meteor_exact(p) for p in pairs]
        try:
            cider_value: float | None = cider(pairs)
        except CorpusTooSmall:
            cider_value = None
            report.notes.append("CIDEr omitted: corpus smaller than 2 pairs")

        css_scores = []
        fallback = None
        pair_idx = 0
        for row in rows:
            if not (row.get("candidate") and row.get("references")):
                continue
            if row.get("embedding_candidate") and row.get("embedding_reference"):
                css_scores.append(
                    css(row["embedding_candidate"], row["embedding_reference"])
                )
            else:
                if fallback is None:
                    fallback = tfidf_fallback_vectors(pairs)
                cand_vec, ref_vec = fallback[pair_idx]
                css_scores.append(css(cand_vec, ref_vec))
            pair_idx += 1

        report.text = {
            "cider": cider_value,
            "rouge_l": sum(rouge_scores) / len(rouge_scores),
            "bleu4": sum(bleu_scores) / len(bleu_scores),
            "meteor": sum(meteor_scores) / len(meteor_scores),
            "css": sum(css_scores) / len(css_scores) if css_scores else None,
        }

    report.counts = {"records": len(records), "pairs": len(pairs)}
    if not records and not pairs:
        raise EmptyInput("rows contain neither detection records nor text pairs")
    return report
