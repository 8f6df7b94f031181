"""Evaluation metrics: tree edit distance / nTED, ANLS and accuracy."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import EmptyGroundTruth, LengthMismatch, MalformedGroundTruth, NoGoldAnswers

ROOT_LABEL = "<root>"


@dataclass
class LabeledTree:
    """Ordered labeled tree. The empty tree is represented by ``None``."""

    label: str
    children: list["LabeledTree"] = field(default_factory=list)

    def size(self) -> int:
        count, stack = 0, [self]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children)
        return count


def node_count(tree: LabeledTree | None) -> int:
    return 0 if tree is None else tree.size()


def tree_of(doc: dict) -> LabeledTree:
    """Map a document tree onto a labeled tree under a ``<root>`` node.

    Keys become nodes whose children are the mapped value; array elements
    repeat their key node; text leaves become leaf nodes.
    """
    return LabeledTree(ROOT_LABEL, _children_of(doc))


def _children_of(value) -> list[LabeledTree]:
    if isinstance(value, str):
        return [LabeledTree(value)]
    out = []
    for key, v in value.items():
        for element in v if isinstance(v, list) else (v,):
            out.append(LabeledTree(key, _children_of(element)))
    return out


# -- Zhang-Shasha ----------------------------------------------------------------


class _Postorder:
    __slots__ = ("labels", "lmld", "keyroots")

    def __init__(self, tree: LabeledTree):
        labels: list[str] = []
        lmld: list[int] = []
        # iterative post-order; lmld = index of leftmost leaf descendant
        stack = [(tree, False)]
        first_leaf: list[int] = []
        while stack:
            node, expanded = stack.pop()
            if expanded:
                idx = len(labels)
                labels.append(node.label)
                if node.children:
                    n_kids = len(node.children)
                    leftmost = first_leaf[-n_kids]
                    del first_leaf[-n_kids:]
                else:
                    leftmost = idx
                lmld.append(leftmost)
                first_leaf.append(leftmost)
            else:
                stack.append((node, True))
                for child in reversed(node.children):
                    stack.append((child, False))
        self.labels = labels
        self.lmld = lmld
        # keyroots: the highest node for each distinct leftmost leaf
        highest: dict[int, int] = {}
        for idx, leaf in enumerate(lmld):
            highest[leaf] = idx
        self.keyroots = sorted(highest.values())


def _min3(a, b, c):
    return min(a, b, c)


def _zhang_shasha(a: _Postorder, b: _Postorder,
                  relabel: Callable[[int, int], object],
                  minimum: Callable = _min3):
    """Keyroot / forest-distance dynamic program with unit insert and delete.

    ``relabel(i, j)`` gives the cost of matching post-order node ``i`` of
    ``a`` to node ``j`` of ``b``; ``minimum`` takes three costs. Costs only
    need ``+`` so array-valued costs evaluate many labelings at once.
    """
    al, bl = a.lmld, b.lmld
    n, m = len(al), len(bl)
    td = [[0] * m for _ in range(n)]
    for i in a.keyroots:
        li = al[i]
        for j in b.keyroots:
            lj = bl[j]
            rows, cols = i - li + 2, j - lj + 2
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = x
            fd0 = fd[0]
            for y in range(1, cols):
                fd0[y] = y
            for x in range(1, rows):
                ii = li + x - 1
                row, prev = fd[x], fd[x - 1]
                whole_a = al[ii] == li
                p = al[ii] - li
                for y in range(1, cols):
                    jj = lj + y - 1
                    if whole_a and bl[jj] == lj:
                        d = minimum(prev[y] + 1, row[y - 1] + 1, prev[y - 1] + relabel(ii, jj))
                        td[ii][jj] = d
                    else:
                        d = minimum(prev[y] + 1, row[y - 1] + 1,
                                    fd[p][bl[jj] - lj] + td[ii][jj])
                    row[y] = d
    return td[n - 1][m - 1]


def ted(a: LabeledTree | None, b: LabeledTree | None) -> int:
    """Unit-cost ordered tree edit distance (insert, delete, relabel)."""
    if a is None or b is None:
        return node_count(a) + node_count(b)
    pa, pb = _Postorder(a), _Postorder(b)
    la, lb = pa.labels, pb.labels
    return _zhang_shasha(pa, pb, lambda i, j: 0 if la[i] == lb[j] else 1)


def nted(pred: dict, gt: dict) -> float:
    """Tree edit distance normalised by ground-truth size, as a percentage."""
    if gt is None:
        raise EmptyGroundTruth("ground truth tree is empty")
    gt_tree = tree_of(gt)
    return ted(tree_of(pred), gt_tree) / gt_tree.size() * 100.0


# -- strings ---------------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over Unicode code points."""
    if a == b:
        return 0
    # common prefix/suffix never change the distance
    start = 0
    while start < len(a) and start < len(b) and a[start] == b[start]:
        start += 1
    end_a, end_b = len(a), len(b)
    while end_a > start and end_b > start and a[end_a - 1] == b[end_b - 1]:
        end_a -= 1
        end_b -= 1
    a, b = a[start:end_a], b[start:end_b]
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def _normalize_answer(s: str) -> str:
    return s.strip().casefold()


def nls(pred: str, gold: str) -> float:
    p, g = _normalize_answer(pred), _normalize_answer(gold)
    longest = max(len(p), len(g))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(p, g) / longest


def anls(pred: str, golds: Sequence[str], tau: float = 0.5) -> float:
    """Best thresholded normalised Levenshtein similarity against ``golds``."""
    if not golds:
        raise NoGoldAnswers("at least one gold answer is required")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    best = 0.0
    for gold in golds:
        s = nls(pred, gold)
        if s >= tau and s > best:
            best = s
    return best


def classification_accuracy(preds: Sequence[dict], gts: Sequence[dict],
                            key: str = "class") -> float:
    if len(preds) != len(gts):
        raise LengthMismatch(len(preds), len(gts))
    hits = _class_hits(preds, gts, key)
    return sum(hits) / len(hits) if hits else 0.0


def _class_hits(preds, gts, key) -> list[int]:
    hits = []
    for i, (pred, gt) in enumerate(zip(preds, gts)):
        if not isinstance(gt, dict) or not isinstance(gt.get(key), str):
            raise MalformedGroundTruth(i, f"missing text value for {key!r}")
        value = pred.get(key) if isinstance(pred, dict) else None
        hits.append(int(isinstance(value, str) and value == gt[key]))
    return hits


# -- reports ---------------------------------------------------------------------


@dataclass
class SampleScore:
    id: str
    score: float
    counts: dict = field(default_factory=dict)


@dataclass
class MetricReport:
    metric: str
    samples: list[SampleScore] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def mean(self) -> float:
        # fsum keeps the mean independent of sample order
        if not self.samples:
            return 0.0
        return math.fsum(s.score for s in self.samples) / len(self.samples)

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "mean": self.mean,
            "n": self.n,
            "samples": [{"id": s.id, "score": s.score} for s in self.samples],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "MetricReport":
        return cls(data["metric"], [SampleScore(str(s["id"]), float(s["score"]))
                                    for s in data["samples"]])


def nted_report(ids: Iterable[str], preds: Sequence[dict], gts: Sequence[dict]) -> MetricReport:
    ids = list(ids)
    if not (len(ids) == len(preds) == len(gts)):
        raise LengthMismatch(len(preds), len(gts))
    report = MetricReport("nted")
    for sample_id, pred, gt in zip(ids, preds, gts):
        gt_tree = tree_of(gt)
        distance = ted(tree_of(pred), gt_tree)
        nodes = gt_tree.size()
        report.samples.append(
            SampleScore(sample_id, distance / nodes * 100.0, {"ted": distance, "nodes": nodes})
        )
    return report


def anls_report(ids: Iterable[str], preds: Sequence[str], golds: Sequence[Sequence[str]],
                tau: float = 0.5) -> MetricReport:
    ids = list(ids)
    if not (len(ids) == len(preds) == len(golds)):
        raise LengthMismatch(len(preds), len(golds))
    return MetricReport("anls", [SampleScore(i, anls(p, g, tau))
                                 for i, p, g in zip(ids, preds, golds)])


def accuracy_report(ids: Iterable[str], preds: Sequence[dict], gts: Sequence[dict],
                    key: str = "class") -> MetricReport:
    ids = list(ids)
    if not (len(ids) == len(preds) == len(gts)):
        raise LengthMismatch(len(preds), len(gts))
    hits = _class_hits(preds, gts, key)
    return MetricReport("accuracy", [SampleScore(i, float(h)) for i, h in zip(ids, hits)])
