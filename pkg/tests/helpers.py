"""Random generators and independent oracles shared by the test modules."""

from __future__ import annotations

import random

from docforge.codec import ClassToken, FieldEnd, FieldStart, Text, Vocab

NAME_POOL = [f"f{i}" for i in range(20)]
CLASS_POOL = ["memo", "letter", "email", "invoice"]
WORDS = ["A", "B", "total", "12.00", "x y", " pad ", "[br]", "a\\b", "memo", "ünï"]

VOCAB = Vocab(fields=frozenset(NAME_POOL), classes=frozenset(CLASS_POOL))


def random_tree(rng: random.Random, max_depth: int = 5, max_nodes: int = 40,
                max_array: int = 4) -> dict:
    """Random DocTree; a node is a key, an object or a text leaf."""
    budget = [rng.randint(1, max_nodes)]

    def take(n=1):
        if budget[0] < n:
            return False
        budget[0] -= n
        return True

    def leaf():
        return rng.choice(WORDS + CLASS_POOL)

    def value(depth):
        if depth >= max_depth or rng.random() < 0.4 or not take():
            return leaf()
        return obj(depth + 1)

    def obj(depth):
        out = {}
        names = rng.sample(NAME_POOL, rng.randint(0, 4))
        for name in names:
            if not take():
                break
            if depth < max_depth and rng.random() < 0.25:
                out[name] = [value(depth) for _ in range(rng.randint(1, max_array))]
            else:
                out[name] = value(depth)
        return out

    return obj(1)


def count_nodes(tree) -> int:
    """Objects, keys and text leaves."""
    if isinstance(tree, dict):
        total = 1
        for v in tree.values():
            total += 1 + sum(count_nodes(e) for e in (v if isinstance(v, list) else [v]))
        return total
    return 1


def reference_parse(items) -> dict:
    """Recursive-descent parser for *well-formed* token sequences only."""
    pos = 0

    def parse_object(stop):
        nonlocal pos
        groups = []
        while pos < len(items) and not (isinstance(items[pos], FieldEnd)):
            start = items[pos]
            assert isinstance(start, FieldStart), items[pos]
            pos += 1
            if pos < len(items) and isinstance(items[pos], (Text, ClassToken)):
                item = items[pos]
                val = item.text if isinstance(item, Text) else item.label
                pos += 1
            else:
                val = parse_object(start.name)
            assert items[pos] == FieldEnd(start.name)
            pos += 1
            groups.append((start.name, val))
        out = {}
        i = 0
        while i < len(groups):
            j = i
            while j + 1 < len(groups) and groups[j + 1][0] == groups[i][0]:
                j += 1
            vals = [g[1] for g in groups[i:j + 1]]
            assert groups[i][0] not in out
            out[groups[i][0]] = vals[0] if len(vals) == 1 else vals
            i = j + 1
        return out

    tree = parse_object(None)
    assert pos == len(items)
    return tree


def match_pairs(items) -> dict:
    """start index -> end index for a well-formed sequence (plain stack)."""
    stack, pairs = [], {}
    for i, item in enumerate(items):
        if isinstance(item, FieldStart):
            stack.append(i)
        elif isinstance(item, FieldEnd):
            pairs[stack.pop()] = i
    return pairs


def expected_after_end_removal(items, end_index: int) -> tuple[dict, tuple[int, int]]:
    """Oracle for decode() after deleting ``items[end_index]`` (a FieldEnd).

    The unterminated field absorbs its right siblings. If its enclosing
    field has the same name, that enclosing end token closes it instead and
    the loss moves one level up. The lost span runs to the enclosing end
    token (or input end) and is cut out of the original sequence.
    """
    pairs = match_pairs(items)
    ends = {e: s for s, e in pairs.items()}
    start = ends[end_index]

    def enclosing(s):
        best = None
        for ps, pe in pairs.items():
            if ps < s and pe > pairs[s] and (best is None or ps > best):
                best = ps
        return best

    lost = start
    parent = enclosing(lost)
    while parent is not None and items[parent].name == items[lost].name:
        lost = parent
        parent = enclosing(lost)
    cut_end = pairs[parent] if parent is not None else len(items)
    remaining = items[:lost] + items[cut_end:]
    return reference_parse(remaining), (lost, cut_end)
