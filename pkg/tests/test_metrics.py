import json
import random
import string

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from docforge.errors import LengthMismatch, MalformedGroundTruth, NoGoldAnswers
from docforge.metrics import (
    LabeledTree,
    MetricReport,
    SampleScore,
    accuracy_report,
    anls,
    anls_report,
    classification_accuracy,
    levenshtein,
    nls,
    node_count,
    nted,
    nted_report,
    ted,
    tree_of,
)

from exhaustive import all_labeled_shapes, batched_zhang_shasha, exhaustive_ted_check
from helpers import random_tree
from oracles import (
    brute_ted,
    dp_levenshtein,
    from_labeled,
    label_tree,
    random_tuple_tree,
    to_labeled,
)
from strategies import doc_trees


def _labels_preorder(t: LabeledTree):
    out = [t.label]
    for c in t.children:
        out.extend(_labels_preorder(c))
    return out


def test_tree_of_examples():
    assert node_count(tree_of({})) == 1
    memo = tree_of({"class": "memo"})
    assert _labels_preorder(memo) == ["<root>", "class", "memo"]
    menu = tree_of({"menu": [{"nm": "A"}, {"nm": "B"}]})
    assert _labels_preorder(menu) == ["<root>", "menu", "nm", "A", "menu", "nm", "B"]


def test_ted_basics():
    t = to_labeled(("a", (("b", ()), ("c", (("d", ()),)))))
    assert ted(t, t) == 0
    assert ted(None, t) == 4 and ted(t, None) == 4 and ted(None, None) == 0
    assert ted(LabeledTree("a"), LabeledTree("b")) == 1


def test_ted_textbook_example():
    # f(d(a c(b)) e) vs f(c(d(a b)) e): distance 2
    a = to_labeled(("f", (("d", (("a", ()), ("c", (("b", ()),)))), ("e", ()))))
    b = to_labeled(("f", (("c", (("d", (("a", ()), ("b", ()))),)), ("e", ()))))
    assert brute_ted(from_labeled(a), from_labeled(b)) == 2
    assert ted(a, b) == 2


def test_exhaustive_small():
    pairs, mismatches = exhaustive_ted_check(4)
    assert pairs == (2 + 4 + 16 + 80) ** 2
    assert mismatches == 0


def test_batched_path_matches_scalar_ted():
    rng = random.Random(3)
    catalog = [entry for entry in all_labeled_shapes(6) if entry[1] >= 4]
    for _ in range(40):
        id_a, n_a, lab_a = rng.choice(catalog)
        id_b, n_b, lab_b = rng.choice(catalog)
        cost = [[(lab_a[:, u][:, None] != lab_b[:, v][None, :]).astype(np.int16)
                 for v in range(n_b)] for u in range(n_a)]
        table = batched_zhang_shasha(id_a, id_b, cost)
        for _ in range(5):
            ra, rb = rng.randrange(len(lab_a)), rng.randrange(len(lab_b))
            ta, tb = label_tree(id_a, lab_a[ra]), label_tree(id_b, lab_b[rb])
            assert ted(to_labeled(ta), to_labeled(tb)) == table[ra, rb] == brute_ted(ta, tb)


def test_ted_matches_oracle_random():
    rng = random.Random(5)
    for _ in range(200):
        a = random_tuple_tree(rng, 9, "abc")
        b = random_tuple_tree(rng, 9, "abc")
        assert ted(to_labeled(a), to_labeled(b)) == brute_ted(a, b)


def test_ted_axioms_random():
    rng = random.Random(9)
    for _ in range(300):
        a, b, c = (to_labeled(random_tuple_tree(rng, 8)) for _ in range(3))
        ab, bc, ac = ted(a, b), ted(b, c), ted(a, c)
        assert ab == ted(b, a)
        assert ac <= ab + bc
        assert (ab == 0) == (from_labeled(a) == from_labeled(b))
        assert ab <= a.size() + b.size()


def test_deep_tree_no_recursion_limit():
    deep = LabeledTree("x")
    node = deep
    for _ in range(3000):
        child = LabeledTree("x")
        node.children.append(child)
        node = child
    assert deep.size() == 3001
    assert ted(deep, LabeledTree("x")) == 3000


def test_nted_anchors():
    gt = {"a": "x", "b": "y"}
    assert node_count(tree_of(gt)) == 5
    assert nted(gt, gt) == 0.0
    assert nted({}, gt) == pytest.approx(4 / 5 * 100, abs=0, rel=1e-15)
    pred = {"a": "x", "b": "z"}
    assert brute_ted(from_labeled(tree_of(pred)), from_labeled(tree_of(gt))) == 1
    assert nted(pred, gt) == 20.0


@given(doc_trees, doc_trees)
def test_nted_zero_iff_same_tree(pred, gt):
    same = from_labeled(tree_of(pred)) == from_labeled(tree_of(gt))
    assert (nted(pred, gt) == 0) == same


@pytest.mark.parametrize("a,b,d", [("", "abc", 3), ("abc", "abc", 0), ("kitten", "sitting", 3),
                                   ("flaw", "lawn", 2), ("héllo", "hello", 1), ("😀a", "a", 1)])
def test_levenshtein_examples(a, b, d):
    assert dp_levenshtein(a, b) == d
    assert levenshtein(a, b) == d


@given(st.text(max_size=20), st.text(max_size=20))
def test_levenshtein_matches_dp(a, b):
    assert levenshtein(a, b) == dp_levenshtein(a, b)


def test_anls_fixtures():
    assert anls("hello", ["hello"]) == 1.0
    assert anls("helo", ["hello"], 0.5) == pytest.approx(0.8)
    assert anls("xyzzy", ["hello"], 0.5) == 0.0
    assert anls("  HeLLo ", ["nope", "hello"]) == 1.0
    assert nls("", "  ") == 1.0
    with pytest.raises(NoGoldAnswers):
        anls("a", [])


# letters whose case mappings fold back to the same string (unlike e.g. dotless i)
CASED = string.ascii_letters + string.digits + " -.äöüßéçñåøÆΣσςАб"


@given(st.text(max_size=10), st.lists(st.text(max_size=10), min_size=1, max_size=3))
def test_anls_properties(pred, golds):
    score = anls(pred, golds, 0.5)
    assert 0.0 <= score <= 1.0
    assert anls(pred, golds, 0.0) == max(nls(pred, g) for g in golds)


@given(st.text(alphabet=CASED, max_size=10),
       st.lists(st.text(alphabet=CASED, max_size=10), min_size=1, max_size=3))
def test_anls_case_invariant(pred, golds):
    base = anls(pred, golds)
    for changed in (pred.upper(), pred.lower(), pred.swapcase(), pred.title()):
        assert anls(changed, golds) == base


def test_accuracy_fixtures():
    gts = [{"class": c} for c in ("memo", "letter", "email", "memo")]
    preds = [{"class": "memo"}, {"class": "letter"}, {"class": "email"}, {"class": "letter"}]
    assert classification_accuracy(gts, gts) == 1.0
    assert classification_accuracy([{}] * 4, gts) == 0.0
    assert classification_accuracy(preds, gts) == 0.75
    with pytest.raises(LengthMismatch):
        classification_accuracy(preds[:3], gts)
    with pytest.raises(MalformedGroundTruth) as info:
        classification_accuracy(preds, gts[:3] + [{"class": {"x": "y"}}])
    assert info.value.index == 3


def test_reports():
    rng = random.Random(1)
    gts = [random_tree(rng) for _ in range(5)]
    report = nted_report([str(i) for i in range(5)], gts, gts)
    assert report.mean == 0.0 and report.n == 5
    data = json.loads(report.to_json())
    assert set(data) == {"metric", "mean", "n", "samples"}
    assert data["samples"][0] == {"id": "0", "score": 0.0}
    assert MetricReport.from_dict(data).to_dict() == data

    a = anls_report(["q1", "q2"], ["hello", "helo"], [["hello"], ["hello"]])
    assert a.mean == pytest.approx(0.9)
    acc = accuracy_report(["a", "b"], [{"class": "memo"}, {}], [{"class": "memo"}] * 2)
    assert acc.mean == 0.5
    assert MetricReport("x").mean == 0.0


def test_report_mean_order_independent():
    scores = [0.1, 1e16, -1e16, 0.3]
    fwd = MetricReport("m", [SampleScore(str(i), s) for i, s in enumerate(scores)])
    rev = MetricReport("m", list(reversed(fwd.samples)))
    assert fwd.mean == rev.mean
