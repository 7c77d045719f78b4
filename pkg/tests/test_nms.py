import numpy as np
import pytest
from helpers import THRESHOLDS, chain_set, random_corpus, random_detection_set, three_box_set
from hypothesis import given, settings
from hypothesis import strategies as st

from nmsbench.detections import DetectionSet, priority_order
from nmsbench.geometry import Comparison, Preorder, centroid, compare, iou
from nmsbench.graph import build_graph, wcc
from nmsbench.nms import (
    METHODS,
    NmsConfig,
    QsiTree,
    boe_nms,
    cartesian_tree,
    centroid_sequence,
    cluster_nms,
    eqsi_nms,
    fast_nms,
    original_nms,
    qsi_inorder_sequence,
    qsi_nms,
    run_method,
)

CFG = NmsConfig(0.5)


def higher(dets, a, b):
    return dets.scores[a] > dets.scores[b] or (dets.scores[a] == dets.scores[b] and a < b)


def ref_qsi(dets, cfg):
    """Plain recursive divide and conquer over index lists."""
    alive = [True] * len(dets)
    calls = 0
    left, right = {}, {}

    def box(i):
        return tuple(dets.boxes[i])

    def le(i, j):
        return compare(cfg.order, centroid(box(i)), centroid(box(j))) is Comparison.LESS_OR_EQUAL

    def solve(items):
        nonlocal calls
        if not items:
            return None
        p = items[0]
        for i in items[1:]:
            if higher(dets, i, p):
                p = i
        rest = [i for i in items if i != p]
        if alive[p]:
            for i in rest:
                calls += 1
                if iou(box(p), box(i)) > cfg.iou_threshold:
                    alive[i] = False
        lo = solve([i for i in rest if le(i, p)])
        hi = solve([i for i in rest if not le(i, p)])
        if lo is not None:
            left[p] = lo
        if hi is not None:
            right[p] = hi
        return p

    root = solve(list(range(len(dets))))
    return np.array(alive), calls, QsiTree(root, left, right)


def ref_eqsi(dets, cfg, gated=False):
    """The two stack passes written with Python lists."""
    keys = [centroid(tuple(b)) for b in dets.boxes]
    # stable insertion sort by the preorder, independent of the numpy path
    ordered = []
    for i in range(len(dets)):
        pos = len(ordered)
        while pos > 0 and compare(cfg.order, keys[ordered[pos - 1]], keys[i]) is Comparison.GREATER:
            pos -= 1
        ordered.insert(pos, i)
    alive = [True] * len(dets)
    calls = 0
    for pass_seq in (ordered, ordered[::-1]):
        stack = []
        for cur in pass_seq:
            while stack and higher(dets, cur, stack[-1]):
                below = stack.pop()
                if gated and not alive[cur]:
                    continue
                calls += 1
                if iou(tuple(dets.boxes[cur]), tuple(dets.boxes[below])) > cfg.iou_threshold:
                    alive[below] = False
            stack.append(cur)
    return np.array(alive), calls


def ref_cartesian(keys, lo=0, hi=None):
    """Recursive definition: root is the first maximum, then recurse on both sides."""
    if hi is None:
        hi = len(keys)
    if lo >= hi:
        return None, {}, {}
    m = max(range(lo, hi), key=lambda i: (keys[i], -i))
    left, right = {}, {}
    lr, ll, lrr = ref_cartesian(keys, lo, m)
    rr, rl, rrr = ref_cartesian(keys, m + 1, hi)
    for d in (ll, rl):
        left.update(d)
    for d in (lrr, rrr):
        right.update(d)
    if lr is not None:
        left[m] = lr
    if rr is not None:
        right[m] = rr
    return m, left, right


class TestOriginal:
    def test_chain(self):
        assert original_nms(chain_set(), CFG).mask.tolist() == [True, False, True]

    def test_single(self):
        d = DetectionSet("one", [[0, 0, 1, 1]], [0.3])
        assert original_nms(d, CFG).mask.tolist() == [True]

    def test_identical_boxes_keep_top(self):
        d = DetectionSet("same", [[0, 0, 4, 4]] * 5, [0.2, 0.9, 0.5, 0.1, 0.3])
        assert original_nms(d, CFG).mask.tolist() == [False, True, False, False, False]

    def test_ties_resolved_by_index(self):
        d = DetectionSet("tie", [[0, 0, 4, 4]] * 3, [0.5, 0.5, 0.5])
        for m in METHODS:
            assert run_method(m, d, CFG).mask.tolist() == [True, False, False], m


class TestFast:
    def test_chain_over_suppresses(self):
        assert fast_nms(chain_set(), CFG).mask.tolist() == [True, False, False]

    def test_no_overlap_all_kept(self):
        d = DetectionSet("sparse", [[0, 0, 1, 1], [5, 5, 6, 6], [10, 0, 11, 1]], [0.1, 0.2, 0.3])
        assert fast_nms(d, CFG).mask.all()

    def test_single(self):
        assert fast_nms(DetectionSet("one", [[0, 0, 1, 1]], [1.0]), CFG).mask.tolist() == [True]

    @pytest.mark.parametrize("nt", THRESHOLDS)
    def test_subset_of_original(self, nt):
        cfg = NmsConfig(nt)
        for d in random_corpus(100, seed=11, max_n=200):
            f, o = fast_nms(d, cfg).mask, original_nms(d, cfg).mask
            assert not np.any(f & ~o)


class TestCluster:
    def test_chain(self):
        r = cluster_nms(chain_set(), CFG)
        assert r.mask.tolist() == [True, False, True]
        assert r.iterations <= 3

    def test_no_overlap_one_iteration(self):
        d = DetectionSet("sparse", [[0, 0, 1, 1], [5, 5, 6, 6]], [0.1, 0.2])
        r = cluster_nms(d, CFG)
        assert r.mask.all() and r.iterations == 1

    @pytest.mark.parametrize("nt", THRESHOLDS)
    def test_matches_original_and_iteration_bound(self, nt):
        cfg = NmsConfig(nt)
        for d in random_corpus(100, seed=12, max_n=200):
            r = cluster_nms(d, cfg)
            assert np.array_equal(r.mask, original_nms(d, cfg).mask)
            assert r.iterations <= max(wcc(build_graph(d, nt)).component_sizes)


class TestBoe:
    def test_chain(self):
        assert boe_nms(chain_set(), CFG).mask.tolist() == [True, False, True]

    def test_fewer_iou_calls_than_original(self):
        cfg = NmsConfig(0.7)
        assert boe_nms(three_box_set(), cfg).iou_calls <= original_nms(three_box_set(), cfg).iou_calls

    @pytest.mark.parametrize("nt", [0.05, 0.2, *THRESHOLDS, 0.99])
    @pytest.mark.parametrize("y_filter", [True, False])
    def test_exact(self, nt, y_filter):
        cfg = NmsConfig(nt, boe_y_filter=y_filter)
        for d in random_corpus(100, seed=13, max_n=200):
            assert np.array_equal(boe_nms(d, cfg).mask, original_nms(d, cfg).mask)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.99))
    def test_exact_any_threshold(self, seed, nt):
        d = random_detection_set(np.random.default_rng(seed), max_n=120)
        cfg = NmsConfig(nt)
        assert np.array_equal(boe_nms(d, cfg).mask, original_nms(d, cfg).mask)


class TestQsi:
    def test_chain(self):
        # pivot A suppresses B; B is then a suppressed pivot; C survives
        assert qsi_nms(chain_set(), CFG).mask.tolist() == [True, False, True]

    def test_single(self):
        r = qsi_nms(DetectionSet("one", [[0, 0, 1, 1]], [0.4]), CFG, trace=True)
        assert r.mask.tolist() == [True] and r.iou_calls == 0
        assert r.tree == QsiTree(0)

    def test_chain_tree(self):
        # A is the root; B and C have larger keys so both land on the right
        tree = qsi_nms(chain_set(), CFG, trace=True).tree
        assert tree == QsiTree(0, {}, {0: 1, 1: 2})

    @pytest.mark.parametrize("order", list(Preorder))
    @pytest.mark.parametrize("seed", range(15))
    def test_matches_recursive_reference(self, order, seed):
        d = random_detection_set(np.random.default_rng(100 + seed), max_n=80)
        for nt in THRESHOLDS:
            cfg = NmsConfig(nt, order)
            got = qsi_nms(d, cfg, trace=True)
            mask, calls, tree = ref_qsi(d, cfg)
            assert np.array_equal(got.mask, mask)
            assert got.iou_calls == calls
            assert got.tree == tree

    def test_iou_call_budget(self):
        for d in random_corpus(100, seed=14, max_n=200):
            n = len(d)
            assert qsi_nms(d, NmsConfig(0.5)).iou_calls <= n * (n - 1) // 2


class TestEqsi:
    def test_chain(self):
        assert eqsi_nms(chain_set(), CFG).mask.tolist() == [True, False, False]

    def test_gate_only_removes_suppressions(self):
        # stack moves do not depend on liveness, so the gate can only skip work
        for d in random_corpus(100, seed=19, max_n=200):
            plain = eqsi_nms(d, NmsConfig(0.5))
            gated = eqsi_nms(d, NmsConfig(0.5, gated_eqsi=True))
            assert not np.any(plain.mask & ~gated.mask)
            assert gated.iou_calls <= plain.iou_calls

    def test_ascending_scores_without_overlap(self):
        d = DetectionSet("asc", [[0, 0, 1, 1], [3, 3, 4, 4], [6, 6, 7, 7]], [0.1, 0.2, 0.3])
        r = eqsi_nms(d, CFG)
        assert r.mask.all() and r.iou_calls == 2

    @pytest.mark.parametrize("order", list(Preorder))
    @pytest.mark.parametrize("gated", [False, True])
    @pytest.mark.parametrize("seed", range(10))
    def test_matches_list_reference(self, order, gated, seed):
        d = random_detection_set(np.random.default_rng(200 + seed), max_n=120)
        for nt in THRESHOLDS:
            cfg = NmsConfig(nt, order, gated_eqsi=gated)
            mask, calls = ref_eqsi(d, cfg, gated)
            got = eqsi_nms(d, cfg)
            assert np.array_equal(got.mask, mask)
            assert got.iou_calls == calls

    def test_iou_call_budget(self):
        for d in random_corpus(200, seed=15):
            assert eqsi_nms(d, NmsConfig(0.7)).iou_calls <= 2 * len(d)


class TestCartesianTree:
    def test_single(self):
        assert cartesian_tree([5]) == QsiTree(0)

    def test_three(self):
        assert cartesian_tree([3, 1, 2]) == QsiTree(0, {2: 1}, {0: 2})

    def test_decreasing_is_right_spine(self):
        t = cartesian_tree([9, 7, 5, 3])
        assert t.left == {} and t.right == {0: 1, 1: 2, 2: 3}

    def test_empty(self):
        assert cartesian_tree([]).root is None

    def test_ties_earlier_is_greater(self):
        assert cartesian_tree([2, 2]) == QsiTree(0, {}, {0: 1})

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=40))
    def test_matches_recursive_definition(self, keys):
        root, left, right = ref_cartesian(keys)
        t = cartesian_tree(keys)
        assert t == QsiTree(root, left, right)
        assert t.inorder() == list(range(len(keys)))

    def test_labels(self):
        assert cartesian_tree([1, 3], labels=[10, 20]) == QsiTree(20, {20: 10}, {})


@pytest.mark.parametrize("order", list(Preorder))
def test_qsi_tree_is_cartesian_tree(order):
    for d in random_corpus(30, seed=16, max_n=200):
        seq = qsi_inorder_sequence(d, order)
        prank = np.argsort(priority_order(d.scores))
        expected = cartesian_tree([-prank[i] for i in seq], labels=seq)
        assert qsi_nms(d, NmsConfig(0.5, order), trace=True).tree == expected


def test_centroid_sequence_is_stable():
    d = DetectionSet("dup", [[0, 0, 2, 2]] * 3 + [[0, 0, 1, 1]], [0.1, 0.9, 0.5, 0.2])
    assert centroid_sequence(d, Preorder.MANHATTAN).tolist() == [3, 0, 1, 2]


class TestRunMethod:
    def cross_class(self):
        return DetectionSet("cc", [[0, 0, 2, 2], [0, 0, 2, 2]], [0.9, 0.8], [0, 1])

    @pytest.mark.parametrize("name", METHODS)
    def test_per_class_blocks_cross_class_suppression(self, name):
        cfg = NmsConfig(0.5, per_class=True)
        assert run_method(name, self.cross_class(), cfg).mask.tolist() == [True, True]

    @pytest.mark.parametrize("name", METHODS)
    def test_class_agnostic_suppresses_across_classes(self, name):
        assert run_method(name, self.cross_class(), CFG).mask.tolist() == [True, False]

    @pytest.mark.parametrize("name", METHODS)
    def test_empty(self, name):
        r = run_method(name, DetectionSet("e", np.zeros((0, 4)), []), CFG)
        assert r.mask.shape == (0,) and r.iou_calls == 0

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="unknown NMS method"):
            run_method("soft", chain_set(), CFG)

    def test_per_class_matches_manual_split(self):
        cfg = NmsConfig(0.5, per_class=True)
        for d in random_corpus(20, seed=17, max_n=200):
            got = run_method("original", d, cfg).mask
            for c in np.unique(d.categories):
                idx = np.flatnonzero(d.categories == c)
                assert np.array_equal(got[idx], original_nms(d.subset(idx), CFG).mask)

    @pytest.mark.parametrize("name", METHODS)
    def test_deterministic_and_keeps_top(self, name):
        for d in random_corpus(20, seed=18, max_n=200):
            a = run_method(name, d, NmsConfig(0.5))
            b = run_method(name, d, NmsConfig(0.5))
            assert np.array_equal(a.mask, b.mask)
            assert (a.iou_calls, a.comparisons) == (b.iou_calls, b.comparisons)
            assert a.mask[priority_order(d.scores)[0]]


def test_config_validation():
    with pytest.raises(ValueError):
        NmsConfig(1.0)
    with pytest.raises(ValueError):
        NmsConfig(0.0)
    assert NmsConfig(0.5, "euclid").order is Preorder.EUCLIDEAN
