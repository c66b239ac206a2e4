import math
import warnings

import numpy as np
import pytest

from phonedist.cluster import (
    Dendrogram,
    Merge,
    cut,
    to_newick,
    ward_cluster,
    write_merges_csv,
)
from phonedist.errors import InvalidK, TooFewItems
from phonedist.infotheory import DistanceMatrix


def naive_ward_reference(matrix: DistanceMatrix):
    """Independent oracle: Ward criterion recomputed from the ORIGINAL matrix
    each step via the centroid pairwise-sum identity; rescans all pairs.

    D2(A,B) = 2|A||B|/(|A|+|B|) * (S_AB/(|A||B|) - S_AA/(2|A|^2) - S_BB/(2|B|^2))
    with S_XY the sum of squared original distances across X x Y.
    """
    d2 = np.asarray(matrix.values, dtype=float) ** 2
    n = d2.shape[0]
    members = {i: [i] for i in range(n)}
    merges = []
    next_id = n

    def ward_d2(a_members, b_members):
        na, nb = len(a_members), len(b_members)
        s_ab = sum(d2[i, j] for i in a_members for j in b_members) / (na * nb)
        s_aa = sum(d2[i, j] for i in a_members for j in a_members) / (2 * na * na)
        s_bb = sum(d2[i, j] for i in b_members for j in b_members) / (2 * nb * nb)
        return 2 * na * nb / (na + nb) * (s_ab - s_aa - s_bb)

    while len(members) > 1:
        active = sorted(members)
        best = None
        for idx, a in enumerate(active):
            for b in active[idx + 1:]:
                v = ward_d2(members[a], members[b])
                if best is None or v < best[0]:
                    best = (v, a, b)
        v, a, b = best
        merges.append((a, b, math.sqrt(max(v, 0.0)), len(members[a]) + len(members[b])))
        members[next_id] = members[a] + members[b]
        del members[a], members[b]
        next_id += 1
    return merges


def random_matrix(rng, n):
    m = rng.random((n, n))
    m = (m + m.T) / 2.0
    np.fill_diagonal(m, 0.0)
    return DistanceMatrix(tuple(f"l{i}" for i in range(n)), m)


class TestWardCluster:
    def test_two_items(self):
        m = DistanceMatrix(("a", "b"), np.array([[0.0, 0.4], [0.4, 0.0]]))
        d = ward_cluster(m)
        assert d.merges == (Merge(0, 1, 0.4, 2),)

    def test_three_equidistant_tie_break(self):
        values = np.ones((3, 3)) - np.eye(3)
        d = ward_cluster(DistanceMatrix(("a", "b", "c"), values))
        # first merge is the smallest lexicographic pair; second height is
        # sqrt((2*1 + 2*1 - 1)/3) = 1.0 by the hand-run recurrence
        assert d.merges[0] == Merge(0, 1, 1.0, 2)
        assert d.merges[1].left == 2 and d.merges[1].right == 3
        assert d.merges[1].height == pytest.approx(1.0, abs=1e-12)

    def test_two_tight_pairs(self):
        values = np.full((4, 4), 1.0)
        np.fill_diagonal(values, 0.0)
        values[0, 1] = values[1, 0] = 0.1
        values[2, 3] = values[3, 2] = 0.1
        d = ward_cluster(DistanceMatrix(("a", "b", "c", "d"), values))
        assert (d.merges[0].left, d.merges[0].right) == (0, 1)
        assert (d.merges[1].left, d.merges[1].right) == (2, 3)
        assert (d.merges[2].left, d.merges[2].right) == (4, 5)
        ref = naive_ward_reference(DistanceMatrix(("a", "b", "c", "d"), values))
        for got, (el, er, eh, es) in zip(d.merges, ref):
            assert (got.left, got.right, got.size) == (el, er, es)
            assert got.height == pytest.approx(eh, abs=1e-9)

    def test_too_few_items(self):
        with pytest.raises(TooFewItems):
            ward_cluster(DistanceMatrix(("a",), np.zeros((1, 1))))

    def test_oracle_equivalence_randomized(self, rng):
        for _ in range(100):
            m = random_matrix(rng, int(rng.integers(2, 7)))
            got = ward_cluster(m)
            ref = naive_ward_reference(m)
            for merge, (el, er, eh, es) in zip(got.merges, ref):
                assert (merge.left, merge.right, merge.size) == (el, er, es)
                assert merge.height == pytest.approx(eh, abs=1e-9)

    def test_heights_monotone_and_warning_free(self, rng):
        for _ in range(20):
            m = random_matrix(rng, 6)
            with warnings.catch_warnings():
                warnings.simplefilter("error")
                d = ward_cluster(m)
            heights = [merge.height for merge in d.merges]
            assert heights == sorted(heights)

    def test_permutation_equivariance(self, rng):
        for _ in range(20):
            n = 6
            m = random_matrix(rng, n)
            perm = rng.permutation(n)
            permuted = DistanceMatrix(
                tuple(m.labels[i] for i in perm), m.values[np.ix_(perm, perm)]
            )
            d1 = ward_cluster(m)
            d2 = ward_cluster(permuted)
            for k in range(2, n + 1):
                assert cut(d1, k) == cut(d2, k)

    def test_determinism_bit_identical_newick(self, rng):
        m = random_matrix(rng, 6)
        assert to_newick(ward_cluster(m)) == to_newick(ward_cluster(m))

    def test_scipy_cross_check(self, rng):
        scipy_hierarchy = pytest.importorskip("scipy.cluster.hierarchy")
        from scipy.spatial.distance import squareform

        for _ in range(20):
            m = random_matrix(rng, int(rng.integers(3, 7)))
            z = scipy_hierarchy.linkage(squareform(m.values, checks=False), "ward")
            ours = sorted(merge.height for merge in ward_cluster(m).merges)
            assert np.allclose(sorted(z[:, 2]), ours, atol=1e-9)


class TestCut:
    @pytest.fixture
    def pairs_dendrogram(self):
        values = np.full((4, 4), 1.0)
        np.fill_diagonal(values, 0.0)
        values[0, 1] = values[1, 0] = 0.1
        values[2, 3] = values[3, 2] = 0.1
        return ward_cluster(DistanceMatrix(("p1", "p2", "q1", "q2"), values))

    def test_k1_is_everything(self, pairs_dendrogram):
        assert cut(pairs_dendrogram, 1) == [["p1", "p2", "q1", "q2"]]

    def test_kn_is_singletons(self, pairs_dendrogram):
        assert cut(pairs_dendrogram, 4) == [["p1"], ["p2"], ["q1"], ["q2"]]

    def test_k2_recovers_the_pairs(self, pairs_dendrogram):
        assert cut(pairs_dendrogram, 2) == [["p1", "p2"], ["q1", "q2"]]

    def test_invalid_k(self, pairs_dendrogram):
        with pytest.raises(InvalidK):
            cut(pairs_dendrogram, 0)
        with pytest.raises(InvalidK):
            cut(pairs_dendrogram, 5)


class TestNewick:
    def test_two_leaves(self):
        d = Dendrogram(("a", "b"), (Merge(0, 1, 0.4, 2),))
        assert to_newick(d) == "(a:0.4,b:0.4);"

    def test_three_leaves_height_differences(self):
        d = Dendrogram(("a", "b", "c"), (Merge(0, 1, 0.2, 2), Merge(3, 2, 0.6, 3)))
        assert to_newick(d) == "((a:0.2,b:0.2):0.4,c:0.6);"

    def test_label_with_metacharacter_is_quoted(self):
        d = Dendrogram(("a,x", "b"), (Merge(0, 1, 0.5, 2),))
        assert to_newick(d) == "('a,x':0.5,b:0.5);"

    def test_label_with_quote_is_doubled(self):
        d = Dendrogram(("it's", "b"), (Merge(0, 1, 0.5, 2),))
        assert to_newick(d) == "('it''s':0.5,b:0.5);"


class TestDendrogramValidation:
    def test_child_used_twice_rejected(self):
        with pytest.raises(ValueError, match="twice"):
            Dendrogram(("a", "b", "c"), (Merge(0, 1, 0.1, 2), Merge(0, 2, 0.2, 3)))

    def test_wrong_merge_count_rejected(self):
        with pytest.raises(ValueError):
            Dendrogram(("a", "b", "c"), (Merge(0, 1, 0.1, 2),))

    def test_merges_csv(self, tmp_path, rng):
        d = ward_cluster(random_matrix(rng, 3))
        out = tmp_path / "merges.csv"
        write_merges_csv(d, out)
        lines = out.read_text().splitlines()
        assert lines[0] == "step,left,right,height,size"
        assert len(lines) == 3
