import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noveltynas.arch_space import S1, S2, architecture_from_choices, decode, random_genotype
from noveltynas.exceptions import DomainError
from noveltynas.novelty import (
    Archive,
    NoveltyConfig,
    dissimilarity,
    dissimilarity_matrix,
    novelty,
    population_novelty,
    reference_pool,
    similarity,
)

OPS = {name: i for i, name in enumerate(S2.ops)}


def worked_pair():
    """Two cells sharing only skip on (0,3) and conv1x1 on (1,3)."""
    # edge order: (0,1) (0,2) (1,2) (0,3) (1,3) (2,3)
    a1 = [OPS["nor_conv_3x3"]] * 3 + [OPS["skip_connect"], OPS["nor_conv_1x1"], OPS["nor_conv_3x3"]]
    a2 = [OPS["avg_pool_3x3"]] * 3 + [OPS["skip_connect"], OPS["nor_conv_1x1"], OPS["avg_pool_3x3"]]
    return architecture_from_choices(S2, a1), architecture_from_choices(S2, a2)


def brute_novelty(target, pool, k):
    """Sorted-list reference: drop one self copy, average the k smallest."""
    dists = []
    dropped = False
    for other in pool:
        if not dropped and other.key == target.key:
            dropped = True
            continue
        common = len(target.edges & other.edges)
        dists.append(1 - common / (len(target.edges) + len(other.edges) - common))
    if not dists:
        return 1.0
    dists.sort()
    return sum(dists[:k]) / len(dists[:k])


def random_s2(rng, n):
    return [architecture_from_choices(S2, rng.integers(0, 5, 6)) for _ in range(n)]


def test_worked_example_values():
    a1, a2 = worked_pair()
    assert len(a1.edges & a2.edges) == 2
    assert similarity(a1, a2) == pytest.approx(0.2, abs=1e-15)
    assert dissimilarity(a1, a2) == pytest.approx(0.8, abs=1e-15)


def test_similarity_identity_and_symmetry():
    rng = np.random.default_rng(0)
    archs = random_s2(rng, 40)
    for a, b in itertools.combinations(archs, 2):
        assert similarity(a, b) == similarity(b, a)
    for a in archs:
        assert similarity(a, a) == 1.0 and dissimilarity(a, a) == 0.0


def test_s2_similarity_takes_jaccard_values():
    allowed = {m / (12 - m) for m in range(7)}
    rng = np.random.default_rng(1)
    archs = random_s2(rng, 60)
    for a, b in itertools.combinations(archs, 2):
        assert any(abs(similarity(a, b) - v) < 1e-12 for v in allowed)


def test_s1_similarity_uses_retained_edges():
    a = decode(random_genotype(S1, 0), S1)
    b = decode(random_genotype(S1, 1), S1)
    common = len(a.edges & b.edges)
    assert similarity(a, b) == pytest.approx(common / (32 - common))


def test_cross_space_comparison_raises():
    with pytest.raises(DomainError):
        similarity(decode(random_genotype(S1, 0), S1), decode(random_genotype(S2, 0), S2))


def test_dissimilarity_matrix_matches_pairwise():
    rng = np.random.default_rng(2)
    left, right = random_s2(rng, 7), random_s2(rng, 9)
    D = dissimilarity_matrix(np.stack([a.one_hot() for a in left]), np.stack([b.one_hot() for b in right]))
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            assert D[i, j] == pytest.approx(dissimilarity(a, b), abs=1e-12)


def test_novelty_edge_cases():
    a1, a2 = worked_pair()
    assert novelty(a1, []) == 1.0
    assert novelty(a1, [a1]) == 1.0
    assert novelty(a1, [a1, a1]) == 0.0
    assert novelty(a1, [a2]) == pytest.approx(0.8)
    assert novelty(a1, [a1, a2], exclude_self=False) == pytest.approx(0.4)


def test_novelty_fewer_than_k_averages_available():
    rng = np.random.default_rng(3)
    target, *others = random_s2(rng, 4)
    expected = np.mean([dissimilarity(target, o) for o in others])
    assert novelty(target, others, NoveltyConfig(k=5)) == pytest.approx(expected)


def test_novelty_config_validation():
    for bad in (0, -1, 2.5):
        with pytest.raises(ValueError):
            NoveltyConfig(k=bad)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.integers(1, 8))
def test_novelty_matches_sorted_reference(seed, size, k):
    rng = np.random.default_rng(seed)
    pool = random_s2(rng, size)
    target = pool[int(rng.integers(size))] if rng.random() < 0.5 else random_s2(rng, 1)[0]
    assert novelty(target, pool, NoveltyConfig(k)) == pytest.approx(brute_novelty(target, pool, k), abs=1e-12)


def test_archive_deduplicates_and_preserves_order():
    rng = np.random.default_rng(4)
    base = random_s2(rng, 17)
    assert len({a.key for a in base}) == 17
    population = base + base[:3]
    archive = Archive(S2)
    assert archive.update(population) == 17
    assert len(archive) == 17
    assert archive.keys == tuple(a.key for a in base)
    assert archive.update(population) == 0
    assert base[5] in archive and base[5].key in archive


def test_archive_snapshot_is_immutable_and_matrix_matches():
    rng = np.random.default_rng(5)
    archs = random_s2(rng, 5)
    archive = Archive()
    archive.update(archs)
    snap = archive.keys
    archive.add(random_s2(rng, 1)[0])
    assert len(snap) == 5 and len(archive.keys) == 6
    np.testing.assert_array_equal(archive.matrix()[:5], np.stack([a.one_hot() for a in archs]))


def test_archive_cap_evicts_oldest():
    rng = np.random.default_rng(6)
    archs = list({a.key: a for a in random_s2(rng, 12)}.values())
    archive = Archive(S2, cap=4)
    archive.update(archs)
    assert archive.keys == tuple(a.key for a in archs[-4:])
    assert archs[0] not in archive


def test_archive_rejects_mixed_spaces():
    archive = Archive(S2)
    with pytest.raises(DomainError):
        archive.add(decode(random_genotype(S1, 0), S1))


def test_reference_pool_unites_by_key():
    rng = np.random.default_rng(7)
    old = random_s2(rng, 6)
    archive = Archive(S2)
    archive.update(old)
    population = [old[0], old[0], random_s2(rng, 1)[0]]
    matrix, keys = reference_pool(archive, population)
    assert keys.count(old[0].key) == 2
    assert len(keys) == 5 + 3 and matrix.shape == (8, 30)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_population_novelty_matches_reference(seed):
    rng = np.random.default_rng(seed)
    history = random_s2(rng, int(rng.integers(0, 25)))
    archive = Archive(S2)
    archive.update(history)
    population = random_s2(rng, 10)
    population += [population[i] for i in rng.integers(0, 10, 3)]
    population += [history[i] for i in rng.integers(0, len(history), 2)] if history else []
    pop_keys = {a.key for a in population}
    ref_pool = [a for a in {h.key: h for h in history}.values() if a.key not in pop_keys] + population
    got = population_novelty(population, archive, NoveltyConfig(5))
    want = [brute_novelty(a, ref_pool, 5) for a in population]
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_population_novelty_range_and_empty():
    assert population_novelty([], Archive(S2)).shape == (0,)
    rng = np.random.default_rng(8)
    scores = population_novelty(random_s2(rng, 20), Archive(S2))
    assert np.all((scores >= 0) & (scores <= 1))
