import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noveltynas.arch_space import (
    S1,
    S2,
    architecture_from_choices,
    canonical_key,
    decode,
    enumerate_space,
    get_space,
    parse_key,
    random_genotype,
    s2_index,
)
from noveltynas.exceptions import EncodingError, UnsupportedSpaceError


def s2_genotype(rows):
    return np.asarray(rows, dtype=float).ravel()


def test_space_shapes():
    assert S2.genotype_length == 30
    assert S1.genotype_length == 224
    assert len(S2.ops) == 5 and len(S2.edges) == 6 and S2.num_nodes == 4
    assert set(S2.edges) == {(i, j) for j in range(4) for i in range(j)}
    assert len(S1.ops) == 8 and len(S1.edges) == 14 and S1.num_nodes == 7
    for m in range(2, 6):
        assert sorted(src for src, dst in S1.edges if dst == m) == list(range(m))


def test_get_space_accepts_names():
    assert get_space("s2") is S2
    assert get_space(S1) is S1
    with pytest.raises(UnsupportedSpaceError):
        get_space("S3")


def test_decode_unique_argmax():
    rows = np.full((6, 5), 0.05)
    rows[0] = (0.1, 0.9, 0.2, 0.3, 0.4)
    arch = decode(s2_genotype(rows), S2)
    assert (0, 0, 1, S2.ops[1]) in arch.edges


def test_decode_ties_pick_lowest_index():
    arch = decode(np.full(30, 0.5), S2)
    assert {op for *_, op in arch.edges} == {S2.ops[0]}
    assert canonical_key(arch) == "|none~0|+|none~0|none~1|+|none~0|none~1|none~2|"


@pytest.mark.parametrize("bad", [np.zeros(29), np.zeros(31), np.zeros((6, 5))])
def test_decode_rejects_wrong_length(bad):
    with pytest.raises(EncodingError):
        decode(bad, S2)


@pytest.mark.parametrize("value", [-0.01, 1.01, np.nan])
def test_decode_rejects_out_of_range(value):
    g = np.full(30, 0.5)
    g[7] = value
    with pytest.raises(EncodingError):
        decode(g, S2)


def test_s1_decode_structure_over_random_genotypes():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        arch = decode(random_genotype(S1, rng), S1)
        assert len(arch.edges) == 16
        triples = {(c, s, d) for c, s, d, _ in arch.edges}
        assert len(triples) == 16
        for cell in range(2):
            assert sum(1 for c, *_ in arch.edges if c == cell) == 8
            for node in range(2, 6):
                assert sum(1 for c, _, d, _ in arch.edges if c == cell and d == node) == 2


def test_s1_keeps_strongest_edges_with_low_source_tiebreak():
    g = np.zeros((2, 14, 8))
    # node 2: edges (0,2),(1,2) always kept
    # node 3: edges (0,3) idx 2, (1,3) idx 3, (2,3) idx 4 -> make (1,3) and (2,3) strongest
    g[0, 2, 0] = 0.1
    g[0, 3, 4] = 0.9
    g[0, 4, 5] = 0.8
    # node 4: all tied at 0.5 -> sources 0 and 1 kept
    g[0, 5:9, 3] = 0.5
    arch = decode(g.ravel(), S1)
    cell0 = {(s, d, op) for c, s, d, op in arch.edges if c == 0}
    assert (1, 3, "sep_conv_3x3") in cell0 and (2, 3, "sep_conv_5x5") in cell0
    assert not any(s == 0 and d == 3 for s, d, _ in cell0)
    assert {s for s, d, _ in cell0 if d == 4} == {0, 1}


def test_canonical_key_formats():
    uniform = architecture_from_choices(S2, [0] * 6)
    assert uniform.key == "|none~0|+|none~0|none~1|+|none~0|none~1|none~2|"
    mixed = architecture_from_choices(S2, [3, 1, 2, 4, 0, 3])
    assert mixed.key == (
        "|nor_conv_3x3~0|+|skip_connect~0|nor_conv_1x1~1|+"
        "|avg_pool_3x3~0|none~1|nor_conv_3x3~2|"
    )
    s1 = decode(random_genotype(S1, 3), S1)
    cells = s1.key.split("//")
    assert len(cells) == 2
    for text in cells:
        items = text.split(";")
        assert len(items) == 8
        pairs = [tuple(map(int, item.split(":")[0].split("-"))) for item in items]
        assert pairs == sorted(pairs, key=lambda p: (p[1], p[0]))


def test_key_is_deterministic():
    g = random_genotype(S2, 1)
    assert decode(g, S2).key == decode(g.copy(), S2).key


def test_parse_key_round_trip():
    rng = np.random.default_rng(5)
    for space in (S1, S2):
        for _ in range(50):
            arch = decode(random_genotype(space, rng), space)
            assert parse_key(arch.key, space) == arch


@pytest.mark.parametrize(
    "key",
    [
        "|conv~0|+|none~0|none~1|+|none~0|none~1|none~2|",
        "|none~0|+|none~0|none~1|",
        "|none~1|+|none~0|none~1|+|none~0|none~1|none~2|",
        "none~0+none~0|none~1+none~0|none~1|none~2",
    ],
)
def test_parse_key_rejects_malformed(key):
    with pytest.raises(ValueError):
        parse_key(key, S2)


def test_enumeration_is_complete_and_collision_free():
    archs = list(enumerate_space(S2))
    assert len(archs) == 15625
    keys = [a.key for a in archs]
    assert len(set(keys)) == 15625
    assert [s2_index(a) for a in archs[:50]] == list(range(50))


def test_enumeration_rejects_s1():
    with pytest.raises(UnsupportedSpaceError):
        list(enumerate_space(S1))


def test_decode_is_surjective_on_s2():
    for arch in itertools.islice(enumerate_space(S2), 0, 15625, 97):
        assert decode(arch.one_hot(), S2) == arch


def test_random_genotype_seeding():
    a, b = random_genotype(S2, 7), random_genotype(S2, 7)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, random_genotype(S2, 8))
    g = random_genotype(S1, 11)
    assert g.shape == (224,) and g.min() >= 0 and g.max() <= 1


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 29), st.floats(0.0, 1.0))
def test_decode_invariant_to_non_argmax_perturbation(seed, idx, value):
    g = random_genotype(S2, seed)
    rows = g.reshape(6, 5)
    row, col = divmod(idx, 5)
    top = int(np.argmax(rows[row]))
    if col == top or value >= rows[row, top]:
        return
    perturbed = g.copy()
    perturbed[idx] = value
    assert decode(perturbed, S2) == decode(g, S2)
