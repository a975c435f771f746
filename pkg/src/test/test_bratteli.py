"""
Tests for fdqe.bratteli: multiplicity matrices, the language filters, enumeration against a brute force search,
realization as block maps and DOT export.
"""

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import fdqe.bratteli
from fdqe.algebra import (BlockSizes, Element, LanguageVariant, adjoint, diagonal_element, element, is_minimal_projection,
                          multiply, standard_min_projection, unit)
from fdqe.bratteli import (MultiplicityMatrix, apply, diagrams_to_dot, divides_embedding, enumerate_embedding_matrices,
                           has_embedding, image_ranks, is_isomorphism, is_unital_injective, passes_filter,
                           passes_min_filter, passes_sim_filter, realize, source_multiplicities,
                           target_multiplicities, to_dot)
from fdqe.constants import COLUMN_CACHE_SIZE, SIM_FILTER_CACHE_SIZE
from fdqe.errors import ValidationError
from fdqe.qe_engine import canonical_algebras

BASE, MIN, SIM, STAR = LanguageVariant.BASE, LanguageVariant.MIN, LanguageVariant.SIM, LanguageVariant.STAR


def matrix(source, target, rows) -> MultiplicityMatrix:
    return MultiplicityMatrix(BlockSizes(tuple(source)), BlockSizes(tuple(target)), tuple(tuple(r) for r in rows))


# The two embeddings of C^3 + M_2 into M_3 + M_2 that cannot be amalgamated in the min language
SOLID = matrix((1, 1, 1, 2), (3, 2), [(1, 0), (0, 1), (0, 1), (1, 0)])
DASHED = matrix((1, 1, 1, 2), (3, 2), [(1, 0), (1, 0), (1, 0), (0, 1)])


### Multiplicity matrices ###

def test_matrix_rejects_wrong_shape():
    with pytest.raises(ValidationError, match = "row"):
        matrix((1, 1), (2,), [(1,)])
    with pytest.raises(ValidationError, match = "Row 1 has 2 entries"):
        matrix((1,), (2,), [(1, 1)])


@pytest.mark.parametrize("bad", [-1, 1.5, True])
def test_matrix_rejects_bad_entries(bad):
    with pytest.raises(ValidationError, match = r"Entry \(1, 1\)"):
        matrix((1,), (2,), [(bad,)])


def test_matrix_accessors():
    E = matrix((1, 1), (1, 2), [(0, 2), (1, 0)])
    assert E.columns == ((0, 1), (2, 0))
    assert E.flat == (0, 2, 1, 0)
    assert str(E) == "[[0,2],[1,0]]"
    assert source_multiplicities(E) == (2, 1)
    assert target_multiplicities(E) == (1, 2)
    assert np.array_equal(E.as_array(), [[0, 2], [1, 0]])


@pytest.mark.parametrize("E, expected", [
    (matrix((1, 1), (2,), [(1,), (1,)]), True),
    (matrix((1, 1), (2,), [(2,), (0,)]), False),
    (SOLID, True),
    (matrix((1,), (3,), [(2,)]), False),
])
def test_is_unital_injective(E, expected):
    assert is_unital_injective(E) == expected


### Language filters ###

@pytest.mark.parametrize("E, expected", [
    (matrix((1, 1, 1), (3,), [(1,), (1,), (1,)]), True),
    (matrix((1,), (2,), [(2,)]), False),
    (DASHED, True),
])
def test_min_filter(E, expected):
    assert passes_min_filter(E) == expected


@pytest.mark.parametrize("E, expected", [
    (matrix((1, 1), (1, 2), [(0, 2), (1, 0)]), True),
    (matrix((1, 1), (1, 2), [(1, 0), (0, 2)]), True),
    (matrix((1, 1), (2,), [(1,), (1,)]), False),
    (DASHED, False),
])
def test_sim_filter(E, expected):
    assert passes_sim_filter(E) == expected


def test_memoized_filters_are_bounded():
    for A in canonical_algebras(6):
        enumerate_embedding_matrices(BlockSizes((1, 1)), A, SIM)
    for cached, size in ((passes_sim_filter, SIM_FILTER_CACHE_SIZE), (fdqe.bratteli._column_options, COLUMN_CACHE_SIZE)):
        info = cached.cache_info()
        assert info.maxsize == size
        assert info.currsize <= size


def test_star_is_min_and_sim():
    identity = matrix((3, 2), (3, 2), [(1, 0), (0, 1)])
    assert passes_filter(identity, STAR)
    for E in enumerate_embedding_matrices(BlockSizes((1, 1, 1, 2)), BlockSizes((3, 2)), MIN):
        assert not passes_filter(E, STAR)


def test_base_accepts_every_unital_injective_matrix():
    for E in enumerate_embedding_matrices(BlockSizes((1, 1)), BlockSizes((2, 2)), BASE):
        assert passes_filter(E, BASE)


def _pushforward_injective(E: MultiplicityMatrix, points = (0, 1, 2)) -> bool:
    """
    Conjugacy reflection by direct search: every choice of spectra (multisets over `points`) in the source blocks
    must have a different image spectrum in some target block.
    """
    spectra = [list(_multisets(c, points)) for c in E.source]
    seen = set()
    for choice in product(*spectra):
        image = tuple(
            tuple(sorted(v for i, mu in enumerate(choice) for _ in range(E.entries[i][j]) for v in mu))
            for j in range(len(E.target))
        )
        if image in seen: return False
        seen.add(image)
    return True


def _multisets(size, points):
    if size == 0:
        yield ()
        return
    for k, p in enumerate(points):
        for rest in _multisets(size - 1, points[k:]):
            yield (p,) + rest


def test_sim_filter_matches_conjugacy_reflection_search():
    checked = 0
    for A in canonical_algebras(5):
        for C in canonical_algebras(3):
            for E in enumerate_embedding_matrices(C, A, BASE):
                assert passes_sim_filter(E) == _pushforward_injective(E), str(E)
                checked += 1
    assert checked > 50


### Enumeration ###

def test_enumeration_min_example():
    found = enumerate_embedding_matrices(BlockSizes((1, 1, 1, 2)), BlockSizes((3, 2)), MIN)
    assert {E.entries for E in found} == {
        ((1, 0), (0, 1), (0, 1), (1, 0)),
        ((0, 1), (1, 0), (0, 1), (1, 0)),
        ((0, 1), (0, 1), (1, 0), (1, 0)),
        ((1, 0), (1, 0), (1, 0), (0, 1)),
    }
    assert SOLID in found and DASHED in found


def test_enumeration_base_example_keeps_labelled_target():
    found = enumerate_embedding_matrices(BlockSizes((1, 1)), BlockSizes((1, 2)), BASE)
    assert [E.entries for E in found] == [((0, 1), (1, 1)), ((0, 2), (1, 0)), ((1, 0), (0, 2)), ((1, 1), (0, 1))]


def test_enumeration_sim_example():
    found = enumerate_embedding_matrices(BlockSizes((1, 1)), BlockSizes((2, 1)), SIM)
    assert len(found) == 4


def test_enumeration_can_be_empty():
    assert enumerate_embedding_matrices(BlockSizes((1, 1)), BlockSizes((3,)), MIN) == ()
    assert enumerate_embedding_matrices(BlockSizes((2,)), BlockSizes((3,)), BASE) == ()


def _brute_force(C: BlockSizes, A: BlockSizes, lang: LanguageVariant) -> set:
    """
    Every assignment of entries with E[i][j] <= m_j / c_i, filtered by unitality, injectivity and the language.
    """
    columns = []
    for m in A:
        ranges = [range(m // c + 1) for c in C]
        columns.append([v for v in product(*ranges) if sum(e * c for e, c in zip(v, C)) == m])
    found = set()
    for cols in product(*columns):
        E = MultiplicityMatrix(C, A, tuple(zip(*cols)))
        if is_unital_injective(E) and passes_filter(E, lang):
            found.add(E)
    return found


@pytest.mark.slow
@pytest.mark.parametrize("lang", list(LanguageVariant))
def test_enumeration_matches_brute_force(lang):
    for A in canonical_algebras(5):
        for C in canonical_algebras(A.matrix_size_sum, max(A)):
            assert set(enumerate_embedding_matrices(C, A, lang)) == _brute_force(C, A, lang), f"({C}) -> ({A})"


def test_enumeration_matches_brute_force_on_labelled_algebras():
    C, A = BlockSizes((1, 2, 1)), BlockSizes((2, 1, 3))
    for lang in LanguageVariant:
        assert set(enumerate_embedding_matrices(C, A, lang)) == _brute_force(C, A, lang)


def test_enumeration_is_sorted_and_duplicate_free():
    found = enumerate_embedding_matrices(BlockSizes((1, 1, 1)), BlockSizes((2, 1, 1)), BASE)
    flats = [E.flat for E in found]
    assert flats == sorted(set(flats))


@given(c = st.lists(st.integers(1, 3), min_size = 1, max_size = 3), a = st.lists(st.integers(1, 3), min_size = 1, max_size = 3))
@settings(max_examples = 60, deadline = None)
def test_language_sets_are_nested(c, a):
    C, A = BlockSizes(tuple(c)), BlockSizes(tuple(a))
    base = set(enumerate_embedding_matrices(C, A, BASE))
    min_set = set(enumerate_embedding_matrices(C, A, MIN))
    sim_set = set(enumerate_embedding_matrices(C, A, SIM))
    star_set = set(enumerate_embedding_matrices(C, A, STAR))
    assert min_set <= base and sim_set <= base
    assert star_set == min_set & sim_set
    assert all(is_isomorphism(E) for E in star_set)


def test_divisibility_and_existence():
    assert divides_embedding(2, 6) and not divides_embedding(4, 6)
    assert has_embedding(BlockSizes((2,)), BlockSizes((4,)))
    assert not has_embedding(BlockSizes((2,)), BlockSizes((3,)))
    assert has_embedding(BlockSizes((2, 1)), BlockSizes((3,)))
    assert not has_embedding(BlockSizes((1,)), BlockSizes((2,)), MIN)


def test_is_isomorphism():
    assert is_isomorphism(matrix((3, 2), (2, 3), [(0, 1), (1, 0)]))
    assert not is_isomorphism(matrix((1, 1), (2,), [(1,), (1,)]))


def test_image_ranks():
    assert image_ranks(SOLID, 1) == (1, 0)
    assert image_ranks(SOLID, 4) == (1, 0)
    with pytest.raises(ValidationError):
        image_ranks(SOLID, 5)


### Realization ###

def test_realize_rejects_non_embeddings():
    with pytest.raises(ValidationError, match = "not a unital injective"):
        realize(matrix((1, 1), (2,), [(2,), (0,)]))


def test_scalar_duplication():
    f = realize(matrix((1,), (2,), [(2,)]))
    y = apply(f, element((1,), [3 - 1j]))
    assert y.allclose(Element(BlockSizes((2,)), (np.diag([3 - 1j, 3 - 1j]),)))
    assert apply(f, unit(BlockSizes((1,)))).allclose(unit(BlockSizes((2,))))


@pytest.mark.parametrize("rows, expected", [
    ([(1, 0), (0, 2)], [[1], [0, 0]]),
    ([(0, 2), (1, 0)], [[0], [1, 1]]),
])
def test_realized_images_of_a_projection(rows, expected):
    f = realize(matrix((1, 1), (1, 2), rows))
    y = apply(f, diagonal_element((1, 1), [[1], [0]]))
    assert y.allclose(diagonal_element((1, 2), expected))


def test_identity_matrix_realizes_identity_map():
    A = BlockSizes((3, 2))
    f = realize(matrix(A, A, [(1, 0), (0, 1)]))
    x = element(A, [np.arange(9).reshape(3, 3), [[1j, 2], [3, 4]]])
    assert apply(f, x).allclose(x)


def test_apply_checks_the_source():
    f = realize(matrix((1,), (2,), [(2,)]))
    with pytest.raises(ValidationError):
        apply(f, unit(BlockSizes((2,))))


def test_realized_embedding_is_a_star_homomorphism():
    f = realize(matrix((2, 1), (5, 3), [(2, 1), (1, 1)]))
    rng = np.random.default_rng(7)
    C = BlockSizes((2, 1))
    x, y = (Element(C, tuple(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for n in C))
            for _ in range(2))
    assert apply(f, multiply(x, y)).allclose(multiply(apply(f, x), apply(f, y)))
    assert apply(f, adjoint(x)).allclose(adjoint(apply(f, x)))
    assert apply(f, unit(C)).allclose(unit(BlockSizes((5, 3))))


def test_min_admissible_maps_send_minimal_projections_to_minimal_projections():
    f = realize(SOLID)
    for i in range(1, 5):
        assert is_minimal_projection(apply(f, standard_min_projection(SOLID.source, i)))


### DOT export ###

def test_dot_counts_nodes_and_parallel_edges():
    dot = to_dot(matrix((1, 1), (1, 2), [(0, 2), (1, 0)]), style = "dashed")
    assert dot.startswith("digraph bratteli {")
    assert dot.count("[label=") == 4
    assert dot.count("->") == 3
    assert dot.count("C_1 -> A_2 [dir=none, style=dashed];") == 2


@pytest.mark.parametrize("E, nodes, edges", [
    (matrix((1, 1, 1), (3,), [(1,), (1,), (1,)]), 4, 3),
    (matrix((1,), (1,), [(1,)]), 2, 1),
])
def test_dot_sizes(E, nodes, edges):
    dot = to_dot(E)
    assert dot.count("[label=") == nodes
    assert dot.count("->") == edges


def test_dot_rejects_unknown_style():
    with pytest.raises(ValidationError, match = "edge style"):
        to_dot(SOLID, style = "dotted")


def test_diagrams_to_dot_clusters():
    dot = diagrams_to_dot([SOLID, DASHED], ("solid", "dashed"))
    assert "subgraph cluster_1" in dot and "subgraph cluster_2" in dot
    assert "e1_C_1 -> e1_A_1 [dir=none, style=solid];" in dot
    assert "e2_C_4 -> e2_A_2 [dir=none, style=dashed];" in dot
    with pytest.raises(ValidationError):
        diagrams_to_dot([SOLID], ("solid", "dashed"))
