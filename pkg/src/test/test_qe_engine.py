"""
Tests for fdqe.qe_engine: candidate substructures, orbits under summand permutations, verdicts and sweeps.
"""

from itertools import combinations, permutations

import pytest
from hypothesis import given, settings, strategies as st

from fdqe.algebra import BlockSizes, LanguageVariant
from fdqe.bratteli import MultiplicityMatrix, enumerate_embedding_matrices, is_isomorphism
from fdqe.errors import ValidationError
from fdqe.qe_engine import (CRITERION, Verdict, amalgamating_permutation, canonical_algebras, decide_qe,
                            enumerate_subalgebra_candidates, format_sweep_table, orbit_canonical, sweep)

BASE, MIN, SIM, STAR = LanguageVariant.BASE, LanguageVariant.MIN, LanguageVariant.SIM, LanguageVariant.STAR


def from_columns(source, target, columns) -> MultiplicityMatrix:
    return MultiplicityMatrix(BlockSizes(tuple(source)), BlockSizes(tuple(target)), tuple(zip(*columns)))


### Candidates ###

def test_canonical_algebras():
    assert [A.sizes for A in canonical_algebras(3)] == [(1,), (1, 1), (1, 1, 1), (2,), (2, 1), (3,)]
    assert len(canonical_algebras(6)) == 29
    assert [A.sizes for A in canonical_algebras(3, max_block = 1)] == [(1,), (1, 1), (1, 1, 1)]


@pytest.mark.parametrize("A, lang, expected", [
    ((2,), BASE, [(1,), (1, 1), (2,)]),
    ((2,), MIN, [(1, 1), (2,)]),
    ((3,), MIN, [(1, 1, 1), (2, 1), (3,)]),
])
def test_subalgebra_candidates(A, lang, expected):
    assert [C.sizes for C in enumerate_subalgebra_candidates(BlockSizes(A), lang)] == expected


### Orbits ###

def test_orbit_canonical_examples():
    E1 = from_columns((1, 1), (1, 1, 1), [(1, 0), (1, 0), (0, 1)])
    E2 = from_columns((1, 1), (1, 1, 1), [(0, 1), (1, 0), (1, 0)])
    E3 = from_columns((1, 1), (1, 1, 1), [(1, 0), (0, 1), (0, 1)])
    assert orbit_canonical(E1) == orbit_canonical(E2)
    assert orbit_canonical(E1) != orbit_canonical(E3)


def test_orbit_canonical_is_identity_without_equal_sizes():
    for E in enumerate_embedding_matrices(BlockSizes((1, 1)), BlockSizes((3, 2)), BASE):
        assert orbit_canonical(E) == E


def test_amalgamating_permutation_maps_one_embedding_onto_the_other():
    E1 = from_columns((1, 1), (2, 1, 1), [(1, 1), (1, 0), (0, 1)])
    E2 = from_columns((1, 1), (2, 1, 1), [(1, 1), (0, 1), (1, 0)])
    theta = amalgamating_permutation(E1, E2)
    assert theta == (0, 2, 1)
    assert all(E1.columns[j] == E2.columns[t] for j, t in enumerate(theta))
    assert amalgamating_permutation(E1, from_columns((1, 1), (2, 1, 1), [(2, 0), (0, 1), (0, 1)])) is None


def _same_orbit_by_search(E1: MultiplicityMatrix, E2: MultiplicityMatrix) -> bool:
    for perm in permutations(range(len(E1.target))):
        if any(E1.target[p] != E1.target[j] for j, p in enumerate(perm)): continue
        if all(E1.columns[j] == E2.columns[p] for j, p in enumerate(perm)): return True
    return False


@pytest.mark.slow
def test_orbit_canonical_matches_permutation_search():
    for A in canonical_algebras(5):
        for C in canonical_algebras(A.matrix_size_sum, max(A)):
            for lang in (BASE, MIN):
                matrices = enumerate_embedding_matrices(C, A, lang)[:24]
                for E1, E2 in combinations(matrices, 2):
                    same = _same_orbit_by_search(E1, E2)
                    assert (orbit_canonical(E1) == orbit_canonical(E2)) == same, f"{E1} vs {E2}"
                    assert (amalgamating_permutation(E1, E2) is not None) == same


### Decisions ###

@pytest.mark.parametrize("sizes", [(1,), (1, 1), (2,)])
def test_base_qe_holds(sizes):
    verdict = decide_qe(BlockSizes(sizes), BASE)
    assert verdict.qe and verdict.certificate is None
    assert verdict.criterion == CRITERION == "bratteli"


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_base_qe_fails_for_larger_matrix_algebras(n):
    assert not decide_qe(BlockSizes((n,)), BASE).qe


@pytest.mark.parametrize("n", range(1, 9))
def test_min_qe_holds_for_matrix_algebras(n):
    assert decide_qe(BlockSizes((n,)), MIN).qe


def test_min_qe_fails_for_three_plus_two():
    verdict = decide_qe(BlockSizes((3, 2)), MIN)
    assert not verdict.qe
    cert = verdict.certificate
    # The lexicographically first failing substructure is C^5
    assert cert.sub_dims == BlockSizes((1, 1, 1, 1, 1))
    assert orbit_canonical(cert.e1) != orbit_canonical(cert.e2)
    assert verdict.stats.candidates == 1 and verdict.stats.matrices == 10


def test_min_qe_certificate_for_a_chosen_substructure():
    verdict = decide_qe(BlockSizes((3, 2)), MIN, sub = BlockSizes((1, 1, 1, 2)))
    assert not verdict.qe
    cert = verdict.certificate
    assert cert.sub_dims == BlockSizes((2, 1, 1, 1))
    assert cert.e1.entries == ((0, 1), (1, 0), (1, 0), (1, 0))
    assert cert.e2.entries == ((1, 0), (0, 1), (0, 1), (1, 0))
    assert len(enumerate_embedding_matrices(cert.sub_dims, verdict.algebra, MIN)) == 4


def test_sub_without_embedding_is_rejected():
    with pytest.raises(ValidationError, match = "no min-admissible embedding"):
        decide_qe(BlockSizes((3, 2)), MIN, sub = BlockSizes((1, 1)))


def test_min_verdict_for_c_cubed_plus_m2():
    verdict = decide_qe(BlockSizes((1, 1, 1, 2)), MIN)
    assert verdict.algebra == BlockSizes((2, 1, 1, 1))
    assert not verdict.qe
    assert verdict.certificate.sub_dims == BlockSizes((1, 1, 1, 1, 1))


def test_sim_qe_fails_for_two_plus_one():
    verdict = decide_qe(BlockSizes((1, 2)), SIM)
    assert not verdict.qe
    cert = verdict.certificate
    assert cert.sub_dims == BlockSizes((1, 1))
    assert cert.e1.entries == ((0, 1), (2, 0))
    assert cert.e2.entries == ((1, 0), (1, 1))
    admissible = {E.entries for E in enumerate_embedding_matrices(cert.sub_dims, verdict.algebra, SIM)}
    assert ((2, 0), (0, 1)) in admissible and ((0, 1), (2, 0)) in admissible
    assert verdict.stats.candidates == 2 and verdict.stats.matrices == 5


@given(sizes = st.lists(st.integers(1, 2), min_size = 1, max_size = 3), data = st.data())
@settings(max_examples = 40, deadline = None)
def test_verdicts_ignore_block_order(sizes, data):
    shuffled = data.draw(st.permutations(sizes))
    lang = data.draw(st.sampled_from(list(LanguageVariant)))
    assert decide_qe(BlockSizes(tuple(shuffled)), lang) == decide_qe(BlockSizes(tuple(sizes)), lang)


def test_verdict_requires_certificate_exactly_on_failure():
    with pytest.raises(ValidationError, match = "certificate"):
        Verdict(BlockSizes((2,)), BASE, False)


### Sweeps ###

def test_base_sweep_classification():
    report = sweep(6, BASE)
    assert [A.sizes for A, v in report.rows if v.qe] == [(1,), (1, 1), (2,)]
    assert len(report.rows) == 29


def test_min_sweep_small():
    report = sweep(3, MIN)
    assert {A.sizes: v.qe for A, v in report.rows} == {
        (1,): True, (1, 1): True, (1, 1, 1): True, (2,): True, (2, 1): False, (3,): True
    }


@pytest.mark.slow
def test_star_sweep_is_all_yes_and_only_isomorphisms():
    report = sweep(6, STAR)
    assert all(v.qe for _, v in report.rows)
    for A, _ in report.rows:
        for C in enumerate_subalgebra_candidates(A, STAR):
            assert all(is_isomorphism(E) for E in enumerate_embedding_matrices(C, A, STAR))


def test_sweep_rows_match_single_decisions():
    for lang in LanguageVariant:
        for A, verdict in sweep(4, lang).rows:
            assert decide_qe(A, lang) == verdict


def test_parallel_sweep_matches_serial():
    assert sweep(4, SIM, workers = 2) == sweep(4, SIM)


@pytest.mark.parametrize("bound", [0, -1, True, 2.5])
def test_sweep_rejects_bad_bounds(bound):
    with pytest.raises(ValidationError):
        sweep(bound, BASE)


def test_sweep_table():
    table = format_sweep_table(sweep(2, BASE))
    lines = table.splitlines()
    assert lines[0].split() == ["algebra", "verdict", "#candidates", "#matrices"]
    assert [line.split()[:2] for line in lines[1:]] == [["1", "yes"], ["1,1", "yes"], ["2", "yes"]]
