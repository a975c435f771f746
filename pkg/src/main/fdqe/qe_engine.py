"""
QE Engine

Decides quantifier elimination for a finite-dimensional C*-algebra A in a given language via the amalgamation test:
Th(A) eliminates quantifiers iff any two admissible embeddings of a substructure C into A differ by an automorphism of A.

Automorphisms of a direct sum of full matrix algebras are inner automorphisms (which never change a multiplicity matrix)
composed with permutations of equal-size summands, so two embeddings are amalgamable iff their multiplicity matrices
agree up to a size-preserving column permutation. All verdicts are per this Bratteli-level criterion; substructures
that only carry a predicate inherited from A without admitting an admissible embedding are not modelled.
"""

import time
import logging as log
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Optional

from fdqe.algebra import BlockSizes, LanguageVariant, canonicalize
from fdqe.bratteli import MultiplicityMatrix, enumerate_embedding_matrices
from fdqe.constants import *
from fdqe.errors import ValidationError

CRITERION = "bratteli"


### Result types ###

@dataclass(frozen = True)
class Certificate:
    """
    Witness of QE failure: a substructure and two admissible embeddings of it that no automorphism of A relates.
    """
    sub_dims: BlockSizes
    e1: MultiplicityMatrix
    e2: MultiplicityMatrix


@dataclass(frozen = True)
class VerdictStats:
    candidates: int = 0     # Substructures examined
    matrices: int = 0       # Admissible matrices examined across those substructures


@dataclass(frozen = True)
class Verdict:
    algebra: BlockSizes
    language: LanguageVariant
    qe: bool
    certificate: Optional[Certificate] = None
    stats: VerdictStats = field(default_factory = VerdictStats)
    criterion: str = CRITERION

    def __post_init__(self):
        if self.qe == (self.certificate is not None):
            raise ValidationError("A verdict carries a certificate exactly when QE fails")


@dataclass(frozen = True)
class SweepReport:
    language: LanguageVariant
    bound: int
    rows: tuple[tuple[BlockSizes, Verdict], ...]


### Candidate substructures ###

def canonical_algebras(bound: int, max_block: Optional[int] = None) -> list[BlockSizes]:
    """
    All canonical block size sequences with matrix size sum at most `bound` (and every block at most `max_block`),
    in lexicographic order.
    """
    max_block = bound if max_block is None else max_block
    found = []

    def extend(prefix, remaining, largest):
        if prefix: found.append(tuple(prefix))
        for n in range(min(remaining, largest), 0, -1):
            extend(prefix + [n], remaining - n, n)

    extend([], bound, max_block)
    return [BlockSizes(s) for s in sorted(found)]


def _candidate_embeddings(A: BlockSizes, lang: LanguageVariant):
    """
    [Internal] Yields (C, admissible matrices C -> A) for every candidate substructure C with at least one admissible
    embedding, in lexicographic order of C.
    """
    # Unitality summed over columns gives sum_i c_i * (row sum i) = sum_j m_j with every row sum >= 1
    for C in canonical_algebras(A.matrix_size_sum, max(A)):
        matrices = enumerate_embedding_matrices(C, A, lang)
        if matrices: yield C, matrices


def enumerate_subalgebra_candidates(A: BlockSizes, lang: LanguageVariant) -> list[BlockSizes]:
    A = canonicalize(A)
    return [C for C, _ in _candidate_embeddings(A, lang)]


### Orbits under automorphisms ###

def _size_groups(target: BlockSizes) -> dict[int, list[int]]:
    groups = {}
    for j, m in enumerate(target):
        groups.setdefault(m, []).append(j)
    return groups


def orbit_canonical(E: MultiplicityMatrix) -> MultiplicityMatrix:
    """
    Canonical representative of the orbit of E under permutations of equal-size target summands: within each group of
    equal target sizes the columns are sorted lexicographically (keeping the group's positions).
    """
    columns = list(E.columns)
    for positions in _size_groups(E.target).values():
        for j, col in zip(positions, sorted(columns[j] for j in positions)):
            columns[j] = col
    return E.with_columns(columns)


def amalgamating_permutation(E1: MultiplicityMatrix, E2: MultiplicityMatrix) -> Optional[tuple[int, ...]]:
    """
    Finds a permutation theta of the target summands, preserving sizes, that carries the embedding E2 onto E1.

    #### Returns
    A tuple `theta` with `E1.columns[j] == E2.columns[theta[j]]` for every j, or `None` if the embeddings are not
    amalgamable.
    """
    if E1.source != E2.source or E1.target != E2.target: return None
    cols1, cols2 = E1.columns, E2.columns
    unused = set(range(len(E2.target)))
    theta = []
    # Equal columns are interchangeable, so a greedy match succeeds whenever any match does
    for j, col in enumerate(cols1):
        match = next((t for t in sorted(unused) if E2.target[t] == E1.target[j] and cols2[t] == col), None)
        if match is None: return None
        unused.remove(match)
        theta.append(match)
    return tuple(theta)


### Decision procedure ###

def _first_conflict(matrices) -> Optional[tuple[MultiplicityMatrix, MultiplicityMatrix]]:
    reference = orbit_canonical(matrices[0])
    for E in matrices[1:]:
        if orbit_canonical(E) != reference: return matrices[0], E
    return None


def decide_qe(A, lang: LanguageVariant, sub = None) -> Verdict:
    """
    Decides whether Th(A) eliminates quantifiers in the given language.

    #### Parameters
    ##### Required
    - `A`: The algebra (any order; it is canonicalized first).
    - `lang`: The language variant.
    ##### Optional
    - `sub`: Restrict the amalgamation test to this one substructure.

    #### Returns
    A `Verdict`. On failure the certificate holds the lexicographically first failing substructure and the first
    admissible matrix paired with the first one outside its orbit.
    """
    A = canonicalize(A)

    if sub is None:
        candidates = _candidate_embeddings(A, lang)
    else:
        C = canonicalize(sub)
        matrices = enumerate_embedding_matrices(C, A, lang)
        if not matrices:
            raise ValidationError(f"({C}) has no {lang.value}-admissible embedding into ({A})")
        candidates = [(C, matrices)]

    n_candidates = n_matrices = 0
    for C, matrices in candidates:
        n_candidates += 1
        n_matrices += len(matrices)
        conflict = _first_conflict(matrices)
        if conflict:
            log.debug("(%s) in %s: embeddings of (%s) cannot be amalgamated: %s vs %s", A, lang.value, C, *conflict)
            return Verdict(A, lang, False, Certificate(C, *conflict), VerdictStats(n_candidates, n_matrices))
        log.log(TRACE, "(%s) in %s: %d embedding(s) of (%s) share one orbit", A, lang.value, len(matrices), C)

    return Verdict(A, lang, True, None, VerdictStats(n_candidates, n_matrices))


def sweep(bound: int, lang: LanguageVariant, workers: int = DEFAULT_SWEEP_WORKERS) -> SweepReport:
    """
    Decides QE for every canonical algebra with matrix size sum at most `bound`. With more than one worker the
    algebras are decided in a process pool; rows are always returned in lexicographic order.
    """
    if isinstance(bound, bool) or not isinstance(bound, int) or bound < 1:
        raise ValidationError(f"Sweep bound must be a positive integer, got {bound!r}")
    if workers < 1:
        raise ValidationError(f"Worker count must be positive, got {workers}")

    algebras = canonical_algebras(bound)
    log.info("Sweeping %d algebra(s) with matrix size sum <= %d in %s", len(algebras), bound, lang.value)
    t = time.perf_counter()

    if workers == 1:
        verdicts = [decide_qe(A, lang) for A in algebras]
    else:
        with ProcessPoolExecutor(max_workers = workers) as pool:
            verdicts = list(pool.map(decide_qe, algebras, repeat(lang)))

    log.info("Sweep took %.3fs", time.perf_counter() - t)
    return SweepReport(lang, bound, tuple(zip(algebras, verdicts)))


def format_sweep_table(report: SweepReport) -> str:
    """
    Aligned text table with columns algebra, verdict, #candidates, #matrices.
    """
    header = ("algebra", "verdict", "#candidates", "#matrices")
    rows = [(str(A), "yes" if v.qe else "no", str(v.stats.candidates), str(v.stats.matrices)) for A, v in report.rows]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in [header] + rows]
    return "\n".join(lines) + "\n"
