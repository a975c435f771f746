"""
Bratteli

Unital injective embeddings between finite-dimensional C*-algebras, up to unitary conjugacy. An embedding of
C = M_{c_1} + ... + M_{c_k} into A = M_{m_1} + ... + M_{m_l} is classified by its multiplicity matrix E, where E[i][j]
is the number of copies of M_{c_i} placed on the diagonal of M_{m_j}.

This module enumerates the matrices admissible in each language, realizes a matrix as a concrete block map and renders
the Bratteli diagram as DOT.
"""

import logging as log
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.linalg import block_diag

from fdqe.algebra import BlockSizes, Element, LanguageVariant, validate_element
from fdqe.constants import *
from fdqe.errors import ValidationError


### Multiplicity matrices ###

@dataclass(frozen = True)
class MultiplicityMatrix:
    """
    Multiplicity matrix of an embedding C -> A. Rows are indexed by the summands of the source C, columns by the
    summands of the target A, both in the order the algebras were given in.
    """
    source: BlockSizes
    target: BlockSizes
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        source = self.source if isinstance(self.source, BlockSizes) else BlockSizes(tuple(self.source))
        target = self.target if isinstance(self.target, BlockSizes) else BlockSizes(tuple(self.target))
        rows = tuple(tuple(row) for row in self.entries)
        if len(rows) != len(source):
            raise ValidationError(f"Matrix has {len(rows)} row(s) but the source ({source}) has {len(source)} block(s)")
        for i, row in enumerate(rows):
            if len(row) != len(target):
                raise ValidationError(f"Row {i + 1} has {len(row)} entries but the target ({target}) has {len(target)} block(s)")
            for j, e in enumerate(row):
                if isinstance(e, bool) or not isinstance(e, (int, np.integer)) or e < 0:
                    raise ValidationError(f"Entry ({i + 1}, {j + 1}) must be a non-negative integer, got {e!r}")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "entries", tuple(tuple(int(e) for e in row) for row in rows))

    @property
    def columns(self) -> tuple[tuple[int, ...], ...]:
        return tuple(zip(*self.entries))

    @property
    def flat(self) -> tuple[int, ...]:
        return tuple(e for row in self.entries for e in row)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype = int).reshape(len(self.source), len(self.target))

    def with_columns(self, columns, target: BlockSizes = None) -> "MultiplicityMatrix":
        """
        Returns a matrix with the same source and the given columns (and optionally a relabelled target).
        """
        target = self.target if target is None else target
        return MultiplicityMatrix(self.source, target, tuple(zip(*columns)))

    def __str__(self) -> str:
        return "[" + ",".join("[" + ",".join(str(e) for e in row) + "]" for row in self.entries) + "]"


def source_multiplicities(E: MultiplicityMatrix) -> tuple[int, ...]:
    """
    Multiplicity of each source summand: the number of edges incident with it (row sums).
    """
    return tuple(sum(row) for row in E.entries)


def target_multiplicities(E: MultiplicityMatrix) -> tuple[int, ...]:
    """
    Multiplicity of each target summand (column sums).
    """
    return tuple(sum(col) for col in E.columns)


def is_unital_injective(E: MultiplicityMatrix) -> bool:
    """
    True iff the matrix describes a unital (column j fills M_{m_j} exactly) and injective (every source summand lands
    somewhere) embedding.
    """
    for j, col in enumerate(E.columns):
        if sum(e * c for e, c in zip(col, E.source)) != E.target[j]: return False
    return all(s >= 1 for s in source_multiplicities(E))


### Language filters ###

def passes_min_filter(E: MultiplicityMatrix) -> bool:
    """
    An embedding preserving the distance to minimal projections must send minimal projections to minimal projections,
    i.e. every source summand has multiplicity exactly 1.
    """
    return all(s == 1 for s in source_multiplicities(E))


@lru_cache(maxsize = SIM_FILTER_CACHE_SIZE)
def passes_sim_filter(E: MultiplicityMatrix) -> bool:
    """
    An embedding must reflect unitary conjugacy. Two normal elements with per-block spectra mu_i and mu'_i have images
    with spectra sum_i E[i][j] * mu_i in column j, so conjugacy is reflected iff no non-zero integer vector c with
    |c_i| <= c_i-th block size satisfies c^T E = 0 (c_i is the mass moved between two eigenvalues in block i).
    """
    bounds = [range(-n, n + 1) for n in E.source]
    vectors = np.array(list(product(*bounds)), dtype = int)
    vectors = vectors[np.any(vectors != 0, axis = 1)]
    if not len(vectors): return True
    kernel = np.all(vectors @ E.as_array() == 0, axis = 1)
    if np.any(kernel):
        log.log(TRACE, "Matrix %s fails conjugacy reflection (kernel vector %s)", E, vectors[np.argmax(kernel)].tolist())
        return False
    return True


def passes_filter(E: MultiplicityMatrix, lang: LanguageVariant) -> bool:
    """
    Admissibility of a unital injective matrix in the given language. The star language is the conjunction of the min
    and sim filters.
    """
    if lang.uses_min and not passes_min_filter(E): return False
    if lang.uses_sim and not passes_sim_filter(E): return False
    return True


### Enumeration ###

@lru_cache(maxsize = COLUMN_CACHE_SIZE)
def _column_options(source: tuple[int, ...], m: int, max_entry: int) -> tuple[tuple[int, ...], ...]:
    """
    [Internal] All non-negative vectors v (entries at most max_entry) with sum_i v_i * source_i == m, in lexicographic
    order.
    """
    options = []

    def fill(i, remaining, prefix):
        if i == len(source):
            if remaining == 0: options.append(tuple(prefix))
            return
        for e in range(min(remaining // source[i], max_entry) + 1):
            fill(i + 1, remaining - e * source[i], prefix + [e])

    fill(0, m, [])
    return tuple(options)


def enumerate_embedding_matrices(C: BlockSizes, A: BlockSizes, lang: LanguageVariant) -> tuple[MultiplicityMatrix, ...]:
    """
    Enumerates every unital injective multiplicity matrix C -> A admissible in the given language.

    The search is depth-first over the columns of A: each column is filled with a solution of its unitality equation,
    and a branch is cut as soon as some source summand with no edges yet is larger than every remaining target summand.
    Injectivity and the language filter are checked at the leaves.

    #### Returns
    A tuple of matrices, sorted lexicographically by their row-major entries.
    """
    k, l = len(C), len(A)
    # Under the min filter every row has exactly one non-zero entry, which must be a 1
    max_entry = 1 if lang.uses_min else max(A)
    options = [_column_options(C.sizes, m, max_entry) for m in A]
    suffix_max = [max(A.sizes[j:]) if j < l else 0 for j in range(l + 1)]

    found = []

    def search(j, row_sums, columns):
        if j == l:
            if min(row_sums) < 1: return
            E = MultiplicityMatrix(C, A, tuple(zip(*columns)))
            if passes_filter(E, lang): found.append(E)
            return
        for col in options[j]:
            sums = [s + e for s, e in zip(row_sums, col)]
            if lang.uses_min and max(sums) > 1: continue
            if any(s == 0 and C[i] > suffix_max[j + 1] for i, s in enumerate(sums)): continue
            search(j + 1, sums, columns + [col])

    search(0, [0] * k, [])
    found.sort(key = lambda E: E.flat)
    log.debug("Enumerated %d %s-admissible embedding(s) of (%s) into (%s)", len(found), lang.value, C, A)
    return tuple(found)


def divides_embedding(n: int, m: int) -> bool:
    """
    M_n embeds unitally in M_m iff n divides m.
    """
    return m % n == 0


def has_embedding(C: BlockSizes, A: BlockSizes, lang: LanguageVariant = LanguageVariant.BASE) -> bool:
    return bool(enumerate_embedding_matrices(C, A, lang))


def is_isomorphism(E: MultiplicityMatrix) -> bool:
    """
    True iff the matrix is a permutation matrix pairing summands of equal size.
    """
    if len(E.source) != len(E.target): return False
    for i, row in enumerate(E.entries):
        if sorted(row) != [0] * (len(row) - 1) + [1]: return False
        if E.target[row.index(1)] != E.source[i]: return False
    return all(sum(col) == 1 for col in E.columns)


def image_ranks(E: MultiplicityMatrix, block_index: int) -> tuple[int, ...]:
    """
    Per-target-block ranks of the image of the standard minimal projection of the given (1-based) source block. A
    rank-one projection in M_{c_i} is copied E[i][j] times into M_{m_j}.
    """
    if not 1 <= block_index <= len(E.source):
        raise ValidationError(f"Block index {block_index} out of range for source ({E.source})")
    return E.entries[block_index - 1]


### Realization ###

@dataclass(frozen = True)
class RealizedEmbedding:
    """
    Standard representative of the conjugacy class of embeddings with the given matrix. `placement[j]` lists the
    (source block, copy) slots on the diagonal of target block j, both 1-based, in increasing block then copy order.
    """
    matrix: MultiplicityMatrix
    placement: tuple[tuple[tuple[int, int], ...], ...]


def realize(E: MultiplicityMatrix) -> RealizedEmbedding:
    if not is_unital_injective(E):
        raise ValidationError(f"Matrix {E} is not a unital injective embedding of ({E.source}) into ({E.target})")
    placement = tuple(
        tuple((i + 1, copy + 1) for i, e in enumerate(col) for copy in range(e))
        for col in E.columns
    )
    return RealizedEmbedding(E, placement)


def apply(f: RealizedEmbedding, x: Element) -> Element:
    """
    Applies the realized embedding: target block j is the block-diagonal arrangement of the source blocks listed in
    its placement.
    """
    validate_element(x, f.matrix.source)
    blocks = tuple(block_diag(*[x.blocks[i - 1] for i, _ in slots]) for slots in f.placement)
    return Element(f.matrix.target, blocks)


### DOT export ###

EDGE_STYLES = ("solid", "dashed")


def _check_style(style: str):
    if style not in EDGE_STYLES:
        raise ValidationError(f"Unknown edge style {style!r} (expected one of {', '.join(EDGE_STYLES)})")


def _dot_body(E: MultiplicityMatrix, style: str, prefix: str = "", indent: str = "  ") -> list[str]:
    """
    [Internal] Node and edge statements of one diagram. Parallel edges are separate statements.
    """
    lines = []
    for i, c in enumerate(E.source, start = 1):
        lines.append(f'{indent}{prefix}C_{i} [label="C_{i}:M{c}"];')
    for j, m in enumerate(E.target, start = 1):
        lines.append(f'{indent}{prefix}A_{j} [label="A_{j}:M{m}"];')
    for i, row in enumerate(E.entries, start = 1):
        for j, e in enumerate(row, start = 1):
            for _ in range(e):
                lines.append(f"{indent}{prefix}C_{i} -> {prefix}A_{j} [dir=none, style={style}];")
    return lines


def to_dot(E: MultiplicityMatrix, style: str = "solid") -> str:
    """
    Renders the Bratteli diagram of the matrix as a DOT digraph, source summands at the bottom.
    """
    _check_style(style)
    lines = ["digraph bratteli {", "  rankdir=BT;", "  node [shape=box];"]
    lines += _dot_body(E, style)
    lines.append("}")
    return "\n".join(lines) + "\n"


def diagrams_to_dot(matrices, style = "solid") -> str:
    """
    Renders several diagrams into one DOT digraph, one cluster per matrix. `style` is either one edge style for every
    diagram or a sequence with one style per diagram (e.g. solid and dashed for the two halves of a certificate).
    """
    matrices = list(matrices)
    styles = [style] * len(matrices) if isinstance(style, str) else list(style)
    if len(styles) != len(matrices):
        raise ValidationError(f"Got {len(styles)} edge style(s) for {len(matrices)} diagram(s)")
    for s in styles or [style]: _check_style(s)
    lines = ["digraph bratteli {", "  rankdir=BT;", "  node [shape=box];"]
    for n, (E, style) in enumerate(zip(matrices, styles), start = 1):
        lines.append(f"  subgraph cluster_{n} {{")
        lines.append(f'    label="{E}";')
        lines += _dot_body(E, style, prefix = f"e{n}_", indent = "    ")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
