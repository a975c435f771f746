"""
Algebra

Representation of finite-dimensional C*-algebras as direct sums of full matrix blocks, and of their concrete elements as
one complex matrix per block. Also defines the language variants that decide which embeddings are admissible.

Everything in here is immutable once constructed, so values can be shared freely between worker processes.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from fdqe.constants import *
from fdqe.errors import ValidationError


### Language variants ###

class LanguageVariant(Enum):
    """
    Expansion of the language of unital C*-algebras that governs which embeddings are admissible.
    """
    BASE    = "base"    # L_C*
    MIN     = "min"     # L_C* + P_min
    SIM     = "sim"     # L_C* + P_sim
    STAR    = "star"    # L_C* + P_min + P_sim

    @property
    def uses_min(self) -> bool:
        return self in (LanguageVariant.MIN, LanguageVariant.STAR)

    @property
    def uses_sim(self) -> bool:
        return self in (LanguageVariant.SIM, LanguageVariant.STAR)

    @classmethod
    def parse(cls, text: str) -> "LanguageVariant":
        if not isinstance(text, str): raise ValidationError(f"Language must be a string, got {text!r}")
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValidationError(f"Unknown language {text!r} (expected one of {', '.join(LANGUAGES)})")


### Block sizes ###

def _check_sizes(raw) -> tuple[int, ...]:
    """
    Checks that the given sequence is a non-empty sequence of positive integers and returns it as a tuple.
    Positions in error messages are 1-based.
    """
    sizes = tuple(raw)
    if not sizes: raise ValidationError("An algebra needs at least one block")
    for i, n in enumerate(sizes):
        # bool is an int subclass, but True is not a block size
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ValidationError(f"Block size at position {i + 1} is not an integer: {n!r}")
        if n < 1:
            raise ValidationError(f"Block size at position {i + 1} must be positive, got {n}")
    return tuple(int(n) for n in sizes)


@dataclass(frozen = True)
class BlockSizes:
    """
    A finite-dimensional C*-algebra M_{n_1} + ... + M_{n_k}, given by its block sizes.

    The sizes keep the order they were given in, since embeddings refer to summands by position. Two algebras are
    isomorphic iff their canonical (non-increasing) forms are equal; see `canonicalize()`.
    """
    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", _check_sizes(self.sizes))

    def __len__(self) -> int:
        return len(self.sizes)

    def __iter__(self):
        return iter(self.sizes)

    def __getitem__(self, i):
        return self.sizes[i]

    def __str__(self) -> str:
        return ",".join(str(n) for n in self.sizes)

    @property
    def matrix_size_sum(self) -> int:
        return sum(self.sizes)

    @property
    def linear_dimension(self) -> int:
        return sum(n * n for n in self.sizes)

    @property
    def is_canonical(self) -> bool:
        return all(a >= b for a, b in zip(self.sizes, self.sizes[1:]))

    def canonical(self) -> "BlockSizes":
        return self if self.is_canonical else BlockSizes(tuple(sorted(self.sizes, reverse = True)))

    def notation(self) -> str:
        """
        Returns the algebra in matrix notation, e.g. "M3 + M2".
        """
        return " + ".join(f"M{n}" for n in self.sizes)


def canonicalize(raw) -> BlockSizes:
    """
    Returns the canonical form of the given block sizes: the same entries sorted non-increasingly.

    #### Parameters
    ##### Required
    - `raw`: A `BlockSizes` or any sequence of positive integers.

    #### Returns
    The canonical `BlockSizes`. Idempotent, and invariant under permutations of `raw`.
    """
    return (raw if isinstance(raw, BlockSizes) else BlockSizes(tuple(raw))).canonical()


def parse_algebra(text: str) -> BlockSizes:
    """
    Parses the algebra notation `3,2` (comma separated positive decimal integers, whitespace ignored). The result keeps
    the written order; callers that decide anything about the algebra canonicalize it.
    """
    compact = "".join(text.split())
    if not compact: raise ValidationError("Empty algebra string")
    parts = compact.split(",")
    sizes = []
    for i, part in enumerate(parts):
        if not part.isdecimal():
            raise ValidationError(f"Malformed algebra {text!r}: entry {i + 1} ({part!r}) is not a positive integer")
        sizes.append(int(part))
    return BlockSizes(tuple(sizes))


### Elements ###

def _freeze(matrix: np.ndarray) -> np.ndarray:
    matrix.setflags(write = False)
    return matrix


def _block_shape_errors(blocks: Sequence[np.ndarray], algebra: BlockSizes):
    """
    Yields a message for each way the given blocks fail to match the algebra's block count and sizes.
    """
    if len(blocks) != len(algebra):
        yield f"block count mismatch: expected {len(algebra)} block(s), got {len(blocks)}"
        return
    for i, (block, n) in enumerate(zip(blocks, algebra)):
        if block.shape != (n, n):
            yield f"block {i + 1}: expected size {n}x{n}, got {'x'.join(str(d) for d in block.shape)}"


@dataclass(frozen = True, eq = False)
class Element:
    """
    A concrete element of a finite-dimensional C*-algebra: one complex square matrix per block.
    """
    algebra: BlockSizes
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(_freeze(np.array(b, dtype = complex)) for b in self.blocks)
        errors = list(_block_shape_errors(blocks, self.algebra))
        if errors: raise ValidationError(f"Element does not match algebra ({self.algebra}): {errors[0]}")
        object.__setattr__(self, "blocks", blocks)

    def allclose(self, other: "Element", tol: float = NORM_TOLERANCE) -> bool:
        return self.algebra == other.algebra and operator_norm(subtract(self, other)) <= tol

    def __repr__(self) -> str:
        return f"Element(algebra = ({self.algebra}), blocks = {[b.tolist() for b in self.blocks]})"


def validate_element(x: Element, A: BlockSizes):
    """
    Checks that the element's block count and block sizes match the given algebra, raising `ValidationError`
    (naming the first offending block and the expected/actual sizes) if they do not.
    """
    errors = list(_block_shape_errors(x.blocks, A))
    if errors: raise ValidationError(f"Element does not match algebra ({A}): {errors[0]}")


def element(A, blocks: Iterable) -> Element:
    """
    Builds an element from nested lists/arrays. Scalars are accepted for 1x1 blocks.
    """
    A = A if isinstance(A, BlockSizes) else BlockSizes(tuple(A))
    return Element(A, tuple(np.atleast_2d(np.asarray(b, dtype = complex)) for b in blocks))


def diagonal_element(A, diagonals: Iterable) -> Element:
    """
    Builds the element whose i-th block is the diagonal matrix with the i-th given diagonal.
    """
    A = A if isinstance(A, BlockSizes) else BlockSizes(tuple(A))
    return Element(A, tuple(np.diag(np.atleast_1d(np.asarray(d, dtype = complex))) for d in diagonals))


def unit(A: BlockSizes) -> Element:
    return Element(A, tuple(np.eye(n, dtype = complex) for n in A))


def zero(A: BlockSizes) -> Element:
    return Element(A, tuple(np.zeros((n, n), dtype = complex) for n in A))


def _same_algebra(x: Element, y: Element):
    if x.algebra != y.algebra:
        raise ValidationError(f"Elements belong to different algebras: ({x.algebra}) and ({y.algebra})")


def adjoint(x: Element) -> Element:
    return Element(x.algebra, tuple(b.conj().T for b in x.blocks))


def add(x: Element, y: Element) -> Element:
    _same_algebra(x, y)
    return Element(x.algebra, tuple(a + b for a, b in zip(x.blocks, y.blocks)))


def subtract(x: Element, y: Element) -> Element:
    _same_algebra(x, y)
    return Element(x.algebra, tuple(a - b for a, b in zip(x.blocks, y.blocks)))


def multiply(x: Element, y: Element) -> Element:
    _same_algebra(x, y)
    return Element(x.algebra, tuple(a @ b for a, b in zip(x.blocks, y.blocks)))


def scale(x: Element, z: complex) -> Element:
    return Element(x.algebra, tuple(z * b for b in x.blocks))


def conjugate_by(x: Element, u: Element) -> Element:
    """
    Returns u* x u.
    """
    return multiply(multiply(adjoint(u), x), u)


### Norms and projections ###

def block_norm(block: np.ndarray) -> float:
    """
    Spectral norm (largest singular value) of a single block.
    """
    return float(np.linalg.norm(block, 2)) if block.size else 0.0


def operator_norm(x: Element) -> float:
    """
    C*-norm of a direct sum: the largest spectral norm over the blocks.
    """
    return max(block_norm(b) for b in x.blocks)


def is_hermitian(x: Element, tol: float = HERMITIAN_TOLERANCE) -> bool:
    return operator_norm(subtract(x, adjoint(x))) <= tol


def is_projection(x: Element, tol: float = PROJECTION_TOLERANCE) -> bool:
    return is_hermitian(x, tol) and operator_norm(subtract(multiply(x, x), x)) <= tol


def block_ranks(p: Element) -> tuple[int, ...]:
    """
    Per-block ranks of a projection (the rank of a projection is its trace).
    """
    return tuple(int(round(float(np.trace(b).real))) for b in p.blocks)


def is_minimal_projection(p: Element, tol: float = PROJECTION_TOLERANCE) -> bool:
    """
    In finite dimensions a projection is minimal iff it has rank 1 in exactly one block and is zero elsewhere.
    """
    return is_projection(p, tol) and sum(block_ranks(p)) == 1 # ranks are non-negative, so one block has rank 1


def standard_min_projection(A: BlockSizes, block_index: int) -> Element:
    """
    Returns the standard minimal projection supported in the given block: the matrix unit e_11 in that block and zero
    in every other block.

    #### Parameters
    ##### Required
    - `A`: The algebra.
    - `block_index`: 1-based index of the block.
    """
    if not 1 <= block_index <= len(A):
        raise ValidationError(f"Block index {block_index} out of range for algebra ({A}) with {len(A)} block(s)")
    blocks = []
    for i, n in enumerate(A, start = 1):
        block = np.zeros((n, n), dtype = int)
        if i == block_index: block[0, 0] = 1
        blocks.append(block)
    return Element(A, tuple(blocks))


def sorted_spectra(x: Element) -> tuple[np.ndarray, ...]:
    """
    Per-block eigenvalues of a Hermitian element, sorted in decreasing order.
    """
    if not is_hermitian(x):
        raise ValidationError("Sorted spectra are only defined for Hermitian elements")
    return tuple(np.sort(np.linalg.eigvalsh((b + b.conj().T) / 2))[::-1] for b in x.blocks)


def unitarily_conjugate_hermitian(x: Element, y: Element, tol: float = NORM_TOLERANCE) -> bool:
    """
    Hermitian elements of a direct sum are unitarily conjugate iff their sorted spectra agree block by block.
    """
    _same_algebra(x, y)
    return all(np.max(np.abs(s - t)) <= tol for s, t in zip(sorted_spectra(x), sorted_spectra(y)))
