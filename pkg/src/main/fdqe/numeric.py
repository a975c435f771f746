"""
Numeric

Evaluates the predicates rho_min (distance to the minimal projections) and rho_sim (distance to the unitarily conjugate
pairs) on concrete elements, and checks whether a realized embedding preserves them.

Both predicates are infima over compact manifolds (the unit sphere for rank-one projections, the unitary group for
conjugation), so they are evaluated by multi-restart local minimization: Nelder-Mead on the sphere, and conjugate
gradient on the unitary group (pymanopt) for a smooth Frobenius surrogate followed by a Nelder-Mead polish of the
operator norm. Every evaluation also computes a certified lower bound (eigenvalue, singular value or trace gaps) and
stops restarting once the best value found is within `value_tolerance` of it. Values are always valid upper bounds;
`Estimate.converged` says whether the final value is either certified or came from a converged local run, and
`Estimate.lower_bound` carries the certified bound.
"""

import logging as log
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np
import pymanopt
from pymanopt.manifolds import UnitaryGroup
from pymanopt.optimizers import ConjugateGradient
from scipy.linalg import expm
from scipy.optimize import minimize

from fdqe.algebra import (BlockSizes, Element, block_norm, is_hermitian, operator_norm, standard_min_projection, unit,
                          validate_element)
from fdqe.bratteli import MultiplicityMatrix, apply, realize
from fdqe.constants import *
from fdqe.errors import ValidationError


### Configuration and results ###

@dataclass(frozen = True)
class OptimizerConfig:
    restarts: int = DEFAULT_RESTARTS
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    step_tolerance: float = DEFAULT_STEP_TOLERANCE
    value_tolerance: float = DEFAULT_VALUE_TOLERANCE
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.restarts < 1: raise ValidationError(f"restarts must be at least 1, got {self.restarts}")
        if self.max_iterations < 1: raise ValidationError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if not self.step_tolerance > 0: raise ValidationError(f"step_tolerance must be positive, got {self.step_tolerance}")
        if not self.value_tolerance > 0: raise ValidationError(f"value_tolerance must be positive, got {self.value_tolerance}")
        if not 0 <= self.seed < 2**64: raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


class Estimate(float):
    """
    A predicate value that remembers how it was obtained. Behaves as a plain float.

    - `converged`: False if the value is only known to be an upper bound (no local run converged and the lower bound
      was not met).
    - `certified`: True if the value met the certified lower bound to within the value tolerance.
    - `restarts`: Number of random restarts used.
    - `lower_bound`: A certified lower bound on the true value (0 when none is known).
    """

    def __new__(cls, value: float, converged: bool = True, certified: bool = False, restarts: int = 0,
                lower_bound: float = 0.0):
        obj = super().__new__(cls, max(float(value), 0.0))
        obj.converged = converged
        obj.certified = certified
        obj.restarts = restarts
        obj.lower_bound = min(max(float(lower_bound), 0.0), float(obj))
        return obj

    def __reduce__(self):
        return (Estimate, (float(self), self.converged, self.certified, self.restarts, self.lower_bound))


def _combine(value: float, parts, lower_bound: float = 0.0) -> Estimate:
    parts = list(parts)
    return Estimate(value,
                    converged = all(p.converged for p in parts),
                    certified = all(p.certified for p in parts),
                    restarts = sum(p.restarts for p in parts),
                    lower_bound = lower_bound)


### Sampling ###

def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Haar-distributed n x n unitary (QR of a complex Gaussian matrix with the phases of R divided out).
    """
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def sample_unitary(A: BlockSizes, seed: int) -> Element:
    rng = np.random.default_rng(seed)
    return Element(A, tuple(random_unitary(n, rng) for n in A))


def sample_hermitian(A: BlockSizes, seed: int, diagonal: bool = False) -> Element:
    """
    Deterministic Hermitian sample: independent Gaussian entries, symmetrized, then scaled to a random operator norm
    below SAMPLE_NORM_BOUND. With `diagonal` every block is a real diagonal matrix.
    """
    rng = np.random.default_rng(seed)
    blocks = []
    for n in A:
        if diagonal:
            blocks.append(np.diag(rng.standard_normal(n)).astype(complex))
        else:
            g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            blocks.append((g + g.conj().T) / 2)
    x = Element(A, tuple(blocks))
    norm = operator_norm(x)
    if norm == 0: return x
    target = SAMPLE_NORM_BOUND * rng.uniform(0.05, 1.0)
    return Element(A, tuple(b * (target / norm) for b in x.blocks))


### Local optimization ###

def _multistart(objective: Callable[[np.ndarray], float], starts, random_start: Callable[[np.random.Generator], np.ndarray],
                lower_bound: float, cfg: OptimizerConfig) -> Estimate:
    """
    [Internal] Minimizes the objective from each deterministic start, then from up to `cfg.restarts` random starts,
    stopping as soon as the best value reaches the lower bound. Starts are parameter vectors; the objective is
    evaluated once at each start before any local run.
    """
    best = np.inf
    converged = False

    def good_enough():
        return best <= lower_bound + cfg.value_tolerance

    for x0 in starts:
        value = objective(x0)
        if value < best: best, converged = value, False
    if good_enough():
        log.log(TRACE, "Candidate start met the lower bound %.3g", lower_bound)
        return Estimate(best, converged = True, certified = True, restarts = 0, lower_bound = lower_bound)

    rng = np.random.default_rng(cfg.seed)
    restarts = 0
    for restarts in range(1, cfg.restarts + 1):
        result = minimize(objective, random_start(rng), method = "Nelder-Mead",
                          options = {"maxiter": cfg.max_iterations, "xatol": cfg.step_tolerance,
                                     "fatol": cfg.value_tolerance})
        if result.fun < best: best, converged = float(result.fun), bool(result.success)
        log.log(TRACE, "Restart %d: %.9f (best %.9f, lower bound %.9f)", restarts, result.fun, best, lower_bound)
        if good_enough(): break

    return Estimate(best, converged = converged or good_enough(), certified = good_enough(), restarts = restarts,
                    lower_bound = lower_bound)


def _as_block(block) -> np.ndarray:
    b = np.asarray(block, dtype = complex)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 1:
        raise ValidationError(f"Expected a non-empty square matrix, got shape {b.shape}")
    return b


def _is_hermitian_block(b: np.ndarray) -> bool:
    return block_norm(b - b.conj().T) <= HERMITIAN_TOLERANCE


def _descending_eigenvalues(b: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh((b + b.conj().T) / 2)[::-1]


### rho_min ###

def rank1_distance(block, cfg: OptimizerConfig = OptimizerConfig()) -> Estimate:
    """
    Distance in operator norm from a square matrix to the rank-one projections vv* (v a unit vector).

    Eigenvectors of the Hermitian part are tried first; for Hermitian input the eigenvector of the top eigenvalue
    attains the eigenvalue lower bound max(|l_1 - 1|, |l_2|, ...), so the restarts only run for non-Hermitian blocks.
    """
    b = _as_block(block)
    n = b.shape[0]

    def to_vector(params):
        v = params[:n] + 1j * params[n:]
        norm = np.linalg.norm(v)
        return v / norm if norm > 0 else np.eye(n, dtype = complex)[0]

    def objective(params):
        v = to_vector(params)
        return block_norm(b - np.outer(v, v.conj()))

    if _is_hermitian_block(b):
        spectrum = _descending_eigenvalues(b)
        lower_bound = max(abs(spectrum[0] - 1), np.max(np.abs(spectrum[1:]), initial = 0.0))
    else:
        sigma = np.linalg.svd(b, compute_uv = False)
        lower_bound = max(abs(sigma[0] - 1), np.max(sigma[1:], initial = 0.0))

    _, vectors = np.linalg.eigh((b + b.conj().T) / 2)
    starts = [np.concatenate([v.real, v.imag]) for v in vectors.T]

    return _multistart(objective, starts, lambda rng: rng.standard_normal(2 * n), lower_bound, cfg)


def rho_min(x: Element, cfg: OptimizerConfig = OptimizerConfig()) -> Estimate:
    """
    Distance from x to the minimal projections. A minimal projection is rank one in one block and zero elsewhere,
    so the distance is the minimum over blocks i of max(rank-one distance of x_i, norms of the other blocks).
    """
    norms = [block_norm(b) for b in x.blocks]
    best, parts = np.inf, []
    for i, b in enumerate(x.blocks):
        others = max(norms[:i] + norms[i + 1:], default = 0.0)
        if others >= best: continue # can't beat the current best whatever block i contributes
        d = rank1_distance(b, cfg)
        parts.append(d)
        best = min(best, max(float(d), others))
    return _combine(best, parts)


### psi and rho_sim ###

def _hermitian_param_count(n: int) -> int:
    return n * n


def _hermitian_from_params(params: np.ndarray, n: int) -> np.ndarray:
    h = np.zeros((n, n), dtype = complex)
    h[np.diag_indices(n)] = params[:n]
    upper = np.triu_indices(n, 1)
    m = len(upper[0])
    h[upper] = params[n:n + m] + 1j * params[n + m:n + 2 * m]
    return h + np.triu(h, 1).conj().T


def _orbit_lower_bound(a: np.ndarray, b: np.ndarray) -> float:
    """
    [Internal] Certified lower bound on inf_u ||u* a u - b||: the sorted-eigenvalue gap for Hermitian pairs (exact),
    otherwise the larger of the sorted singular value gap and the trace gap |tr a - tr b| / n (the operator norm
    dominates the spectral radius of u* a u - b, whose trace is tr a - tr b).
    """
    if _is_hermitian_block(a) and _is_hermitian_block(b):
        return float(np.max(np.abs(_descending_eigenvalues(a) - _descending_eigenvalues(b))))
    sigma_gap = float(np.max(np.abs(np.linalg.svd(a, compute_uv = False) - np.linalg.svd(b, compute_uv = False))))
    return max(sigma_gap, abs(np.trace(a) - np.trace(b)) / a.shape[0])


def _frobenius_problem(a: np.ndarray, b: np.ndarray) -> pymanopt.Problem:
    """
    [Internal] The smooth surrogate ||a u - u b||_F^2 on the unitary group. It equals ||u* a u - b||_F^2, which bounds the
    squared operator norm objective from above and vanishes exactly where u* a u = b.
    """
    manifold = UnitaryGroup(a.shape[0])

    @pymanopt.function.numpy(manifold)
    def cost(u):
        r = a @ u - u @ b
        return float(np.real(np.vdot(r, r)))

    @pymanopt.function.numpy(manifold)
    def euclidean_gradient(u):
        r = a @ u - u @ b
        return 2 * (a.conj().T @ r - r @ b.conj().T)

    return pymanopt.Problem(manifold, cost, euclidean_gradient = euclidean_gradient)


def unitary_orbit_distance(a, b, cfg: OptimizerConfig = OptimizerConfig()) -> Estimate:
    """
    inf over unitaries u of ||u* a u - b|| for two square matrices of the same size.

    The identity and the unitary aligning the sorted eigenvectors of the Hermitian parts are tried first (the latter is
    exact for Hermitian pairs). Otherwise each start (those two, then Haar-random unitaries) is descended by conjugate
    gradient on the Frobenius surrogate, and the best point is polished on the operator norm itself with Nelder-Mead in
    an exp(iH) chart centred there. Stops as soon as the certified lower bound is met.

    #### Returns
    An `Estimate` whose `lower_bound` is the certified bound, so callers can tell how far an uncertified value may be
    from the infimum.
    """
    a, b = _as_block(a), _as_block(b)
    if a.shape != b.shape:
        raise ValidationError(f"Blocks have different sizes: {a.shape} and {b.shape}")
    n = a.shape[0]
    if n == 1:
        value = abs(a[0, 0] - b[0, 0])
        return Estimate(value, certified = True, lower_bound = value)

    lower_bound = _orbit_lower_bound(a, b)

    def met(value: float) -> bool:
        return value <= lower_bound + cfg.value_tolerance

    def operator_value(u: np.ndarray) -> float:
        return block_norm(u.conj().T @ a @ u - b)

    _, va = np.linalg.eigh((a + a.conj().T) / 2)
    _, vb = np.linalg.eigh((b + b.conj().T) / 2)
    base_points = [np.eye(n, dtype = complex), va @ vb.conj().T]

    best_u = min(base_points, key = operator_value)
    best = operator_value(best_u)
    if met(best):
        return Estimate(best, certified = True, lower_bound = lower_bound)

    problem = _frobenius_problem(a, b)
    optimizer = ConjugateGradient(max_iterations = cfg.max_iterations, min_gradient_norm = cfg.step_tolerance,
                                  verbosity = 0)
    rng = np.random.default_rng(cfg.seed)
    restarts = 0
    for restarts in range(1, cfg.restarts + 1):
        u0 = base_points[restarts - 1] if restarts <= len(base_points) else random_unitary(n, rng)
        u = optimizer.run(problem, initial_point = u0).point
        value = operator_value(u)
        if value < best: best, best_u = value, u
        log.log(TRACE, "Descent %d: %.9f (best %.9f, lower bound %.9f)", restarts, value, best, lower_bound)
        if met(best): break

    if met(best):
        return Estimate(best, certified = True, restarts = restarts, lower_bound = lower_bound)

    def chart(params):
        u = expm(1j * _hermitian_from_params(params, n)) @ best_u
        return block_norm(u.conj().T @ a @ u - b)

    polished = _multistart(chart, [np.zeros(_hermitian_param_count(n))],
                           lambda g: 1e-3 * g.standard_normal(_hermitian_param_count(n)), lower_bound,
                           replace(cfg, restarts = 1))
    best = min(best, float(polished))
    return Estimate(best, converged = polished.converged, certified = met(best), restarts = restarts,
                    lower_bound = lower_bound)


def psi(x: Element, y: Element, cfg: OptimizerConfig = OptimizerConfig()) -> Estimate:
    """
    psi(x, y) = inf over unitaries u of ||u* x u - y||. Unitaries of a direct sum act blockwise, so psi is the maximum of
    the per-block infima.
    """
    validate_element(y, x.algebra)
    parts = [unitary_orbit_distance(a, b, cfg) for a, b in zip(x.blocks, y.blocks)]
    return _combine(max(float(p) for p in parts), parts, lower_bound = max(p.lower_bound for p in parts))


def psi_hermitian_oracle(x: Element, y: Element) -> float:
    """
    Closed form of psi for Hermitian elements: per block, the largest gap between the decreasingly sorted spectra.
    """
    validate_element(y, x.algebra)
    if not (is_hermitian(x) and is_hermitian(y)):
        raise ValidationError("psi_hermitian_oracle needs Hermitian inputs")
    return max(float(np.max(np.abs(_descending_eigenvalues(a) - _descending_eigenvalues(b))))
               for a, b in zip(x.blocks, y.blocks))


@dataclass(frozen = True)
class SimBounds:
    lower: float
    upper: float
    converged: bool = True

    def __iter__(self):
        return iter((self.lower, self.upper))


def rho_sim_bounds(x: Element, y: Element, cfg: OptimizerConfig = OptimizerConfig()) -> SimBounds:
    """
    Bounds on rho_sim(x, y), the distance (max metric) from (x, y) to the unitarily conjugate pairs.

    - Upper: a = x, b = u* x u is a conjugate pair at distance ||y - u* x u|| from (x, y), so rho_sim <= psi.
    - Lower: psi vanishes on conjugate pairs and is 2-Lipschitz in the max metric, so rho_sim >= psi / 2. The
      estimate of psi is only an upper bound unless certified, so an uncertified psi contributes its certified lower
      bound instead.
    - For Hermitian x, y moving both spectra to their blockwise average gives a conjugate pair at distance half the
      largest sorted-spectra gap, which is a (possibly) tighter upper bound.
    """
    p = psi(x, y, cfg)
    upper = float(p)
    if is_hermitian(x) and is_hermitian(y):
        upper = min(upper, psi_hermitian_oracle(x, y) / 2)
    psi_lower = float(p) if p.certified else p.lower_bound
    return SimBounds(min(psi_lower / 2, upper), upper, p.converged)


### Preservation checks ###

class Predicate(Enum):
    RHO_MIN = "rho_min"
    RHO_SIM = "rho_sim"

    @property
    def arity(self) -> int:
        return 1 if self is Predicate.RHO_MIN else 2

    @classmethod
    def parse(cls, text: str) -> "Predicate":
        if not isinstance(text, str): raise ValidationError(f"Predicate must be a string, got {text!r}")
        try:
            return cls(text.strip().lower().replace("-", "_"))
        except ValueError:
            raise ValidationError(f"Unknown predicate {text!r} (expected rho-min or rho-sim)")


def evaluate_predicate(predicate: Predicate, x: Element, y: Optional[Element] = None,
                       cfg: OptimizerConfig = OptimizerConfig()) -> Estimate:
    """
    Point value of a predicate: rho_min(x), or for rho_sim the tightest upper bound from `rho_sim_bounds`.
    """
    if predicate is Predicate.RHO_MIN:
        return rho_min(x, cfg)
    if y is None: raise ValidationError("rho_sim needs two elements")
    bounds = rho_sim_bounds(x, y, cfg)
    return Estimate(bounds.upper, converged = bounds.converged)


@dataclass(frozen = True)
class PredicateReport:
    embedding: MultiplicityMatrix
    predicate: Predicate
    samples: int
    max_discrepancy: float
    worst_input: Element
    worst_input_y: Optional[Element] = None
    seed: int = DEFAULT_SEED
    converged: bool = True
    discrepancies: tuple[float, ...] = field(default = (), repr = False)


def _preservation_inputs(C: BlockSizes, predicate: Predicate, samples: int, seed: int, diagonal: bool):
    """
    [Internal] Fixed inputs first (the unit and the standard minimal projections, or pairs of them), then seeded
    Hermitian samples.
    """
    projections = [standard_min_projection(C, i) for i in range(1, len(C) + 1)]
    if predicate is Predicate.RHO_MIN:
        yield unit(C), None
        for p in projections: yield p, None
        for s in range(samples): yield sample_hermitian(C, seed + s, diagonal), None
    else:
        for p in projections:
            for q in projections: yield p, q
        for s in range(samples):
            yield sample_hermitian(C, seed + 2 * s, diagonal), sample_hermitian(C, seed + 2 * s + 1, diagonal)


def check_preservation(E: MultiplicityMatrix, predicate: Predicate, samples: int = DEFAULT_SAMPLES,
                       cfg: OptimizerConfig = OptimizerConfig(), diagonal: bool = False) -> PredicateReport:
    """
    Evaluates the predicate on source inputs and on their images under the standard realization of E and reports
    the largest absolute difference.

    #### Parameters
    ##### Required
    - `E`: A unital injective multiplicity matrix.
    - `predicate`: `Predicate.RHO_MIN` or `Predicate.RHO_SIM`.
    ##### Optional
    - `samples`: Number of seeded random inputs (or input pairs), on top of the fixed inputs.
    - `cfg`: Optimizer configuration; its seed also seeds the samples.
    - `diagonal`: Sample real diagonal elements only.
    """
    if samples < 1: raise ValidationError(f"samples must be at least 1, got {samples}")
    f = realize(E)

    worst, worst_x, worst_y = -1.0, None, None
    discrepancies = []
    converged = True
    for x, y in _preservation_inputs(E.source, predicate, samples, cfg.seed, diagonal):
        before = evaluate_predicate(predicate, x, y, cfg)
        after = evaluate_predicate(predicate, apply(f, x), None if y is None else apply(f, y), cfg)
        converged = converged and before.converged and after.converged
        d = abs(float(before) - float(after))
        discrepancies.append(d)
        if d > worst: worst, worst_x, worst_y = d, x, y

    log.debug("%s preservation under %s: max discrepancy %.3g over %d input(s)",
              predicate.value, E, worst, len(discrepancies))
    return PredicateReport(E, predicate, len(discrepancies), worst, worst_x, worst_y, cfg.seed, converged,
                           tuple(discrepancies))
