"""Homogeneous target systems over block cyclic embeddings and their solvers.

The monomial map sends a word to the product of one variable per tensor slot,
with the letter choosing which family the variable comes from.  Images of a
degree-m Hall basis give nu linearly independent homogeneous polynomials
p_1..p_nu in d*m variables; the k-block system sums each p_i over k
independent copies and equates it to a target value.  Solutions are found by
damped Gauss-Newton from random restarts and converted back into
block-diagonal developments.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lie import expand_bracket, hall_basis, dim_free_lie
from .signature import as_tensor
from .tensor import GradedTensor, norm, pairing, project

__all__ = [
    "MonoPoly",
    "PolySystem",
    "SolveResult",
    "VerifyReport",
    "SolverError",
    "monomial_map",
    "polys_from_hall",
    "assemble_system",
    "solve_system",
    "solve_targets",
    "solve_unit_systems",
    "combine_unit_solutions",
    "verify_solution",
    "max_blocks",
]


class SolverError(RuntimeError):
    """No restart reached the residual tolerance."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


class MonoPoly:
    """Homogeneous multilinear-per-slot polynomial, stored word -> coefficient.

    The monomial attached to a word picks, in each tensor slot j, the
    variable of family ``letter(j)`` at position j, so distinct words give
    distinct monomials.
    """

    def __init__(self, dim: int, degree: int, terms: dict[tuple[int, ...], object]):
        self.dim = dim
        self.degree = degree
        self.terms = {w: c for w, c in terms.items() if c != 0}
        for w in self.terms:
            if len(w) != degree or any(not 1 <= a <= dim for a in w):
                raise ValueError(f"bad word {w} for degree {degree} over {dim} letters")

    def evaluate(self, z: np.ndarray) -> complex:
        """Evaluate on one block; z has shape (dim, degree)."""
        total = 0j
        for w, c in self.terms.items():
            prod = complex(c)
            for j, a in enumerate(w):
                prod *= z[a - 1, j]
            total += prod
        return total

    def gradient(self, z: np.ndarray) -> np.ndarray:
        """d p / d z, same shape as z."""
        g = np.zeros_like(z)
        for w, c in self.terms.items():
            vals = [z[a - 1, j] for j, a in enumerate(w)]
            for j, a in enumerate(w):
                prod = complex(c)
                for jj, v in enumerate(vals):
                    if jj != j:
                        prod *= v
                g[a - 1, j] += prod
        return g

    def __repr__(self):
        names = []
        for w, c in sorted(self.terms.items()):
            mono = "*".join(f"{'ab'[a-1] if self.dim == 2 else f'w{a}'}{j+1}" for j, a in enumerate(w))
            names.append(f"{c}*{mono}")
        return "<MonoPoly " + (" + ".join(names) or "0") + ">"


def monomial_map(word: tuple[int, ...], dim: int = 2) -> MonoPoly:
    """The single monomial picked out by a word."""
    return MonoPoly(dim, len(word), {tuple(word): 1})


def polys_from_hall(dim: int, degree: int) -> list[MonoPoly]:
    """Monomial-map images of the Lyndon basis; rank-checked against nu."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    from .tensor import unpack_word

    polys = []
    for t in hall_basis(dim, degree):
        x = expand_bracket(t, dim)
        terms = {
            unpack_word(k, degree, dim): c for k, c in x.data[degree].items()
        }
        polys.append(MonoPoly(dim, degree, terms))
    nu = dim_free_lie(dim, degree)
    if coefficient_rank(polys) != nu:
        raise RuntimeError(
            f"Hall images are rank deficient at (d={dim}, m={degree}); "
            "this contradicts injectivity of the monomial map"
        )
    return polys


def coefficient_rank(polys: list[MonoPoly]) -> int:
    """Exact rank of the monomial coefficient matrix over the rationals."""
    words = sorted(set().union(*(p.terms for p in polys)))
    rows = [[Fraction(p.terms.get(w, 0)) for w in words] for p in polys]
    rank = 0
    ncols = len(words)
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [v * inv for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


@dataclass
class PolySystem:
    polys: list[MonoPoly]
    blocks: int
    targets: list[complex]

    def __post_init__(self):
        if len(self.targets) != len(self.polys):
            raise ValueError("one target per polynomial required")
        self.targets = [complex(c) for c in self.targets]
        for c in self.targets:
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError("targets must be finite")

    @property
    def dim(self) -> int:
        return self.polys[0].dim

    @property
    def degree(self) -> int:
        return self.polys[0].degree

    def residual_vector(self, z: np.ndarray) -> np.ndarray:
        """z has shape (blocks, dim, degree)."""
        vals = np.array(
            [sum(p.evaluate(z[b]) for b in range(self.blocks)) for p in self.polys]
        )
        return vals - np.array(self.targets)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "degree": self.degree,
                "blocks": self.blocks,
                "targets": [[c.real, c.imag] for c in self.targets],
                "polys": [
                    {"".join(map(str, w)): str(c) for w, c in sorted(p.terms.items())}
                    for p in self.polys
                ],
            }
        )


def assemble_system(polys: list[MonoPoly], blocks: int, targets: list) -> PolySystem:
    return PolySystem(list(polys), blocks, list(targets))


@dataclass
class SolveResult:
    system: PolySystem
    solution: np.ndarray  # shape (blocks, dim, degree)
    residual: float
    restarts_used: int
    converged: bool
    seed: int

    def development(self, w_norm: str = "l1"):
        from .develop import block_diagonal_embedding

        blocks_per_letter = [
            [tuple(self.solution[b, ell]) for b in range(self.system.blocks)]
            for ell in range(self.system.dim)
        ]
        return block_diagonal_embedding(blocks_per_letter, self.system.degree, w_norm)

    def to_json(self) -> str:
        return json.dumps(
            {
                "blocks": self.system.blocks,
                "residual": self.residual,
                "restarts_used": self.restarts_used,
                "converged": self.converged,
                "seed": self.seed,
                "solution": [
                    [[[v.real, v.imag] for v in row] for row in block]
                    for block in self.solution.tolist()
                ],
            }
        )


def _newton_polish(sys: PolySystem, z: np.ndarray, tol: float, iters: int = 80) -> tuple[np.ndarray, float]:
    shape = z.shape
    best = z.copy()
    f = sys.residual_vector(best)
    best_res = float(np.abs(f).max())
    for _ in range(iters):
        if best_res < tol:
            break
        jac = np.zeros((len(sys.polys), best.size), dtype=complex)
        for i, p in enumerate(sys.polys):
            g = np.stack([p.gradient(best[b]) for b in range(sys.blocks)])
            jac[i] = g.reshape(-1)
        step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        step = step.reshape(shape)
        t = 1.0
        improved = False
        for _ in range(30):
            cand = best + t * step
            fc = sys.residual_vector(cand)
            rc = float(np.abs(fc).max())
            if rc < best_res:
                best, best_res, f = cand, rc, fc
                improved = True
                break
            t /= 2
        if not improved:
            break
    return best, best_res


def solve_system(
    sys: PolySystem, seed: int = 0, restarts: int = 64, tol: float = 1e-10
) -> SolveResult:
    """Damped Gauss-Newton from random annulus starts; never asserts inconsistency.

    Returns the best run (lowest residual, then lowest start index); check
    ``converged`` before trusting the solution.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    shape = (sys.blocks, sys.dim, sys.degree)
    best_z, best_res, used = None, math.inf, 0
    for attempt in range(1, restarts + 1):
        radius = rng.uniform(0.5, 1.5, size=shape)
        angle = rng.uniform(0.0, 2.0 * math.pi, size=shape)
        start = radius * np.exp(1j * angle)
        z, res = _newton_polish(sys, start, tol)
        if res < best_res:
            best_z, best_res, used = z, res, attempt
        if best_res < tol:
            break
    return SolveResult(
        system=sys,
        solution=best_z,
        residual=best_res,
        restarts_used=used,
        converged=best_res < tol,
        seed=seed,
    )


def max_blocks(nu: int) -> int:
    """Block count under which any target vector is guaranteed reachable."""
    return 4 ** (nu - 1) * math.factorial(nu)


def solve_targets(
    polys: list[MonoPoly],
    targets: list,
    degree: int,
    dim: int,
    seed: int = 0,
    restarts: int = 64,
    tol: float = 1e-10,
    block_cap: int | None = None,
) -> SolveResult:
    """Solve the summed system, doubling the block count until it converges."""
    nu = len(polys)
    cap = block_cap if block_cap is not None else max_blocks(nu)
    k = 1
    best: SolveResult | None = None
    while True:
        sys = assemble_system(polys, k, targets)
        result = solve_system(sys, seed=seed, restarts=restarts, tol=tol)
        if best is None or result.residual < best.residual:
            best = result
        if result.converged or k >= cap:
            break
        k = min(2 * k, cap)
    if not best.converged:
        raise SolverError(
            f"no solution at residual {best.residual:.3e} with up to {cap} blocks",
            best.residual,
        )
    return best


def solve_unit_systems(
    polys: list[MonoPoly], degree: int, dim: int, seed: int = 0, restarts: int = 64, tol: float = 1e-10
) -> list[SolveResult]:
    """One normalized system per basis element: p_i sums to 1, the rest to 0."""
    results = []
    for i in range(len(polys)):
        targets = [1.0 if j == i else 0.0 for j in range(len(polys))]
        results.append(
            solve_targets(polys, targets, degree, dim, seed=seed + i, restarts=restarts, tol=tol)
        )
    return results


def combine_unit_solutions(
    unit_results: list[SolveResult], targets: list, degree: int
) -> SolveResult:
    """Concatenate unit solutions scaled by c^(1/m) (principal branch).

    By homogeneity the i-th scaled bundle contributes exactly target_i to
    equation i and zero elsewhere, so the concatenation solves the full
    target vector.
    """
    polys = unit_results[0].system.polys
    blocks = []
    for c, res in zip(targets, unit_results):
        root = cmath.exp(cmath.log(complex(c)) / degree) if c != 0 else 0.0
        blocks.append(root * res.solution)
    solution = np.concatenate(blocks, axis=0)
    sys = assemble_system(polys, solution.shape[0], list(targets))
    residual = float(np.abs(sys.residual_vector(solution)).max())
    return SolveResult(
        system=sys,
        solution=solution,
        residual=residual,
        restarts_used=0,
        converged=residual < 1e-8,
        seed=unit_results[0].seed,
    )


@dataclass
class VerifyReport:
    development: object
    weight_value: complex
    target_value: complex
    op_norm: float
    op_norm_is_bound: bool
    achieved_bound: float
    factor: float
    wedge_size: int


def verify_solution(
    sys: PolySystem,
    result: SolveResult,
    l,
    witness: GradedTensor,
    tol: float = 1e-8,
    wedge_cap: int = 512,
) -> VerifyReport:
    """Plug a solution back in as a development and certify the lower bound.

    Checks that the distinguished weight of Phi(pi_m(l)) reproduces the
    witness value B(pi_m(l)), then reports the lower-bound factor
    B(pi_m(l)) / ||Phi||^m using the exterior-power operator norm (or an
    upper bound on it when the wedge space is too large, which only makes
    the reported factor smaller).
    """
    from .develop import apply_tensor, exterior_power_rep, matrix_norm, mat_to_numpy

    if not result.converged:
        raise ValueError("cannot verify an unconverged solution")
    m = sys.degree
    dev = result.development()
    x = as_tensor(l)
    lm = project(x, m)
    if lm.is_zero():
        raise ValueError("pi_m(l) vanishes")
    target = complex(pairing(witness, lm.to_float()))
    if abs(target) < tol:
        raise ValueError("witness pairs to zero; nothing to certify")
    image = apply_tensor(dev, lm.to_float())
    weight = complex(dev.weight_value(image))
    if abs(weight - target) > max(tol, tol * abs(target)):
        raise ValueError(
            f"weight value {weight:.6g} does not reproduce the witness value {target:.6g}"
        )
    k = sys.blocks
    wedge_size = math.comb(dev.size, k)
    if wedge_size <= wedge_cap:
        norms = [
            matrix_norm(exterior_power_rep(mat_to_numpy(mm), k), "l1")
            for mm in dev.matrices
        ]
        op = float(max(norms))
        is_bound = False
    else:
        # sum of the k largest column sums dominates the wedge l1 norm
        op = 0.0
        for mm in dev.matrices:
            cols = np.abs(mat_to_numpy(mm)).sum(axis=0)
            cols.sort()
            op = max(op, float(cols[-k:].sum()))
        is_bound = True
    achieved = weight.real / op**m
    factor = achieved / float(norm(lm, "l1"))
    return VerifyReport(
        development=dev,
        weight_value=weight,
        target_value=target,
        op_norm=op,
        op_norm_is_bound=is_bound,
        achieved_bound=achieved,
        factor=factor,
        wedge_size=wedge_size,
    )
