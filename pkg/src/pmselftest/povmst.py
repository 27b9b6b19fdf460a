"""Self-testing extremal POVMs on top of the state witness.

An extremal POVM is pinned down by the kernels of its elements: if every
``tr(Z_b M̄_b)`` vanishes the POVM must be ``M``. The POVM witness subtracts
those kernel probabilities from the state witness of an ensemble containing
the kernel bases.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .ensemble import WeightedEnsemble, complete_ensemble, fiducial_set
from .qmat import as_povm, ket, op_norm, overlap, projector
from .witness import Behavior, ShapeMismatch, StateWitness, build_state_witness, ideal_measurements

KERNEL_RTOL = 1e-9


@dataclass(frozen=True)
class PovmSelfTest:
    povm: tuple[np.ndarray, ...]
    kernel_projectors: tuple[np.ndarray, ...]
    kernel_bases: tuple[tuple[np.ndarray, ...], ...]
    eigen_bases: tuple[tuple[np.ndarray, ...], ...]
    gram: np.ndarray

    @property
    def dim(self) -> int:
        return self.povm[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.povm)

    @property
    def gram_inv_norm(self) -> float:
        w = np.linalg.eigvalsh(self.gram)
        return math.inf if w[0] <= 0 else float(1.0 / w[0])


@dataclass(frozen=True)
class PovmWitness:
    """State witness plus kernel penalties for one or more POVMs.

    Preparation ``kernel_index[m][b][i]`` is the state ``ψ_i^b`` of POVM ``m``;
    POVM ``m`` is measurement ``n_pair_measurements + m``.
    """

    tests: tuple[PovmSelfTest, ...]
    state_witness: StateWitness
    kernel_index: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def dim(self) -> int:
        return self.state_witness.dim

    @property
    def w_star(self) -> float:
        return self.state_witness.w_star

    @property
    def n_preparations(self) -> int:
        return self.state_witness.n_preparations

    @property
    def n_pair_measurements(self) -> int:
        return self.state_witness.n_measurements

    @property
    def n_measurements(self) -> int:
        return self.n_pair_measurements + len(self.tests)

    @property
    def outcome_counts(self) -> tuple[int, ...]:
        return (2,) * self.n_pair_measurements + tuple(t.n_outcomes for t in self.tests)


@dataclass(frozen=True)
class PovmRobustness:
    epsilon: float
    delta: float
    eps_prime: float
    bound: float


def kernel_projector(m: np.ndarray, tol: float = KERNEL_RTOL) -> tuple[np.ndarray, list[np.ndarray]]:
    """Projector onto eigenvalues below ``tol · λ_max`` and an orthonormal basis of that space."""
    m = np.asarray(m, dtype=complex)
    w, v = np.linalg.eigh(m)
    cut = tol * max(w[-1], 0.0)
    basis = [v[:, k] for k in range(len(w)) if w[k] < cut]
    z = sum((projector(b) for b in basis), np.zeros_like(m))
    return z, basis


def _support_basis(m: np.ndarray, tol: float) -> list[np.ndarray]:
    w, v = np.linalg.eigh(m)
    cut = tol * max(w[-1], 0.0)
    return [v[:, k] for k in range(len(w)) if w[k] >= cut]


def support_gram(eigen_bases: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
    """Gram matrix of all ``|ξ_i^b⟩⟨ξ_j^b|`` under ``⟨A, B⟩ = tr(A†B)``."""
    ops = [np.outer(a, b.conj()).reshape(-1) for basis in eigen_bases for a in basis for b in basis]
    mat = np.column_stack(ops)
    return mat.conj().T @ mat


def povm_self_test(p: Sequence[np.ndarray], tol: Tolerances = DEFAULT, kernel_tol: float = KERNEL_RTOL) -> PovmSelfTest:
    povm = as_povm(p, tol)
    kernels = [kernel_projector(m, kernel_tol) for m in povm]
    eig = [tuple(_support_basis(m, kernel_tol)) for m in povm]
    return PovmSelfTest(
        tuple(povm),
        tuple(z for z, _ in kernels),
        tuple(tuple(b) for _, b in kernels),
        tuple(eig),
        support_gram(eig),
    )


def is_extremal(p: Sequence[np.ndarray], tol: float = DEFAULT.extremal) -> tuple[bool, float]:
    g = povm_self_test(p).gram
    lo = float(np.linalg.eigvalsh(g)[0])
    return lo > tol, lo


def example_povm() -> list[np.ndarray]:
    """The rank-(1, 1, 2) extremal qutrit POVM."""
    s3 = math.sqrt(3)
    phi1 = ket(s3 / 2, -0.5, 0)
    phi2 = ket(s3 / 2, 0.5, 0)
    phi3 = ket(0, 1, 0)
    phi4 = ket(0, 0, 1)
    return [2 / 3 * projector(phi1), 2 / 3 * projector(phi2), 2 / 3 * projector(phi3) + projector(phi4)]


def example_kernel_states() -> list[list[np.ndarray]]:
    """Kernel bases of :func:`example_povm` as printed, grouped by outcome."""
    s3 = math.sqrt(3)
    return [
        [ket(0.5, s3 / 2, 0), ket(0, 0, 1)],
        [ket(-0.5, s3 / 2, 0), ket(0, 0, 1)],
        [ket(1, 0, 0)],
    ]


def _dedup(states: list[np.ndarray], candidates: Sequence[np.ndarray], atol: float) -> list[np.ndarray]:
    out = list(states)
    for c in candidates:
        if not any(abs(abs(np.vdot(s, c)) - 1.0) < atol for s in out):
            out.append(c)
    return out


def build_povm_witness(
    povms: Sequence[Sequence[np.ndarray]] | Sequence[np.ndarray],
    tol: Tolerances = DEFAULT,
    with_fiducials: bool | None = None,
) -> PovmWitness:
    """POVM witness for one POVM or a list of POVMs.

    The ensemble is the kernel bases (b-major) followed by the fiducial set
    (for D ≥ 3 unless ``with_fiducials`` says otherwise) and the completion.
    With several POVMs, kernel states shared with earlier POVMs are reused.
    """
    if isinstance(povms, np.ndarray) or (len(povms) and np.ndim(povms[0]) == 2):
        povms = [povms]
    tests = []
    for p in povms:
        t = povm_self_test(p, tol)
        ok, lo = is_extremal(t.povm, tol.extremal)
        if not ok:
            warnings.warn(f"POVM is not extremal (min Gram eigenvalue {lo:.3e}); the witness does not self-test it")
        tests.append(t)
    dim = tests[0].dim
    if any(t.dim != dim for t in tests):
        raise ShapeMismatch("all POVMs must share one dimension")

    states: list[np.ndarray] = []
    index = []
    for m, t in enumerate(tests):
        per_b = []
        for basis in t.kernel_bases:
            ids = []
            for v in basis:
                hit = None
                if m > 0:
                    hit = next((k for k, s in enumerate(states) if abs(abs(np.vdot(s, v)) - 1.0) < tol.dedup_overlap), None)
                if hit is None:
                    states.append(v)
                    hit = len(states) - 1
                ids.append(hit)
            per_b.append(tuple(ids))
        index.append(tuple(per_b))
    use_fid = dim >= 3 if with_fiducials is None else with_fiducials
    if use_fid:
        fid = fiducial_set(dim).states
        states = states + fid if len(tests) == 1 else _dedup(states, fid, tol.dedup_overlap)
    if not states:
        # only full-rank elements: no kernel to pin, keep the witness well defined
        states = [np.eye(dim, dtype=complex)[k] for k in range(dim)]
    ens = complete_ensemble(states, tol)
    return PovmWitness(tuple(tests), build_state_witness(ens), tuple(index))


def ideal_povm_behavior(w: PovmWitness, tol: Tolerances = DEFAULT, substitute: Sequence[Sequence[np.ndarray]] | None = None) -> Behavior:
    """Reference states, Helstrom pairs and the POVMs (or ``substitute``) as the last measurements."""
    ens: WeightedEnsemble = w.state_witness.ensemble
    meas = ideal_measurements(ens, tol) + [list(p) for p in (substitute or [t.povm for t in w.tests])]
    n_b = max(len(m) for m in meas)
    rhos = ens.projectors()
    table = np.zeros((len(rhos), len(meas), n_b))
    for x, rho in enumerate(rhos):
        for y, povm in enumerate(meas):
            for b, e in enumerate(povm):
                table[x, y, b] = overlap(rho, e)
    return Behavior(table)


def eval_povm_witness(w: PovmWitness, p: Behavior) -> float:
    from .witness import eval_witness

    n_x, n_y, n_b = p.shape
    if n_x < w.n_preparations or n_y < w.n_measurements or n_b < max(w.outcome_counts):
        raise ShapeMismatch(f"behavior shape {p.shape} too small for POVM witness")
    total = eval_witness(w.state_witness, p)
    for m, per_b in enumerate(w.kernel_index):
        y = w.n_pair_measurements + m
        for b, ids in enumerate(per_b):
            total -= sum(p.table[x, y, b] for x in ids)
    return float(total)


def kernel_violation(pst: PovmSelfTest, candidate: Sequence[np.ndarray]) -> float:
    """``∑_b tr(Z_b M̄_b)``."""
    return float(sum(overlap(z, m) for z, m in zip(pst.kernel_projectors, candidate)))


def povm_robustness(pst: PovmSelfTest, epsilon: float, delta: float) -> PovmRobustness:
    """Operator-norm bound on ``‖M_b − M̄_b‖`` from kernel leakage ``δ`` and state error ``ε``."""
    if epsilon < 0 or delta < 0:
        raise ValueError("epsilon and delta must be nonnegative")
    g_inv = pst.gram_inv_norm
    if not math.isfinite(g_inv):
        raise ValueError("Gram matrix is singular: POVM is not extremal and the bound is undefined")
    d, b = pst.dim, pst.n_outcomes
    base = (d - 1) * epsilon + delta
    eps_prime = base + 2 * math.sqrt(base)
    bound = (1 + math.sqrt(d) * b * math.sqrt(g_inv)) * eps_prime
    return PovmRobustness(float(epsilon), float(delta), float(eps_prime), float(bound))


def max_element_deviation(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> float:
    return max(op_norm(x - y) for x, y in zip(a, b))
