"""Robust Wigner reconstruction in dimension D ≥ 3.

Targets ``ψ_j`` are anchored by the fiducial set (Z, X, Y, XX, YY). Given
prepared states whose overlaps match the reference ones up to ``δ_o`` and
whose impurities are at most ``δ_p``, the pipeline

1. orthonormalizes the purified Z preparations (pretty good measurement),
2. fixes the relative phases with the X preparations,
3. decides between Y_k and conj(Y_k) and whether a global conjugation is needed,

and reports the resulting (anti-)unitary together with the explicit chain of
trace-distance bounds (:func:`delta_chain`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .ensemble import fiducial_set
from .qmat import SymOp, as_density_matrix, as_pure_state, overlap, projector, psd_inv_sqrt, top_eigenstate, trace_distance

# mixed-pattern certificate coefficients, as printed (4 decimals)
YYS_LAMBDA = (1.8149, 1.9415, 0.2167)
YYS_MU = -1.5939
YYS_NU = 2.9170
COND5 = (-0.2938, 0.7970, 2.2555, 0.5, 7.1049)  # const, δ_Y, δ_Z, δ_XX, δ_o


class ReconstructionError(RuntimeError):
    def __init__(self, stage: str, message: str, **details):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.details = details


# --------------------------------------------------------------------------
# scalar helpers


def xi(dim: int, f: float) -> float:
    """``ξ(D, f) = (1 − cos(π/D)) / (1 − (D − 1)/f)``; requires ``f > D − 1``."""
    if not f > dim - 1:
        raise ValueError(f"xi(D={dim}, f={f!r}) undefined: need f > D - 1")
    return (1.0 - math.cos(math.pi / dim)) / (1.0 - (dim - 1) / f)


def larger_root(mu: float, nu: float) -> float:
    """``(ν + √(ν² − 4μ)) / 2``, NaN when the discriminant is negative."""
    disc = nu * nu - 4.0 * mu
    return math.nan if disc < 0 else 0.5 * (nu + math.sqrt(disc))


def _two_sqrt(x: float) -> float:
    return 2.0 * math.sqrt(x) if x >= 0 else math.inf


def tomography_caps(dim: int, f: float) -> tuple[float, float, float]:
    """Caps on ``(∑|λ|, ∑|μ|, ∑|ν|)`` for the tomography certificate."""
    x = xi(dim, f)
    z_cap = dim + (dim - 1) * (1 + math.sqrt(2)) * f / x
    xy_cap = f * (dim - 1) / x
    return z_cap, xy_cap, xy_cap


# --------------------------------------------------------------------------
# delta chain


@dataclass(frozen=True)
class DeltaChain:
    delta_o: float
    delta_p: float
    dim: int
    f: tuple[float, ...]
    dz_prime: float
    dz: float
    dx_prime: float
    dx: float
    dy: float
    dxx: float
    dyy: float
    dpsi: tuple[float, ...]
    cond1: float  # 1/(D−1)² − δ′_Z, feasible when > 0
    cond3: float  # discriminant, feasible when ≥ 0
    cond5: float  # left side of the printed inequality, feasible when < 0

    @property
    def feasible(self) -> tuple[bool, bool, bool]:
        return (self.cond1 > 0, self.cond3 >= 0, self.cond5 < 0)

    @property
    def all_feasible(self) -> bool:
        return all(self.feasible)

    def family_bounds(self) -> dict[str, float]:
        return {"Z": self.dz, "X": self.dx, "Y": self.dy, "XX": self.dxx, "YY": self.dyy}


def delta_chain(delta_o: float, delta_p: float, dim: int, f: Sequence[float] = ()) -> DeltaChain:
    """Evaluate the robustness recurrences for overlap error ``δ_o`` and impurity ``δ_p``."""
    if delta_o < 0 or delta_p < 0:
        raise ValueError("delta_o and delta_p must be nonnegative")
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    f = tuple(float(v) for v in f)
    for j, fj in enumerate(f):
        if not fj > dim - 1:
            raise ValueError(f"f[{j}]={fj!r} must exceed D - 1 = {dim - 1}")
    do, dp, d = delta_o, delta_p, dim

    dz_prime = 2 * dp + do
    inner = 1.0 - dz_prime / 8.0 * (d - 1) ** 2
    dz = 2 * dp + _two_sqrt(1.0 - inner**2)
    dx_prime = dz / 2 + dp + do
    dx = 2 * math.sqrt(2) * math.sqrt(dx_prime) + 2 * dp

    bar_z = dz / 2 + dp + do
    bar_xz = (dx + dz) / 2 + 2 * dp + 2 * do
    mu = bar_xz**2 + bar_z**2
    nu = 1.0 - 2 * bar_z
    root = larger_root(mu, nu)
    dy = math.inf if math.isnan(root) else 2 * dp + _two_sqrt(1.0 - root)

    dxx = _two_sqrt(6 / 5 * dx + 9 / 10 * dz + 21 / 5 * do)
    dyy = _two_sqrt(3 / 2 * dz + 2 * dy + 7 * do)

    dpsi = []
    for fj in f:
        x = xi(d, fj)
        a = d + (d - 1) * (1 + math.sqrt(2)) * fj / (2 * x)
        b = fj * (d - 1) / (2 * x)
        c = d + (d - 1) * (1 + math.sqrt(2)) * fj / x + 2 * fj * (d - 1) / x
        dpsi.append(_two_sqrt(a * dz + b * dx + b * dy + c * do))

    cond1 = 1.0 / (d - 1) ** 2 - dz_prime
    cond3 = nu**2 - 4 * mu
    k0, ky, kz, kxx, ko = COND5
    cond5 = k0 + ky * dy + kz * dz + kxx * dxx + ko * do
    return DeltaChain(do, dp, d, f, dz_prime, dz, dx_prime, dx, dy, dxx, dyy, tuple(dpsi), cond1, cond3, cond5)


# --------------------------------------------------------------------------
# tridiagonal operator and tomography certificate


def tridiagonal_operator(dim: int) -> np.ndarray:
    """``½ ∑_k (Z_k + Z_{k+1} − |k+1⟩⟨k| − |k⟩⟨k+1|)``: the path-graph Laplacian over 2."""
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    h = np.zeros((dim, dim))
    for k in range(dim - 1):
        h[k, k] += 0.5
        h[k + 1, k + 1] += 0.5
        h[k, k + 1] -= 0.5
        h[k + 1, k] -= 0.5
    return h


def tridiagonal_spectrum(dim: int) -> list[float]:
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    return [1.0 - math.cos(math.pi * j / dim) for j in range(dim)]


@dataclass(frozen=True)
class TomographyCertificate:
    psi: np.ndarray
    f: float
    lambdas: np.ndarray  # on Z_k, k = 0..D-1
    mus: np.ndarray  # on X_k, k = 0..D-2
    nus: np.ndarray  # on Y_k, k = 0..D-2

    @property
    def dim(self) -> int:
        return self.psi.shape[0]

    def operator(self) -> np.ndarray:
        return expand_zxy(self.lambdas, self.mus, self.nus)

    def norms(self) -> tuple[float, float, float]:
        return float(np.sum(np.abs(self.lambdas))), float(np.sum(np.abs(self.mus))), float(np.sum(np.abs(self.nus)))


def zxy_projectors(dim: int) -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    e = np.eye(dim, dtype=complex)
    z = [projector(e[k]) for k in range(dim)]
    x = [projector((e[k] + e[k + 1]) / math.sqrt(2)) for k in range(dim - 1)]
    y = [projector((e[k] + 1j * e[k + 1]) / math.sqrt(2)) for k in range(dim - 1)]
    return z, x, y


def expand_zxy(lambdas, mus, nus) -> np.ndarray:
    z, x, y = zxy_projectors(len(lambdas))
    return sum(l * p for l, p in zip(lambdas, z)) + sum(m * p for m, p in zip(mus, x)) + sum(n * p for n, p in zip(nus, y))


def tomography_operator(psi, f: float, tol: Tolerances = DEFAULT) -> TomographyCertificate:
    """Operator ``H`` in span{Z_k, X_k, Y_k} with ``ψψ† − H ⪰ 0`` and ``tr(Hψψ†) = 1``.

    ``H = I − H′/ξ(D, f)`` with ``H′ = C^{-†} H̃ C^{-1}``, ``C = diag(ψ)``.
    Uses ``|k⟩⟨k+1| = X_k + iY_k − ½(1 + i)(Z_k + Z_{k+1})`` for the expansion.
    """
    psi = as_pure_state(psi, tol)
    dim = psi.shape[0]
    weights = np.abs(psi) ** 2
    if np.min(weights) < 1.0 / f - 1e-12:
        raise ValueError(f"min_k |<k|psi>|^2 = {np.min(weights):.3e} is below 1/f = {1.0 / f:.3e}")
    x = xi(dim, f)
    diag = np.full(dim, 1.0)
    diag[0] = diag[-1] = 0.5
    a = 1.0 / (psi[:-1].conj() * psi[1:])  # H'_{k,k+1} = −a_k / 2
    lambdas = 1.0 - diag / weights / x
    lambdas[:-1] -= 0.5 * (a.real - a.imag) / x
    lambdas[1:] -= 0.5 * (a.real - a.imag) / x
    mus = a.real / x
    nus = -a.imag / x
    return TomographyCertificate(psi, float(f), lambdas, mus, nus)


# --------------------------------------------------------------------------
# printed certificates


def certificate_operator(name: str, k: int, dim: int) -> np.ndarray:
    """Certificate operators for the XX and YY steps (``k`` is 0-based).

    ``xx``          XX_k − 6/5(X_k + X_{k+1}) + 3/5(Z_k + Z_{k+1} + Z_{k+2})  (printed)
    ``xx_tight``    XX_k − 2(X_k + X_{k+1}) + Z_k + 3Z_{k+1} + Z_{k+2}
    ``yys``         λ·(Z_k, Z_{k+1}, Z_{k+2}) + μ Y_k + ν conj(Y_{k+1}) − XX_k  (printed)
    ``yys_mirror``  image of ``yys`` under |k⟩ ↔ |k+2⟩
    ``yy_recovery`` YY_k − Z_k + Z_{k+1} + Z_{k+2} + 2(Y_k − Y_{k+1})
    """
    if dim < 3:
        raise ValueError("certificates need D >= 3")
    if not 0 <= k <= dim - 3:
        raise ValueError(f"k={k} out of range 0..{dim - 3} for D={dim}")
    fid = fiducial_set(dim)
    z = [projector(v) for v in fid.z]
    x = [projector(v) for v in fid.x]
    y = [projector(v) for v in fid.y]
    y_conj = [projector(v.conj()) for v in fid.y]
    xx = projector(fid.xx[k])
    yy = projector(fid.yy[k])
    z3 = z[k : k + 3]
    if name == "xx":
        return xx - 6 / 5 * (x[k] + x[k + 1]) + 3 / 5 * sum(z3)
    if name == "xx_tight":
        return xx - 2 * (x[k] + x[k + 1]) + z3[0] + 3 * z3[1] + z3[2]
    if name == "yys":
        return yys_operator(k, dim)
    if name == "yys_mirror":
        return sum(l * p for l, p in zip(YYS_LAMBDA[::-1], z3)) + YYS_MU * y_conj[k + 1] + YYS_NU * y[k] - xx
    if name == "yy_recovery":
        return yy - z3[0] + z3[1] + z3[2] + 2 * (y[k] - y[k + 1])
    raise ValueError(f"unknown certificate {name!r}")


def yys_operator(k: int, dim: int, lambdas: Sequence[float] = YYS_LAMBDA, mu: float = YYS_MU, nu: float = YYS_NU) -> np.ndarray:
    """``λ·(Z_k, Z_{k+1}, Z_{k+2}) + μ Y_k + ν conj(Y_{k+1}) − XX_k`` with adjustable coefficients."""
    fid = fiducial_set(dim)
    z3 = [projector(v) for v in fid.z[k : k + 3]]
    return (
        sum(l * p for l, p in zip(lambdas, z3))
        + mu * projector(fid.y[k])
        + nu * projector(fid.y[k + 1].conj())
        - projector(fid.xx[k])
    )


def refine_yys_mu(lambdas: Sequence[float] = YYS_LAMBDA, nu: float = YYS_NU, lo: float = -3.0, hi: float = 0.0, iters: int = 80) -> float:
    """Most negative ``μ`` keeping the YYs operator PSD for fixed ``λ, ν`` (bisection).

    The spectrum does not depend on ``k`` or ``D``, so the check runs at D = 3.
    """

    def ok(mu: float) -> bool:
        return np.linalg.eigvalsh(yys_operator(0, 3, lambdas, mu, nu))[0] >= 0

    if not ok(hi):
        raise ValueError(f"operator is not PSD even at mu={hi}")
    if ok(lo):
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


CERTIFICATES = ("xx", "xx_tight", "yys", "yys_mirror", "yy_recovery")


def certificate_check(name: str, k: int, dim: int) -> float:
    """Minimum eigenvalue of the named certificate operator."""
    return float(np.linalg.eigvalsh(certificate_operator(name, k, dim))[0])


# --------------------------------------------------------------------------
# reconstruction stages


def _purify(states: Sequence[np.ndarray], tol: Tolerances) -> tuple[list[np.ndarray], list[float]]:
    kets, tops = [], []
    for rho in states:
        v, p = top_eigenstate(rho, tol)
        kets.append(v)
        tops.append(p)
    return kets, tops


def basis_lemma_bound(delta: float, dim: int) -> float:
    """Trace-distance bound of the pretty-good-measurement basis lemma (inf outside its range)."""
    if not delta < 1.0 / (dim - 1) ** 2:
        return math.inf
    inner = 1.0 - delta / 8.0 * (dim - 1) ** 2
    return _two_sqrt(1.0 - inner**2)


def recover_z_basis(z0: Sequence[np.ndarray], tol: Tolerances = DEFAULT) -> tuple[np.ndarray, list[float]]:
    """Unitary sending the pretty-good-measurement basis of the Z preparations to |k⟩.

    Returns it with per-state bounds ``2(1 − p₁) + 2√(1 − (1 − δ(D−1)²/8)²)``,
    ``δ`` the largest overlap between purified Z states (inf if the lemma's
    hypothesis ``δ < 1/(D−1)²`` fails).
    """
    dim = len(z0)
    if any(np.shape(r) != (dim, dim) for r in z0):
        raise ReconstructionError("z", f"need {dim} states of dimension {dim}")
    phis, tops = _purify(z0, tol)
    gamma = np.column_stack(phis)
    g = gamma.conj().T @ gamma
    delta = max((abs(g[i, j]) ** 2 for i in range(dim) for j in range(dim) if i != j), default=0.0)
    lo = float(np.linalg.eigvalsh(g)[0])
    if lo < 1e-12:
        raise ReconstructionError("z", "purified Z states are linearly dependent", min_gram_eig=lo)
    m = gamma @ psd_inv_sqrt(g, tol)
    lemma = basis_lemma_bound(delta, dim)
    bounds = [2 * (1 - p) + lemma for p in tops]
    return m.conj().T, bounds


def fix_x_phases(x1: Sequence[np.ndarray], tol: Tolerances = DEFAULT) -> np.ndarray:
    """Diagonal unitary making ⟨k|X″_k⟩ and ⟨k+1|X″_k⟩ share one phase for every k."""
    phis, _ = _purify(x1, tol)
    dim = len(phis) + 1
    theta = np.zeros(dim)
    for k, phi in enumerate(phis):
        a, b = phi[k], phi[k + 1]
        if abs(a) < tol.phase_overlap or abs(b) < tol.phase_overlap:
            raise ReconstructionError("x", f"X_{k + 1} has vanishing overlap with Z_{k + 1} or Z_{k + 2}", k=k)
        theta[k + 1] = theta[k] + np.angle(a) - np.angle(b)
    return np.diag(np.exp(1j * theta))


def _mixed_pattern_certificate(dim: int, k: int, conj_first: bool) -> tuple[np.ndarray, dict[str, float]]:
    """Certificate ruling out (Y_k, conj Y_{k+1}) or (conj Y_k, Y_{k+1}) given YY_k.

    Returns the operator and its coefficients on the (Z, Y, XX) constraint
    families. The reference overlaps of YY_k are 1/3 on Z, 0 on Y_k, 2/3 on
    Y_{k+1} and 5/9 on XX_k.
    """
    op = certificate_operator("yys_mirror", k, dim)
    if conj_first:
        op = op.conj()
    coeffs = {"Z": float(sum(YYS_LAMBDA)), "Y": abs(YYS_MU) + abs(YYS_NU), "XX": 1.0}
    return op, coeffs


def conjugation_margin(chain: DeltaChain | None) -> float:
    """Upper bound on the certificate's expectation in a mixed pattern; < 0 proves a contradiction."""
    base = sum(YYS_LAMBDA) / 3 + YYS_MU * 2 / 3 + YYS_NU * 0 - 5 / 9
    if chain is None:
        return base
    bar_y = chain.dy / 2 + chain.delta_o
    bar_z = chain.dz / 2 + chain.delta_o
    bar_xx = chain.dxx / 2 + chain.delta_o
    return base + sum(YYS_LAMBDA) * bar_z + (abs(YYS_MU) + abs(YYS_NU)) * bar_y + bar_xx


def detect_conjugation(
    y2: Sequence[np.ndarray],
    yy2: Sequence[np.ndarray] = (),
    chain: DeltaChain | None = None,
    tol: Tolerances = DEFAULT,
) -> bool:
    """Whether the aligned Y preparations match conj(Y_k) rather than Y_k.

    A mixed pattern cannot come from any (anti-)unitary and raises
    :class:`ReconstructionError` (stage ``"y"``) carrying the YY-certificate
    margin; ``proven=True`` when the margin shows the overlaps are infeasible.
    """
    phis, _ = _purify(y2, tol)
    dim = len(phis) + 1
    e = np.eye(dim)
    votes = []
    for k, phi in enumerate(phis):
        ref = (e[k] + 1j * e[k + 1]) / math.sqrt(2)
        s = abs(np.vdot(ref, phi)) ** 2
        t = abs(np.vdot(ref.conj(), phi)) ** 2
        votes.append(t > s)
    if all(votes) or not any(votes):
        return bool(votes[0]) if votes else False
    k = next(i for i in range(len(votes) - 1) if votes[i] != votes[i + 1])
    margin = conjugation_margin(chain)
    yy_value = None
    if k < len(yy2):
        op, _ = _mixed_pattern_certificate(dim, k, conj_first=votes[k])
        yy_value = overlap(np.asarray(yy2[k]), op)
    raise ReconstructionError(
        "y",
        f"Y preparations {k + 1} and {k + 2} disagree on conjugation",
        k=k,
        votes=votes,
        margin=margin,
        proven=margin < 0,
        yy_certificate_value=yy_value,
    )


# --------------------------------------------------------------------------
# full pipeline


@dataclass(frozen=True)
class ReconstructionReport:
    symop: SymOp
    labels: tuple[str, ...]
    distances: tuple[float, ...]
    bounds: tuple[float, ...]
    chain: DeltaChain
    z_bounds: tuple[float, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def conjugate(self) -> bool:
        return self.symop.conjugate

    @property
    def passed(self) -> tuple[bool, ...]:
        return tuple(d <= b for d, b in zip(self.distances, self.bounds))

    def family_pass(self) -> dict[str, bool]:
        out: dict[str, bool] = {}
        for label, ok in zip(self.labels, self.passed):
            fam = "psi" if label.startswith("psi") else label.rstrip("0123456789")
            out[fam] = out.get(fam, True) and ok
        return out

    @property
    def max_distance(self) -> float:
        return max(self.distances)


def measured_deltas(prepared: Sequence[np.ndarray], reference: Sequence[np.ndarray]) -> tuple[float, float]:
    """Largest overlap deviation ``δ_o`` and largest impurity ``δ_p``."""
    n = len(prepared)
    refs = [projector(r) for r in reference]
    do = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            do = max(do, abs(overlap(prepared[i], prepared[j]) - overlap(refs[i], refs[j])))
    dp = max(max(1.0 - overlap(r, r), 0.0) for r in prepared)
    return do, dp


def reconstruct(
    prepared: Sequence,
    reference: Sequence,
    n_targets: int | None = None,
    f: Sequence[float] | None = None,
    tol: Tolerances = DEFAULT,
) -> ReconstructionReport:
    """Find the (anti-)unitary mapping ``prepared`` onto ``reference``.

    ``reference`` lists the target kets followed by the fiducial set of
    :func:`fiducial_set` in its canonical order; ``prepared`` lists the
    corresponding density matrices (or kets).
    """
    refs = [as_pure_state(r, tol) for r in reference]
    if not refs:
        raise ReconstructionError("input", "empty reference")
    dim = refs[0].shape[0]
    fid = fiducial_set(dim)
    n_fid = len(fid)
    m = len(refs) - n_fid if n_targets is None else n_targets
    if m < 0 or m + n_fid != len(refs):
        raise ReconstructionError("input", f"reference must hold {m} targets plus {n_fid} fiducial states")
    if len(prepared) != len(refs):
        raise ReconstructionError("input", f"{len(prepared)} prepared states for {len(refs)} reference states")
    for idx, (r, v) in enumerate(zip(refs[m:], fid.states)):
        if abs(abs(np.vdot(r, v)) - 1.0) > 1e-9:
            raise ReconstructionError("input", f"reference state {m + idx} is not fiducial {fid.labels[idx]}")
    rhos = [as_density_matrix(p, tol) for p in prepared]

    targets = refs[:m]
    if f is None:
        f = [1.0 / float(np.min(np.abs(t) ** 2)) if np.min(np.abs(t)) > 0 else math.inf for t in targets]
    do, dp = measured_deltas(rhos, refs)
    f_finite = [fj if math.isfinite(fj) else 1e300 for fj in f]
    chain = delta_chain(do, dp, dim, f_finite)

    sl = fid.slices()
    fid_rhos = rhos[m:]
    u, z_bounds = recover_z_basis(fid_rhos[sl["Z"]], tol)
    step1 = [u @ r @ u.conj().T for r in fid_rhos]
    v = fix_x_phases(step1[sl["X"]], tol)
    step2 = [v @ r @ v.conj().T for r in step1]
    conj = detect_conjugation(step2[sl["Y"]], step2[sl["YY"]], chain, tol)

    vu = v @ u
    symop = SymOp(vu.conj(), True) if conj else SymOp(vu, False)
    labels = [f"psi{j + 1}" for j in range(m)] + list(fid.labels)
    distances = [trace_distance(symop.apply(r), projector(t)) for r, t in zip(rhos, refs)]
    fam = chain.family_bounds()
    bounds = list(chain.dpsi) + [fam[lab.rstrip("0123456789")] for lab in fid.labels]
    notes = []
    if not chain.all_feasible:
        notes.append("feasibility conditions fail: bounds carry no guarantee")
    return ReconstructionReport(symop, tuple(labels), tuple(distances), tuple(bounds), chain, tuple(z_bounds), tuple(notes))
