"""Grid shift operator, complex-orthogonal spectral basis and graph filters.

The shift operator S is the complex symmetric matrix obtained from the
branch Laplacian Y plus a diagonal perturbation holding generator
admittances and shunts; it is invertible, unlike a plain Laplacian. Its
eigendecomposition S = U diag(lambda) U^T uses a *complex orthogonal* basis
(U^T U = I, plain transpose, no conjugation), which exists exactly for
diagonalizable complex symmetric matrices. Frequencies are ordered by
ascending |lambda|; the basis is NOT unitary, so norms are not preserved
under the transform.

Eigenvector normalization divides by the principal square root of u^T u; a
quasi-null bilinear norm |u^T u| marks a defective (non-diagonalizable)
operator and raises rather than silently mis-normalizing. Numerically
coincident eigenvalues are re-orthogonalized within their group using the
bilinear form before normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import NonDiagonalizableError, SingularOperatorError
from .grid import GridCase, partition_indices
from .validation import check_complex_array, check_index_set, check_square


def branch_laplacian(case: GridCase) -> np.ndarray:
    """Complex weighted Laplacian of the branch graph (no diagonal terms)."""
    n = case.n_buses
    Y = np.zeros((n, n), dtype=complex)
    for (i, j, y) in case.branches:
        Y[i, i] += y
        Y[j, j] += y
        Y[i, j] -= y
        Y[j, i] -= y
    return Y


def diagonal_perturbation(case: GridCase) -> np.ndarray:
    """Per-bus diagonal added to the Laplacian: y_g + shunt at generator
    buses, shunt at load buses."""
    gen, load = partition_indices(case)
    d = np.zeros(case.n_buses, dtype=complex)
    d[gen] = case.gen_admittance + case.shunt_gen
    d[load] = case.shunt_load
    return d


def ohm_matrix(case: GridCase) -> np.ndarray:
    """Bus admittance matrix Y + diag(shunts): maps voltages to injected
    currents (network Ohm's law). Excludes generator admittances."""
    gen, load = partition_indices(case)
    d = np.zeros(case.n_buses, dtype=complex)
    d[gen] = case.shunt_gen
    d[load] = case.shunt_load
    return branch_laplacian(case) + np.diag(d)


def _is_effectively_real(S: np.ndarray) -> bool:
    return not np.iscomplexobj(S) or not np.any(S.imag)


def _eig_sort_order(eigenvalues: np.ndarray) -> np.ndarray:
    """Ascending |lambda|; ties by principal phase angle, then input index."""
    mags = np.abs(eigenvalues)
    angles = np.angle(eigenvalues)
    return np.lexsort((np.arange(len(eigenvalues)), angles, mags))


def _group_coincident(eigenvalues: np.ndarray, scale: float):
    """Cluster numerically coincident eigenvalues (post-sort order).

    Groups are grown by value distance so that repeated eigenvalues land in
    one group while merely close-in-magnitude distinct ones stay apart.
    """
    gtol = 1e-8 * max(scale, 1.0e-300)
    groups = []
    for idx in range(len(eigenvalues)):
        lam = eigenvalues[idx]
        placed = False
        for g in groups:
            if any(abs(lam - eigenvalues[j]) <= gtol for j in g):
                g.append(idx)
                placed = True
                break
        if not placed:
            groups.append([idx])
    return groups


def _fix_sign(u: np.ndarray) -> np.ndarray:
    """Deterministic sign: the largest-modulus entry gets positive real part
    (positive imaginary part when its real part is negligible). The residual
    freedom of a complex-orthogonal normalization is exactly +-1."""
    k = int(np.argmax(np.abs(u)))
    pivot = u[k]
    if abs(pivot.real) > 1e-12 * abs(pivot):
        flip = pivot.real < 0
    else:
        flip = pivot.imag < 0
    return -u if flip else u


def complex_orthogonal_eig(S: np.ndarray, tolerances: Tolerances = DEFAULT_TOLERANCES):
    """Ordered complex-orthogonal eigendecomposition of a complex symmetric S.

    Returns (eigenvalues, basis) with basis columns u_i satisfying
    u_i^T u_j = delta_ij. Raises NonDiagonalizableError when some eigenvector
    has quasi-null bilinear norm or the residual checks fail.
    """
    S = check_square(S, "S")
    if np.linalg.norm(S - S.T) > 1e-12 * max(np.linalg.norm(S), 1e-300):
        raise ValueError("operator must be complex symmetric (S = S^T)")

    if _is_effectively_real(S):
        w, V = np.linalg.eigh(S.real)
        w = w.astype(complex)
        V = V.astype(complex)
    else:
        w, V = sla.eig(S)

    order = _eig_sort_order(w)
    w = w[order]
    V = V[:, order]

    scale = float(np.max(np.abs(w))) if len(w) else 0.0
    for group in _group_coincident(w, scale):
        if len(group) < 2:
            continue
        # bilinear modified Gram-Schmidt inside the degenerate eigenspace,
        # run twice for numerical insurance
        for _ in range(2):
            for pos, j in enumerate(group):
                v = V[:, j]
                for jprev in group[:pos]:
                    v = v - (V[:, jprev] @ v) * V[:, jprev]
                q = v @ v
                h = np.vdot(v, v).real
                if abs(q) < tolerances.orthogonality * h:
                    raise NonDiagonalizableError(
                        "non-diagonalizable within tolerance: eigenvector with "
                        f"quasi-null complex-orthogonal norm at eigenvalue {w[j]:.6g}")
                V[:, j] = v / np.sqrt(q)

    U = np.empty_like(V)
    for j in range(V.shape[1]):
        u = V[:, j]
        q = u @ u
        h = np.vdot(u, u).real
        if abs(q) < tolerances.orthogonality * h:
            raise NonDiagonalizableError(
                "non-diagonalizable within tolerance: eigenvector with quasi-null "
                f"complex-orthogonal norm at eigenvalue {w[j]:.6g}")
        U[:, j] = _fix_sign(u / np.sqrt(q))

    return w, U


@dataclass(frozen=True)
class SpectralOperator:
    """A complex symmetric operator with its ordered spectral basis.

    Immutable; the LU factorization used by ``solve`` is computed eagerly at
    construction when the operator is invertible, so concurrent read-only
    use is safe.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray
    eig_residual: float
    orth_residual: float
    tolerances: Tolerances = DEFAULT_TOLERANCES
    _lu: tuple | None = field(default=None, repr=False)

    @classmethod
    def from_matrix(cls, S, tolerances: Tolerances = DEFAULT_TOLERANCES,
                    require_invertible: bool = False) -> "SpectralOperator":
        S = check_square(np.array(S, dtype=complex), "S")
        S = 0.5 * (S + S.T)  # enforce exact symmetry
        w, U = complex_orthogonal_eig(S, tolerances)

        s_norm = max(np.linalg.norm(S), 1e-300)
        eig_residual = float(np.linalg.norm(S @ U - U * w[None, :]) / s_norm)
        orth_residual = float(np.linalg.norm(U.T @ U - np.eye(len(w))))
        if eig_residual > tolerances.spectral_residual:
            raise NonDiagonalizableError(
                f"eigendecomposition residual {eig_residual:.3e} exceeds "
                f"{tolerances.spectral_residual:.1e}")
        if orth_residual > tolerances.orthogonality:
            raise NonDiagonalizableError(
                f"basis orthogonality residual {orth_residual:.3e} exceeds "
                f"{tolerances.orthogonality:.1e}")

        min_mag = float(np.min(np.abs(w))) if len(w) else 0.0
        max_mag = float(np.max(np.abs(w))) if len(w) else 0.0
        invertible = min_mag > tolerances.singularity * max(max_mag, 1e-300)
        if require_invertible and not invertible:
            raise SingularOperatorError(
                f"operator is singular within tolerance (min |lambda| = {min_mag:.3e})")
        lu = sla.lu_factor(S) if invertible else None

        for arr in (S, w, U):
            arr.setflags(write=False)
        return cls(matrix=S, eigenvalues=w, basis=U, eig_residual=eig_residual,
                   orth_residual=orth_residual, tolerances=tolerances, _lu=lu)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def min_eig_magnitude(self) -> float:
        return float(np.min(np.abs(self.eigenvalues)))

    @property
    def is_invertible(self) -> bool:
        return self._lu is not None

    def gft(self, x: np.ndarray) -> np.ndarray:
        """Analysis transform U^T x (columns of a 2-d x are transformed)."""
        x = np.asarray(x)
        if x.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: operator has {self.n} nodes, "
                             f"signal has {x.shape[0]}")
        return self.basis.T @ x

    def inverse_gft(self, xt: np.ndarray) -> np.ndarray:
        xt = np.asarray(xt)
        if xt.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: operator has {self.n} nodes, "
                             f"spectrum has {xt.shape[0]}")
        return self.basis @ xt

    def solve(self, b: np.ndarray) -> np.ndarray:
        """S^{-1} b through the cached LU factorization."""
        if self._lu is None:
            raise SingularOperatorError("operator is singular; cannot apply inverse filter")
        b = np.asarray(b, dtype=complex)
        if b.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: operator has {self.n} nodes, "
                             f"rhs has {b.shape[0]}")
        return sla.lu_solve(self._lu, b)


# --- graph filters ---------------------------------------------------------


@dataclass(frozen=True)
class FilterSpec:
    """A shift-invariant graph filter description.

    Modes: ``full_inverse`` applies S^{-1}; ``lowpass`` keeps the k lowest
    graph frequencies of the inverse response; ``polynomial`` evaluates
    sum_k h_k S^k; ``bandlimit`` projects onto an arbitrary frequency set.
    """

    mode: str
    k: int | None = None
    coefficients: np.ndarray | None = None
    indices: np.ndarray | None = None

    @classmethod
    def full_inverse(cls) -> "FilterSpec":
        return cls(mode="full_inverse")

    @classmethod
    def lowpass(cls, k: int) -> "FilterSpec":
        return cls(mode="lowpass", k=int(k))

    @classmethod
    def polynomial(cls, coefficients) -> "FilterSpec":
        coeffs = np.asarray(coefficients, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("polynomial filter needs a nonempty 1-d coefficient list")
        if not np.all(np.isfinite(coeffs.real)) or not np.all(np.isfinite(coeffs.imag)):
            raise ValueError("polynomial coefficients must be finite")
        return cls(mode="polynomial", coefficients=coeffs)

    @classmethod
    def bandlimit(cls, indices) -> "FilterSpec":
        return cls(mode="bandlimit", indices=np.asarray(list(indices), dtype=int))


def apply_filter(op: SpectralOperator, spec: FilterSpec, x: np.ndarray) -> np.ndarray:
    """Apply a graph filter to a signal (or column-stacked signals)."""
    x = check_complex_array(x, "x")
    if x.shape[0] != op.n:
        raise ValueError(f"dimension mismatch: operator has {op.n} nodes, "
                         f"signal has {x.shape[0]}")
    if spec.mode == "full_inverse":
        return op.solve(x)
    if spec.mode == "lowpass":
        k = spec.k
        if k is None or not (1 <= k <= op.n):
            raise ValueError(f"lowpass order k must lie in [1, {op.n}]")
        Uk = op.basis[:, :k]
        return Uk @ ((Uk.T @ x).T / op.eigenvalues[:k]).T
    if spec.mode == "polynomial":
        coeffs = spec.coefficients
        v = coeffs[-1] * x
        for h in coeffs[-2::-1]:
            v = op.matrix @ v + h * x
        return v
    if spec.mode == "bandlimit":
        idx = check_index_set(spec.indices, op.n, "bandlimit set")
        Uk = op.basis[:, idx]
        return Uk @ (Uk.T @ x)
    raise ValueError(f"unknown filter mode {spec.mode!r}")


# --- operator construction -------------------------------------------------


def build_gso(case: GridCase,
              tolerances: Tolerances = DEFAULT_TOLERANCES) -> SpectralOperator:
    """Grid shift operator: branch Laplacian plus the generator/shunt
    diagonal. Invertibility is required (and comes from the generator
    admittance diagonal for any physical case)."""
    S = branch_laplacian(case) + np.diag(diagonal_perturbation(case))
    return SpectralOperator.from_matrix(S, tolerances, require_invertible=True)


def kron_reduce(op: SpectralOperator, keep,
                tolerances: Tolerances | None = None) -> SpectralOperator:
    """Schur-complement reduction of the operator onto the kept node set.

    S_red = S_MM - S_MMc S_McMc^{-1} S_MMc^T; symmetry is preserved. Raises
    SingularOperatorError when the eliminated interior block is singular.
    """
    tolerances = tolerances or op.tolerances
    keep = check_index_set(keep, op.n, "keep set")
    mask = np.zeros(op.n, dtype=bool)
    mask[keep] = True
    interior = np.flatnonzero(~mask)
    S = op.matrix
    if interior.size == 0:
        return SpectralOperator.from_matrix(S[np.ix_(keep, keep)], tolerances)

    S_mm = S[np.ix_(keep, keep)]
    S_mi = S[np.ix_(keep, interior)]
    S_ii = S[np.ix_(interior, interior)]
    sv = np.linalg.svd(S_ii, compute_uv=False)
    if sv[-1] <= tolerances.singularity * max(sv[0], 1e-300):
        raise SingularOperatorError(
            f"interior block is singular within tolerance (sigma_min = {sv[-1]:.3e})")
    red = S_mm - S_mi @ np.linalg.solve(S_ii, S_mi.T)
    return SpectralOperator.from_matrix(red, tolerances)


def downsample_excitation(op: SpectralOperator, keep, excitation: np.ndarray) -> np.ndarray:
    """Excitation seen by the reduced graph: i_M - S_MMc S_McMc^{-1} i_Mc.

    Together with :func:`kron_reduce` this realizes the identity
    (S^{-1} i)|_M = S_red^{-1} (i_M - S_MMc S_McMc^{-1} i_Mc).
    """
    keep = check_index_set(keep, op.n, "keep set")
    mask = np.zeros(op.n, dtype=bool)
    mask[keep] = True
    interior = np.flatnonzero(~mask)
    excitation = check_complex_array(excitation, "excitation")
    if interior.size == 0:
        return excitation[keep]
    S = op.matrix
    S_mi = S[np.ix_(keep, interior)]
    S_ii = S[np.ix_(interior, interior)]
    return excitation[keep] - S_mi @ np.linalg.solve(S_ii, excitation[interior])


def build_generator_gso(case: GridCase,
                        op: SpectralOperator | None = None,
                        tolerances: Tolerances = DEFAULT_TOLERANCES):
    """Shift operator of the generator-only (Kron-reduced) network.

    Forms the admittance matrix over internal buses + grid buses with loads
    as quasi-static admittances, eliminates the grid block, splits the
    complement into j*Y_red + E_red, and scales by the generator masses:
    S_red = M^{-1/2} Y_red M^{-1/2} (real symmetric, orthonormal basis).

    Returns (S_red operator, E_red); ||E_red||_F / ||Y_red||_F is a model
    quality diagnostic and is never thresholded here.
    """
    if op is None:
        op = build_gso(case, tolerances)
    gen, load = partition_indices(case)
    ng = len(gen)
    if ng == 0:
        raise ValueError("case has no generator buses")

    d_ci = np.zeros(case.n_buses, dtype=complex)
    d_ci[load] = case.load_admittance
    S_ci = op.matrix + np.diag(d_ci)

    c = case.gen_admittance + case.shunt_gen
    C = np.zeros((ng, case.n_buses), dtype=complex)
    C[np.arange(ng), gen] = c

    sv = np.linalg.svd(S_ci, compute_uv=False)
    if sv[-1] <= tolerances.singularity * max(sv[0], 1e-300):
        raise SingularOperatorError(
            "S_ci (operator with quasi-static loads) is singular within tolerance")
    schur = np.diag(c) - C @ np.linalg.solve(S_ci, C.T)
    schur = 0.5 * (schur + schur.T)

    Y_red = schur.imag
    E_red = schur.real
    m_inv_sqrt = 1.0 / np.sqrt(case.gen_mass)
    S_red = (m_inv_sqrt[:, None] * Y_red) * m_inv_sqrt[None, :]
    S_red = 0.5 * (S_red + S_red.T)
    red_op = SpectralOperator.from_matrix(S_red, tolerances)
    return red_op, E_red
