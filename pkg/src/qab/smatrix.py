"""Bound-state S-matrices as intertwiner null spaces, and the Yang-Baxter check.

S is the endomorphism of V1 (x) V2 satisfying S Delta(J) = Delta^op(J) S for
every Chevalley generator including the affine ones (which are what make the
null space one-dimensional).  The Cartan constraints are imposed structurally:
S is supported on entries joining states of equal (H1, H3) weight, which cuts
the unknown count enough that a dense SVD handles every desk-scale case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coalgebra import (
    TensorSpace,
    coproduct,
    graded_permutation,
    make_leg,
    opposite_coproduct,
)
from .kinematics import Kinematics, ModelParams, reflect_kinematics
from .representation import RepSpace, build_basis

DEFAULT_GENERATORS = tuple(
    f"{kind}{i}" for kind in ("E", "F") for i in (1, 2, 3, 4)
)

#: (H1, H3) weight shift of each generator's action.
_SHIFTS = {
    "E1": (2, 0),
    "F1": (-2, 0),
    "E3": (0, -2),
    "F3": (0, 2),
    "E2": (-1, 1),
    "F2": (1, -1),
    "E4": (-1, 1),
    "F4": (1, -1),
}


class IntertwinerError(RuntimeError):
    """Null space empty or degenerate."""


@dataclass
class SMatrix:
    """Normalized intertwiner with its null-space diagnostics."""

    matrix: np.ndarray
    kin1: Kinematics
    kin2: Kinematics
    null_dim: int
    singular_values: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _leg_weights(space: RepSpace) -> list:
    return [(l - k, n - m) for (m, n, k, l) in space.states]


def _joint_weights(s1: RepSpace, s2: RepSpace) -> list:
    w1, w2 = _leg_weights(s1), _leg_weights(s2)
    return [
        (a1 + b1, a2 + b2) for (a1, a2) in w1 for (b1, b2) in w2
    ]


def intertwiner_nullspace(
    kin1: Kinematics,
    kin2: Kinematics,
    params: ModelParams,
    generators=DEFAULT_GENERATORS,
    svd_factor: float = 1e3,
):
    """Null space of the stacked maps S -> S Delta(J) - Delta^op(J) S.

    Returns (basis matrices, singular values, null_dim).  Unknowns are
    restricted to the (H1, H3) weight-diagonal entries, equivalent to
    imposing the K-generator constraints exactly.
    """
    leg1 = make_leg(kin1, params)
    leg2 = make_leg(kin2, params)
    s1, s2 = leg1.space, leg2.space
    weights = _joint_weights(s1, s2)
    dim = len(weights)
    blocks: dict = {}
    for i, w in enumerate(weights):
        blocks.setdefault(w, []).append(i)
    unknowns = [(i, j) for w, idx in blocks.items() for i in idx for j in idx]
    col = {p: c for c, p in enumerate(unknowns)}

    rows = []
    for gen in generators:
        A = coproduct(gen, leg1, leg2).matrix
        B = opposite_coproduct(gen, leg1, leg2).matrix
        dw = _SHIFTS[gen]
        for w_out, idx_out in blocks.items():
            w_in = (w_out[0] - dw[0], w_out[1] - dw[1])
            if w_in not in blocks:
                # Equation rows with no unknowns reduce to A, B entries that
                # vanish identically by weight conservation.
                continue
            idx_in = blocks[w_in]
            for i in idx_out:
                for j in idx_in:
                    row = np.zeros(len(unknowns), dtype=complex)
                    for k in idx_out:  # S[i,k] A[k,j]
                        row[col[(i, k)]] += A[k, j]
                    for k in idx_in:  # -B[i,k] S[k,j]
                        row[col[(k, j)]] -= B[i, k]
                    rows.append(row)
    R = np.array(rows)
    _, sv, vh = np.linalg.svd(R)
    thresh = max(R.shape) * np.finfo(float).eps * (sv[0] if len(sv) else 1.0) * svd_factor
    null_dim = int(np.sum(sv < thresh)) + (R.shape[1] - len(sv))
    basis = []
    # Rows of vh are conjugated right singular vectors: R = U diag(s) vh.
    for vec in vh[len(vh) - max(null_dim, 1):].conj():
        S = np.zeros((dim, dim), dtype=complex)
        for (i, j), c in col.items():
            S[i, j] = vec[c]
        basis.append(S)
    return basis, sv, null_dim


def _anchor_index(s1: RepSpace, s2: RepSpace) -> int:
    i1 = s1.index[(0, 0, 0, s1.M)]
    i2 = s2.index[(0, 0, 0, s2.M)]
    return i1 * s2.dim + i2


def solve_intertwiner(
    kin1: Kinematics,
    kin2: Kinematics,
    params: ModelParams,
    generators=DEFAULT_GENERATORS,
    require_unique: bool = True,
) -> SMatrix:
    """The unique intertwiner, normalized so the highest joint state
    |0,0,0,M1> (x) |0,0,0,M2> maps to itself with coefficient 1."""
    basis, sv, null_dim = intertwiner_nullspace(kin1, kin2, params, generators)
    if require_unique:
        if null_dim == 0:
            raise IntertwinerError("no intertwiner: kinematics off shell?")
        if null_dim > 1:
            raise IntertwinerError(
                f"degenerate point: null-space dimension {null_dim}"
            )
    S = basis[-1]
    s1, s2 = build_basis(kin1.M), build_basis(kin2.M)
    anchor = _anchor_index(s1, s2)
    pivot = S[anchor, anchor]
    if abs(pivot) < 1e-12:
        raise IntertwinerError("anchor matrix element vanishes; resample")
    S = S / pivot
    return SMatrix(matrix=S, kin1=kin1, kin2=kin2, null_dim=null_dim, singular_values=sv)


def intertwining_residual(S: SMatrix, params: ModelParams, generators=DEFAULT_GENERATORS) -> dict:
    """Per-generator residual ||S Delta(J) - Delta^op(J) S|| (relative)."""
    leg1 = make_leg(S.kin1, params)
    leg2 = make_leg(S.kin2, params)
    out = {}
    norm = max(1.0, float(np.linalg.norm(S.matrix)))
    for gen in list(generators) + [f"K{i}" for i in (1, 2, 3, 4)]:
        A = coproduct(gen, leg1, leg2).matrix
        B = opposite_coproduct(gen, leg1, leg2).matrix
        out[gen] = float(np.linalg.norm(S.matrix @ A - B @ S.matrix)) / norm
    return out


def s_at(
    kin1: Kinematics,
    kin2: Kinematics,
    params: ModelParams,
    reflect1: bool = False,
    reflect2: bool = False,
) -> SMatrix:
    """S for the given pair with either leg optionally reflected (z -> 1/z)."""
    k1 = reflect_kinematics(kin1, params) if reflect1 else kin1
    k2 = reflect_kinematics(kin2, params) if reflect2 else kin2
    return solve_intertwiner(k1, k2, params)


def _embed_pair(S: np.ndarray, spaces, i: int, j: int) -> np.ndarray:
    """Embed an even two-leg operator on legs (i, j) of a three-leg space.

    Adjacent legs embed by a plain Kronecker product (the operator is even);
    legs (0, 2) are conjugated through the graded permutation of legs 1, 2.
    """
    dims = [s.dim for s in spaces]
    if (i, j) == (0, 1):
        return np.kron(S, np.eye(dims[2]))
    if (i, j) == (1, 2):
        return np.kron(np.eye(dims[0]), S)
    if (i, j) == (0, 2):
        P = np.kron(np.eye(dims[0]), graded_permutation(spaces[1], spaces[2]))
        Pb = np.kron(np.eye(dims[0]), graded_permutation(spaces[2], spaces[1]))
        inner = np.kron(S, np.eye(dims[1]))  # on V1 (x) V3 (x) V2
        return Pb @ inner @ P
    raise ValueError(f"unsupported leg pair {(i, j)}")


def ybe_residual(
    kin1: Kinematics, kin2: Kinematics, kin3: Kinematics, params: ModelParams
) -> float:
    """Relative residual of S23 S13 S12 = S12 S13 S23 on V1 (x) V2 (x) V3."""
    spaces = [build_basis(k.M) for k in (kin1, kin2, kin3)]
    S12 = _embed_pair(solve_intertwiner(kin1, kin2, params).matrix, spaces, 0, 1)
    S13 = _embed_pair(solve_intertwiner(kin1, kin3, params).matrix, spaces, 0, 2)
    S23 = _embed_pair(solve_intertwiner(kin2, kin3, params).matrix, spaces, 1, 2)
    lhs = S23 @ S13 @ S12
    rhs = S12 @ S13 @ S23
    return float(
        np.linalg.norm(lhs - rhs)
        / max(1.0, np.linalg.norm(lhs), np.linalg.norm(rhs))
    )
