"""The 4M-dimensional q-oscillator bound-state representation.

States |m,n,k,l> carry two fermionic occupation numbers m, n in {0,1} and two
bosonic levels k, l >= 0 with m+n+k+l = M.  The basis is stored family-major,

    |k>^1 = |0,0,k,M-k>        k = 0..M
    |k>^2 = |1,1,k-1,M-k-1>    k = 1..M-1
    |k>^3 = |1,0,k,M-k-1>      k = 0..M-1
    |k>^4 = |0,1,k,M-k-1>      k = 0..M-1

so the reflection matrix acts block-contiguously.  Chevalley generators are
dense matrices tagged with a parity; supercharges (i = 2, 4) are odd.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics as nm
from .kinematics import Kinematics, ModelParams, affine_labels, bulk_labels
from .numerics import log, mdot, qint, rel_residual

# Symmetrized Cartan matrix DA and normalization D = diag(1,-1,-1,-1).
DA = np.array(
    [
        [2, -1, 0, -1],
        [-1, 0, 1, 0],
        [0, 1, -2, 1],
        [-1, 0, 1, 0],
    ]
)
D_DIAG = (1, -1, -1, -1)

GENERATOR_PARITY = {
    **{f"E{i}": (1 if i in (2, 4) else 0) for i in (1, 2, 3, 4)},
    **{f"F{i}": (1 if i in (2, 4) else 0) for i in (1, 2, 3, 4)},
    **{f"K{i}": 0 for i in (1, 2, 3, 4)},
}
GENERATORS = tuple(GENERATOR_PARITY)


@dataclass(frozen=True)
class RepSpace:
    """Enumerated bound-state basis for a given M."""

    M: int
    states: tuple  # tuples (m, n, k, l), family-major
    index: dict = field(repr=False)
    families: dict = field(repr=False)  # family -> list of basis indices, k ascending

    @property
    def dim(self) -> int:
        return len(self.states)

    def parity(self, i: int) -> int:
        m, n, _, _ = self.states[i]
        return (m + n) % 2

    @property
    def parities(self) -> np.ndarray:
        return np.array([self.parity(i) for i in range(self.dim)])


def build_basis(M: int) -> RepSpace:
    """Family-major basis of dimension 4M with blocks (M+1, M-1, M, M)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    states = []
    families = {}
    families[1] = []
    for k in range(M + 1):
        families[1].append(len(states))
        states.append((0, 0, k, M - k))
    families[2] = []
    for k in range(1, M):
        families[2].append(len(states))
        states.append((1, 1, k - 1, M - k - 1))
    families[3] = []
    for k in range(M):
        families[3].append(len(states))
        states.append((1, 0, k, M - k - 1))
    families[4] = []
    for k in range(M):
        families[4].append(len(states))
        states.append((0, 1, k, M - k - 1))
    index = {s: i for i, s in enumerate(states)}
    assert len(states) == 4 * M
    return RepSpace(M=M, states=tuple(states), index=index, families=families)


@dataclass(frozen=True)
class GradedOperator:
    """Dense matrix over a graded basis together with its parity."""

    matrix: np.ndarray
    parity: int
    parities: tuple  # per-state parity of the (co)domain basis

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "GradedOperator") -> "GradedOperator":
        return GradedOperator(
            mdot(self.matrix, other.matrix),
            (self.parity + other.parity) % 2,
            self.parities,
        )

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        if self.parity != other.parity:
            raise ValueError("cannot add operators of different parity")
        return GradedOperator(self.matrix + other.matrix, self.parity, self.parities)

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        if self.parity != other.parity:
            raise ValueError("cannot subtract operators of different parity")
        return GradedOperator(self.matrix - other.matrix, self.parity, self.parities)

    def __mul__(self, scalar) -> "GradedOperator":
        return GradedOperator(self.matrix * scalar, self.parity, self.parities)

    __rmul__ = __mul__

    def inv(self) -> "GradedOperator":
        if self.parity != 0:
            raise ValueError("only even operators are invertible here")
        return GradedOperator(nm.minv(self.matrix), 0, self.parities)

    def parity_pattern_residual(self) -> float:
        """Norm of entries violating the parity zero-pattern."""
        p = np.array(self.parities)
        bad = (p[:, None] + p[None, :] + self.parity) % 2 == 1
        m = nm.to_complex(self.matrix)
        return float(np.linalg.norm(np.where(bad, m, 0.0)))


def _operator(space: RepSpace, parity: int, entries, dtype=complex) -> GradedOperator:
    """Build a GradedOperator from {(row_state, col_state): coeff} entries."""
    mat = np.zeros((space.dim, space.dim), dtype=dtype)
    for (row, col), val in entries.items():
        mat[space.index[row], space.index[col]] += val
    return GradedOperator(mat, parity, tuple(space.parities))


def identity_operator(space: RepSpace, dtype=complex) -> GradedOperator:
    return GradedOperator(
        np.eye(space.dim, dtype=dtype), 0, tuple(space.parities)
    )


def _valid(state) -> bool:
    m, n, k, l = state
    return 0 <= m <= 1 and 0 <= n <= 1 and k >= 0 and l >= 0


def generator_matrix(
    gen: str,
    kin: Kinematics,
    params: ModelParams,
    space: RepSpace,
    dtype=complex,
) -> GradedOperator:
    """Matrix of one Chevalley generator E_i, F_i or K_i on the bound state.

    The affine supercharges E4, F4 use the affine labels and C -> -C; K_i is
    q^{H_i} with the diagonal H_i action, V = q^C.
    """
    if gen not in GENERATOR_PARITY:
        raise ValueError(f"unknown generator {gen!r}")
    q = params.q
    C = log(kin.V) / log(q)
    a, b, c, d = bulk_labels(kin, params)
    at, bt, ct, dt = affine_labels(kin, params)
    entries = {}
    for state in space.states:
        m, n, k, l = state
        if gen == "E1":
            tgt = (m, n, k - 1, l + 1)
            if _valid(tgt):
                entries[(tgt, state)] = qint(k, q)
        elif gen == "F1":
            tgt = (m, n, k + 1, l - 1)
            if _valid(tgt):
                entries[(tgt, state)] = qint(l, q)
        elif gen == "E3":
            tgt = (m + 1, n - 1, k, l)
            if _valid(tgt):
                entries[(tgt, state)] = 1
        elif gen == "F3":
            tgt = (m - 1, n + 1, k, l)
            if _valid(tgt):
                entries[(tgt, state)] = 1
        elif gen in ("E2", "E4"):
            aa, bb = (a, b) if gen == "E2" else (at, bt)
            tgt = (m, n + 1, k, l - 1)
            if _valid(tgt):
                entries[(tgt, state)] = aa * (-1) ** m * qint(l, q)
            tgt = (m - 1, n, k + 1, l)
            if _valid(tgt):
                entries[(tgt, state)] = bb
        elif gen in ("F2", "F4"):
            cc, dd = (c, d) if gen == "F2" else (ct, dt)
            tgt = (m + 1, n, k - 1, l)
            if _valid(tgt):
                entries[(tgt, state)] = cc * qint(k, q)
            tgt = (m, n - 1, k, l + 1)
            if _valid(tgt):
                entries[(tgt, state)] = dd * (-1) ** m
        else:  # K_i = q^{H_i}
            i = int(gen[1])
            if i == 1:
                h = l - k
            elif i == 3:
                h = n - m
            elif i == 2:
                h = -(C - (k - l + m - n) / 2)
            else:
                h = C + (k - l + m - n) / 2
            entries[(state, state)] = q**h
    return _operator(space, GENERATOR_PARITY[gen], entries, dtype=dtype)


def all_generators(kin, params, space, dtype=complex) -> dict:
    return {g: generator_matrix(g, kin, params, space, dtype=dtype) for g in GENERATORS}


def graded_commutator(A: GradedOperator, B: GradedOperator) -> GradedOperator:
    """[A, B} = AB - (-1)^{|A||B|} BA."""
    sign = (-1) ** (A.parity * B.parity)
    return GradedOperator(
        mdot(A.matrix, B.matrix) - sign * mdot(B.matrix, A.matrix),
        (A.parity + B.parity) % 2,
        A.parities,
    )


def composite_charge(word: str, ops: dict) -> GradedOperator:
    """Nested graded commutator from a word such as "E321" or "F41".

    "E321" means [E3, [E2, E1]]; a single index returns the generator itself.
    ``ops`` maps generator names to matrices (representation or coproduct).
    """
    kind, idx = word[0], [int(ch) for ch in word[1:]]
    if kind not in ("E", "F") or not idx:
        raise ValueError(f"malformed charge word {word!r}")
    out = ops[f"{kind}{idx[-1]}"]
    for i in reversed(idx[:-1]):
        out = graded_commutator(ops[f"{kind}{i}"], out)
    return out


def quartic_serre_lhs(kind: str, k: int, ops: dict) -> GradedOperator:
    """{[X1, Xk], [X3, Xk]} - (q - 2 + 1/q) Xk X1 X3 Xk for X in {E, F}.

    The q-scalar has to be supplied by the caller via ``ops['qserre']``
    (a plain number), keeping this function representation-agnostic.
    """
    x1, x3, xk = ops[f"{kind}1"], ops[f"{kind}3"], ops[f"{kind}{k}"]
    lam = ops["qserre"]
    t1 = graded_commutator(
        graded_commutator(x1, xk), graded_commutator(x3, xk)
    )
    t2 = xk @ x1 @ x3 @ xk
    return t1 - lam * t2


def central_charge_matrix(which: int, ops: dict) -> GradedOperator:
    """C1 = K1 K2^2 K3; C2, C3 are the quartic supercharge combinations."""
    if which == 1:
        return ops["K1"] @ ops["K2"] @ ops["K2"] @ ops["K3"]
    kind = "E" if which == 2 else "F"
    x1, x2, x3 = ops[f"{kind}1"], ops[f"{kind}2"], ops[f"{kind}3"]
    lam = ops["qserre"]
    t1 = graded_commutator(
        graded_commutator(x2, x1), graded_commutator(x2, x3)
    )
    return t1 - lam * (x2 @ x1 @ x3 @ x2)


def verify_algebra(
    kin: Kinematics,
    params: ModelParams,
    space: RepSpace,
    tol: float = nm.TOL_ALGEBRA,
    dtype=complex,
) -> dict:
    """Residuals of every defining relation of the algebra on this module.

    Returns a dict name -> Frobenius-relative residual; the caller compares
    against the tolerance tier.
    """
    q = params.q
    _, g_tilde = nm_derive(params)
    alpha, at = params.alpha, params.alpha_tilde
    g = params.g
    ops = all_generators(kin, params, space, dtype=dtype)
    ops["qserre"] = q - 2 + 1 / q
    ident = identity_operator(space, dtype=dtype)
    U, V = kin.U, kin.V
    res = {}

    def put(name, L, R):
        res[name] = rel_residual(L.matrix if hasattr(L, "matrix") else L,
                                 R.matrix if hasattr(R, "matrix") else R)

    # Cartan relations K_i X_j K_i^-1 = q^{±DA_ij} X_j.
    for i in range(1, 5):
        Ki = ops[f"K{i}"]
        Ki_inv = Ki.inv()
        for j in range(1, 5):
            daij = DA[i - 1][j - 1]
            put(f"K{i}E{j}", Ki @ ops[f"E{j}"] @ Ki_inv, q**daij * ops[f"E{j}"])
            put(f"K{i}F{j}", Ki @ ops[f"F{j}"] @ Ki_inv, q**-daij * ops[f"F{j}"])

    # Diagonal and off-diagonal [E_i, F_j} relations.
    for j in range(1, 5):
        lhs = graded_commutator(ops[f"E{j}"], ops[f"F{j}"])
        rhs = (D_DIAG[j - 1] / (q - 1 / q)) * (ops[f"K{j}"] - ops[f"K{j}"].inv())
        put(f"E{j}F{j}", lhs, rhs)
    for i in range(1, 5):
        for j in range(1, 5):
            if i != j and i + j != 6:
                lhs = graded_commutator(ops[f"E{i}"], ops[f"F{j}"])
                put(f"E{i}F{j}", lhs, 0 * lhs)

    # Mixed affine relations with g_tilde and alpha_tilde.
    put(
        "E2F4",
        graded_commutator(ops["E2"], ops["F4"]),
        (-g_tilde / at) * (ops["K4"] - (U**2) * ops["K2"].inv()),
    )
    put(
        "E4F2",
        graded_commutator(ops["E4"], ops["F2"]),
        (g_tilde * at) * (ops["K2"] - (U**-2) * ops["K4"].inv()),
    )

    # Cubic Serre relations and the vanishing quadratics.
    lam = ops["qserre"]
    for kind in ("E", "F"):
        for j in (1, 3):
            for k in (2, 4):
                xj, xk = ops[f"{kind}{j}"], ops[f"{kind}{k}"]
                lhs = graded_commutator(xj, graded_commutator(xj, xk)) - lam * (
                    xj @ xk @ xj
                )
                put(f"serre_{kind}{j}{k}", lhs, 0 * lhs)
        x1, x2, x3, x4 = (ops[f"{kind}{i}"] for i in (1, 2, 3, 4))
        put(f"{kind}1{kind}3", graded_commutator(x1, x3), 0 * x1)
        put(f"{kind}2{kind}2", x2 @ x2, 0 * ident)
        put(f"{kind}4{kind}4", x4 @ x4, 0 * ident)
        put(f"{kind}2{kind}4", graded_commutator(x2, x4), 0 * ident)

    # Quartic Serre relations with central right-hand sides (k = 2, 4).
    for k, (uk, vk, ak) in {
        2: (U, V, alpha),
        4: (1 / U, 1 / V, alpha * at * at),
    }.items():
        put(
            f"quartic_E{k}",
            quartic_serre_lhs("E", k, ops),
            (g * ak * (1 - vk**2 * uk**2)) * ident,
        )
        put(
            f"quartic_F{k}",
            quartic_serre_lhs("F", k, ops),
            (g / ak * (vk**-2 - uk**-2)) * ident,
        )

    # Central charges: scalar values and centrality.
    c1 = central_charge_matrix(1, ops)
    c2 = central_charge_matrix(2, ops)
    c3 = central_charge_matrix(3, ops)
    put("C1_scalar", c1, (V**-2) * ident)
    put("C2_scalar", c2, (g * alpha * (1 - U**2 * V**2)) * ident)
    put("C3_scalar", c3, (g / alpha * (V**-2 - U**-2)) * ident)
    for name, cc in (("C1", c1), ("C2", c2), ("C3", c3)):
        worst = 0.0
        for gname in GENERATORS:
            lhs = graded_commutator(cc, ops[gname])
            worst = max(worst, rel_residual(lhs.matrix, 0 * lhs.matrix))
        res[f"{name}_central"] = worst

    # K constraints.
    put("K1K2K3K4", ops["K1"] @ ops["K2"] @ ops["K3"] @ ops["K4"], ident)
    put("V2_constraint", (ops["K1"] @ ops["K2"] @ ops["K2"] @ ops["K3"]).inv(), (V**2) * ident)
    put("V4_constraint", (ops["K1"] @ ops["K4"] @ ops["K4"] @ ops["K3"]).inv(), (V**-2) * ident)

    # Parity zero-patterns.
    res["parity_pattern"] = max(
        ops[gname].parity_pattern_residual() for gname in GENERATORS
    )
    return res


def nm_derive(params: ModelParams):
    from .kinematics import derive_couplings

    return derive_couplings(params.q, params.g)
