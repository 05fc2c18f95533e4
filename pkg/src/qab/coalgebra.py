"""Graded tensor calculus, coproducts and the twisted coideal boundary charges.

The tensor product of graded operators carries the Koszul sign
(A (x) B)(v (x) w) = (-1)^{|B||v|} (Av) (x) (Bw); this is the unique sign
convention under which the (sign-free) coproduct displays become algebra
homomorphisms in the representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics as nm
from .kinematics import (
    Kinematics,
    ModelParams,
    reflect_kinematics,
)
from .numerics import mdot, qint, rel_residual
from .representation import (
    GENERATORS,
    GradedOperator,
    RepSpace,
    all_generators,
    build_basis,
    graded_commutator,
    identity_operator,
)


@dataclass(frozen=True)
class BoundaryRep:
    """The one-dimensional boundary singlet.

    All E_i, F_i act as zero; all K_i and the central elements U, V act as 1.
    Implemented as an ordinary leg so every coproduct code path is reused
    unchanged for boundary legs.
    """

    @property
    def dim(self) -> int:
        return 1

    @property
    def parities(self):
        return np.array([0])


BOUNDARY_KIN = Kinematics(M=0, x_plus=1, x_minus=1, U=1, V=1, z=1, gamma=1)


def boundary_generators(dtype=complex) -> dict:
    one = np.ones((1, 1), dtype=dtype)
    zero = np.zeros((1, 1), dtype=dtype)
    out = {}
    for g in GENERATORS:
        if g.startswith("K"):
            out[g] = GradedOperator(one.copy(), 0, (0,))
        else:
            parity = 1 if g[1] in "24" else 0
            out[g] = GradedOperator(zero.copy(), parity, (0,))
    return out


@dataclass(frozen=True)
class TensorSpace:
    """Ordered tensor product of representation legs."""

    factors: tuple  # RepSpace or BoundaryRep instances

    @property
    def dim(self) -> int:
        d = 1
        for f in self.factors:
            d *= f.dim
        return d

    @property
    def parities(self) -> np.ndarray:
        p = np.zeros(1, dtype=int)
        for f in self.factors:
            p = (p[:, None] + np.asarray(f.parities)[None, :]).reshape(-1)
        return p % 2


def graded_tensor(
    A: GradedOperator, B: GradedOperator, space1, space2
) -> GradedOperator:
    """A (x) B with the Koszul sign applied against the first-leg input parity."""
    p1 = np.asarray(space1.parities)
    if A.matrix.shape[0] != len(p1) or B.matrix.shape[0] != len(space2.parities):
        raise ValueError("operator/space dimension mismatch")
    sign = np.where((p1 * B.parity) % 2 == 1, -1.0, 1.0)
    left = A.matrix * sign[None, :]  # column j1 picks up (-1)^{|B| p(j1)}
    mat = np.kron(left, B.matrix)
    joint = TensorSpace((space1, space2))
    return GradedOperator(mat, (A.parity + B.parity) % 2, tuple(joint.parities))


def graded_permutation(space1, space2) -> np.ndarray:
    """Matrix of P(v (x) w) = (-1)^{|v||w|} w (x) v from V1 (x) V2 to V2 (x) V1."""
    d1, d2 = space1.dim, space2.dim
    p1 = np.asarray(space1.parities)
    p2 = np.asarray(space2.parities)
    P = np.zeros((d2 * d1, d1 * d2))
    for i in range(d1):
        for j in range(d2):
            P[j * d1 + i, i * d2 + j] = (-1.0) ** (p1[i] * p2[j])
    return P


class _Leg:
    """One coproduct leg: generator matrices plus the central scalars."""

    def __init__(self, kin, params, space, gens=None):
        self.kin = kin
        self.space = space
        if gens is not None:
            self.gens = gens
        elif isinstance(space, BoundaryRep):
            self.gens = boundary_generators()
        else:
            self.gens = all_generators(kin, params, space)
        self.U = kin.U

    def op(self, name):
        return self.gens[name]

    def ident(self):
        if isinstance(self.space, BoundaryRep):
            return GradedOperator(np.eye(1, dtype=complex), 0, (0,))
        return identity_operator(self.space)


def make_leg(kin, params, space=None) -> _Leg:
    if space is None:
        space = build_basis(kin.M) if kin.M >= 1 else BoundaryRep()
    return _Leg(kin, params, space)


def _u_power(gen: str) -> int:
    """Exponent of the first-leg central U in the standard coproduct tail."""
    i = int(gen[1])
    return (1 if i == 2 else 0) + (-1 if i == 4 else 0)


def coproduct(gen: str, leg1: _Leg, leg2: _Leg) -> GradedOperator:
    """Standard coproduct Delta(J) as a matrix on V1 (x) V2.

    Delta(E_j) = E_j (x) 1 + K_j^-1 U^{d_j} (x) E_j and
    Delta(F_j) = F_j (x) K_j + U^{-d_j} (x) F_j with d_j = delta_{j,2} - delta_{j,4}
    (the representation fixes U_2 = U, U_4 = 1/U); Delta(K_j) = K_j (x) K_j.
    """
    s1, s2 = leg1.space, leg2.space
    if gen.startswith("K"):
        return graded_tensor(leg1.op(gen), leg2.op(gen), s1, s2)
    u = leg1.U ** _u_power(gen)
    if gen.startswith("E"):
        k_inv = leg1.op("K" + gen[1]).inv()
        return graded_tensor(leg1.op(gen), leg2.ident(), s1, s2) + graded_tensor(
            u * k_inv, leg2.op(gen), s1, s2
        )
    return graded_tensor(leg1.op(gen), leg2.op("K" + gen[1]), s1, s2) + graded_tensor(
        (1 / u) * leg1.ident(), leg2.op(gen), s1, s2
    )


def coproduct_map(leg1: _Leg, leg2: _Leg) -> dict:
    """All generators' coproduct matrices (an algebra homomorphism's image)."""
    return {g: coproduct(g, leg1, leg2) for g in GENERATORS}


def opposite_coproduct(gen: str, leg1: _Leg, leg2: _Leg) -> GradedOperator:
    """Delta^op = P o Delta o P with the graded permutation and swapped legs."""
    P = graded_permutation(leg1.space, leg2.space)
    d21 = coproduct(gen, leg2, leg1)
    Pb = graded_permutation(leg2.space, leg1.space)
    joint = TensorSpace((leg1.space, leg2.space))
    return GradedOperator(
        mdot(Pb, mdot(d21.matrix, P)), d21.parity, tuple(joint.parities)
    )


def reflected_coproduct(gen: str, leg1_in: _Leg, leg2: _Leg, params: ModelParams) -> GradedOperator:
    """Reflected coproduct with the first leg carrying the reflected labels.

    Delta^ref(E_j) = E_j (x) 1 + K_j^-1 U^{-delta_{j,2}-delta_{j,4}} (x) E_j and
    Delta^ref(F_j) = F_j (x) K_j + U^{+delta_{j,2}+delta_{j,4}} (x) F_j, where the
    first-leg operators are built from the reflected kinematics and U is the
    incoming deformation parameter.
    """
    rleg = make_leg(reflect_kinematics(leg1_in.kin, params), params, leg1_in.space)
    s1, s2 = rleg.space, leg2.space
    if gen.startswith("K"):
        # Reflected K_i equals the incoming K_i.
        return graded_tensor(rleg.op(gen), leg2.op(gen), s1, s2)
    j = int(gen[1])
    dsum = (1 if j == 2 else 0) + (1 if j == 4 else 0)
    u = leg1_in.kin.U ** (-dsum)
    if gen.startswith("E"):
        k_inv = rleg.op("K" + gen[1]).inv()
        return graded_tensor(rleg.op(gen), leg2.ident(), s1, s2) + graded_tensor(
            u * k_inv, leg2.op(gen), s1, s2
        )
    return graded_tensor(rleg.op(gen), leg2.op("K" + gen[1]), s1, s2) + graded_tensor(
        (1 / u) * rleg.ident(), leg2.op(gen), s1, s2
    )


def reflected_coproduct_map(leg1_in: _Leg, leg2: _Leg, params: ModelParams) -> dict:
    return {g: reflected_coproduct(g, leg1_in, leg2, params) for g in GENERATORS}


# ---------------------------------------------------------------------------
# Adjoint actions (Letzter dictionary: x_i = E_i, y_i = F_i, t_i = K_i).


def adjoint_action(side: str, gen: str, b: GradedOperator, ops: dict) -> GradedOperator:
    """Left (``ad``) or right (``ad_r``) twisted adjoint action of one generator.

    ad_r x_i (b) = t_i b x_i - (-1)^{[i][b]} t_i x_i b
    ad_r y_i (b) = b y_i - (-1)^{[i][b]} y_i t_i^-1 b t_i
    ad_r t_i (b) = t_i b t_i^-1     (left versions analogous)
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    kind, i = gen[0], gen[1]
    t = ops[f"K{i}"]
    t_inv = t.inv()
    if kind == "K":
        return (t_inv @ b @ t) if side == "left" else (t @ b @ t_inv)
    x = ops[gen]
    sign = (-1) ** (x.parity * b.parity)
    if kind == "E":
        if side == "right":
            out = t @ b @ x - sign * (t @ x @ b)
        else:
            out = x @ b - sign * (t_inv @ b @ t @ x)
    else:
        if side == "right":
            out = b @ x - sign * (x @ t_inv @ b @ t)
        else:
            out = x @ b @ t_inv - sign * (b @ x @ t_inv)
    return out


def ad_r(gen: str, b: GradedOperator, ops: dict) -> GradedOperator:
    return adjoint_action("right", gen, b, ops)


def boundary_d_constants(params: ModelParams):
    """(d_y, d_x) fixed by invariance of the twisted central charges."""
    _, g_tilde = _couplings(params)
    a, at = params.alpha, params.alpha_tilde
    d_y = g_tilde / (params.g * a * at)
    d_x = -a * at * g_tilde / params.g
    return d_y, d_x


def _couplings(params):
    from .kinematics import derive_couplings

    return derive_couplings(params.q, params.g)


TWISTED_CHARGES = ("Et321", "Ft321", "Et21", "Ft21", "Et1", "Ft1", "Ct2", "Ct3")


def twisted_boundary_charges(ops: dict, params: ModelParams) -> dict:
    """The eight twisted affine charges of the boundary coideal algebra.

    ``ops`` maps generator names to matrices; passing representation matrices
    yields the charges on one leg, passing coproduct matrices yields their
    images on a tensor product.
    """
    d_y, d_x = boundary_d_constants(params)
    e1p = ops["K1"] @ ops["E1"]
    e4p = ops["K4"] @ ops["E4"]
    k4_inv = ops["K4"].inv()
    theta_f4 = ad_r("E3", ad_r("E2", e1p, ops), ops)
    theta_e4p = ad_r("F3", ad_r("F2", ops["F1"], ops), ops)
    et321 = ops["F4"] @ k4_inv + d_y * (theta_f4 @ k4_inv)
    ft321 = e4p @ k4_inv + d_x * (theta_e4p @ k4_inv)
    out = {
        "Et321": et321,
        "Ft321": ft321,
        "Et21": ad_r("F3", et321, ops),
        "Ft21": ad_r("E3", ft321, ops),
        "Et1": ad_r("F2", ad_r("F3", et321, ops), ops),
        "Ft1": ad_r("E2", ad_r("E3", ft321, ops), ops),
        "Ct2": ad_r("E2", et321, ops),
        "Ct3": ad_r("F2", ft321, ops),
    }
    return out


def coideal_expansion_check(
    kin1: Kinematics, kin2: Kinematics, params: ModelParams
) -> dict:
    """Residuals of the two displayed coproduct expansions of the twisted
    level-one charges, as matrix identities on V1 (x) V2."""
    leg1 = make_leg(kin1, params)
    leg2 = make_leg(kin2, params)
    s1, s2 = leg1.space, leg2.space
    dmap = coproduct_map(leg1, leg2)
    d_y, d_x = boundary_d_constants(params)
    q = params.q
    U1 = kin1.U

    # Left-hand sides: the twisted charges built from coproduct images.
    tw_joint = twisted_boundary_charges(dmap, params)
    # Single-leg building blocks.
    o1 = leg1.gens
    o2 = leg2.gens
    tw2 = twisted_boundary_charges(o2, params)
    k4i_1 = o1["K4"].inv()
    k5_2 = o2["K1"] @ o2["K2"] @ o2["K3"] @ o2["K4"].inv()
    e1p_1 = o1["K1"] @ o1["E1"]
    e2p_2 = o2["K2"] @ o2["E2"]

    def gt(Aop, Bop):
        return graded_tensor(Aop, Bop, s1, s2)

    theta_f4_1 = ad_r("E3", ad_r("E2", e1p_1, o1), o1)
    rhs_e = (
        gt(o1["F4"] @ k4i_1, leg2.ident())
        + gt(U1 * k4i_1, tw2["Et321"])
        + d_y * gt(theta_f4_1 @ k4i_1, k5_2)
        + (d_y * (q**2 - 1))
        * (
            (1 / q) * gt(k4i_1 @ ad_r("E2", e1p_1, o1), k5_2 @ o2["E3"])
            - U1 * gt(e1p_1 @ k4i_1, o2["K1"] @ o2["K4"].inv() @ ad_r("E3", e2p_2, o2))
        )
    )

    theta_e4p_1 = ad_r("F3", ad_r("F2", o1["F1"], o1), o1)
    e4p_1 = o1["K4"] @ o1["E4"]
    rhs_f = (
        gt(e4p_1 @ k4i_1, leg2.ident())
        + gt((1 / U1) * k4i_1, tw2["Ft321"])
        + d_x * gt(theta_e4p_1 @ k4i_1, k5_2)
        - (d_x * (q**2 - 1))
        * (
            gt(k4i_1 @ ad_r("F2", o1["F1"], o1), o2["K3"].inv() @ k5_2 @ o2["F3"])
            - (1 / U1)
            * gt(k4i_1 @ o1["F1"], ad_r("F3", o2["F2"], o2) @ o2["K1"] @ o2["K4"].inv())
        )
    )

    return {
        "coideal_E321": rel_residual(tw_joint["Et321"].matrix, rhs_e.matrix),
        "coideal_F321": rel_residual(tw_joint["Ft321"].matrix, rhs_f.matrix),
    }


def twisted_f1_action_residual(kin: Kinematics, params: ModelParams) -> float:
    """Residual of the raising action of the twisted charge on |k>^{3,4}:
    Ft1 |k>^a = d_x [M-k-1]_q q^{-M/2-k-1} (q^M - q^{2k+2} z) V^-1 |k+1>^a.
    """
    space = build_basis(kin.M)
    ops = all_generators(kin, params, space)
    tw = twisted_boundary_charges(ops, params)
    q, M = params.q, kin.M
    _, d_x = boundary_d_constants(params)
    expected = np.zeros((space.dim, space.dim), dtype=complex)
    for fam in (3, 4):
        idx = space.families[fam]
        for k in range(M - 1):
            f_k = (
                d_x
                * qint(M - k - 1, q)
                * q ** (-M / 2 - k - 1)
                * (q**M - q ** (2 * k + 2) * kin.z)
                / kin.V
            )
            expected[idx[k + 1], idx[k]] = f_k
    actual = tw["Ft1"].matrix.copy()
    rows = [i for fam in (3, 4) for i in space.families[fam]]
    cols = rows
    return rel_residual(actual[np.ix_(rows, cols)], expected[np.ix_(rows, cols)])


def twisted_central_invariance(kin: Kinematics, params: ModelParams) -> dict:
    """Reflection invariance of the twisted central charges.

    On the representation Ct2 and Ct3 come out diagonal (they carry an H_2
    admixture, visible in their rational limit) and are invariant entrywise
    under the reflection map; both residuals are reported per charge.
    """
    space = build_basis(kin.M)
    ops = all_generators(kin, params, space)
    tw = twisted_boundary_charges(ops, params)
    rops = all_generators(reflect_kinematics(kin, params), params, space)
    tw_r = twisted_boundary_charges(rops, params)
    out = {}
    for name in ("Ct2", "Ct3"):
        m = tw[name].matrix
        off_diag = rel_residual(m, np.diag(np.diag(m)))
        invariance = rel_residual(m, tw_r[name].matrix)
        out[name] = {"off_diagonal": off_diag, "reflection_invariance": invariance}
    return out


def yangian_limit_probe(
    q_values,
    x_minus,
    M: int,
    g,
    params_template: ModelParams | None = None,
    alpha=1j,
    alpha_tilde=1.0 + 0j,
):
    """Convergence table of the rescaled twisted charges along q -> 1.

    The kinematic point is held at fixed x-; x+ is re-solved from the
    shortening condition at every q (tracking the root continuously).
    Charges Et321, Et21, Et1, Ct2 are rescaled by alpha*alpha_tilde/(2(q-1)),
    their F partners by 1/(2 alpha alpha_tilde (q-1)).
    """
    from .kinematics import make_kinematics, solve_shortening

    rescale_e = lambda q: alpha * alpha_tilde / (2 * (q - 1))
    rescale_f = lambda q: 1 / (2 * alpha * alpha_tilde * (q - 1))
    matrices = {name: [] for name in TWISTED_CHARGES}
    prev_root = None
    for q in q_values:
        params = ModelParams(q=q, g=g, alpha=alpha, alpha_tilde=alpha_tilde)
        roots = solve_shortening(x_minus, M, params)
        if prev_root is None:
            root = max(roots, key=abs)
        else:
            root = min(roots, key=lambda r: abs(r - prev_root))
        prev_root = root
        kin = make_kinematics(M, root, x_minus, params)
        space = build_basis(M)
        ops = all_generators(kin, params, space)
        tw = twisted_boundary_charges(ops, params)
        for name in TWISTED_CHARGES:
            scale = rescale_e(q) if name.startswith(("Et", "Ct2")) else rescale_f(q)
            matrices[name].append(scale * tw[name].matrix)
    table = {}
    for name, mats in matrices.items():
        diffs = [
            float(np.linalg.norm(mats[i + 1] - mats[i])) for i in range(len(mats) - 1)
        ]
        norms = [float(np.linalg.norm(m)) for m in mats]
        ratios = [
            diffs[i + 1] / diffs[i] if diffs[i] > 0 else 0.0
            for i in range(len(diffs) - 1)
        ]
        table[name] = {
            "norms": norms,
            "diffs": diffs,
            "ratios": ratios,
            "limit": mats[-1],
        }
    return table


def hom_check(leg1: _Leg, leg2: _Leg, dmap: dict, params: ModelParams) -> dict:
    """Residuals showing the coproduct map is an algebra homomorphism on the
    diagonal [E_j, F_j} relations."""
    q = params.q
    out = {}
    for j in range(1, 5):
        lhs = graded_commutator(dmap[f"E{j}"], dmap[f"F{j}"])
        djj = 1 if j == 1 else -1
        rhs = (djj / (q - 1 / q)) * (dmap[f"K{j}"] - dmap[f"K{j}"].inv())
        out[f"E{j}F{j}"] = rel_residual(lhs.matrix, rhs.matrix)
    return out
