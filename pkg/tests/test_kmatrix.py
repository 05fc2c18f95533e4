"""Reflection matrices: closed form vs intertwiner, invariance, unitarity,
the reflection equation, coefficient symmetries and the rational limit."""

import cmath

import numpy as np
import pytest

from qab.kinematics import ModelParams, make_kinematics, reflect_kinematics, solve_shortening
from qab.kmatrix import (
    boundary_nullspace_dimension,
    boundary_ybe_residual,
    c_coefficients,
    ck_symmetry_residual,
    closed_form_kmatrix,
    compare_kmatrices,
    fundamental_kmatrix,
    invariance_residual,
    rational_limit_kmatrix,
    rational_shortening_residual,
    rational_u,
    solve_boundary_intertwiner,
    unitarity_residual,
)
from qab.numerics import TOL_ALGEBRA, TOL_COMPOSITE, TOL_INTERTWINER

from conftest import kin_at


@pytest.fixture(scope="module")
def gpoints(params_gammas):
    return {
        M: kin_at(M, xm, params_gammas)
        for M, xm in [(1, 1.3 + 0.8j), (2, 0.9 - 1.1j), (3, 1.1 + 0.9j), (4, 1.4 + 0.6j)]
    }


def test_c_coefficient_ratio(gpoints, params_gammas):
    kin = gpoints[3]
    q, z, M = params_gammas.q, kin.z, 3
    C = c_coefficients(kin, params_gammas)
    for k in (1, 2):
        want = (q**M - q ** (2 * k) / z) / (q**M - q ** (2 * k) * z)
        assert abs(C[k] / C[k - 1] - want) < 1e-12
    assert abs(C[0] - params_gammas.gamma_bar / params_gammas.gamma) < 1e-14


def test_c_ratios_match_intertwiner_solution(gpoints, params_gammas):
    # null-space oracle: the solver's fermionic diagonal reproduces the ratios
    kin = gpoints[3]
    C = c_coefficients(kin, params_gammas)
    Ks = solve_boundary_intertwiner(kin, params_gammas)
    for k in (1, 2):
        assert abs(Ks.C[k] / Ks.C[k - 1] - C[k] / C[k - 1]) < 1e-10


@pytest.mark.parametrize("M", [1, 2, 3])
def test_closed_form_boundary_values(M, gpoints, params_gammas):
    K = closed_form_kmatrix(gpoints[M], params_gammas)
    kin = gpoints[M]
    assert abs(K.A[0] - 1) < 1e-12
    assert abs(K.D[0]) < 1e-12 and abs(K.D[M]) < 1e-12
    # A_M = -gamma C_{M-1} / (z U^2 gamma_bar)
    want = -K.gamma * K.C[M - 1] / (kin.z * kin.U**2 * K.gamma_bar)
    assert abs(K.A[M] - want) < 1e-11


def test_label_and_explicit_forms_cross_checked(gpoints, params_gammas):
    # closed_form_kmatrix raises if Eq-level and x-level coefficients differ;
    # reaching here means the two independent evaluations agreed
    closed_form_kmatrix(gpoints[3], params_gammas, tol=1e-10)


def test_fundamental_matches_general_form(gpoints, params_gammas):
    K1 = fundamental_kmatrix(gpoints[1], params_gammas)
    Kg = closed_form_kmatrix(gpoints[1], params_gammas)
    assert compare_kmatrices(K1, Kg) < 1e-12
    kin = gpoints[1]
    assert abs(K1.A[1] / K1.A[0] + 1 / (kin.z * kin.U**2)) < 1e-12


@pytest.mark.parametrize("M", [1, 2, 3])
def test_intertwiner_matches_closed_form(M, gpoints, params_gammas):
    K = closed_form_kmatrix(gpoints[M], params_gammas)
    Ks = solve_boundary_intertwiner(gpoints[M], params_gammas)
    assert Ks.null_dim == 1
    assert compare_kmatrices(K, Ks) < TOL_INTERTWINER


@pytest.mark.parametrize("M", [2, 3])
def test_twisted_charge_ablation(M, gpoints, params_gammas):
    nd = boundary_nullspace_dimension(gpoints[M], params_gammas, include_twisted=False)
    assert nd >= 2
    nd_full = boundary_nullspace_dimension(gpoints[M], params_gammas, include_twisted=True)
    assert nd_full == 1


@pytest.mark.parametrize("M", [1, 2, 3])
def test_invariance_under_all_boundary_charges(M, gpoints, params_gammas):
    K = closed_form_kmatrix(gpoints[M], params_gammas)
    res = invariance_residual(K, params_gammas)
    assert max(res.values()) < TOL_INTERTWINER, res


def test_cartan_charges_exactly_block_diagonal(gpoints, params_gammas):
    K = closed_form_kmatrix(gpoints[2], params_gammas)
    res = invariance_residual(K, params_gammas, charges=["K1", "K2", "K3", "K4"])
    assert max(res.values()) < 1e-14


def test_broken_charge_negative_control(gpoints, params_gammas):
    K = closed_form_kmatrix(gpoints[2], params_gammas)
    res = invariance_residual(K, params_gammas, charges=["E1"])
    assert res["E1"] > 0.1


@pytest.mark.parametrize("M", [1, 2, 3])
def test_unitarity(M, gpoints, params_gammas):
    assert unitarity_residual(gpoints[M], params_gammas) < TOL_INTERTWINER


def test_fermionic_unitarity_telescopes(gpoints, params_gammas):
    # C_k(p) C_k(-p) = 1: the Ck2 product telescopes under z -> 1/z
    kin = gpoints[3]
    C = c_coefficients(kin, params_gammas)
    Cr = c_coefficients(reflect_kinematics(kin, params_gammas), params_gammas)
    for k in range(3):
        assert abs(C[k] * Cr[k] - 1) < 1e-12


@pytest.mark.parametrize("M", [2, 3, 4])
def test_ck_covariance(M, gpoints, params_gammas):
    res = ck_symmetry_residual(gpoints[M], params_gammas)
    assert res.max() < TOL_ALGEBRA


def test_ck_covariance_explicit_m2(gpoints, params_gammas):
    kin = gpoints[2]
    C = c_coefficients(kin, params_gammas)
    # M = 2, k = 0: z^0 C_0 = -z C_1
    assert abs(C[0] + kin.z * C[1]) < 1e-12


@pytest.mark.parametrize(
    "pair", [((1, 1.3 + 0.8j), (1, 0.9 - 1.1j)),
             ((2, 0.9 - 1.1j), (1, 1.3 + 0.8j)),
             ((1, 1.3 + 0.8j), (2, 1.4 + 0.5j)),
             ((2, 0.9 - 1.1j), (2, 1.4 + 0.5j))],
    ids=["11", "21", "12", "22"],
)
def test_reflection_equation(pair, params_gammas):
    kin1 = kin_at(pair[0][0], pair[0][1], params_gammas)
    kin2 = kin_at(pair[1][0], pair[1][1], params_gammas)
    assert boundary_ybe_residual(kin1, kin2, params_gammas) < TOL_COMPOSITE


def test_trivial_ck_fails_reflection_equation(params_gammas):
    kin1 = kin_at(2, 0.9 - 1.1j, params_gammas)
    kin2 = kin_at(1, 1.3 + 0.8j, params_gammas)
    res = boundary_ybe_residual(kin1, kin2, params_gammas, trivial_c=True)
    assert res > 1e-2


def _rational_pair(xm, M, g):
    s = xm + 1 / xm + 1j * M / g
    return (s + cmath.sqrt(s * s - 4)) / 2, xm


def test_rational_u_matches_closed_form():
    g, M = 0.4, 2
    xp, xm = _rational_pair(1.2 - 0.7j, M, g)
    u = rational_u(xp, xm, M, g)
    # closed form of the scaling limit, derived independently
    want = xp + 1 / xp - 1j * M / (2 * g)
    assert abs(u - want) < 1e-6
    assert rational_shortening_residual(xp, xm, M, g) < 1e-12


def test_rational_coefficients_limit_of_deformed():
    g, M = 0.4, 2
    xp, xm = _rational_pair(1.2 - 0.7j, M, g)
    gam = cmath.sqrt(1j * (xm - xp))
    Kr = rational_limit_kmatrix(xp, xm, g, M, gamma=gam, gamma_bar=gam)
    errs = []
    for eps in (1e-3, 1e-4):
        p = ModelParams(q=1 + eps, g=g, gamma=gam, gamma_bar=gam)
        xpq = min(solve_shortening(xm, M, p), key=lambda r: abs(r - xp))
        Kq = closed_form_kmatrix(make_kinematics(M, xpq, xm, p), p)
        err = max(
            np.abs(np.asarray(getattr(Kq, f)) - np.asarray(getattr(Kr, f))).max(initial=0.0)
            for f in "ABCDE"
        )
        errs.append(err)
        assert err < 50 * eps
    rate = np.log10(errs[0] / errs[1])
    assert abs(rate - 1) < 0.2


def test_rational_fundamental_limit():
    g = 0.4
    xp, xm = _rational_pair(1.2 - 0.7j, 1, g)
    K = rational_limit_kmatrix(xp, xm, g, 1)
    assert abs(K.A[1] / K.A[0] + xm / xp) < 1e-12


def test_rational_palla_normalization_real_structure():
    # gamma = gamma_bar = sqrt(i(x- - x+)) gives C_0 = 1
    g, M = 0.4, 3
    xp, xm = _rational_pair(1.2 - 0.7j, M, g)
    gam = cmath.sqrt(1j * (xm - xp))
    K = rational_limit_kmatrix(xp, xm, g, M, gamma=gam, gamma_bar=gam)
    assert abs(K.C[0] - 1) < 1e-12
    assert abs(K.A[0] - 1) < 1e-12


def test_rational_off_shell_rejected():
    with pytest.raises(Exception):
        rational_limit_kmatrix(2.0 + 1j, 1.2 - 0.7j, 0.4, 2)
