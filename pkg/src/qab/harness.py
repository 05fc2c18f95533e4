"""CLI, configuration, kinematics sampling and suite orchestration.

Each suite runs a batch of randomly sampled kinematic points through one
verification family (representation relations, intertwiners, Yang-Baxter,
boundary checks, limits) and produces a machine-readable report in which
every residual is paired with the tolerance it was judged against.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from itertools import product

import numpy as np

from . import __version__, numerics as nm
from . import coalgebra, kmatrix, smatrix
from .coalgebra import make_leg, coproduct_map, opposite_coproduct
from .kinematics import (
    KinematicsError,
    ModelParams,
    derive_couplings,
    make_kinematics,
    reflect_kinematics,
    solve_shortening,
)
from .representation import build_basis, verify_algebra
from .smatrix import IntertwinerError

SCHEMA_VERSION = 1

SUITES = (
    "rep-check", "coalgebra", "smatrix", "ybe", "kmatrix",
    "bybe", "unitarity", "limits", "all",
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunConfig:
    """Validated run parameters with defaults applied."""

    q: complex = 1.1 + 0j
    g: complex = 0.4 + 0j
    alpha: complex = 1j
    alpha_tilde: complex = 1.0 + 0j
    gamma: complex = 1.0 + 0j
    gamma_bar: complex = 1.0 + 0j
    M: tuple = (1, 2)
    samples: int = 3
    seed: int = 7
    precision: str = "double"
    tolerances: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def params(self) -> ModelParams:
        return ModelParams(
            q=self.q, g=self.g, alpha=self.alpha, alpha_tilde=self.alpha_tilde,
            gamma=self.gamma, gamma_bar=self.gamma_bar,
        )

    def tol(self, tier: str) -> float:
        defaults = {
            "closed_form": nm.TOL_CLOSED_FORM,
            "algebra": nm.TOL_ALGEBRA,
            "intertwiner": nm.TOL_INTERTWINER,
            "composite": nm.TOL_COMPOSITE,
        }
        return float(self.tolerances.get(tier, defaults[tier]))


def _parse_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) for v in value)
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _complex_pair(z: complex):
    return [z.real, z.imag]


def load_config(path: str | None = None, data: dict | None = None) -> RunConfig:
    """Read a JSON config, applying defaults and validating each field."""
    if data is None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    cfg = RunConfig()
    out = {}
    for name in ("q", "g", "alpha", "alpha_tilde", "gamma", "gamma_bar"):
        if name in data:
            out[name] = _parse_complex(data[name], name)
    if "M" in data:
        M = data["M"]
        if not (isinstance(M, list) and M and all(isinstance(m, int) and m >= 1 for m in M)):
            raise ConfigError("M: expected a non-empty list of positive integers")
        out["M"] = tuple(M)
    for name in ("samples", "seed"):
        if name in data:
            if not isinstance(data[name], int) or data[name] < 0:
                raise ConfigError(f"{name}: expected a non-negative integer")
            out[name] = data[name]
    if "precision" in data:
        out["precision"] = _validate_precision(data["precision"])
    if "tolerances" in data:
        tols = data["tolerances"]
        if not isinstance(tols, dict):
            raise ConfigError("tolerances: expected an object")
        for key, val in tols.items():
            if key not in ("closed_form", "algebra", "intertwiner", "composite"):
                raise ConfigError(f"tolerances.{key}: unknown tier")
            if not isinstance(val, (int, float)) or val <= 0:
                raise ConfigError(f"tolerances.{key}: must be a positive number")
        out["tolerances"] = dict(tols)
    if "schema_version" in data and data["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version: expected {SCHEMA_VERSION}, got {data['schema_version']}"
        )
    for key, val in out.items():
        setattr(cfg, key, val)
    return cfg


def _validate_precision(text) -> str:
    if text == "double":
        return text
    if isinstance(text, str) and text.startswith("high:"):
        try:
            bits = int(text.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"precision: bad bit count in {text!r}") from None
        if bits < 64:
            raise ConfigError("precision: high-precision mantissa must be >= 64 bits")
        return text
    raise ConfigError(f"precision: expected 'double' or 'high:<bits>', got {text!r}")


def config_echo(cfg: RunConfig) -> dict:
    """JSON-safe copy of the config, complex values as [re, im]."""
    d = asdict(cfg)
    for name in ("q", "g", "alpha", "alpha_tilde", "gamma", "gamma_bar"):
        d[name] = _complex_pair(d[name])
    d["M"] = list(d["M"])
    return d


def sample_kinematics(M: int, params: ModelParams, rng, max_tries: int = 50):
    """One generic kinematic point: x- uniform on the 0.5 <= |x| <= 2 annulus
    away from the reflection-map poles, x+ solved from shortening."""
    xi, _ = derive_couplings(params.q, params.g)
    for _ in range(max_tries):
        r = np.sqrt(rng.uniform(0.25, 4.0))
        phi = rng.uniform(0.0, 2 * np.pi)
        xm = r * np.exp(1j * phi)
        try:
            roots = solve_shortening(xm, M, params)
            xp = max(roots, key=abs)
            if any(
                min(abs(x + xi), abs(xi * x + 1), abs(x)) < 1e-3
                for x in (xp, xm)
            ):
                continue
            if abs(xp - xm) < 1e-3:
                continue
            kin = make_kinematics(M, xp, xm, params)
            # keep C_k coefficients away from their poles
            if any(
                abs(params.q**M - params.q ** (2 * n) * kin.z) < 1e-3
                or abs(params.q**M - params.q ** (2 * n) / kin.z) < 1e-3
                for n in range(1, M + 1)
            ):
                continue
            return kin
        except KinematicsError:
            continue
    raise ConfigError(f"sampling exhausted after {max_tries} tries (M={M})")


def _point_rng(seed: int, index: int):
    return np.random.default_rng([seed, index])


def _check(suite, name, M, residual, threshold, invert=False, extra=None):
    residual = float(residual)
    passed = residual > threshold if invert else residual <= threshold
    row = {
        "suite": suite,
        "check": name,
        "M": list(M) if isinstance(M, (tuple, list)) else [M],
        "residual": residual,
        "threshold": float(threshold),
        "passed": bool(passed),
    }
    if invert:
        row["expected"] = "above-threshold"
    if extra:
        row.update(extra)
    return row


def _workers() -> int:
    cap = os.environ.get("QAB_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def _map_points(fn, jobs):
    """Run independent per-point jobs through the worker pool, in order."""
    if len(jobs) <= 1 or _workers() == 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        return list(pool.map(fn, jobs))


def _mp_params(params: ModelParams, bits: int) -> ModelParams:
    import mpmath

    mpmath.mp.prec = bits
    c = lambda z: mpmath.mpc(z)
    return ModelParams(
        q=c(params.q), g=c(params.g), alpha=c(params.alpha),
        alpha_tilde=c(params.alpha_tilde), gamma=c(params.gamma),
        gamma_bar=c(params.gamma_bar),
    )


def suite_rep_check(cfg: RunConfig):
    params = cfg.params()
    high = cfg.precision.startswith("high:")
    if high:
        import mpmath

        params = _mp_params(params, int(cfg.precision.split(":")[1]))
    tol = cfg.tol("algebra")

    def one(job):
        M, s = job
        rng = _point_rng(cfg.seed, M * 1000 + s)
        kin = sample_kinematics(M, cfg.params(), rng)
        if high:
            import mpmath

            # re-solve x+ at working precision so shortening holds exactly
            xm = mpmath.mpc(kin.x_minus)
            roots = solve_shortening(xm, M, params)
            xp = min(roots, key=lambda r: abs(complex(r) - kin.x_plus))
            kin = make_kinematics(M, xp, xm, params)
        space = build_basis(M)
        dtype = object if high else complex
        residuals = verify_algebra(kin, params, space, dtype=dtype)
        worst = max(residuals, key=residuals.get)
        return _check(
            "rep-check", f"defining-relations[s{s}]", M, residuals[worst], tol,
            extra={"worst_relation": worst},
        )

    jobs = [(M, s) for M in cfg.M for s in range(cfg.samples)]
    return _map_points(one, jobs)


def suite_coalgebra(cfg: RunConfig):
    params = cfg.params()
    tol = cfg.tol("algebra")
    checks = []
    pairs = [p for p in product(cfg.M, repeat=2) if max(p) <= 2][:4] or [(1, 1)]

    def one(job):
        idx, (M1, M2) = job
        rng = _point_rng(cfg.seed, 5000 + idx)
        kin1 = sample_kinematics(M1, params, rng)
        kin2 = sample_kinematics(M2, params, rng)
        rows = []
        leg1, leg2 = make_leg(kin1, params), make_leg(kin2, params)
        hom = coalgebra.hom_check(leg1, leg2, coproduct_map(leg1, leg2), params)
        rows.append(_check("coalgebra", "coproduct-homomorphism", (M1, M2), max(hom.values()), tol))
        exp = coalgebra.coideal_expansion_check(kin1, kin2, params)
        rows.append(_check("coalgebra", "coideal-expansion", (M1, M2), max(exp.values()), tol))
        rows.append(_check(
            "coalgebra", "twisted-F1-raising", M1,
            coalgebra.twisted_f1_action_residual(kin1, params), tol,
        ))
        inv = coalgebra.twisted_central_invariance(kin1, params)
        worst = max(v for d in inv.values() for v in d.values())
        rows.append(_check("coalgebra", "twisted-central-invariance", M1, worst, tol))
        return rows

    for rows in _map_points(one, list(enumerate(pairs))):
        checks.extend(rows)
    return checks


def suite_smatrix(cfg: RunConfig):
    params = cfg.params()
    tol = cfg.tol("algebra")
    pairs = list(product(cfg.M, repeat=2))

    def one(job):
        idx, (M1, M2) = job
        rng = _point_rng(cfg.seed, 9000 + idx)
        kin1 = sample_kinematics(M1, params, rng)
        kin2 = sample_kinematics(M2, params, rng)
        rows = []
        S = smatrix.solve_intertwiner(kin1, kin2, params)
        rows.append(_check(
            "smatrix", "null-dimension", (M1, M2), abs(S.null_dim - 1), 0.5,
        ))
        res = smatrix.intertwining_residual(S, params)
        rows.append(_check("smatrix", "intertwining", (M1, M2), max(res.values()), tol))
        if min(M1, M2) >= 2:
            gens = tuple(g for g in smatrix.DEFAULT_GENERATORS if g not in ("E4", "F4"))
            _, _, nd = smatrix.intertwiner_nullspace(kin1, kin2, params, generators=gens)
            rows.append(_check(
                "smatrix", "affine-ablation", (M1, M2), nd, 1.5, invert=True,
                extra={"note": "null dimension must exceed 1 without E4, F4"},
            ))
        return rows

    checks = []
    for rows in _map_points(one, list(enumerate(pairs))):
        checks.extend(rows)
    return checks


def suite_ybe(cfg: RunConfig):
    params = cfg.params()
    tol = cfg.tol("composite")
    Ms = [M for M in cfg.M if M <= 2] or [1]
    triples = sorted(set(product(Ms, repeat=3)))[:6]

    def one(job):
        idx, (M1, M2, M3) = job
        rng = _point_rng(cfg.seed, 13000 + idx)
        kins = [sample_kinematics(M, params, rng) for M in (M1, M2, M3)]
        res = smatrix.ybe_residual(*kins, params)
        return _check("ybe", "yang-baxter", (M1, M2, M3), res, tol)

    return _map_points(one, list(enumerate(triples)))


def suite_kmatrix(cfg: RunConfig):
    params = cfg.params()
    tol_i = cfg.tol("intertwiner")
    tol_a = cfg.tol("algebra")

    def one(job):
        idx, M = job
        rng = _point_rng(cfg.seed, 17000 + idx)
        kin = sample_kinematics(M, params, rng)
        rows = []
        K = kmatrix.closed_form_kmatrix(kin, params)
        Ks = kmatrix.solve_boundary_intertwiner(kin, params)
        rows.append(_check(
            "kmatrix", "closed-vs-intertwiner", M,
            kmatrix.compare_kmatrices(K, Ks), tol_i,
        ))
        inv = kmatrix.invariance_residual(K, params)
        rows.append(_check("kmatrix", "invariance", M, max(inv.values()), tol_i))
        if M >= 2:
            nd = kmatrix.boundary_nullspace_dimension(kin, params, include_twisted=False)
            rows.append(_check(
                "kmatrix", "twisted-ablation", M, nd, 1.5, invert=True,
                extra={"note": "null dimension must reach 2 without twisted charges"},
            ))
            sym = kmatrix.ck_symmetry_residual(kin, params)
            rows.append(_check("kmatrix", "ck-covariance", M, sym.max(), tol_a))
        return rows

    checks = []
    for rows in _map_points(one, list(enumerate(cfg.M))):
        checks.extend(rows)
    return checks


def suite_bybe(cfg: RunConfig):
    params = cfg.params()
    tol = cfg.tol("composite")
    pairs = [p for p in product(cfg.M, repeat=2) if max(p) <= 2] or [(1, 1)]

    def one(job):
        idx, (M1, M2) = job
        rng = _point_rng(cfg.seed, 21000 + idx)
        kin1 = sample_kinematics(M1, params, rng)
        kin2 = sample_kinematics(M2, params, rng)
        rows = [_check(
            "bybe", "reflection-equation", (M1, M2),
            kmatrix.boundary_ybe_residual(kin1, kin2, params), tol,
        )]
        if max(M1, M2) >= 2:
            rows.append(_check(
                "bybe", "trivial-Ck-control", (M1, M2),
                kmatrix.boundary_ybe_residual(kin1, kin2, params, trivial_c=True),
                1e-2, invert=True,
                extra={"note": "constant C_k must violate the reflection equation"},
            ))
        return rows

    checks = []
    for rows in _map_points(one, list(enumerate(pairs))):
        checks.extend(rows)
    return checks


def suite_unitarity(cfg: RunConfig):
    params = cfg.params()
    tol = cfg.tol("intertwiner")

    def one(job):
        idx, M = job
        rng = _point_rng(cfg.seed, 25000 + idx)
        kin = sample_kinematics(M, params, rng)
        return _check(
            "unitarity", "K(p)K(-p)=Id", M,
            kmatrix.unitarity_residual(kin, params), tol,
        )

    return _map_points(one, list(enumerate(cfg.M)))


def suite_limits(cfg: RunConfig):
    params = cfg.params()
    checks = []
    rng = _point_rng(cfg.seed, 29000)
    g = params.g

    # rational limit of the reflection coefficients, O(eps) convergence
    M = max([m for m in cfg.M if m >= 2], default=2)
    xm = complex(sample_kinematics(1, params, rng).x_minus)
    s = xm + 1 / xm + 1j * M / g
    xp = (s + np.sqrt(complex(s * s - 4))) / 2
    gam = nm.sqrt(1j * (xm - xp))
    Kr = kmatrix.rational_limit_kmatrix(xp, xm, g, M, gamma=gam, gamma_bar=gam)
    errs = []
    for eps in (1e-3, 1e-4):
        p_eps = ModelParams(q=1 + eps, g=g, gamma=gam, gamma_bar=gam)
        roots = solve_shortening(xm, M, p_eps)
        xpq = min(roots, key=lambda r: abs(r - xp))
        kin_q = make_kinematics(M, xpq, xm, p_eps)
        Kq = kmatrix.closed_form_kmatrix(kin_q, p_eps)
        err = max(
            (np.abs(np.asarray(getattr(Kq, f)) - np.asarray(getattr(Kr, f)))
             / np.maximum(1.0, np.abs(np.asarray(getattr(Kr, f))))).max(initial=0.0)
            for f in "ABCDE"
        )
        errs.append(err)
        checks.append(_check(
            "limits", f"rational-coefficients[eps={eps:g}]", M, err, 10 * eps,
        ))
    rate = np.log10(errs[0] / errs[1]) if errs[1] > 0 else 1.0
    checks.append(_check(
        "limits", "rational-convergence-rate", M, abs(rate - 1.0), 0.3,
        extra={"fitted_rate": float(rate)},
    ))

    # fundamental M=1 coefficient limit A_1/A_0 -> -x-/x+
    eps = 1e-6
    p_eps = ModelParams(q=1 + eps, g=g)
    xm1 = complex(sample_kinematics(1, params, rng).x_minus)
    roots = solve_shortening(xm1, 1, p_eps)
    xp1 = max(roots, key=abs)
    kin1 = make_kinematics(1, xp1, xm1, p_eps)
    K1 = kmatrix.fundamental_kmatrix(kin1, p_eps)
    checks.append(_check(
        "limits", "fundamental-A1/A0", 1,
        abs(K1.A[1] / K1.A[0] + kin1.x_minus / kin1.x_plus), 1e-4,
    ))

    # Yangian limit: rescaled twisted charges stay Cauchy with O(q-1) rate
    q_values = [1 + 1e-2, 1 + 1e-3, 1 + 1e-4]
    M_y = min(cfg.M)
    xm_y = complex(sample_kinematics(M_y, params, rng).x_minus)
    table = coalgebra.yangian_limit_probe(q_values, xm_y, M_y, g)
    for name, row in table.items():
        diverging = row["diffs"][-1] > row["diffs"][0] or not np.isfinite(row["norms"][-1])
        checks.append(_check(
            "limits", f"yangian-cauchy[{name}]", M_y,
            0.0 if not diverging else row["diffs"][-1], 1.0,
            extra={"diffs": row["diffs"], "ratios": row["ratios"]},
        ))
    return checks


_SUITE_FNS = {
    "rep-check": suite_rep_check,
    "coalgebra": suite_coalgebra,
    "smatrix": suite_smatrix,
    "ybe": suite_ybe,
    "kmatrix": suite_kmatrix,
    "bybe": suite_bybe,
    "unitarity": suite_unitarity,
    "limits": suite_limits,
}


def run_suite(name: str, cfg: RunConfig) -> dict:
    """Execute one suite (or 'all') and assemble the verification report."""
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    t0 = time.monotonic()
    names = list(_SUITE_FNS) if name == "all" else [name]
    checks = []
    for n in names:
        checks.extend(_SUITE_FNS[n](cfg))
    return {
        "schema_version": SCHEMA_VERSION,
        "suite": name,
        "software_version": __version__,
        "seed": cfg.seed,
        "config": config_echo(cfg),
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
        "wall_time_s": time.monotonic() - t0,
    }


def emit_report(report: dict, fmt: str = "json", path: str | None = None) -> str:
    """Serialize the report; returns the text and optionally writes it."""
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    elif fmt == "csv-summary":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["suite", "check", "M", "residual", "threshold", "pass"])
        for c in report["checks"]:
            writer.writerow([
                c["suite"], c["check"], "x".join(map(str, c["M"])),
                repr(c["residual"]), repr(c["threshold"]), c["passed"],
            ])
        text = buf.getvalue()
    else:
        raise ConfigError(f"unknown report format {fmt!r}")
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qab",
        description="Verification suites for bound-state scattering off a boundary.",
    )
    parser.add_argument("suite", choices=SUITES)
    parser.add_argument("--config", help="JSON config path")
    parser.add_argument("--M", help="comma-separated bound-state numbers, e.g. 1,2,3")
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--precision", help="double or high:<bits>")
    parser.add_argument("--out", help="report output path")
    parser.add_argument("--format", choices=("json", "csv-summary"), default="json")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.M:
            try:
                cfg.M = tuple(int(m) for m in args.M.split(","))
            except ValueError:
                raise ConfigError(f"--M: bad list {args.M!r}") from None
            if any(m < 1 for m in cfg.M):
                raise ConfigError("--M: entries must be >= 1")
        if args.samples is not None:
            if args.samples < 0:
                raise ConfigError("--samples: must be non-negative")
            cfg.samples = args.samples
        if args.seed is not None:
            cfg.seed = args.seed
        if args.precision:
            cfg.precision = _validate_precision(args.precision)
        report = run_suite(args.suite, cfg)
    except (ConfigError, KinematicsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntertwinerError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = emit_report(report, args.format, args.out)
    if not args.out:
        sys.stdout.write(text)
    else:
        n_pass = sum(c["passed"] for c in report["checks"])
        print(f"{report['suite']}: {n_pass}/{len(report['checks'])} checks passed, "
              f"report written to {args.out}")
    return EXIT_PASS if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
