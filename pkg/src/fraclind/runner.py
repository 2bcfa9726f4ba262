"""Scenario execution: build a model, evolve it, verify it, write results.

Series files carry one row per time with every column split into _re/_im
parts, written with 17 significant digits so doubles round-trip losslessly.
Alpha sweeps run as independent jobs (optionally in parallel, capped by the
FRACLIND_THREADS environment variable); files are suffixed by alpha and all
report content is assembled in alpha order, so output never depends on
scheduling.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .errors import GridMismatchError, SectorViolationError
from .fracpower import evolve_observable, spectral_power, balakrishnan_power, subordinated_map
from .liouville import (
    LindbladModel,
    SuperOperator,
    adjoint_generator,
    check_quantum_operation,
    commutator_generator,
    lindblad_generator,
    semigroup_map,
    vectorize,
)
from .matrix_engine import frobenius, matrix_exp, linear_solve
from .oscillator import (
    DampedOscParams,
    OscParams,
    damped_fock_model,
    damped_params,
    damped_phi,
    fock_operators,
    frac_damped_coeffs,
    frac_damped_solution,
    frac_osc_coeffs,
    frac_osc_coeffs_exact,
    frac_osc_solution,
    free_fock_model,
    macdonald_damped_coeffs,
    qp_coefficients,
)
from .subordinator import (
    SubordinatorSpec,
    laplace_transform_check,
    normalization_check,
    quadrature_rule,
    subordinated_exponential_exact,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def as_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual,
                "tolerance": self.tolerance, "pass": self.passed}


@dataclass
class RunReport:
    checks: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    series_files: list = field(default_factory=list)

    def add(self, name: str, residual: float, tolerance: float) -> None:
        self.checks.append(CheckResult(name, float(residual), float(tolerance)))

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "overall_pass": self.overall_pass,
            "checks": [c.as_dict() for c in self.checks],
            "timings_seconds": {k: round(v, 3) for k, v in self.timings.items()},
            "series_files": list(self.series_files),
        }

    def write(self, path: str) -> None:
        _ensure_dir(path)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _ensure_dir(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_series(path: str, fmt: str, times: np.ndarray, columns: dict) -> None:
    """Serialize a time series (CSV or JSON) with lossless float formatting."""
    _ensure_dir(path)
    labels = list(columns)
    if fmt == "csv":
        lines = ["t," + ",".join(labels)]
        for i, t in enumerate(times):
            row = [_fmt(t)] + [_fmt(columns[lab][i]) for lab in labels]
            lines.append(",".join(row))
        payload = "\n".join(lines) + "\n"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
    else:
        doc = {"times": [float(t) for t in times],
               "columns": {lab: [float(v) for v in columns[lab]] for lab in labels}}
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")


def read_series(path: str) -> tuple[np.ndarray, dict]:
    """Load a series file written by :func:`write_series` (format by suffix)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        doc = json.loads(text)
        return np.asarray(doc["times"], dtype=float), {
            k: np.asarray(v, dtype=float) for k, v in doc["columns"].items()
        }
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split(",")
    if header[0] != "t":
        raise GridMismatchError(f"{path}: first column must be 't'")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    times = data[:, 0]
    return times, {lab: data[:, j + 1] for j, lab in enumerate(header[1:])}


def _alpha_suffix(path: str, alpha: float) -> str:
    base, ext = os.path.splitext(path)
    return f"{base}_alpha{alpha:g}{ext}"


def _split_columns(labels: list[str], data: np.ndarray) -> dict:
    cols = {}
    for j, lab in enumerate(labels):
        cols[f"{lab}_re"] = data[:, j].real
        cols[f"{lab}_im"] = data[:, j].imag
    return cols


def _build_generator(config: ScenarioConfig):
    """Returns (generator, context dict with model-specific artifacts)."""
    if config.model == "free_oscillator":
        osc = OscParams(**config.params)
        model = free_fock_model(config.truncation, osc)
        gen = commutator_generator(model.hamiltonian, model.hbar)
        q, p = fock_operators(config.truncation, osc)
        return gen, {"osc": osc, "q": q, "p": p, "model": model}
    if config.model == "damped_oscillator":
        dp = damped_params(config.params["m"], config.params["omega"],
                           config.params["mu"], config.params["coeffs"],
                           hbar=config.params["hbar"])
        if dp.lam < 0:
            raise SectorViolationError(
                f"friction rate lam = {dp.lam:.6g} < 0 (gain): fractional evolution undefined"
            )
        model = damped_fock_model(config.truncation, dp)
        gen = lindblad_generator(model)
        osc = OscParams(m=dp.m, omega=dp.omega, hbar=dp.hbar)
        q, p = fock_operators(config.truncation, osc)
        return gen, {"damped": dp, "osc": osc, "q": q, "p": p, "model": model}
    params = config.params
    model = LindbladModel(dim=params["hamiltonian"].shape[0],
                          hamiltonian=params["hamiltonian"],
                          lindblad_ops=params["lindblad_ops"],
                          hbar=params["hbar"])
    gen = lindblad_generator(model)
    return gen, {"model": model, "observable": params["observable"],
                 "state": params["state"]}


def _oracle_matrix(alpha: float, t: float, ctx: dict) -> np.ndarray:
    if "damped" in ctx:
        dp = ctx["damped"]
        if t == 0.0:
            return np.eye(2, dtype=complex)
        return frac_damped_solution(alpha, t, dp,
                                    coeffs=None if alpha == 1.0 else
                                    frac_damped_coeffs(alpha, t, dp, method="closed"))
    osc = ctx["osc"]
    if t == 0.0:
        return np.eye(2, dtype=complex)
    coeffs = frac_osc_coeffs_exact(alpha, t, osc)
    return frac_osc_solution(alpha, t, osc, coeffs=coeffs).astype(complex)


def _run_single_alpha(config: ScenarioConfig, gen, ctx: dict, alpha: float,
                      report: RunReport) -> tuple[str, dict]:
    times = config.times.grid()
    tol_oracle = config.tolerances.get("oracle", 1e-5)
    tol_classical = config.tolerances.get("classical", 1e-10)
    tol_herm = config.tolerances.get("hermiticity", 1e-8)

    if config.model in ("free_oscillator", "damped_oscillator"):
        q, p = ctx["q"], ctx["p"]
        ser_q = evolve_observable(gen, alpha, q, times, method=config.method)
        ser_p = evolve_observable(gen, alpha, p, times, method=config.method)
        trim = max(1, config.truncation - 6)
        data = np.empty((times.size, 4), dtype=complex)
        herm_worst = 0.0
        oracle_worst = 0.0
        for i, t in enumerate(times):
            qq, qp = qp_coefficients(ser_q.values[i], q, p, trim=trim)
            pq, pp = qp_coefficients(ser_p.values[i], q, p, trim=trim)
            data[i] = (qq, qp, pq, pp)
            herm = ser_q.values[i]
            herm_worst = max(herm_worst, frobenius(herm - herm.conj().T)
                             / max(frobenius(herm), 1e-300))
            oracle = _oracle_matrix(alpha, float(t), ctx)
            oracle_worst = max(oracle_worst, float(np.abs(data[i].reshape(2, 2) - oracle).max()))
        tol = tol_classical if alpha == 1.0 else tol_oracle
        report.add(f"alpha={alpha:g}:series_vs_closed_form", oracle_worst, tol)
        report.add(f"alpha={alpha:g}:hermiticity_preservation", herm_worst, tol_herm)
        columns = _split_columns(["qq", "qp", "pq", "pp"], data)
    else:
        obs = ctx["observable"]
        state = ctx["state"]
        if state is None:
            n = obs.shape[0]
            state = np.eye(n, dtype=complex) / n
        ser = evolve_observable(gen, alpha, obs, times, method=config.method)
        tracked = np.array([np.trace(state @ a) for a in ser.values])
        herm_worst = max(
            frobenius(a - a.conj().T) / max(frobenius(a), 1e-300) for a in ser.values
        )
        report.add(f"alpha={alpha:g}:hermiticity_preservation", herm_worst, tol_herm)
        columns = _split_columns(["tracked"], tracked.reshape(-1, 1))

    path = _alpha_suffix(config.outputs.series_path, alpha)
    write_series(path, config.outputs.format, times, columns)
    return path, columns


def _max_workers() -> int:
    raw = os.environ.get("FRACLIND_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def run_scenario(config: ScenarioConfig) -> RunReport:
    """Evolve the configured model for every alpha and write series + report."""
    report = RunReport()
    t0 = time.perf_counter()
    gen, ctx = _build_generator(config)
    report.timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ident = np.eye(gen.dim, dtype=complex)
    unital = float(np.linalg.norm(gen.mat @ vectorize(ident))) / math.sqrt(gen.dim)
    report.add("generator_unitality", unital, config.tolerances.get("unitality", 1e-10))

    results: dict[float, tuple[str, dict]] = {}
    subreports = {alpha: RunReport() for alpha in config.alphas}
    workers = _max_workers()
    if workers > 1 and len(config.alphas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {
                alpha: pool.submit(_run_single_alpha, config, gen, ctx, alpha,
                                   subreports[alpha])
                for alpha in config.alphas
            }
            for alpha in config.alphas:
                results[alpha] = futs[alpha].result()
    else:
        for alpha in config.alphas:
            results[alpha] = _run_single_alpha(config, gen, ctx, alpha, subreports[alpha])
    for alpha in config.alphas:
        report.checks.extend(subreports[alpha].checks)
        report.series_files.append(results[alpha][0])
    report.timings["evolve"] = time.perf_counter() - t0
    report.write(config.outputs.report_path)
    return report


def verify_scenario(config: ScenarioConfig) -> RunReport:
    """Full verification battery for the configured model.

    Covers generator sanity, the quantum-operation conditions of the
    evolved map, the fractional method triangle, the semigroup theorems at
    the configured alphas, the subordination-kernel identities, and the
    closed-form oscillator cross-checks where applicable.
    """
    report = RunReport()
    t0 = time.perf_counter()
    gen, ctx = _build_generator(config)
    n = gen.dim
    t_mid = 0.5 * (config.times.start + config.times.stop) or 1.0
    report.timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ident = np.eye(n, dtype=complex)
    unital = float(np.linalg.norm(gen.mat @ vectorize(ident))) / math.sqrt(n)
    report.add("generator_unitality", unital, 1e-10)

    emap = semigroup_map(adjoint_generator(gen), t_mid)
    rep = check_quantum_operation(emap)
    report.add("map_trace_preserving", rep.trace_residual, 1e-8)
    report.add("map_reality", rep.reality_residual, 1e-8)
    report.add("map_choi_min_eig", max(0.0, -rep.choi_min_eig), 1e-8)
    report.timings["quantum_operation"] = time.perf_counter() - t0

    # Method triangle on a size-capped twin of the model (the triangle is
    # dimension independent; capping keeps verify fast at large truncation).
    t0 = time.perf_counter()
    if config.model == "custom" or config.truncation <= 8:
        tri_gen = gen
        tri_ctx = ctx
    else:
        tri_config = ScenarioConfig(
            model=config.model, alphas=config.alphas, method=config.method,
            times=config.times, truncation=8, params=config.params,
            quad=config.quad, outputs=config.outputs, tolerances=config.tolerances,
        )
        tri_gen, tri_ctx = _build_generator(tri_config)
    tri_mat = tri_gen.mat
    eye_tri = np.eye(tri_mat.shape[0], dtype=complex)
    oscillatory = config.model == "free_oscillator"
    for alpha in config.alphas:
        if alpha == 1.0:
            continue
        spow = spectral_power(tri_mat, alpha)
        bala = balakrishnan_power(tri_mat, alpha)
        rel = frobenius(bala - spow) / max(frobenius(spow), 1e-300)
        report.add(f"alpha={alpha:g}:balakrishnan_vs_spectral", rel, 1e-5)
        kato_direct = linear_solve(eye_tri + spow, eye_tri)
        from .fracpower import kato_resolvent
        kat = kato_resolvent(tri_mat, alpha, 1.0)
        report.add(f"alpha={alpha:g}:kato_vs_direct", frobenius(kat - kato_direct), 1e-6)
        if oscillatory:
            # undamped spectrum: the superoperator subordination integral has
            # no settling horizon, so the scalar dual route stands in for it
            osc = tri_ctx["osc"]
            qd = frac_osc_coeffs(alpha, t_mid, osc, method="contour")
            ex = frac_osc_coeffs_exact(alpha, t_mid, osc)
            resid = max(abs(qd.c - ex.c), abs(qd.s - ex.s))
            report.add(f"alpha={alpha:g}:subordination_scalar_vs_exact", resid, 1e-5)
        else:
            sub = subordinated_map(tri_mat, alpha, t_mid)
            direct = matrix_exp(-spow, t_mid)
            report.add(f"alpha={alpha:g}:subordination_vs_spectral",
                       frobenius(sub - direct), 1e-4)
    report.timings["method_triangle"] = time.perf_counter() - t0

    # Semigroup theorems for the fractional maps (spectral construction),
    # on the same size-capped twin: the properties are dimension independent
    # and eigenvector conditioning of the non-normal generator grows with
    # truncation.
    t0 = time.perf_counter()
    for alpha in config.alphas:
        if alpha == 1.0:
            continue
        phi_gen = spectral_power(tri_mat, alpha)
        adj_gen_pow = spectral_power(tri_mat.conj().T, alpha)
        for t in (t_mid, config.times.stop):
            phi = matrix_exp(-phi_gen, t)
            emap_a = matrix_exp(-adj_gen_pow, t)
            rep = check_quantum_operation(SuperOperator(emap_a))
            report.add(f"alpha={alpha:g}:t={t:g}:frac_map_choi",
                       max(0.0, -rep.choi_min_eig), 1e-7)
            report.add(f"alpha={alpha:g}:t={t:g}:frac_map_trace",
                       rep.trace_residual, 1e-8)
            report.add(f"alpha={alpha:g}:t={t:g}:frac_map_reality",
                       rep.reality_residual, 1e-8)
            dual = frobenius(emap_a - phi.conj().T) / max(frobenius(phi), 1e-300)
            report.add(f"alpha={alpha:g}:t={t:g}:frac_map_duality", dual, 1e-8)
    report.timings["theorems"] = time.perf_counter() - t0

    # Subordination-kernel identities at the configured alphas.
    t0 = time.perf_counter()
    for alpha in config.alphas:
        if alpha == 1.0:
            continue
        spec = SubordinatorSpec(alpha=alpha, theta=config.quad.theta,
                                n_nodes=config.quad.n_nodes)
        report.add(f"alpha={alpha:g}:kernel_normalization",
                   abs(normalization_check(spec, 1.0) - 1.0), 1e-6)
        report.add(f"alpha={alpha:g}:kernel_laplace",
                   abs(laplace_transform_check(spec, 1.0, 1.0) - math.exp(-1.0)), 1e-6)
        rule = quadrature_rule(spec, 1.0)
        report.add(f"alpha={alpha:g}:rule_mass", abs(rule.mass - 1.0), 1e-6)
    report.timings["kernel"] = time.perf_counter() - t0

    # Closed-form oscillator cross-checks.
    t0 = time.perf_counter()
    if "damped" in ctx:
        dp = ctx["damped"]
        worst = 0.0
        for t in (0.5, t_mid):
            worst = max(worst, float(np.abs(
                damped_phi(t, dp) - matrix_exp(dp.m_matrix, t)).max()))
        report.add("damped_phi_vs_expm", worst, 1e-12)
        if dp.lam > 0:
            mac = macdonald_damped_coeffs(t_mid, dp)
            qd = frac_damped_coeffs(0.5, t_mid, dp, method="contour")
            report.add("macdonald_vs_quadrature",
                       max(abs(mac.ch - qd.ch), abs(mac.sh - qd.sh)), 1e-6)
    elif "osc" in ctx:
        osc = ctx["osc"]
        # deviation of the alpha = 0.999 coefficients grows ~ linearly in t,
        # so the continuity budget is stated at t = 1
        co = frac_osc_coeffs(0.999, 1.0, osc)
        wt = osc.omega
        report.add("alpha_to_1_continuity",
                   max(abs(co.c - math.cos(wt)), abs(co.s - math.sin(wt))), 2e-3)
    report.timings["closed_forms"] = time.perf_counter() - t0

    report.write(config.outputs.report_path)
    return report


def compare_series(path_a: str, path_b: str, tol: float) -> dict:
    """Column-wise max/RMS deviation between two series files.

    Raises GridMismatchError when the time grids or column sets differ.
    """
    times_a, cols_a = read_series(path_a)
    times_b, cols_b = read_series(path_b)
    if times_a.shape != times_b.shape or not np.array_equal(times_a, times_b):
        raise GridMismatchError("time grids differ")
    if set(cols_a) != set(cols_b):
        raise GridMismatchError(
            f"column sets differ: {sorted(cols_a)} vs {sorted(cols_b)}"
        )
    per_column = {}
    worst = 0.0
    for lab in sorted(cols_a):
        diff = cols_a[lab] - cols_b[lab]
        mx = float(np.abs(diff).max()) if diff.size else 0.0
        rms = float(np.sqrt(np.mean(diff ** 2))) if diff.size else 0.0
        per_column[lab] = {"max": mx, "rms": rms}
        worst = max(worst, mx)
    return {"columns": per_column, "max_abs_error": worst, "tolerance": tol,
            "pass": worst <= tol}


__all__ = [
    "CheckResult", "RunReport",
    "write_series", "read_series",
    "run_scenario", "verify_scenario", "compare_series",
]
