"""Scenario registry and statistical verification of the ten limit theorems.

Three kinds of checks are wired per theorem:
  * analytic-rate checks: exact F_n-based quantities divided by the claimed
    asymptotic expression must land in a ratio band (no sampling);
  * distributional checks: Kolmogorov-Smirnov distance of normalized samples
    against the limit cdf, or Laplace/pgf comparisons on a grid with
    CLT-based tolerances;
  * almost-sure-convergence proxies: trajectory stabilization frequency.
    A.s. convergence is not directly testable; the proxy is a necessary
    condition only and is labelled as such.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import analytics as an
from .analytics import (LimitLawDescriptor, composite_constants, constants_at,
                        convergence_conditions, limit_constants, limit_law,
                        pgf_from_constants, restricted_mean_from_constants)
from .classifier import classify
from .environment import EnvSequence, ThetaModel, validate_model
from .errors import ScenarioInfeasible
from .simulator import (DELTA, replicate_rng, run_ensemble,
                        sample_heavy_tail_log, simulate_trajectory)


# ---------------------------------------------------------------------------
# Scenario registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    id: str
    theorem_id: str
    model: ThetaModel
    free_params: dict
    expected_regime: str
    expected_sub_label: Optional[str] = None
    notes: str = ""


def _prop(sigma, a):
    return EnvSequence.proportional_c(sigma, a)


def scenario_model(scenario_id: str, theta: float = None,
                   sigma: float = None, r: float = None) -> ThetaModel:
    """Model for a registry scenario, with the documented free parameters
    overridable."""
    sid = scenario_id
    H, V = EnvSequence.harmonic(), EnvSequence.convergent()

    def d(value, default):
        return default if value is None else value

    if sid == "Ex1":
        th = d(theta, 1.0)
        return validate_model(th, 1.0, H, _prop(d(sigma, 1.0), H))
    if sid == "Ex2":
        th = d(theta, 1.0)
        return validate_model(th, 1.0, V, _prop(d(sigma, 1.0), V))
    if sid == "Ex3":
        return validate_model(d(theta, 1.0), 1.0,
                              EnvSequence.alternating_ex3("a"),
                              EnvSequence.alternating_ex3("c"))
    if sid == "Ex4a":
        return validate_model(d(theta, 1.0), 1.0,
                              EnvSequence.superharmonic_ex4("a"),
                              EnvSequence.superharmonic_ex4("c"))
    if sid == "Ex4b":
        a_seq = EnvSequence.superharmonic_ex4("a")
        return validate_model(
            d(theta, 1.0), 1.0, a_seq,
            EnvSequence.negative_proportional_c(d(sigma, 1.0), a_seq))
    if sid == "Ex5":
        return validate_model(d(theta, 1.0), 1.0,
                              EnvSequence.dyadic_ex5("a"),
                              EnvSequence.dyadic_ex5("c"))
    if sid in ("Ex6i", "Ex6ii", "Ex6iii", "Ex6iv"):
        a_seq = H if sid in ("Ex6i", "Ex6ii") else V
        sig = d(sigma, 1.0 if sid in ("Ex6i", "Ex6iii") else 0.0)
        return validate_model(0.0, 1.0, a_seq, EnvSequence.exp_tail_ex6(sig))
    if sid in ("Ex7i", "Ex7ii"):
        a_seq = H if sid == "Ex7i" else V
        th, rr = d(theta, 1.0), d(r, 2.0)
        return validate_model(th, rr, a_seq, _prop(d(sigma, 0.75), a_seq))
    if sid in ("Ex8i", "Ex8ii"):
        a_seq = H if sid == "Ex8i" else V
        th, rr = d(theta, -0.5), d(r, 2.0)
        return validate_model(th, rr, a_seq, _prop(d(sigma, 1.2), a_seq))
    if sid in ("Ex9i", "Ex9ii"):
        a_seq = H if sid == "Ex9i" else V
        return validate_model(0.0, d(r, 2.0), a_seq,
                              EnvSequence.constant(d(sigma, 0.5)))
    if sid in ("Ex10i", "Ex10ii"):
        a_seq = H if sid == "Ex10i" else V
        return validate_model(d(theta, -0.5), 1.0, a_seq,
                              _prop(d(sigma, 0.5), a_seq))
    raise KeyError(f"unknown scenario {scenario_id!r}")


_SCENARIOS = (
    ("Ex1", "T1", {"theta": 1.0, "sigma": 1.0}, "supercritical", None,
     "sigma >= 1; theta free in (0, 1]"),
    ("Ex2", "T2", {"theta": 1.0, "sigma": 1.0},
     "asymptotically_degenerate", None, "sigma >= 1"),
    ("Ex3", "T3", {"theta": 1.0}, "critical", None,
     "alternating environment; lim A_n does not exist"),
    ("Ex4a", "T4", {"theta": 1.0}, "strictly_subcritical", None,
     "C < inf variant"),
    ("Ex4b", "T4", {"theta": 1.0, "sigma": 1.0}, "strictly_subcritical",
     None, "C = inf variant"),
    ("Ex5", "T5", {"theta": 1.0}, "loosely_subcritical", None,
     "dyadic environment; B_n oscillates"),
    ("Ex6i", "T6", {"sigma": 1.0}, "infinite_mean", "i", "A = 0, D = 0"),
    ("Ex6ii", "T6", {"sigma": 0.0}, "infinite_mean", "ii", "A = 0, D > 0"),
    ("Ex6iii", "T6", {"sigma": 1.0}, "infinite_mean", "iii",
     "A > 0, D = 0"),
    ("Ex6iv", "T6", {"sigma": 0.0}, "infinite_mean", "iv", "A > 0, D > 0"),
    ("Ex7i", "T7", {"theta": 1.0, "r": 2.0, "sigma": 0.75}, "defective",
     "A=0", "sigma in [r^-theta, (r-1)^-theta]"),
    ("Ex7ii", "T7", {"theta": 1.0, "r": 2.0, "sigma": 0.75}, "defective",
     "A>0", ""),
    ("Ex8i", "T8", {"theta": -0.5, "r": 2.0, "sigma": 1.2}, "defective",
     "A=0", "sigma in [(r-1)^(1/alpha), r^(1/alpha)]"),
    ("Ex8ii", "T8", {"theta": -0.5, "r": 2.0, "sigma": 1.2}, "defective",
     "A>0", ""),
    ("Ex9i", "T9", {"r": 2.0, "sigma": 0.5}, "defective", "A=0",
     "c_n constant, 0 <= sigma <= 1"),
    ("Ex9ii", "T9", {"r": 2.0, "sigma": 0.5}, "defective", "A>0", ""),
    ("Ex10i", "T10", {"theta": -0.5, "sigma": 0.5}, "defective", "A=0",
     "0 < sigma <= 1"),
    ("Ex10ii", "T10", {"theta": -0.5, "sigma": 0.5}, "defective", "A>0",
     ""),
)


def registry() -> list[Scenario]:
    """All registry scenarios with their default free parameters."""
    out = [Scenario(sid, tid, scenario_model(sid), dict(params), regime,
                    sub, notes)
           for sid, tid, params, regime, sub, notes in _SCENARIOS]
    covered = {s.theorem_id for s in out}
    missing = {f"T{i}" for i in range(1, 11)} - covered
    if missing:
        raise AssertionError(f"coverage gap: {sorted(missing)}")
    return out


def get_scenario(scenario_id: str) -> Scenario:
    for s in registry():
        if s.id == scenario_id:
            return s
    raise KeyError(f"unknown scenario {scenario_id!r}")


# ---------------------------------------------------------------------------
# Verification plumbing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyConfig:
    replicates: Optional[int] = None    # None = per-check defaults
    horizon: Optional[int] = None
    seed: int = 20240901
    workers: int = 1
    tolerance_scale: float = 1.0


@dataclass(frozen=True)
class Check:
    name: str
    statistic: float
    target: float
    tolerance: float
    passed: bool
    kind: str = "analytic"      # analytic | distributional | proxy
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "statistic": self.statistic,
                "target": self.target, "tolerance": self.tolerance,
                "pass": self.passed, "kind": self.kind,
                "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    scenario_id: str
    theorem_id: str
    checks: tuple
    replicates: int
    horizons: tuple
    seed: int
    low_power: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"scenario_id": self.scenario_id,
                "theorem_id": self.theorem_id,
                "checks": [c.to_dict() for c in self.checks],
                "replicates": self.replicates,
                "horizons": list(self.horizons),
                "seed": self.seed, "low_power": self.low_power,
                "pass": self.passed}


def scenario_seed(base_seed: int, scenario_id: str) -> int:
    return (base_seed << 32) ^ zlib.crc32(scenario_id.encode())


def ks_statistic(samples: Sequence[float], cdf: Callable[[float], float]) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a continuous cdf."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    f = np.array([cdf(v) for v in x])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def _approx(name, statistic, target, tol, kind="analytic", detail=""):
    return Check(name, float(statistic), float(target), float(tol),
                 abs(statistic - target) <= tol, kind, detail)


def _ratio(name, statistic, tol, detail=""):
    return _approx(name, statistic, 1.0, tol, detail=detail)


def _survival(model: ThetaModel, cc) -> float:
    th, r = model.theta, model.r
    return (pgf_from_constants(th, r, cc, 1.0)
            - pgf_from_constants(th, r, cc, 0.0))


def _conditional_transform(model: ThetaModel, cc, s: float) -> float:
    """E(s^{Z_n} | tau > n) from exact composite values."""
    th, r = model.theta, model.r
    f0 = pgf_from_constants(th, r, cc, 0.0)
    f1 = pgf_from_constants(th, r, cc, 1.0)
    return (pgf_from_constants(th, r, cc, s) - f0) / (f1 - f0)


def _conditional_mean_limit(theta: float, r: float) -> float:
    """Limit of E(Z_n | tau > n) in the defective A = 0 sub-cases, from the
    exact derivative F_n'(1) ~ A_n (r-1)^(-theta-1) C^(-1/theta-1) divided by
    the survival rate (the displayed constants in the source drop a theta
    factor; the derivative-based value is used and cross-checked numerically
    in the test suite)."""
    if theta == 0.0:
        return (r - 1.0) ** -1.0 / (math.log(r) - math.log(r - 1.0))
    return (theta * (r - 1.0) ** (-theta - 1.0)
            / ((r - 1.0) ** (-theta) - r ** (-theta)))


# ---------------------------------------------------------------------------
# Per-theorem check suites
# ---------------------------------------------------------------------------

_ANALYTIC_N = 10 ** 4
_RATE_TOL = 0.01
_GRID = tuple(j / 10.0 for j in range(11))


def _checks_t1(sc, model, cfg, limits, law):
    n_big = cfg.horizon or _ANALYTIC_N
    cc = composite_constants(model, n_big)
    theta = model.theta
    checks = [
        _ratio("restricted_mean_identity",
               restricted_mean_from_constants(theta, 1.0, cc, "a")
               * cc.A ** (1.0 / theta), 1e-9,
               detail="E(Z_n) A_n^(1/theta) = 1 exactly"),
        _approx("extinction_prob_vs_limit",
                pgf_from_constants(theta, 1.0, cc, 0.0),
                an.absorption_probabilities(model, limits).q, 2e-3),
    ]
    reps = cfg.replicates or 10 ** 5
    n_mc = 100
    stats = run_ensemble(model, n_mc, reps,
                         scenario_seed(cfg.seed, sc.id), cfg.workers,
                         mode="direct", scaling=law)
    w = stats.scaled_samples
    for lam in (0.5, 1.0, 2.0):
        emp = float(np.mean(np.exp(-lam * w)))
        checks.append(_approx(f"laplace_lambda_{lam}", emp,
                              law.evaluate(lam),
                              0.02 * cfg.tolerance_scale,
                              kind="distributional",
                              detail=f"n={n_mc}, reps={reps}"))
    return checks, reps, (n_big, n_mc)


def _checks_t2(sc, model, cfg, limits, law):
    n_big = cfg.horizon or _ANALYTIC_N
    cc = composite_constants(model, n_big)
    theta = model.theta
    A = law.param("A")
    checks = [
        _ratio("mean_vs_limit",
               restricted_mean_from_constants(theta, 1.0, cc, "a")
               / A ** (-1.0 / theta), _RATE_TOL),
        _approx("pgf_grid_sup_diff",
                max(abs(pgf_from_constants(theta, 1.0, cc, s)
                        - law.evaluate(s)) for s in _GRID),
                0.0, _RATE_TOL, detail="F_n(s) vs limit pgf"),
    ]
    rep = convergence_conditions(model, n_big)
    checks.append(Check("church_lindvall_holds", 1.0, 1.0, 0.0,
                        rep.church_lindvall == "holds", kind="analytic",
                        detail=f"verdict={rep.church_lindvall}"))
    reps = min(cfg.replicates or 2000, 20000)
    n_tr = 40
    seed = scenario_seed(cfg.seed, sc.id)
    stable = 0
    samplers = {}
    for i in range(reps):
        tr = simulate_trajectory(model, n_tr, seed + i, _samplers=samplers)
        win = tr.states[n_tr // 2:]
        if all(s == win[0] for s in win):
            stable += 1
    checks.append(Check("stabilization_proxy", stable / reps, 1.0, 0.2,
                        stable / reps >= 0.8, kind="proxy",
                        detail="necessary condition only; fraction of "
                               f"paths constant on [{n_tr//2},{n_tr}]"))
    return checks, reps, (n_big, n_tr)


def _t3_style_checks(model, cc, law, tol, tag=""):
    """Survival rate and conditional Laplace transform for the critical-type
    limit (used by T3 and the diverging subsequence of T5)."""
    theta = model.theta
    surv = _survival(model, cc)
    checks = [_ratio(f"survival_rate{tag}", surv * cc.C ** (1.0 / theta),
                     tol, detail="P(Z_n>0) ~ C_n^(-1/theta)")]
    for lam in (0.5, 1.0, 2.0):
        lam_n = lam * cc.B ** (-1.0 / theta)
        emp = _conditional_transform(model, cc, math.exp(-lam_n))
        checks.append(_approx(f"laplace_cond_lambda_{lam}{tag}", emp,
                              law.evaluate(lam), tol,
                              detail="exact transform at scaled argument"))
    return checks


def _t4_style_checks(model, cc, law, tol, tag=""):
    theta = model.theta
    B = law.param("B")
    surv = _survival(model, cc)
    checks = [
        _ratio(f"survival_rate{tag}",
               surv * ((1.0 + B) * cc.A) ** (1.0 / theta), tol,
               detail="P(Z_n>0) ~ ((1+B) A_n)^(-1/theta)"),
        _ratio(f"conditional_mean{tag}",
               restricted_mean_from_constants(theta, 1.0, cc, "a") / surv
               / (1.0 + B) ** (1.0 / theta), tol),
        _approx(f"conditional_pgf_sup_diff{tag}",
                max(abs(_conditional_transform(model, cc, s)
                        - law.evaluate(s)) for s in _GRID),
                0.0, tol),
    ]
    return checks


def _checks_t3(sc, model, cfg, limits, law):
    n_big = cfg.horizon or _ANALYTIC_N
    cc = composite_constants(model, n_big)
    return (_t3_style_checks(model, cc, law, _RATE_TOL), 0, (n_big,))


def _checks_t4(sc, model, cfg, limits, law):
    n_big = cfg.horizon or _ANALYTIC_N
    cc = composite_constants(model, n_big)
    return (_t4_style_checks(model, cc, law, _RATE_TOL), 0, (n_big,))


def _checks_t5(sc, model, cfg, limits, law_unused):
    m = 12
    sub_up = [2 ** k for k in range(4, m + 1)]
    sub_down = [2 ** k - 1 for k in range(4, m + 1)]
    law_up = limit_law(model, limits, subsequence=sub_up)
    law_down = limit_law(model, limits, subsequence=sub_down)
    cs = constants_at(model, [sub_up[-1], sub_down[-1]])
    theta = model.theta
    checks = []
    # claimed constants: survival ~ (2 k_n)^(-1/theta) along 2^m and
    # ~ (3 k_n)^(-1/theta) along 2^m - 1
    k_up, k_down = sub_up[-1], sub_down[-1]
    checks.append(_ratio("survival_constant_up",
                         _survival(model, cs[k_up])
                         * (2.0 * k_up) ** (1.0 / theta), 0.02,
                         detail=f"k_n = 2^{m}"))
    checks.append(_ratio(
        "survival_constant_down",
        _survival(model, cs[k_down]) * (3.0 * k_down) ** (1.0 / theta),
        0.02,
        detail=f"k_n = 2^{m}-1; claimed constant, known not to hold: at "
               "k_n = 2^m-1 the composite sum C only covers dyadic "
               "indices up to 2^(m-1), so C ~ k_n + 1 (not 2 k_n), "
               "A + C ~ 2 k_n, B -> 1, and the measured survival constant "
               "is (2 k_n)^(-1/theta); the ratio here settles at "
               "(3/2)^(1/theta)"))
    checks.append(_ratio("survival_constant_down_measured",
                         _survival(model, cs[k_down])
                         * (2.0 * k_down) ** (1.0 / theta), 0.02,
                         detail=f"k_n = 2^{m}-1, true constant"))
    checks += _t3_style_checks(model, cs[k_up], law_up, 0.02, tag="_up")
    checks += _t4_style_checks(model, cs[k_down], law_down, 0.02,
                               tag="_down")
    checks.append(Check("laws_differ_across_subsequences", 1.0, 1.0, 0.0,
                        law_up.theorem_id != law_down.theorem_id,
                        detail=f"{law_up.theorem_id} vs "
                               f"{law_down.theorem_id}"))
    return checks, 0, (k_up, k_down)


def _sibuya_log_sf(log_z: float, a: float) -> float:
    """ln P(Y > e^{log_z}) for the heavy-tail law with pgf 1 - (1-s)^a."""
    j = math.floor(math.exp(min(log_z, 60.0)))
    if log_z <= 60.0:
        return (math.lgamma(j + 1.0 - a) - math.lgamma(j + 1.0)
                - math.lgamma(1.0 - a))
    return -a * log_z - math.lgamma(1.0 - a)


def _checks_t6(sc, model, cfg, limits, law):
    n_big = cfg.horizon or 2000
    cc = composite_constants(model, n_big)
    checks = [
        _approx("survival_equals_D_n", _survival(model, cc),
                math.exp(cc.log_D), 1e-12,
                detail="P(Z_n>0) = D_n identity"),
    ]
    tid = law.theorem_id
    if tid == "T6i":
        reps = cfg.replicates or 10 ** 4
        rng = replicate_rng(scenario_seed(cfg.seed, sc.id), 0)
        u = rng.random(reps)
        x = np.array([cc.A * sample_heavy_tail_log(float(v), cc.A)
                      for v in u])
        ks = ks_statistic(x, lambda t: 1.0 - math.exp(-min(t, 700.0)))
        checks.append(Check("ks_exp1", ks, 0.0, 0.05, ks <= 0.05,
                            kind="distributional",
                            detail=f"A_n ln Z_n | survival, n={n_big}, "
                                   f"{reps} conditional samples (survival "
                                   "mass D_n is exact, so the conditional "
                                   "law is sampled directly)"))
        return checks, reps, (n_big,)
    if tid == "T6ii":
        D = law.param("D")
        for x in (0.25, 0.5, 1.0, 2.0):
            # P(A_n ln Z_n <= x) = 1 - D_n P(Y > e^{x/A_n}), Y the
            # conditional heavy-tail law with parameter A_n
            log_z = x / cc.A
            exact = 1.0 - math.exp(cc.log_D
                                   + _sibuya_log_sf(log_z, cc.A))
            checks.append(_approx(f"cdf_x_{x}", exact, law.evaluate(x),
                                  _RATE_TOL))
        return checks, 0, (n_big,)
    if tid == "T6iii":
        sup = max(abs(_conditional_transform(model, cc, s)
                      - law.evaluate(s)) for s in _GRID)
        checks.append(_approx("conditional_pgf_sup_diff", sup, 0.0,
                              _RATE_TOL))
        return checks, 0, (n_big,)
    # T6iv
    theta, r = model.theta, model.r
    sup = max(abs(pgf_from_constants(theta, r, cc, s) - law.evaluate(s))
              for s in _GRID)
    checks.append(_approx("pgf_sup_diff", sup, 0.0, _RATE_TOL))
    rep = convergence_conditions(model, max(n_big, 1000))
    checks.append(Check("conditions_a0_A1_hold", 1.0, 1.0, 0.0,
                        rep.condition_a0 == "holds"
                        and rep.condition_A1 == "holds",
                        detail=f"a0={rep.condition_a0}, "
                               f"A1={rep.condition_A1}"))
    return checks, 0, (n_big,)


def _defective_zero_a_checks(model, cc, law, rate_target, mean_limit, tol):
    """Shared T7i/T8i/T9i/T10i structure: survival rate, conditional mean,
    conditional pgf grid."""
    surv = _survival(model, cc)
    checks = [
        _ratio("absorption_rate", surv / rate_target, tol,
               detail="P(tau>n) / asymptotic expression"),
        _approx("conditional_pgf_sup_diff",
                max(abs(_conditional_transform(model, cc, s)
                        - law.evaluate(s)) for s in _GRID),
                0.0, tol),
    ]
    if mean_limit is not None:
        mean = restricted_mean_from_constants(model.theta, model.r, cc,
                                              model.case_label)
        checks.append(_ratio("conditional_mean", mean / surv / mean_limit,
                             tol))
    return checks


def _restricted_law_checks(model, cc, law, limits, tol):
    """Shared T7ii/T8ii/T9ii structure: restricted pgf convergence, limit
    mean, and closed-form absorption probabilities."""
    theta, r = model.theta, model.r
    checks = [
        _approx("restricted_pgf_sup_diff",
                max(abs(pgf_from_constants(theta, r, cc, s)
                        - law.evaluate(s)) for s in _GRID),
                0.0, tol,
                detail="E(s^{Z_n}; tau_Delta > n) vs limit"),
    ]
    ab = an.absorption_probabilities(model, limits)
    f0 = pgf_from_constants(theta, r, cc, 0.0)
    f1 = pgf_from_constants(theta, r, cc, 1.0)
    checks.append(_approx("q_vs_Fn0", ab.q, f0, tol))
    checks.append(_approx("q_delta_vs_defect", ab.q_delta, 1.0 - f1, tol))
    return checks


def _checks_t7_t8(sc, model, cfg, limits, law):
    n_big = cfg.horizon or _ANALYTIC_N
    cc = composite_constants(model, n_big)
    theta, r = model.theta, model.r
    if law.theorem_id in ("T7i", "T8i"):
        C = law.param("C")
        rate = (cc.A * ((r - 1.0) ** (-theta) - r ** (-theta)) / theta
                * C ** (-1.0 / theta - 1.0))
        checks = _defective_zero_a_checks(
            model, cc, law, rate, _conditional_mean_limit(theta, r),
            _RATE_TOL)
        reps = min(cfg.replicates or 20000, 10 ** 5)
        n_mc = 30
        cc_mc = composite_constants(model, n_mc)
        stats = run_ensemble(model, n_mc, reps,
                             scenario_seed(cfg.seed, sc.id), cfg.workers,
                             mode="generational")
        for name, est_se, target in (
                ("zero", stats.zero_freq,
                 pgf_from_constants(theta, r, cc_mc, 0.0)),
                ("delta", stats.delta_freq,
                 1.0 - pgf_from_constants(theta, r, cc_mc, 1.0))):
            se = max(est_se[1], 1e-9)
            checks.append(_approx(f"mc_{name}_freq", est_se[0], target,
                                  4.0 * se * cfg.tolerance_scale,
                                  kind="distributional",
                                  detail=f"4 SE at n={n_mc}, reps={reps}"))
        return checks, reps, (n_big, n_mc)
    # (ii) variants
    A, C = law.param("A"), law.param("C")
    checks = _restricted_law_checks(model, cc, law, limits, _RATE_TOL)
    target_mean = A * (A + C * (r - 1.0) ** theta) ** (-1.0 / theta - 1.0)
    mean = restricted_mean_from_constants(theta, r, cc, model.case_label)
    checks.append(_ratio("restricted_mean", mean / target_mean, _RATE_TOL))
    return checks, 0, (n_big,)


def _checks_t9(sc, model, cfg, limits, law):
    n_big = cfg.horizon or _ANALYTIC_N
    cc = composite_constants(model, n_big)
    r = model.r
    if law.theorem_id == "T9i":
        rate = ((math.log(r) - math.log(r - 1.0)) * cc.A
                * math.exp(cc.log_D))
        checks = _defective_zero_a_checks(
            model, cc, law, rate, _conditional_mean_limit(0.0, r),
            _RATE_TOL)
        return checks, 0, (n_big,)
    # T9ii: closed forms q = r - r^A D, q_delta = 1 - r + (r-1)^A D with
    # D = (r - sigma)^(1 - A) for the constant environment
    checks = _restricted_law_checks(model, cc, law, limits, _RATE_TOL)
    sigma = sc.free_params.get("sigma", 0.5)
    A_exact = 1.0 / 3.0
    D_exact = (r - sigma) ** (1.0 - A_exact)
    q_exact = r - r ** A_exact * D_exact
    qd_exact = 1.0 - r + (r - 1.0) ** A_exact * D_exact
    ab = an.absorption_probabilities(model, limits)
    checks.append(_approx("q_closed_form", ab.q, q_exact, 1e-3))
    checks.append(_approx("q_delta_closed_form", ab.q_delta, qd_exact,
                          1e-3))
    mean = restricted_mean_from_constants(0.0, r, cc, "f")
    checks.append(_ratio("restricted_mean",
                         mean / (A_exact * (r - 1.0) ** (A_exact - 1.0)
                                 * D_exact), _RATE_TOL))
    reps = cfg.replicates or 10 ** 5
    n_mc = 200
    cc_mc = composite_constants(model, n_mc)
    stats = run_ensemble(model, n_mc, reps,
                         scenario_seed(cfg.seed, sc.id), cfg.workers,
                         mode="generational")
    for name, est_se, target in (
            ("zero", stats.zero_freq,
             pgf_from_constants(0.0, r, cc_mc, 0.0)),
            ("delta", stats.delta_freq,
             1.0 - pgf_from_constants(0.0, r, cc_mc, 1.0))):
        se = max(est_se[1], 1e-9)
        checks.append(_approx(f"mc_{name}_freq", est_se[0], target,
                              4.0 * se * cfg.tolerance_scale,
                              kind="distributional",
                              detail=f"4 SE at n={n_mc}, reps={reps}"))
    return checks, reps, (n_big, n_mc)


def _checks_t10(sc, model, cfg, limits, law):
    n_big = cfg.horizon or _ANALYTIC_N
    cc = composite_constants(model, n_big)
    theta = model.theta
    alpha = -1.0 / theta
    if law.theorem_id == "T10i":
        C = law.param("C")
        rate = cc.A * alpha * C ** (alpha - 1.0)
        checks = _defective_zero_a_checks(model, cc, law, rate, None,
                                          _RATE_TOL)
        ab = an.absorption_probabilities(model, limits)
        checks.append(_approx("q_delta_closed_form", ab.q_delta,
                              C ** alpha, 1e-3))
        return checks, 0, (n_big,)
    # T10ii: E(Z_n; tau_Delta > n) = inf -- divergence witnessed through
    # truncated means at growing cutoffs
    checks = _restricted_law_checks(model, cc, law, limits, _RATE_TOL)
    from .errors import CutoffExceeded
    from .series import extend_pmf, population_pmf
    n_small = 6
    try:
        pmf = population_pmf(model, n_small, tail_tol=1e-30,
                             max_cutoff=2 ** 8)
    except CutoffExceeded as err:
        pmf = err.partial
    means = [extend_pmf(pmf, budget).mean_truncated()
             for budget in (2 ** 8, 2 ** 11, 2 ** 14)]
    growing = means[0] < means[1] < means[2]
    checks.append(Check("truncated_mean_diverges", means[-1] / means[0],
                        math.inf, math.inf, growing,
                        detail=f"truncated means {means} at growing "
                               "cutoffs (divergence check; the restricted "
                               "mean is infinite)"))
    checks.append(Check("restricted_mean_is_inf", 1.0, 1.0, 0.0,
                        math.isinf(restricted_mean_from_constants(
                            theta, 1.0, cc, "c"))))
    return checks, 0, (n_big, n_small)


_SUITES = {"T1": _checks_t1, "T2": _checks_t2, "T3": _checks_t3,
           "T4": _checks_t4, "T5": _checks_t5, "T6": _checks_t6,
           "T7": _checks_t7_t8, "T8": _checks_t7_t8, "T9": _checks_t9,
           "T10": _checks_t10}


def verify_theorem(scenario: Scenario,
                   config: VerifyConfig = VerifyConfig()) -> VerificationReport:
    """Run the checks wired to the scenario's theorem."""
    model = scenario.model
    limits = limit_constants(model, 10 ** 4)
    label = classify(model, limits)
    if label.regime != scenario.expected_regime:
        raise ScenarioInfeasible(
            f"scenario {scenario.id} classified as {label.regime}, "
            f"expected {scenario.expected_regime}")
    low_power = config.replicates is not None and config.replicates < 1000
    if low_power:
        config = replace(config, tolerance_scale=max(
            config.tolerance_scale,
            math.sqrt(1000.0 / max(config.replicates, 1))))
    if scenario.theorem_id == "T5":
        law = None
    else:
        law = limit_law(model, limits)
    checks, reps, horizons = _SUITES[scenario.theorem_id](
        scenario, model, config, limits, law)
    checks = list(checks)
    checks.append(Check("regime_label", 1.0, 1.0, 0.0,
                        label.regime == scenario.expected_regime
                        and (scenario.expected_sub_label is None
                             or label.sub_label
                             == scenario.expected_sub_label),
                        detail=f"{label.regime} / {label.sub_label}"))
    return VerificationReport(scenario.id, scenario.theorem_id,
                              tuple(checks), reps, tuple(horizons),
                              config.seed, low_power)


def run_all(config: VerifyConfig = VerifyConfig(),
            scenario_ids: Optional[Sequence[str]] = None) -> list[VerificationReport]:
    """verify_theorem across the registry; failures are recorded per report,
    not raised."""
    reports = []
    for sc in registry():
        if scenario_ids is not None and sc.id not in scenario_ids:
            continue
        reports.append(verify_theorem(sc, config))
    return reports


def summary_table(reports: Sequence[VerificationReport]) -> list[dict]:
    rows = []
    for rep in reports:
        worst = None
        for c in rep.checks:
            if c.tolerance > 0 and math.isfinite(c.tolerance):
                margin = c.tolerance - abs(c.statistic - c.target)
                if worst is None or margin < worst:
                    worst = margin
        rows.append({"scenario": rep.scenario_id,
                     "theorem": rep.theorem_id,
                     "pass": rep.passed,
                     "worst_margin": worst})
    return rows
