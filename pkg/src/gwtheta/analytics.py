"""Closed-form quantities for the composed process: composite constants,
composed generating functions, moments, absorption probabilities, numeric
limit estimation, convergence-condition diagnostics, and the limit-law
descriptors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .environment import ThetaModel, step_pgf_weight_one
from .errors import (ConditioningOnNull, DomainError, NoLimitLaw,
                     UndeterminedLimit)


# ---------------------------------------------------------------------------
# Composite constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompositeConstants:
    """(A_n, C_n, D_n, B_n) at generation n.  D_n is carried in log-domain;
    log_D is None when some r - c_i <= 0 (D is then not defined/used).
    B_n is +inf when A_n has underflowed to zero."""

    n: int
    A: float
    C: float
    log_D: Optional[float]
    B: float

    @property
    def D(self) -> Optional[float]:
        if self.log_D is None:
            return None
        return math.exp(self.log_D)


def constants_iter(model: ThetaModel, up_to: int):
    """Yield CompositeConstants for n = 0, 1, ..., up_to in one O(n) pass."""
    A, C, log_D = 1.0, 0.0, 0.0
    yield CompositeConstants(0, A, C, log_D, 0.0)
    for n in range(1, up_to + 1):
        a, c = model.step(n)
        A_prev = A
        A = A * a
        C = C + A_prev * c
        if log_D is not None:
            lg = model.log_r_minus_c(n)
            log_D = None if lg is None else log_D + (A_prev - A) * lg
        B = C / A if A > 0.0 else math.inf
        yield CompositeConstants(n, A, C, log_D, B)


def composite_constants(model: ThetaModel, n: int) -> CompositeConstants:
    """Exact recursion values at generation n >= 0."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    out = None
    for out in constants_iter(model, n):
        pass
    return out


def constants_at(model: ThetaModel, ns: Iterable[int]) -> dict:
    """Constants at several indices in a single pass."""
    wanted = sorted(set(int(n) for n in ns))
    if wanted and wanted[0] < 0:
        raise DomainError("indices must be >= 0")
    out = {}
    if not wanted:
        return out
    targets = set(wanted)
    for cc in constants_iter(model, wanted[-1]):
        if cc.n in targets:
            out[cc.n] = cc
    return out


# ---------------------------------------------------------------------------
# Composed generating function and derived probabilities
# ---------------------------------------------------------------------------

def pgf_from_constants(theta: float, r: float, cc: CompositeConstants,
                       s: float) -> float:
    """F_n(s) from composite constants."""
    if not 0.0 <= s <= r:
        raise DomainError(f"s = {s} outside [0, {r}]")
    if theta == 0.0:
        return r - (r - s) ** cc.A * math.exp(cc.log_D)
    if s == r and theta > 0.0:
        # (r-s)^(-theta) = +inf; for theta < 0 it is 0 and the general
        # expression below is already correct
        return r
    return r - (cc.A * (r - s) ** (-theta) + cc.C) ** (-1.0 / theta)


def composed_pgf(model: ThetaModel, n: int, s: float) -> float:
    """F_n(s) = f_1 o ... o f_n (s) via the closed form."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return pgf_from_constants(model.theta, model.r,
                              composite_constants(model, n), s)


@dataclass(frozen=True)
class SurvivalMoments:
    p_alive: float
    p_zero: float
    p_delta: float
    mean_restricted: float      # E(Z_n; tau_Delta > n) = F_n'(1), +inf allowed
    mean_conditional: float     # E(Z_n | tau > n)


def restricted_mean_from_constants(theta: float, r: float,
                                   cc: CompositeConstants,
                                   case_label: str) -> float:
    """Closed-form F_n'(1) per case.

    The general derivative for theta != 0 is
        F_n'(s) = A_n (r-s)^(-theta-1) (A_n (r-s)^(-theta) + C_n)^(-1/theta-1)
    which at s=1, r>1 simplifies to A_n (A_n + C_n (r-1)^theta)^(-1/theta-1);
    there is no theta^(-1) prefactor (the s=1 value A_n under the proper
    boundary condition pins this down).  For theta in (-1,0) or theta=0 with
    r=1 the derivative diverges at s=1."""
    A, C = cc.A, cc.C
    if case_label == "a":
        return A ** (-1.0 / theta)
    if case_label in ("b", "d"):
        return A * (A + C * (r - 1.0) ** theta) ** (-1.0 / theta - 1.0)
    if case_label == "f":
        return A * (r - 1.0) ** (A - 1.0) * math.exp(cc.log_D)
    # cases (c) and (e): F_n'(1) = +inf
    return math.inf


def survival_and_moments(model: ThetaModel, n: int) -> SurvivalMoments:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    cc = composite_constants(model, n)
    theta, r = model.theta, model.r
    p_zero = pgf_from_constants(theta, r, cc, 0.0)
    p_one = pgf_from_constants(theta, r, cc, 1.0)
    p_delta = max(0.0, 1.0 - p_one)
    p_alive = max(0.0, p_one - p_zero)
    mean = restricted_mean_from_constants(theta, r, cc, model.case_label)
    if math.isinf(mean):
        mean_cond = math.inf
    elif p_alive > 0.0:
        mean_cond = mean / p_alive
    else:
        mean_cond = math.inf
    return SurvivalMoments(p_alive, p_zero, p_delta, mean, mean_cond)


def conditional_pgf(model: ThetaModel, n: int, s: float) -> float:
    """E(s^{Z_n} | tau > n) = (F_n(s) - F_n(0)) / (F_n(1) - F_n(0))."""
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s = {s} outside [0, 1]")
    cc = composite_constants(model, n)
    theta, r = model.theta, model.r
    f0 = pgf_from_constants(theta, r, cc, 0.0)
    f1 = pgf_from_constants(theta, r, cc, 1.0)
    p_alive = f1 - f0
    if p_alive <= 1e-300:
        raise ConditioningOnNull(
            f"P(tau > {n}) = {p_alive} is numerically zero")
    return (pgf_from_constants(theta, r, cc, s) - f0) / p_alive


# ---------------------------------------------------------------------------
# Limit constants (numeric detection with evidence)
# ---------------------------------------------------------------------------

DETERMINED = "determined"
INFINITE = "infinite"
OSCILLATING = "oscillating"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class LimitEstimate:
    status: str
    value: Optional[float]
    rule: str

    @property
    def is_determined(self) -> bool:
        return self.status == DETERMINED

    @property
    def is_infinite(self) -> bool:
        return self.status == INFINITE

    def finite_value(self, name: str) -> float:
        if self.status != DETERMINED:
            raise UndeterminedLimit(
                f"limit {name} is {self.status} (rule: {self.rule})")
        return self.value

    def to_dict(self) -> dict:
        return {"status": self.status, "value": self.value, "rule": self.rule}


@dataclass(frozen=True)
class LimitConstants:
    A: LimitEstimate
    C: LimitEstimate
    D: LimitEstimate
    B: LimitEstimate
    horizon_used: int
    evidence: dict

    def to_dict(self) -> dict:
        return {"A": self.A.to_dict(), "C": self.C.to_dict(),
                "D": self.D.to_dict(), "B": self.B.to_dict(),
                "horizon_used": self.horizon_used, "evidence": self.evidence}


def _log_doubling_diffs(cks: Sequence[float]):
    """Doubling-window log increments; None if any value is nonpositive."""
    if any(x <= 0.0 for x in cks):
        return None
    logs = [math.log(x) for x in cks]
    return [logs[i + 1] - logs[i] for i in range(len(logs) - 1)]


def _extrapolate(x_half: float, x_3q: float, x_full: float):
    """Geometric extrapolation of quarter-window increments; None if the
    increments are not decaying consistently."""
    d2 = x_3q - x_half
    d3 = x_full - x_3q
    if d2 == 0.0 and d3 == 0.0:
        return x_full
    if d2 == 0.0 or (d3 > 0) != (d2 > 0):
        return None
    rho = abs(d3) / abs(d2)
    if rho > 0.95:
        return None
    return x_full + d3 * rho / (1.0 - rho)


def _detect_positive_limit(cks: Sequence[float], tol: float,
                           win_gap: float) -> LimitEstimate:
    """Limit detection for a positive sequence from checkpoint values at
    N/8, N/4, N/2, 3N/4, N and the max-min gap over (N/2, N]."""
    x8, x4, x2, x3q, xN = cks
    # raw stabilization (tail increments below tol and no window spread)
    if (abs(xN - x2) <= tol and abs(xN - x3q) <= tol
            and win_gap <= 10.0 * tol):
        return LimitEstimate(DETERMINED, xN, "stabilized")
    if xN > 1.0 / tol and xN >= x2 >= x4:
        return LimitEstimate(INFINITE, None, "exceeded 1/tol while growing")
    dbl = _log_doubling_diffs([x8, x4, x2, xN])
    if dbl is not None:
        d_a, d_b = dbl[-2], dbl[-1]
        if d_b > 0.05 and d_a > 0.05 and d_b >= 0.8 * d_a:
            return LimitEstimate(INFINITE, None,
                                 "log increments not decaying (growth)")
        if d_b < -0.05 and d_a < -0.05 and d_b <= 0.8 * d_a and xN < 0.1:
            return LimitEstimate(DETERMINED, 0.0,
                                 "log increments not decaying (decay to 0)")
    # trend-dominated convergence: window spread explained by the trend
    if win_gap <= 3.0 * abs(xN - x2) + 10.0 * tol:
        est = _extrapolate(x2, x3q, xN)
        if est is not None:
            return LimitEstimate(DETERMINED, max(est, 0.0),
                                 "geometric extrapolation of increments")
    return LimitEstimate(UNDETERMINED, None, "no rule fired")


def _detect_log_limit(cks: Sequence[float], tol: float) -> LimitEstimate:
    """Limit detection for a sequence carried in log domain (used for D).
    Returns the limit of exp(x)."""
    x8, x4, x2, x3q, xN = cks
    if abs(xN - x2) <= tol and abs(xN - x3q) <= tol:
        return LimitEstimate(DETERMINED, math.exp(xN), "stabilized (log)")
    d_a, d_b = x2 - x4, xN - x2
    if d_b < -0.05 and d_a < -0.05 and d_b <= 0.8 * d_a:
        return LimitEstimate(DETERMINED, 0.0,
                             "log diverging to -inf (decay to 0)")
    if d_b > 0.05 and d_a > 0.05 and d_b >= 0.8 * d_a:
        return LimitEstimate(INFINITE, None, "log diverging to +inf")
    est = _extrapolate(x2, x3q, xN)
    if est is not None:
        return LimitEstimate(DETERMINED, math.exp(est),
                             "geometric extrapolation (log)")
    return LimitEstimate(UNDETERMINED, None, "no rule fired")


def _detect_B_limit(cks: Sequence[float], tol: float, win1: tuple,
                    win2: tuple) -> LimitEstimate:
    """B_n = C_n / A_n with an oscillation marker.  win1/win2 are (min, max)
    over (N/4, N/2] and (N/2, N]."""
    x8, x4, x2, x3q, xN = cks
    min1, max1 = win1
    min2, max2 = win2
    if min2 > max(100.0, 1.8 * min1) or min2 > 1.0 / tol:
        return LimitEstimate(INFINITE, None, "window liminf diverging")
    gap2 = max2 - min2
    if (abs(xN - x2) <= tol and abs(xN - x3q) <= tol
            and gap2 <= 10.0 * tol):
        return LimitEstimate(DETERMINED, xN, "stabilized")
    if gap2 <= max(10.0 * tol, 1e-3 * max(1.0, abs(xN))):
        est = _extrapolate(x2, x3q, xN)
        return LimitEstimate(DETERMINED,
                             max(est if est is not None else xN, 0.0),
                             "near-constant window")
    if max2 > 5.0 * min2 + 10.0 * tol:
        return LimitEstimate(
            OSCILLATING, None,
            f"window liminf/limsup gap [{min2:.6g}, {max2:.6g}]")
    if gap2 <= 3.0 * abs(xN - x2) + 10.0 * tol:
        est = _extrapolate(x2, x3q, xN)
        if est is not None:
            return LimitEstimate(DETERMINED, max(est, 0.0),
                                 "geometric extrapolation of increments")
    return LimitEstimate(UNDETERMINED, None, "no rule fired")


def limit_constants(model: ThetaModel, horizon: int,
                    tol: float = 1e-6) -> LimitConstants:
    """Estimate the limits of A_n, C_n, D_n, B_n by tail diagnostics over a
    finite horizon.  Never guesses: returns 'undetermined' (or 'oscillating'
    for B) with evidence attached when no rule fires."""
    if horizon < 10:
        raise DomainError("horizon must be >= 10")
    if tol <= 0.0:
        raise DomainError("tol must be > 0")
    marks = sorted({horizon // 8, horizon // 4, horizon // 2,
                    3 * horizon // 4, horizon})
    ck = {}
    a_min1 = a_max1 = a_min2 = a_max2 = None
    b_min1 = b_max1 = b_min2 = b_max2 = None
    half, quarter = horizon // 2, horizon // 4
    for cc in constants_iter(model, horizon):
        n = cc.n
        if n in marks:
            ck[n] = cc
        if quarter < n <= half:
            a_min1 = cc.A if a_min1 is None else min(a_min1, cc.A)
            a_max1 = cc.A if a_max1 is None else max(a_max1, cc.A)
            b_min1 = cc.B if b_min1 is None else min(b_min1, cc.B)
            b_max1 = cc.B if b_max1 is None else max(b_max1, cc.B)
        elif n > half:
            a_min2 = cc.A if a_min2 is None else min(a_min2, cc.A)
            a_max2 = cc.A if a_max2 is None else max(a_max2, cc.A)
            b_min2 = cc.B if b_min2 is None else min(b_min2, cc.B)
            b_max2 = cc.B if b_max2 is None else max(b_max2, cc.B)
    order = [horizon // 8, horizon // 4, horizon // 2, 3 * horizon // 4,
             horizon]
    ccs = [ck[n] for n in order]

    A_est = _detect_positive_limit([c.A for c in ccs], tol, a_max2 - a_min2)
    # C_n is nondecreasing: its limit can never be oscillating
    C_est = _detect_positive_limit([c.C for c in ccs], tol,
                                   ccs[-1].C - ck[half].C)
    if all(c.log_D is not None for c in ccs):
        D_est = _detect_log_limit([c.log_D for c in ccs], tol)
    else:
        D_est = LimitEstimate(UNDETERMINED, None, "log D not defined")
    B_est = _detect_B_limit([c.B for c in ccs], tol,
                            (b_min1, b_max1), (b_min2, b_max2))

    evidence = {
        "checkpoints": {str(c.n): {"A": c.A, "C": c.C, "B": c.B,
                                   "log_D": c.log_D} for c in ccs},
        "A_window": {"min": a_min2, "max": a_max2},
        "B_window_first": {"min": b_min1, "max": b_max1},
        "B_window_second": {"min": b_min2, "max": b_max2},
    }
    return LimitConstants(A_est, C_est, D_est, B_est, horizon, evidence)


def subsequence_b_values(model: ThetaModel,
                         indices: Sequence[int]) -> list[float]:
    """B_{k_n} along an explicit subsequence (for the oscillating regime)."""
    cs = constants_at(model, indices)
    return [cs[int(k)].B for k in indices]


# ---------------------------------------------------------------------------
# Absorption probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AbsorptionProbabilities:
    q: float
    q_delta: float

    @property
    def Q(self) -> float:
        return self.q + self.q_delta

    def to_dict(self) -> dict:
        return {"q": self.q, "q_delta": self.q_delta, "Q": self.Q}


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def absorption_probabilities(model: ThetaModel,
                             limits: LimitConstants) -> AbsorptionProbabilities:
    """(q, q_Delta, Q) from the limit constants, by case."""
    theta, r, case = model.theta, model.r, model.case_label
    if case == "a":
        if limits.C.is_infinite:
            return AbsorptionProbabilities(1.0, 0.0)
        C = limits.C.finite_value("C")
        if limits.A.is_infinite:
            return AbsorptionProbabilities(1.0, 0.0)
        A = limits.A.finite_value("A")
        return AbsorptionProbabilities(
            _clamp01(1.0 - (A + C) ** (-1.0 / theta)), 0.0)
    if case in ("b", "d"):
        A = limits.A.finite_value("A")
        C = limits.C.finite_value("C")
        q = r - (A * r ** (-theta) + C) ** (-1.0 / theta)
        q_delta = 1.0 - r + (A * (r - 1.0) ** (-theta) + C) ** (-1.0 / theta)
        return AbsorptionProbabilities(_clamp01(q), _clamp01(q_delta))
    if case == "c":
        alpha = -1.0 / theta
        A = limits.A.finite_value("A")
        C = limits.C.finite_value("C")
        return AbsorptionProbabilities(_clamp01(1.0 - (A + C) ** alpha),
                                       _clamp01(C ** alpha))
    if case == "e":
        D = limits.D.finite_value("D")
        return AbsorptionProbabilities(_clamp01(1.0 - D), 0.0)
    # case "f"
    A = limits.A.finite_value("A")
    D = limits.D.finite_value("D")
    q = r - r ** A * D
    q_delta = 1.0 - r + (r - 1.0) ** A * D
    return AbsorptionProbabilities(_clamp01(q), _clamp01(q_delta))


# ---------------------------------------------------------------------------
# Limit-law descriptors
# ---------------------------------------------------------------------------

LAPLACE = "laplace_transform"
PGF = "pgf"
CDF = "cdf"

_ZERO_LIMIT = 1e-9  # determined limit values at or below this count as zero


@dataclass(frozen=True)
class LimitLawDescriptor:
    """A limit law: its transform kind, parameters, and the normalization
    applied to Z_n before comparing against it."""

    theorem_id: str
    kind: str
    parameters: tuple
    scaling: str

    def param(self, name: str) -> float:
        for key, val in self.parameters:
            if key == name:
                return val
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"theorem_id": self.theorem_id, "kind": self.kind,
                "parameters": dict(self.parameters), "scaling": self.scaling}

    def evaluate(self, x: float) -> float:
        tid = self.theorem_id
        if tid == "T1":
            theta, C = self.param("theta"), self.param("C")
            if x == 0.0:
                return 1.0
            return 1.0 - (x ** (-theta) + C) ** (-1.0 / theta)
        if tid == "T2":
            theta, A, C = (self.param("theta"), self.param("A"),
                           self.param("C"))
            if x == 1.0:
                return 1.0
            return 1.0 - (A * (1.0 - x) ** (-theta) + C) ** (-1.0 / theta)
        if tid in ("T3", "T5i"):
            theta = self.param("theta")
            if x == 0.0:
                return 1.0
            return 1.0 - (1.0 + x ** (-theta)) ** (-1.0 / theta)
        if tid in ("T4", "T5ii"):
            # pgf of the conditional limit: 1 - ((w+B)/(1+B))^(-1/theta)
            # with w = (1-s)^(-theta); it vanishes at s=0 and has mean
            # (1+B)^(1/theta)
            theta, B = self.param("theta"), self.param("B")
            if x == 1.0:
                return 1.0
            w = (1.0 - x) ** (-theta)
            return 1.0 - ((w + B) / (1.0 + B)) ** (-1.0 / theta)
        if tid == "T6i":
            return 1.0 - math.exp(-x)
        if tid == "T6ii":
            return 1.0 - math.exp(-x) * self.param("D")
        if tid == "T6iii":
            return 1.0 - (1.0 - x) ** self.param("A")
        if tid == "T6iv":
            return 1.0 - (1.0 - x) ** self.param("A") * self.param("D")
        if tid == "T7i":
            theta, r = self.param("theta"), self.param("r")
            return (((r - x) ** (-theta) - r ** (-theta))
                    / ((r - 1.0) ** (-theta) - r ** (-theta)))
        if tid == "T7ii":
            theta, r = self.param("theta"), self.param("r")
            A, C = self.param("A"), self.param("C")
            return r - (A * (r - x) ** (-theta) + C) ** (-1.0 / theta)
        if tid == "T8i":
            alpha, r = self.param("alpha"), self.param("r")
            ia = 1.0 / alpha
            return (r ** ia - (r - x) ** ia) / (r ** ia - (r - 1.0) ** ia)
        if tid == "T8ii":
            alpha, r = self.param("alpha"), self.param("r")
            A, C = self.param("A"), self.param("C")
            return r - (A * (r - x) ** (1.0 / alpha) + C) ** alpha
        if tid == "T9i":
            r = self.param("r")
            return ((math.log(r) - math.log(r - x))
                    / (math.log(r) - math.log(r - 1.0)))
        if tid == "T9ii":
            r, A, D = self.param("r"), self.param("A"), self.param("D")
            return r - (r - x) ** A * D
        if tid == "T10i":
            return 1.0 - (1.0 - x) ** (1.0 / self.param("alpha"))
        if tid == "T10ii":
            alpha = self.param("alpha")
            A, C = self.param("A"), self.param("C")
            return 1.0 - (A * (1.0 - x) ** (1.0 / alpha) + C) ** alpha
        raise AssertionError(tid)


def _is_zero(est: LimitEstimate) -> bool:
    return est.is_determined and est.value <= _ZERO_LIMIT


def limit_law(model: ThetaModel, limits: LimitConstants,
              subsequence: Optional[Sequence[int]] = None) -> LimitLawDescriptor:
    """The limit law matching the regime.  In the oscillating regime a law
    exists only along an explicit subsequence, which the caller supplies as
    the index sequence itself."""
    theta, r, case = model.theta, model.r, model.case_label

    if case == "a":
        if subsequence is not None:
            bs = subsequence_b_values(model, subsequence)
            tail = bs[len(bs) // 2:]
            lo, hi = min(tail), max(tail)
            if lo > max(100.0, 2.0 * min(bs[:max(1, len(bs) // 2)])):
                return LimitLawDescriptor(
                    "T5i", LAPLACE, (("theta", theta),),
                    "Laplace argument lambda_n = lambda * B_kn^(-1/theta), "
                    "conditioned on Z_kn > 0")
            if hi - lo <= 0.05 * max(1.0, abs(hi)):
                return LimitLawDescriptor(
                    "T5ii", PGF, (("theta", theta), ("B", tail[-1])),
                    "pgf of Z_kn conditioned on Z_kn > 0")
            raise NoLimitLaw(
                "B does not settle along the supplied subsequence")
        if not (limits.C.is_determined or limits.C.is_infinite):
            raise UndeterminedLimit("limit C is undetermined")
        if limits.C.is_determined:
            C = limits.C.value
            if _is_zero(limits.A):
                return LimitLawDescriptor(
                    "T1", LAPLACE, (("theta", theta), ("C", C)),
                    "multiply Z_n by A_n^(1/theta)")
            if limits.A.is_infinite:
                return LimitLawDescriptor(
                    "T4", PGF, (("theta", theta), ("B", 0.0)),
                    "pgf of Z_n conditioned on Z_n > 0")
            A = limits.A.finite_value("A")
            return LimitLawDescriptor(
                "T2", PGF, (("theta", theta), ("A", A), ("C", C)),
                "pgf of Z_n (no scaling; almost-sure limit)")
        # C = +inf
        if limits.B.is_infinite:
            return LimitLawDescriptor(
                "T3", LAPLACE, (("theta", theta),),
                "Laplace argument lambda_n = lambda * B_n^(-1/theta), "
                "conditioned on Z_n > 0")
        if limits.B.is_determined:
            return LimitLawDescriptor(
                "T4", PGF, (("theta", theta), ("B", limits.B.value)),
                "pgf of Z_n conditioned on Z_n > 0")
        if limits.B.status == OSCILLATING:
            raise NoLimitLaw(
                "loosely subcritical regime: supply an explicit subsequence")
        raise UndeterminedLimit("limit B is undetermined")

    if case == "e":
        a_zero = _is_zero(limits.A)
        d_zero = _is_zero(limits.D)
        A = limits.A.finite_value("A")
        D = limits.D.finite_value("D")
        if a_zero and d_zero:
            return LimitLawDescriptor(
                "T6i", CDF, (), "multiply ln Z_n by A_n, conditioned on "
                "Z_n > 0")
        if a_zero:
            return LimitLawDescriptor(
                "T6ii", CDF, (("D", D),), "multiply ln Z_n by A_n")
        if d_zero:
            return LimitLawDescriptor(
                "T6iii", PGF, (("A", A),),
                "pgf of Z_n conditioned on Z_n > 0")
        return LimitLawDescriptor(
            "T6iv", PGF, (("A", A), ("D", D)),
            "pgf of Z_n (no scaling; almost-sure limit)")

    if case == "b":
        C = limits.C.finite_value("C")
        if _is_zero(limits.A):
            return LimitLawDescriptor(
                "T7i", PGF, (("theta", theta), ("r", r), ("C", C)),
                "pgf of Z_n conditioned on tau > n")
        A = limits.A.finite_value("A")
        return LimitLawDescriptor(
            "T7ii", PGF, (("theta", theta), ("r", r), ("A", A), ("C", C)),
            "restricted pgf E(s^{Z_n}; tau_Delta > n) (no scaling)")

    if case == "d":
        alpha = -1.0 / theta
        C = limits.C.finite_value("C")
        if _is_zero(limits.A):
            return LimitLawDescriptor(
                "T8i", PGF, (("alpha", alpha), ("r", r), ("C", C)),
                "pgf of Z_n conditioned on tau > n")
        A = limits.A.finite_value("A")
        return LimitLawDescriptor(
            "T8ii", PGF, (("alpha", alpha), ("r", r), ("A", A), ("C", C)),
            "restricted pgf E(s^{Z_n}; tau_Delta > n) (no scaling)")

    if case == "f":
        D = limits.D.finite_value("D")
        if _is_zero(limits.A):
            return LimitLawDescriptor(
                "T9i", PGF, (("r", r),),
                "pgf of Z_n conditioned on tau > n")
        A = limits.A.finite_value("A")
        return LimitLawDescriptor(
            "T9ii", PGF, (("r", r), ("A", A), ("D", D)),
            "restricted pgf E(s^{Z_n}; tau_Delta > n) (no scaling)")

    # case "c"
    alpha = -1.0 / theta
    C = limits.C.finite_value("C")
    if _is_zero(limits.A):
        return LimitLawDescriptor(
            "T10i", PGF, (("alpha", alpha), ("C", C)),
            "pgf of Z_n conditioned on tau > n")
    A = limits.A.finite_value("A")
    return LimitLawDescriptor(
        "T10ii", PGF, (("alpha", alpha), ("A", A), ("C", C)),
        "restricted pgf E(s^{Z_n}; tau > n) (no scaling)")


# ---------------------------------------------------------------------------
# Convergence-condition diagnostics
# ---------------------------------------------------------------------------

HOLDS = "holds"
FAILS = "fails"


@dataclass(frozen=True)
class ConvergenceReport:
    church_lindvall: str
    sum_one_minus_a: float
    condition_a0: str
    condition_A1: str
    tilde_cl: str
    horizon: int
    partial_sums: dict

    def to_dict(self) -> dict:
        return {"church_lindvall": self.church_lindvall,
                "sum_one_minus_a": self.sum_one_minus_a,
                "condition_a0": self.condition_a0,
                "condition_A1": self.condition_A1,
                "tilde_cl": self.tilde_cl,
                "horizon": self.horizon,
                "partial_sums": self.partial_sums}


def _series_verdict(s_quarter: float, s_half: float, s_full: float) -> str:
    """Summability verdict for a nonnegative-term series from partial sums at
    N/4, N/2, N: doubling-window increments that do not decay signal
    divergence; geometrically decaying increments signal convergence."""
    if math.isinf(s_full):
        return FAILS
    d1 = s_half - s_quarter
    d2 = s_full - s_half
    if d2 <= 1e-10:
        return HOLDS
    if d1 <= 0.0:
        return UNDETERMINED
    ratio = d2 / d1
    if ratio <= 0.8:
        return HOLDS
    if ratio >= 0.95:
        return FAILS
    return UNDETERMINED


def _step_pgf_value_at_one(theta: float, r: float, a: float,
                           c: float) -> float:
    if theta == 0.0:
        return r - (r - c) ** (1.0 - a) * (r - 1.0) ** a
    if r == 1.0:
        return 1.0 if theta > 0.0 else 1.0 - c ** (-1.0 / theta)
    return r - (a * (r - 1.0) ** (-theta) + c) ** (-1.0 / theta)


def convergence_conditions(model: ThetaModel, horizon: int) -> ConvergenceReport:
    """Partial-sum diagnostics for the almost-sure-convergence conditions:
    sum(1 - p_n(1)) (Church-Lindvall), sum(1 - a_n), the defective variant
    with the normalized one-step laws, and sum (1-a_n) ln 1/(1-c_n)."""
    if horizon < 10:
        raise DomainError("horizon must be >= 10")
    theta, r = model.theta, model.r
    marks = (horizon // 4, horizon // 2, horizon)
    sums = {"cl": 0.0, "one_minus_a": 0.0, "A1": 0.0, "tilde": 0.0}
    snap = {key: [] for key in sums}
    for n in range(1, horizon + 1):
        a, c = model.step(n)
        p1 = step_pgf_weight_one(model, n)
        sums["cl"] += 1.0 - p1
        sums["one_minus_a"] += abs(1.0 - a)
        log1mc = model.c_seq.log_one_minus(n)
        if log1mc is not None:
            sums["A1"] += -(1.0 - a) * log1mc
        else:
            sums["A1"] = math.inf
        f1 = _step_pgf_value_at_one(theta, r, a, c)
        if theta == 0.0:
            lg = model.log_r_minus_c(n)
            fprime0 = a * math.exp((1.0 - a) * lg + (a - 1.0) * math.log(r))
        else:
            fprime0 = (a * r ** (-theta - 1.0)
                       * (a * r ** (-theta) + c) ** (-1.0 / theta - 1.0))
        sums["tilde"] += 1.0 - fprime0 / f1
        if n in marks:
            for key in sums:
                snap[key].append(sums[key])
    verdicts = {key: _series_verdict(*snap[key]) for key in sums}
    if verdicts["one_minus_a"] == HOLDS:
        d2 = snap["one_minus_a"][2] - snap["one_minus_a"][1]
        d1 = snap["one_minus_a"][1] - snap["one_minus_a"][0]
        rho = min(0.9, d2 / d1) if d1 > 0 else 0.0
        sum_a = snap["one_minus_a"][2] + (d2 * rho / (1.0 - rho) if rho else 0)
    else:
        sum_a = math.inf
    return ConvergenceReport(
        church_lindvall=verdicts["cl"],
        sum_one_minus_a=sum_a,
        condition_a0=verdicts["one_minus_a"],
        condition_A1=verdicts["A1"],
        tilde_cl=verdicts["tilde"],
        horizon=horizon,
        partial_sums={key: snap[key] for key in sums})


# ---------------------------------------------------------------------------
# Tabular export
# ---------------------------------------------------------------------------

def constants_table(model: ThetaModel, ns: Sequence[int]) -> list[dict]:
    """Rows (n, A_n, C_n, D_n, B_n, F_n(0), F_n(1), means) for export."""
    cs = constants_at(model, ns)
    rows = []
    for n in sorted(cs):
        cc = cs[n]
        row = {"n": n, "A_n": cc.A, "C_n": cc.C,
               "D_n": cc.D, "B_n": cc.B}
        if n >= 1:
            f0 = pgf_from_constants(model.theta, model.r, cc, 0.0)
            f1 = pgf_from_constants(model.theta, model.r, cc, 1.0)
            row["F_n(0)"] = f0
            row["F_n(1)"] = f1
            row["mean_restricted"] = restricted_mean_from_constants(
                model.theta, model.r, cc, model.case_label)
        rows.append(row)
    return rows
