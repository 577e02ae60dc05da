"""Truncated pmf extraction from the parametric generating functions.

Every generating function in the family has the shape
    g(s) = r - (a (r-s)^(-theta) + c)^(-1/theta)        (theta != 0)
    g(s) = r - d (r-s)^a                                (theta == 0)
so one coefficient engine serves both the one-step laws and the composed
population laws.  Coefficients of the outer fractional power come from the
standard power recurrence for h = u^gamma given the series u.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .analytics import composite_constants
from .environment import ThetaModel
from .errors import CutoffExceeded, DomainError, GwThetaError

log = logging.getLogger(__name__)

DEFAULT_TAIL_TOL = 1e-12
DEFAULT_MAX_CUTOFF = 2 ** 20
NEGATIVE_CLIP = 1e-14


@dataclass(frozen=True, eq=False)
class Pmf:
    """Truncated probability mass function with explicit tail and defect mass.

    weights[j] = P(j) for j = 0..cutoff; tail_mass is the proper mass above
    the cutoff; defect_mass = 1 - g(1) is the mass on the absorbing symbol.
    source carries (theta, r, a, c, log_d) so the law can be re-expanded to a
    larger cutoff without external context.
    """

    weights: np.ndarray
    tail_mass: float
    defect_mass: float
    cutoff: int
    source: tuple

    def __post_init__(self):
        self.weights.setflags(write=False)

    @property
    def total(self) -> float:
        return float(math.fsum(self.weights) + self.tail_mass
                     + self.defect_mass)

    def weight(self, j: int) -> float:
        return float(self.weights[j])

    def mean_truncated(self) -> float:
        j = np.arange(len(self.weights))
        return float(np.dot(j, self.weights))


def _g_at_one(theta: float, r: float, a: float, c: float,
              log_d) -> float:
    """g(1) in closed form; 1 - g(1) is the defect mass."""
    if theta == 0.0:
        if r == 1.0:
            return 1.0
        return r - math.exp(log_d + a * math.log(r - 1.0))
    if r == 1.0:
        # (r-1)^(-theta) is +inf for theta > 0 and 0 for theta < 0
        if theta > 0.0:
            return 1.0
        return 1.0 - c ** (-1.0 / theta)
    return r - (a * (r - 1.0) ** (-theta) + c) ** (-1.0 / theta)


def _coeffs_theta(theta: float, r: float, a: float, c: float,
                  J: int) -> np.ndarray:
    """Taylor weights p_0..p_J of r - (a(r-s)^(-theta) + c)^(-1/theta).

    u(s) = a(r-s)^(-theta) + c has coefficients from the generalized binomial
    expansion; v = u^(-1/theta) follows the power recurrence
        m u_0 v_m = sum_{j=1..m} ((gamma+1) j - m) u_j v_{m-j}.
    """
    gamma = -1.0 / theta
    u = np.empty(J + 1)
    u[0] = a * r ** (-theta)
    # u_{j+1}/u_j = (theta + j) / ((j+1) r)
    j = np.arange(J, dtype=float)
    np.cumprod((theta + j) / ((j + 1.0) * r), out=u[1:])
    u[1:] *= u[0]
    u[0] += c
    ju = np.arange(J + 1, dtype=float) * u
    v = np.empty(J + 1)
    v[0] = u[0] ** gamma
    inv_u0 = 1.0 / u[0]
    for m in range(1, J + 1):
        vr = v[m - 1::-1]
        acc = (gamma + 1.0) * np.dot(ju[1:m + 1], vr) \
            - m * np.dot(u[1:m + 1], vr)
        v[m] = acc * inv_u0 / m
    p = -v
    p[0] = r - v[0]
    return p


def _coeffs_theta_zero(r: float, a: float, log_d: float,
                       J: int) -> np.ndarray:
    """Taylor weights of r - d (r-s)^a (binomial series, O(J))."""
    p = np.empty(J + 1)
    p[0] = r - math.exp(log_d + a * math.log(r))
    if J >= 1:
        p[1] = a * math.exp(log_d + (a - 1.0) * math.log(r))
        if J >= 2:
            # p_{j+1}/p_j = (j - a) / ((j+1) r)
            j = np.arange(1, J, dtype=float)
            np.cumprod((j - a) / ((j + 1.0) * r), out=p[2:])
            p[2:] *= p[1]
    return p


def _build(theta: float, r: float, a: float, c: float, log_d,
           tail_tol: float, max_cutoff: int) -> Pmf:
    if tail_tol <= 0.0:
        raise DomainError("tail_tol must be > 0")
    if max_cutoff < 1:
        raise DomainError("max_cutoff must be >= 1")
    g1 = _g_at_one(theta, r, a, c, log_d)
    defect = max(0.0, 1.0 - g1)
    J = min(64, max_cutoff)
    prev_tail = None
    while True:
        if theta == 0.0:
            p = _coeffs_theta_zero(r, a, log_d, J)
        else:
            p = _coeffs_theta(theta, r, a, c, J)
        worst = float(p.min())
        if worst < 0.0:
            if worst < -NEGATIVE_CLIP:
                raise GwThetaError(
                    f"negative pmf coefficient {worst} at cutoff {J}; "
                    "true coefficients are nonnegative, so the parameters "
                    "(or their validation) are inconsistent")
            log.debug("clipped negative round-off of magnitude %g", -worst)
            p = np.where(p < 0.0, 0.0, p)
        tail = g1 - math.fsum(p)
        if tail <= tail_tol:
            pmf = Pmf(p, max(0.0, tail), defect, J,
                      (theta, r, a, c, log_d))
            return pmf
        hopeless = False
        if J >= 1024 and prev_tail is not None and tail > 0.0:
            # projected cutoff from the observed per-doubling tail decay;
            # heavy tails (rate ~ J^-(1+theta)) would otherwise burn the
            # whole quadratic budget before reporting failure
            rho = tail / prev_tail
            if rho >= 0.999:
                hopeless = True
            else:
                doublings = math.log(tail_tol / tail) / math.log(rho)
                hopeless = J * 2.0 ** doublings > max_cutoff
        if J >= max_cutoff or hopeless:
            partial = Pmf(p, max(0.0, tail), defect, J,
                          (theta, r, a, c, log_d))
            raise CutoffExceeded(
                f"tail mass {tail:.3e} cannot reach tail_tol {tail_tol:.3e} "
                f"within the cutoff budget {max_cutoff} (heavy-tailed law; "
                "raise max_cutoff or tail_tol)", partial=partial)
        prev_tail = tail
        J = min(2 * J, max_cutoff)


def pmf_from_theta_pgf(theta: float, r: float, a_coef: float,
                       c_coef: float = 0.0, *, d_coef: float = None,
                       tail_tol: float = DEFAULT_TAIL_TOL,
                       max_cutoff: int = DEFAULT_MAX_CUTOFF) -> Pmf:
    """Pmf of the law with pgf r - (a(r-s)^(-theta) + c)^(-1/theta), or for
    theta = 0 the law with pgf r - d (r-s)^a where d = (r-c)^(1-a) by default
    (one-step form) or d_coef when supplied (composite form)."""
    if a_coef <= 0.0:
        raise DomainError("a_coef must be > 0")
    if theta == 0.0:
        if d_coef is not None:
            if d_coef <= 0.0:
                raise DomainError("d_coef must be > 0")
            log_d = math.log(d_coef)
        else:
            if c_coef >= r:
                raise DomainError("c_coef must be < r when theta = 0")
            log_d = (1.0 - a_coef) * math.log(r - c_coef)
        return _build(0.0, r, a_coef, 0.0, log_d, tail_tol, max_cutoff)
    if c_coef < 0.0:
        raise DomainError("c_coef must be >= 0")
    return _build(theta, r, a_coef, c_coef, None, tail_tol, max_cutoff)


def step_pmf(model: ThetaModel, n: int,
             tail_tol: float = DEFAULT_TAIL_TOL,
             max_cutoff: int = DEFAULT_MAX_CUTOFF) -> Pmf:
    """Offspring pmf at generation n (the law with pgf f_n)."""
    a, c = model.step(n)
    if model.theta == 0.0:
        lg = model.log_r_minus_c(n)
        if lg is None:
            raise DomainError(f"r - c_{n} <= 0")
        return _build(0.0, model.r, a, 0.0, (1.0 - a) * lg,
                      tail_tol, max_cutoff)
    return _build(model.theta, model.r, a, c, None, tail_tol, max_cutoff)


def population_pmf(model: ThetaModel, n: int,
                   tail_tol: float = DEFAULT_TAIL_TOL,
                   max_cutoff: int = DEFAULT_MAX_CUTOFF) -> Pmf:
    """Pmf of Z_n, built directly from the composite parameters (the family
    is closed under composition, so no convolution over generations)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    cc = composite_constants(model, n)
    if model.theta == 0.0:
        if cc.log_D is None:
            raise DomainError("composite log D undefined for this model")
        return _build(0.0, model.r, cc.A, 0.0, cc.log_D,
                      tail_tol, max_cutoff)
    return _build(model.theta, model.r, cc.A, cc.C, None,
                  tail_tol, max_cutoff)


def extend_pmf(pmf: Pmf, cutoff: int) -> Pmf:
    """Recompute the same law with a larger cutoff (prefix weights are
    unchanged; only the tail is resolved further)."""
    if cutoff <= pmf.cutoff:
        return pmf
    theta, r, a, c, log_d = pmf.source
    g1 = 1.0 - pmf.defect_mass
    if theta == 0.0:
        p = _coeffs_theta_zero(r, a, log_d, cutoff)
    else:
        p = _coeffs_theta(theta, r, a, c, cutoff)
    p = np.where((p < 0.0) & (p >= -NEGATIVE_CLIP), 0.0, p)
    if float(p.min()) < 0.0:
        raise GwThetaError(
            f"negative pmf coefficient {p.min()} at cutoff {cutoff}")
    tail = max(0.0, g1 - math.fsum(p))
    return Pmf(p, tail, pmf.defect_mass, cutoff, pmf.source)


def write_pmf_csv(pmf: Pmf, fh) -> None:
    """Rows (j, weight) with footer rows for tail, defect and cutoff."""
    fh.write("j,weight\n")
    for j, w in enumerate(pmf.weights):
        fh.write(f"{j},{w:.17g}\n")
    fh.write(f"tail_mass,{pmf.tail_mass:.17g}\n")
    fh.write(f"defect_mass,{pmf.defect_mass:.17g}\n")
    fh.write(f"cutoff,{pmf.cutoff}\n")
