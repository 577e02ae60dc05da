"""Parametric model definition: theta, r, the environment sequences (a_n, c_n),
and the one-step generating functions.

The admissible parameter region splits into six rows keyed by (theta, r):

    (a) theta in (0,1],  r = 1:  0 < a_n,        c_n > 0, c_n >= 1 - a_n
    (b) theta in (0,1],  r > 1:  0 < a_n < 1,    (1-a_n) r^-t <= c_n <= (1-a_n)(r-1)^-t
    (c) theta in (-1,0), r = 1:  0 < a_n < 1,    0 < c_n <= 1 - a_n
    (d) theta in (-1,0), r > 1:  0 < a_n < 1,    (1-a_n)(r-1)^-t <= c_n <= (1-a_n) r^-t
    (e) theta = 0,       r = 1:  0 < a_n < 1,    0 <= c_n < 1
    (f) theta = 0,       r > 1:  0 < a_n < 1,    0 <= c_n <= 1

with t = theta.  theta = -1 is rejected outright.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .errors import DomainError, RejectedParameter

# Slack absorbed on the closed interval bounds of cases (b), (d), (f); values
# like (1-a_n)(r-1)^-theta rarely round exactly.
BOUND_SLACK = 1e-12

SEQUENCE_FAMILIES = (
    "harmonic",
    "convergent",
    "proportional_c",
    "negative_proportional_c",
    "alternating_ex3",
    "superharmonic_ex4",
    "dyadic_ex5",
    "exp_tail_ex6",
    "constant",
    "table",
)


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class EnvSequence:
    """Deterministic index-addressable sequence: value at n depends only on
    (family, params, n), so horizons up to 1e6 cost O(1) memory."""

    family: str
    params: tuple = ()
    table: tuple = ()
    tail_rule: str = "repeat_last"  # or "error"

    def __post_init__(self):
        if self.family not in SEQUENCE_FAMILIES:
            raise RejectedParameter(f"unknown sequence family {self.family!r}",
                                    constraint="family")
        # canonical key order so serialization round-trips compare equal
        object.__setattr__(self, "params",
                           tuple(sorted(self.params, key=lambda kv: kv[0])))

    def _param(self, name: str, default=None):
        for key, val in self.params:
            if key == name:
                return val
        if default is None:
            raise RejectedParameter(
                f"family {self.family!r} requires parameter {name!r}",
                constraint=name)
        return default

    def value(self, n: int) -> float:
        """Value at index n >= 1."""
        if n < 1:
            raise DomainError(f"sequence index must be >= 1, got {n}")
        fam = self.family
        if fam == "harmonic":
            return n / (n + 1)
        if fam == "convergent":
            return n * (n + 3) / ((n + 1) * (n + 2))
        if fam == "constant":
            return float(self._param("value"))
        if fam == "proportional_c":
            sigma = float(self._param("sigma"))
            return (1.0 - self._param("a").value(n)) * sigma
        if fam == "negative_proportional_c":
            sigma = float(self._param("sigma"))
            return (self._param("a").value(n) - 1.0) * sigma
        if fam == "alternating_ex3":
            role = self._param("role")
            if role == "a":
                if n == 1:
                    return 0.5
                return 4.0 if n % 2 == 0 else 0.25
            return 1.0 if n % 2 == 1 else 2.0
        if fam == "superharmonic_ex4":
            role = self._param("role")
            if role == "a":
                return (n + 1) / n
            return 1.0 / (n * n * (n + 1))
        if fam == "dyadic_ex5":
            role = self._param("role")
            if role == "a":
                if _is_power_of_two(n + 1):
                    return float(n)
                if _is_power_of_two(n):
                    return 1.0 / (n - 1) if n > 1 else 1.0
                return 1.0
            if _is_power_of_two(n) and n > 2:
                return 1.0
            return 1.0 / (n * n)
        if fam == "exp_tail_ex6":
            sigma = float(self._param("sigma"))
            # clamp below 1: for n^sigma > 36 the float would round to 1.0;
            # exact log(1 - c_n) stays available via log_one_minus
            return min(-math.expm1(-float(n) ** sigma),
                       math.nextafter(1.0, 0.0))
        if fam == "table":
            if n <= len(self.table):
                return self.table[n - 1]
            if self.tail_rule == "repeat_last" and self.table:
                return self.table[-1]
            raise DomainError(
                f"index {n} beyond table of length {len(self.table)} "
                f"(tail_rule={self.tail_rule!r})")
        raise AssertionError(fam)

    def log_one_minus(self, n: int):
        """ln(1 - value(n)) without the catastrophic cancellation near 1;
        None when value(n) >= 1."""
        if self.family == "exp_tail_ex6":
            return -float(n) ** float(self._param("sigma"))
        v = self.value(n)
        if v >= 1.0:
            return None
        return math.log1p(-v)

    # -- convenience constructors -------------------------------------------

    @staticmethod
    def harmonic() -> "EnvSequence":
        return EnvSequence("harmonic")

    @staticmethod
    def convergent() -> "EnvSequence":
        return EnvSequence("convergent")

    @staticmethod
    def constant(value: float) -> "EnvSequence":
        return EnvSequence("constant", (("value", float(value)),))

    @staticmethod
    def proportional_c(sigma: float, a_seq: "EnvSequence") -> "EnvSequence":
        return EnvSequence("proportional_c",
                           (("sigma", float(sigma)), ("a", a_seq)))

    @staticmethod
    def negative_proportional_c(sigma: float,
                                a_seq: "EnvSequence") -> "EnvSequence":
        return EnvSequence("negative_proportional_c",
                           (("sigma", float(sigma)), ("a", a_seq)))

    @staticmethod
    def alternating_ex3(role: str) -> "EnvSequence":
        return EnvSequence("alternating_ex3", (("role", role),))

    @staticmethod
    def superharmonic_ex4(role: str) -> "EnvSequence":
        return EnvSequence("superharmonic_ex4", (("role", role),))

    @staticmethod
    def dyadic_ex5(role: str) -> "EnvSequence":
        return EnvSequence("dyadic_ex5", (("role", role),))

    @staticmethod
    def exp_tail_ex6(sigma: float) -> "EnvSequence":
        return EnvSequence("exp_tail_ex6", (("sigma", float(sigma)),))

    @staticmethod
    def from_table(values, tail_rule: str = "repeat_last") -> "EnvSequence":
        return EnvSequence("table", (), tuple(float(v) for v in values),
                           tail_rule)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        params: dict[str, Any] = {}
        for key, val in self.params:
            params[key] = val.to_dict() if isinstance(val, EnvSequence) else val
        out: dict[str, Any] = {"family": self.family, "params": params}
        if self.family == "table":
            out["table"] = list(self.table)
            out["tail_rule"] = self.tail_rule
        return out

    @staticmethod
    def from_dict(spec: dict) -> "EnvSequence":
        family = spec["family"]
        raw = spec.get("params", {}) or {}
        params = []
        for key in sorted(raw):
            val = raw[key]
            if isinstance(val, dict) and "family" in val:
                val = EnvSequence.from_dict(val)
            params.append((key, val))
        return EnvSequence(family, tuple(params),
                           tuple(spec.get("table", ())),
                           spec.get("tail_rule", "repeat_last"))


def _case_label(theta: float, r: float) -> str:
    if theta == -1.0:
        raise RejectedParameter("theta = -1 is a trivial case and is rejected",
                                constraint="theta")
    if not (-1.0 < theta <= 1.0):
        raise RejectedParameter(f"theta must lie in (-1, 1], got {theta}",
                                constraint="theta")
    if r < 1.0:
        raise RejectedParameter(f"r must be >= 1, got {r}", constraint="r")
    if theta > 0.0:
        return "a" if r == 1.0 else "b"
    if theta < 0.0:
        return "c" if r == 1.0 else "d"
    return "e" if r == 1.0 else "f"


def _check_index(case: str, theta: float, r: float, a: float, c: float,
                 n: int) -> None:
    """Raise RejectedParameter if (a_n, c_n) violates its row."""

    def bad(constraint: str):
        raise RejectedParameter(
            f"case ({case}): (a_{n}, c_{n}) = ({a}, {c}) violates "
            f"{constraint}", index=n, constraint=constraint)

    if not (a > 0.0) or not math.isfinite(a):
        bad("a_n > 0")
    if case != "a" and not a < 1.0:
        # boundary a_n >= 1 is permitted only in case (a)
        bad("a_n < 1")
    if case == "a":
        if not c > 0.0:
            bad("c_n > 0")
        if c < 1.0 - a - BOUND_SLACK:
            bad("c_n >= 1 - a_n")
    elif case in ("b", "d"):
        lo = (1.0 - a) * r ** (-theta)
        hi = (1.0 - a) * (r - 1.0) ** (-theta)
        if case == "d":
            lo, hi = hi, lo
        if c < lo - BOUND_SLACK:
            bad("c_n >= lower admissibility bound")
        if c > hi + BOUND_SLACK:
            bad("c_n <= upper admissibility bound")
    elif case == "c":
        if not c > 0.0:
            bad("c_n > 0")
        if c > 1.0 - a + BOUND_SLACK:
            bad("c_n <= 1 - a_n")
    elif case == "e":
        if c < 0.0:
            bad("c_n >= 0")
        if not c < 1.0:
            bad("c_n < 1")
    elif case == "f":
        if c < -BOUND_SLACK:
            bad("c_n >= 0")
        if c > 1.0 + BOUND_SLACK:
            bad("c_n <= 1")


@dataclass(frozen=True)
class ThetaModel:
    """Immutable model; safe to share across workers.

    Access (a_n, c_n) through :meth:`a` and :meth:`c`: indices beyond the
    eagerly checked horizon are re-validated lazily on each access.
    """

    theta: float
    r: float
    a_seq: EnvSequence
    c_seq: EnvSequence
    case_label: str
    check_horizon: int

    def a(self, n: int) -> float:
        a = self.a_seq.value(n)
        if n > self.check_horizon:
            _check_index(self.case_label, self.theta, self.r, a,
                         self.c_seq.value(n), n)
        return a

    def c(self, n: int) -> float:
        c = self.c_seq.value(n)
        if n > self.check_horizon:
            _check_index(self.case_label, self.theta, self.r,
                         self.a_seq.value(n), c, n)
        return c

    def step(self, n: int) -> tuple[float, float]:
        """(a_n, c_n) with a single lazy validation."""
        a = self.a_seq.value(n)
        c = self.c_seq.value(n)
        if n > self.check_horizon:
            _check_index(self.case_label, self.theta, self.r, a, c, n)
        return a, c

    def log_r_minus_c(self, n: int):
        """ln(r - c_n), computed exactly near c_n = 1 when r = 1; None when
        r - c_n <= 0."""
        if self.r == 1.0:
            return self.c_seq.log_one_minus(n)
        base = self.r - self.c(n)
        return math.log(base) if base > 0.0 else None

    def to_dict(self) -> dict:
        return {"theta": self.theta, "r": self.r,
                "a": self.a_seq.to_dict(), "c": self.c_seq.to_dict()}

    @staticmethod
    def from_dict(spec: dict, check_horizon: int = 100) -> "ThetaModel":
        return validate_model(spec["theta"], spec["r"],
                              EnvSequence.from_dict(spec["a"]),
                              EnvSequence.from_dict(spec["c"]),
                              check_horizon=check_horizon)


def validate_model(theta: float, r: float, a_seq: EnvSequence,
                   c_seq: EnvSequence, check_horizon: int = 100) -> ThetaModel:
    """Validate (theta, r, a_n, c_n) against its parameter row and return the
    model.  Indices 1..check_horizon are checked eagerly; later indices are
    re-checked on access."""
    if check_horizon < 1:
        raise RejectedParameter("check_horizon must be >= 1",
                                constraint="check_horizon")
    theta = float(theta)
    r = float(r)
    case = _case_label(theta, r)
    for n in range(1, check_horizon + 1):
        _check_index(case, theta, r, a_seq.value(n), c_seq.value(n), n)
    return ThetaModel(theta, r, a_seq, c_seq, case, check_horizon)


def step_pgf(model: ThetaModel, n: int, s: float) -> float:
    """One-step generating function f_n(s) on [0, r]."""
    if not 0.0 <= s <= model.r:
        raise DomainError(f"s = {s} outside [0, {model.r}]")
    a, c = model.step(n)
    r, theta = model.r, model.theta
    if theta == 0.0:
        if s == r:
            return r
        lg = model.log_r_minus_c(n)
        return r - math.exp((1.0 - a) * lg + a * math.log(r - s))
    if s == r and theta > 0.0:
        # (r-s)^(-theta) = +inf; for theta < 0 it vanishes instead and the
        # general expression below is already correct
        return r
    return r - (a * (r - s) ** (-theta) + c) ** (-1.0 / theta)


def step_pgf_weight_one(model: ThetaModel, n: int) -> float:
    """p_n(1) = f_n'(0), the probability of exactly one offspring."""
    a, c = model.step(n)
    r, theta = model.r, model.theta
    if theta == 0.0:
        lg = model.log_r_minus_c(n)
        return a * math.exp((1.0 - a) * (lg - math.log(r)))
    return a * (a + c * r ** theta) ** (-1.0 / theta - 1.0)
