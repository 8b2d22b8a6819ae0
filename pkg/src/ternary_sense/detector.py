"""Single-sensor ternary test rules.

A rule splits the energy axis ``[0, inf)`` into decision regions for
``H0`` (idle), ``H1`` (legitimate) and ``H2`` (misuse) such that
``Pr(H0|H0) = alpha`` and ``Pr(H1|H1) = beta`` exactly, leaving the rest of the
axis to ``H2``.

Thresholds on the recognition side are solved in the normalized coordinate
``t = Y / (N sigma1^2)``, where the GLRT log-likelihood ratio reads
``ln L1 = (N/2) (t - 1 - ln t)`` and the Rao interval is ``1 -/+ s``. Both are
scale-free, so the solvers never see Watt-sized numbers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateError, InfeasibleError, InvalidParameterError, OverlapError
from .model import Hypothesis, energy_cdf, energy_quantile, energy_sf
from .numerics import Bracket, find_root, gamma_pdf, inv_std_normal_q, reg_gamma, std_normal_q

_LOG_LAMBDA_MAX = 700.0


class Rule(str, enum.Enum):
    GLRT = "GLRT"
    RAO = "RAO"
    UPPER_LOW = "UPPER_LOW"
    UPPER_HIGH = "UPPER_HIGH"

    def __str__(self) -> str:
        return self.value


class UpperCase(str, enum.Enum):
    LOW = "LOW"    # sigma0^2 < sigma2^2 < sigma1^2
    HIGH = "HIGH"  # sigma2^2 > sigma1^2


@dataclass(frozen=True)
class Thresholds:
    eta0: float
    eta1: float
    eta2: float
    lambda1: Optional[float]
    rule: Rule
    overlap_adjusted: bool = False

    def __post_init__(self) -> None:
        if self.eta0 <= 0:
            raise InvalidParameterError(f"eta0 must be positive, got {self.eta0}")
        if self.rule in (Rule.GLRT, Rule.RAO) and not self.eta1 <= self.eta2:
            raise InvalidParameterError(f"need eta1 <= eta2, got {self.eta1}, {self.eta2}")
        if self.overlap_adjusted and self.eta1 != self.eta0:
            raise InvalidParameterError("overlap-adjusted thresholds must pin eta1 to eta0")

    def to_dict(self) -> dict:
        def num(v):
            return None if v is None or math.isinf(v) else v

        return {
            "eta0": None if math.isnan(self.eta0) else self.eta0,
            "eta1": num(self.eta1),
            "eta2": num(self.eta2),
            "lambda1": num(self.lambda1),
            "rule": self.rule.value,
            "overlap_adjusted": self.overlap_adjusted,
        }


@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float
    hypothesis: Hypothesis


@dataclass(frozen=True)
class DecisionRegions:
    """Contiguous segments of ``[0, inf)``, each labelled with a hypothesis.

    A point on a shared edge belongs to the lower-indexed of the two
    neighbouring hypotheses.
    """

    thresholds: Thresholds
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        segs = self.segments
        if not segs or segs[0].lo != 0.0 or not math.isinf(segs[-1].hi):
            raise InvalidParameterError("segments must cover [0, inf)")
        for a, b in zip(segs, segs[1:]):
            if a.hi != b.lo:
                raise InvalidParameterError("segments must be contiguous")
        for s in segs:
            if not s.lo < s.hi:
                raise InvalidParameterError(f"empty segment {s}")
        for h in Hypothesis:
            if sum(s.hypothesis == h for s in segs) > 2:
                raise InvalidParameterError(f"{h} owns more than two intervals")

    @classmethod
    def from_edges(cls, thresholds: Thresholds, edges: list[float], labels: list[Hypothesis]) -> "DecisionRegions":
        """Build from interior edges; zero-width pieces are dropped and equal neighbours merged."""
        bounds = [0.0, *edges, math.inf]
        segs: list[Segment] = []
        for lo, hi, h in zip(bounds, bounds[1:], labels):
            if not lo < hi:
                continue
            if segs and segs[-1].hypothesis == h:
                segs[-1] = Segment(segs[-1].lo, hi, h)
            else:
                segs.append(Segment(lo, hi, h))
        return cls(thresholds, tuple(segs))

    def intervals(self, h: Hypothesis) -> list[tuple[float, float]]:
        return [(s.lo, s.hi) for s in self.segments if s.hypothesis == h]

    @property
    def edges(self) -> np.ndarray:
        return np.array([s.hi for s in self.segments[:-1]])

    @property
    def labels(self) -> np.ndarray:
        return np.array([int(s.hypothesis) for s in self.segments])


@dataclass(frozen=True)
class ConfusionRow:
    """``(Pr(H0|Hi), Pr(H1|Hi), Pr(H2|Hi))`` for one true state ``Hi``."""

    p0: float
    p1: float
    p2: float

    def __post_init__(self) -> None:
        for p in (self.p0, self.p1, self.p2):
            if not -1e-12 <= p <= 1.0 + 1e-12:
                raise InvalidParameterError(f"probability out of range: {p}")
        if abs(self.p0 + self.p1 + self.p2 - 1.0) > 1e-9:
            raise InvalidParameterError(f"row does not sum to one: {self.p0}, {self.p1}, {self.p2}")

    def __getitem__(self, h: int) -> float:
        return (self.p0, self.p1, self.p2)[int(h)]

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p0, self.p1, self.p2)

    @classmethod
    def from_counts(cls, counts) -> "ConfusionRow":
        counts = np.asarray(counts, dtype=float)
        total = counts.sum()
        return cls(*(counts / total))


@dataclass(frozen=True)
class OverlapCheck:
    overlaps: bool
    beta_critical: float
    eta1_star: float
    eta2_star: float

    def __iter__(self):
        # unpacks as (overlaps, beta_critical)
        return iter((self.overlaps, self.beta_critical))


def _check_level(name: str, v: float) -> None:
    if not 0.5 < v < 1.0:
        raise InvalidParameterError(f"{name} must lie in (0.5, 1), got {v}")


def _check_scene(n: int, *variances: float) -> None:
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"n must be a positive integer, got {n}")
    for v in variances:
        if not v > 0:
            raise InvalidParameterError(f"variances must be positive, got {v}")


# -- detection subproblem ---------------------------------------------------


def compute_eta0(n: int, sigma0_sq: float, alpha: float) -> float:
    """Detection threshold with ``Pr(Y < eta0 | H0) = alpha``."""
    _check_level("alpha", alpha)
    _check_scene(n, sigma0_sq)
    return energy_quantile(alpha, sigma0_sq, n)


# -- GLRT recognition --------------------------------------------------------


def _glrt_g(t: float) -> float:
    # t - 1 - ln t, written to avoid cancellation near t = 1
    d = t - 1.0
    return d - math.log1p(d)


def glrt_log_lr(y: float, n: int, sigma1_sq: float) -> float:
    """``ln L1(Y)`` with the misuse variance replaced by its ML estimate ``Y/N``."""
    return 0.5 * n * _glrt_g(y / (n * sigma1_sq))


def _glrt_level_roots(k: float) -> tuple[float, float]:
    """Both solutions of ``t - 1 - ln t = k`` in normalized units."""
    if k <= 0.0:
        return 1.0, 1.0
    fprime = lambda t: 1.0 - 1.0 / t  # noqa: E731
    f = lambda t: _glrt_g(t) - k  # noqa: E731
    lo = math.exp(-k - 1.0)
    t1 = 0.0 if lo == 0.0 else find_root(f, Bracket(lo, 1.0), tol=1e-15, fprime=fprime)
    hi = 2.0
    while f(hi) <= 0.0:
        hi *= 2.0
    t2 = find_root(f, Bracket(1.0, hi), tol=1e-15 * hi, fprime=fprime)
    return t1, t2


def _coverage(a: float, t1: float, t2: float) -> float:
    # Pr(t1 < t < t2) when a*t is unit-scale gamma with shape a
    p_lo, q_lo = reg_gamma(a, a * t1)
    p_hi, q_hi = reg_gamma(a, a * t2)
    # subtract the smaller pair for accuracy
    return p_hi - p_lo if p_hi < 0.5 else q_lo - q_hi


def solve_glrt_thresholds(n: int, sigma1_sq: float, beta: float) -> Thresholds:
    """GLRT recognition interval ``(eta1, eta2)`` and ratio threshold ``lambda1``.

    ``eta1`` and ``eta2`` are the two points where ``L1`` equals ``lambda1``,
    with ``lambda1`` chosen so that the interval carries mass ``beta`` under H1.
    The detection side is unknown here, so ``eta0`` is NaN; use
    :func:`build_regions` for a full rule.
    """
    _check_level("beta", beta)
    _check_scene(n, sigma1_sq)
    a = 0.5 * n

    def roots(c: float) -> tuple[float, float]:
        return _glrt_level_roots(2.0 * c / n)

    def f(c: float) -> float:
        t1, t2 = roots(c)
        return _coverage(a, t1, t2) - beta

    def fprime(c: float) -> float:
        t1, t2 = roots(c)
        if t1 == t2:
            return math.inf
        dt2 = (2.0 / n) * t2 / (t2 - 1.0)
        dt1 = (2.0 / n) * t1 / (t1 - 1.0)
        return a * gamma_pdf(a, a * t2) * dt2 - a * gamma_pdf(a, a * t1) * dt1

    c_hi = 1.0
    while f(c_hi) < 0.0:
        c_hi *= 2.0
        if c_hi > _LOG_LAMBDA_MAX:
            raise InfeasibleError(f"GLRT coverage {beta} unreachable with ln(lambda1) <= {_LOG_LAMBDA_MAX}")
    c = find_root(f, Bracket(0.0, c_hi), tol=1e-13, fprime=fprime)
    t1, t2 = roots(c)
    scale = n * sigma1_sq
    eta1, eta2 = t1 * scale, t2 * scale
    return Thresholds(eta0=math.nan, eta1=eta1, eta2=eta2, lambda1=math.exp(c), rule=Rule.GLRT)


# -- Rao recognition ---------------------------------------------------------


def rao_statistic(y: float, n: int, sigma1_sq: float) -> float:
    """Score statistic ``(Y - N sigma1^2)^2 / (2 N sigma1^4)``."""
    return (y - n * sigma1_sq) ** 2 / (2.0 * n * sigma1_sq**2)


def solve_rao_thresholds(n: int, sigma1_sq: float, beta: float) -> Thresholds:
    """Rao interval ``(N -/+ sqrt(2 N lambda)) sigma1^2`` carrying mass ``beta`` under H1.

    Raises
    ------
    InfeasibleError
        If even ``lambda = N/2`` (lower edge at zero) leaves coverage below ``beta``.
    """
    _check_level("beta", beta)
    _check_scene(n, sigma1_sq)
    a = 0.5 * n

    def f(s: float) -> float:
        return _coverage(a, max(1.0 - s, 0.0), 1.0 + s) - beta

    def fprime(s: float) -> float:
        return a * gamma_pdf(a, a * (1.0 + s)) + a * gamma_pdf(a, a * (1.0 - s))

    if f(1.0) < 0.0:
        raise InfeasibleError(f"Rao coverage {beta} needs lambda1 > N/2 (negative lower threshold)")
    s = find_root(f, Bracket(0.0, 1.0), tol=1e-15, fprime=fprime)
    lam = 0.5 * n * s * s
    eta1 = (n - math.sqrt(2.0 * n * lam)) * sigma1_sq
    eta2 = (n + math.sqrt(2.0 * n * lam)) * sigma1_sq
    return Thresholds(eta0=math.nan, eta1=eta1, eta2=eta2, lambda1=lam, rule=Rule.RAO)


# -- overlap between the detection and recognition regions ----------------------


def check_overlap_glrt(n: int, sigma0_sq: float, sigma1_sq: float, alpha: float, beta: float) -> OverlapCheck:
    """Decide whether the unadjusted GLRT interval starts below ``eta0``.

    The critical coverage is the H1 mass between ``eta0`` and the other point
    where ``L1`` takes the value ``L1(eta0)``; any larger ``beta`` pushes
    ``eta1`` under ``eta0``.
    """
    _check_level("beta", beta)
    eta0 = compute_eta0(n, sigma0_sq, alpha)
    scale = n * sigma1_sq
    t1 = eta0 / scale
    if t1 >= 1.0:
        raise DegenerateError(f"eta0={eta0} is not below N*sigma1^2={scale}")
    _, t2 = _glrt_level_roots(_glrt_g(t1))
    beta_c = _coverage(0.5 * n, t1, t2)
    return OverlapCheck(beta > beta_c, beta_c, eta0, t2 * scale)


def check_overlap_rao(n: int, sigma0_sq: float, sigma1_sq: float, alpha: float, beta: float) -> OverlapCheck:
    """Rao counterpart of :func:`check_overlap_glrt`; the partner point is the reflection about ``N sigma1^2``."""
    _check_level("beta", beta)
    eta0 = compute_eta0(n, sigma0_sq, alpha)
    scale = n * sigma1_sq
    t1 = eta0 / scale
    if t1 >= 1.0:
        raise DegenerateError(f"eta0={eta0} is not below N*sigma1^2={scale}")
    beta_c = _coverage(0.5 * n, t1, 2.0 - t1)
    return OverlapCheck(beta > beta_c, beta_c, eta0, 2.0 * scale - eta0)


# -- full rules -------------------------------------------------------------------


def _upper_edge_from(eta_lo: float, sigma1_sq: float, n: int, beta: float) -> float:
    """``eta`` with ``Pr(eta_lo < Y < eta | H1) = beta``; raises if the tail above ``eta_lo`` is too light."""
    tail = energy_sf(eta_lo, sigma1_sq, n)
    if tail < beta:
        raise InfeasibleError(f"Pr(Y > eta0 | H1) = {tail:.6g} < beta = {beta}")
    target = energy_cdf(eta_lo, sigma1_sq, n) + beta
    if target >= 1.0:
        return math.inf
    return energy_quantile(target, sigma1_sq, n)


def build_regions(rule: Rule, n: int, sigma0_sq: float, sigma1_sq: float, alpha: float, beta: float) -> DecisionRegions:
    """Decision regions of the GLRT- or Rao-based rule, repaired if they overlap.

    Without overlap the misuse region has two lobes, ``[eta0, eta1)`` and
    ``(eta2, inf)``. When ``eta1`` would fall below ``eta0`` the lower lobe is
    removed: ``eta1`` is pinned to ``eta0`` and ``eta2`` re-solved for
    coverage ``beta``.
    """
    rule = Rule(rule)
    _check_level("alpha", alpha)
    _check_level("beta", beta)
    _check_scene(n, sigma0_sq, sigma1_sq)
    if not sigma0_sq < sigma1_sq:
        raise InvalidParameterError("need sigma0_sq < sigma1_sq")
    check = {Rule.GLRT: check_overlap_glrt, Rule.RAO: check_overlap_rao}.get(rule)
    if check is None:
        raise InvalidParameterError(f"build_regions handles GLRT and RAO, got {rule}")
    eta0 = compute_eta0(n, sigma0_sq, alpha)
    try:
        overlaps = check(n, sigma0_sq, sigma1_sq, alpha, beta).overlaps
    except DegenerateError:
        # eta0 >= N sigma1^2 > eta1 for any beta
        overlaps = True

    if overlaps:
        eta2 = _upper_edge_from(eta0, sigma1_sq, n, beta)
        th = Thresholds(eta0, eta0, eta2, None, rule, overlap_adjusted=True)
        return DecisionRegions.from_edges(th, [eta0, eta2], [Hypothesis.H0, Hypothesis.H1, Hypothesis.H2])

    solve = solve_glrt_thresholds if rule is Rule.GLRT else solve_rao_thresholds
    rec = solve(n, sigma1_sq, beta)
    th = Thresholds(eta0, rec.eta1, rec.eta2, rec.lambda1, rule, overlap_adjusted=False)
    return DecisionRegions.from_edges(
        th,
        [eta0, rec.eta1, rec.eta2],
        [Hypothesis.H0, Hypothesis.H2, Hypothesis.H1, Hypothesis.H2],
    )


def build_upper_bound_regions(
    case: UpperCase, n: int, sigma0_sq: float, sigma1_sq: float, alpha: float, beta: float
) -> DecisionRegions:
    """One-sided rule for a misuse variance known to lie below (LOW) or above (HIGH) ``sigma1^2``.

    Raises
    ------
    InfeasibleError
        LOW: the H1 threshold falls at or below ``eta0``.
        HIGH: less than ``beta`` of the H1 mass lies above ``eta0``.
    """
    case = UpperCase(case)
    _check_level("alpha", alpha)
    _check_level("beta", beta)
    _check_scene(n, sigma0_sq, sigma1_sq)
    eta0 = compute_eta0(n, sigma0_sq, alpha)
    if case is UpperCase.LOW:
        eta1 = energy_quantile(1.0 - beta, sigma1_sq, n)
        if eta1 <= eta0:
            raise InfeasibleError(f"case LOW: eta1={eta1:.6g} <= eta0={eta0:.6g}")
        th = Thresholds(eta0, eta1, math.inf, None, Rule.UPPER_LOW)
        return DecisionRegions.from_edges(th, [eta0, eta1], [Hypothesis.H0, Hypothesis.H2, Hypothesis.H1])
    eta1 = _upper_edge_from(eta0, sigma1_sq, n, beta)
    th = Thresholds(eta0, eta1, math.inf, None, Rule.UPPER_HIGH)
    return DecisionRegions.from_edges(th, [eta0, eta1], [Hypothesis.H0, Hypothesis.H1, Hypothesis.H2])


def matching_upper_case(sigma1_sq: float, sigma2_sq: float) -> UpperCase:
    return UpperCase.LOW if sigma2_sq < sigma1_sq else UpperCase.HIGH


def build_rule(rule: Rule, n: int, sigma0_sq: float, sigma1_sq: float, alpha: float, beta: float) -> DecisionRegions:
    rule = Rule(rule)
    if rule is Rule.UPPER_LOW:
        return build_upper_bound_regions(UpperCase.LOW, n, sigma0_sq, sigma1_sq, alpha, beta)
    if rule is Rule.UPPER_HIGH:
        return build_upper_bound_regions(UpperCase.HIGH, n, sigma0_sq, sigma1_sq, alpha, beta)
    return build_regions(rule, n, sigma0_sq, sigma1_sq, alpha, beta)


# -- applying a rule --------------------------------------------------------------


def decide(regions: DecisionRegions, y: float) -> Hypothesis:
    if not y >= 0:
        raise InvalidParameterError(f"energy must be nonnegative, got {y}")
    return min(s.hypothesis for s in regions.segments if s.lo <= y <= s.hi)


def decide_array(regions: DecisionRegions, y: np.ndarray) -> np.ndarray:
    """Vectorized :func:`decide`; returns integer hypothesis labels."""
    y = np.asarray(y, dtype=float)
    edges, labels = regions.edges, regions.labels
    idx = np.searchsorted(edges, y, side="left")
    out = labels[idx]
    if edges.size:
        on_edge = (idx < edges.size) & (y == edges[np.minimum(idx, edges.size - 1)])
        if np.any(on_edge):
            i = idx[on_edge]
            out[on_edge] = np.minimum(labels[i], labels[i + 1])
    return out


def confusion_row(regions: DecisionRegions, variance: float, n: int) -> ConfusionRow:
    """Exact probability of each region when ``Y`` has the given per-sample variance."""
    if not variance > 0:
        raise InvalidParameterError(f"variance must be positive, got {variance}")
    mass = [0.0, 0.0, 0.0]
    for s in regions.segments:
        if math.isinf(s.hi):
            m = energy_sf(s.lo, variance, n)
        else:
            m = energy_cdf(s.hi, variance, n) - energy_cdf(s.lo, variance, n)
        mass[int(s.hypothesis)] += m
    return ConfusionRow(*mass)


# -- asymptotics ------------------------------------------------------------------


def asymptotic_lambda1(beta: float) -> float:
    """Large-N ratio threshold: ``exp(Qinv((1 + beta)/2)^2 / 2)``."""
    _check_level("beta", beta)
    return math.exp(0.5 * inv_std_normal_q(0.5 * (1.0 + beta)) ** 2)


def fisher_information(n: int, sigma1_sq: float) -> float:
    """Fisher information of ``N`` samples about the variance at ``sigma1^2``."""
    return n / (2.0 * sigma1_sq**2)


def noncentrality(n: int, sigma1_sq: float, sigma2_sq: float) -> float:
    """Mean ``mu`` of the limiting Gaussian score under H2; ``mu^2`` is the noncentrality."""
    return math.sqrt((sigma2_sq - sigma1_sq) ** 2 * fisher_information(n, sigma1_sq))


def asymptotic_miss(n: int, sigma1_sq: float, sigma2_sq: float, beta: float) -> float:
    """Large-N ``Pr(H1|H2)``: mass of ``(z, -z)`` under ``N(mu, 1)`` with ``z = Qinv((1+beta)/2)``."""
    _check_level("beta", beta)
    z = inv_std_normal_q(0.5 * (1.0 + beta))
    mu = noncentrality(n, sigma1_sq, sigma2_sq)
    return min(max(std_normal_q(z - mu) - std_normal_q(-z - mu), 0.0), 1.0)


def asymptotic_detection(
    n: int, sigma0_sq: float, sigma1_sq: float, sigma2_sq: float, alpha: float, beta: float
) -> float:
    """Large-N ``Pr(H2|H2) = Pr(Y > eta0 | sigma2^2) - Pr(H1|H2)``, clamped to ``[0, 1]``.

    Raises
    ------
    OverlapError
        If the GLRT regions overlap for ``(alpha, beta)``.
    """
    try:
        overlap = check_overlap_glrt(n, sigma0_sq, sigma1_sq, alpha, beta).overlaps
    except DegenerateError:
        overlap = True
    if overlap:
        raise OverlapError(f"regions overlap at alpha={alpha}, beta={beta}; asymptotic form does not apply")
    eta0 = compute_eta0(n, sigma0_sq, alpha)
    value = energy_sf(eta0, sigma2_sq, n) - asymptotic_miss(n, sigma1_sq, sigma2_sq, beta)
    return min(max(value, 0.0), 1.0)
