"""Hard-decision fusion of identical sensors at the fusion center.

With ``K`` identical, conditionally independent sensors the tally
``d = (d0, d1, d2)`` of local decisions is sufficient, and its law under each
hypothesis is multinomial in that hypothesis' local confusion row. A fusion
policy assigns every tally to a global decision; the sets ``S0, S1, S2`` must
meet ``Pr(D=H0|H0) >= alpha_f`` and ``Pr(D=H1|H1) >= beta_f``.

Three policy builders are provided:

* :func:`algorithm1` -- greedy fill of ``S0`` and ``S1`` with collision repair.
* :func:`exhaustive_optimal_51` -- exact maximum ``|S2|``.
* :func:`oracle_49` -- exact maximum ``Pr(D=H2|H2)``, which needs the misuse row.

The exact searches rely on one observation: removing an unneeded tally from
``S0`` or ``S1`` never hurts either objective, so some optimum uses
inclusion-minimal feasible sets for both. Subset masses are tabulated over all
``2^L`` masks and only disjoint pairs of minimal sets are scored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .detector import ConfusionRow
from .errors import InfeasibleError, InvalidParameterError, SizeLimitError
from .model import Hypothesis

EXACT_MAX_K = 4
BEST_EFFORT_MAX_K = 5
DEFAULT_PAIR_BUDGET = 200_000_000


class ReportCounts(NamedTuple):
    d0: int
    d1: int
    d2: int

    @property
    def k(self) -> int:
        return self.d0 + self.d1 + self.d2


def n_counts(k: int) -> int:
    return (k + 2) * (k + 1) // 2


def enumerate_counts(k: int) -> list[ReportCounts]:
    """All tallies of ``k`` reports, ``d0`` descending then ``d1`` descending."""
    if int(k) != k or k < 1:
        raise InvalidParameterError(f"k must be a positive integer, got {k}")
    return [ReportCounts(d0, d1, k - d0 - d1) for d0 in range(k, -1, -1) for d1 in range(k - d0, -1, -1)]


def count_pmf(d: ReportCounts, row: ConfusionRow) -> float:
    """Multinomial probability of tally ``d`` when each sensor follows ``row``."""
    k = sum(d)
    log_p = math.lgamma(k + 1)
    for dj, pj in zip(d, row.as_tuple()):
        if dj < 0:
            raise InvalidParameterError(f"negative count in {d}")
        if dj == 0:
            continue
        if pj <= 0.0:
            return 0.0
        log_p += dj * math.log(pj) - math.lgamma(dj + 1)
    return math.exp(log_p)


def count_pmf_vector(k: int, row: ConfusionRow) -> np.ndarray:
    return np.array([count_pmf(d, row) for d in enumerate_counts(k)])


@dataclass(frozen=True)
class FusionPolicy:
    k: int
    assignment: tuple[Hypothesis, ...]
    alpha_f: float
    beta_f: float
    method: str
    exact: bool = True
    collisions: int = 0
    passes: int = 0
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.assignment) != n_counts(self.k):
            raise InvalidParameterError("assignment must cover every tally")
        counts = enumerate_counts(self.k)
        object.__setattr__(self, "_index", {d: i for i, d in enumerate(counts)})

    @property
    def counts(self) -> list[ReportCounts]:
        return enumerate_counts(self.k)

    def members(self, h: Hypothesis) -> list[ReportCounts]:
        return [d for d, a in zip(self.counts, self.assignment) if a == h]

    def size(self, h: Hypothesis) -> int:
        return sum(a == h for a in self.assignment)

    def table(self) -> np.ndarray:
        """``(k+1, k+1)`` lookup of the decision by ``(d0, d1)``; unused cells hold -1."""
        tab = np.full((self.k + 1, self.k + 1), -1, dtype=np.int64)
        for d, a in zip(self.counts, self.assignment):
            tab[d.d0, d.d1] = int(a)
        return tab

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha_f": self.alpha_f,
            "beta_f": self.beta_f,
            "method": self.method,
            "exact": self.exact,
            "collisions": self.collisions,
            "assignments": [[d.d0, d.d1, d.d2, a.name] for d, a in zip(self.counts, self.assignment)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FusionPolicy":
        k = int(data["k"])
        by_count = {(int(a), int(b), int(c)): Hypothesis[h] for a, b, c, h in data["assignments"]}
        assignment = tuple(by_count[tuple(d)] for d in enumerate_counts(k))
        return cls(
            k,
            assignment,
            float(data["alpha_f"]),
            float(data["beta_f"]),
            data["method"],
            exact=bool(data.get("exact", True)),
            collisions=int(data.get("collisions", 0)),
        )


def _check_global(alpha_f: float, beta_f: float) -> None:
    for name, v in (("alpha_f", alpha_f), ("beta_f", beta_f)):
        if not 0.0 < v < 1.0:
            raise InvalidParameterError(f"{name} must lie in (0, 1), got {v}")


def _policy_from_sets(k, s0, s1, alpha_f, beta_f, method, **meta) -> FusionPolicy:
    assignment = tuple(
        Hypothesis.H0 if i in s0 else Hypothesis.H1 if i in s1 else Hypothesis.H2 for i in range(n_counts(k))
    )
    return FusionPolicy(k, assignment, alpha_f, beta_f, method, **meta)


def algorithm1(k: int, row0: ConfusionRow, row1: ConfusionRow, alpha_f: float, beta_f: float) -> FusionPolicy:
    """Greedy fusion policy.

    Each pass tops up ``S0`` (by descending ``Pr(d|H0)``) and ``S1`` (by
    descending ``Pr(d|H1)``) from the tallies left unassigned at the start of
    the pass. A tally picked by both goes to the side with the strictly larger
    probability under ``H0``, otherwise to ``S1``; passes repeat until no tally
    is shared. Whatever is left forms ``S2``.
    """
    _check_global(alpha_f, beta_f)
    counts = enumerate_counts(k)
    L = len(counts)
    p0, p1 = count_pmf_vector(k, row0), count_pmf_vector(k, row1)
    if math.fsum(p0) < alpha_f or math.fsum(p1) < beta_f:
        raise InfeasibleError("constraints exceed the total tally mass")
    # ties: lexicographically smaller (d0, d1) first
    order0 = sorted(range(L), key=lambda i: (-p0[i], counts[i].d0, counts[i].d1))
    order1 = sorted(range(L), key=lambda i: (-p1[i], counts[i].d0, counts[i].d1))

    s0: set[int] = set()
    s1: set[int] = set()
    collisions = 0
    passes = 0
    while True:
        passes += 1
        free = set(range(L)) - s0 - s1
        for s, order, p, target in ((s0, order0, p0, alpha_f), (s1, order1, p1, beta_f)):
            mass = math.fsum(p[i] for i in s)
            for i in order:
                if mass >= target:
                    break
                if i in free:
                    s.add(i)
                    mass += p[i]
            if mass < target:
                raise InfeasibleError("greedy pool exhausted before the constraint was met")
        shared = s0 & s1
        if not shared:
            break
        collisions += len(shared)
        for x in sorted(shared):
            if p0[x] > p1[x]:
                s1.discard(x)
            else:
                s0.discard(x)
    return _policy_from_sets(k, s0, s1, alpha_f, beta_f, "ALG1", collisions=collisions, passes=passes)


# -- exact searches -----------------------------------------------------------------


def _subset_table(values: np.ndarray) -> np.ndarray:
    # entry m holds the sum of values[i] over the set bits i of m
    out = np.zeros(1)
    for v in values:
        out = np.concatenate([out, out + v])
    return out


def _minimal_feasible(mass: np.ndarray, target: float, L: int) -> np.ndarray:
    """Masks whose mass reaches ``target`` but drops below it when any member is removed."""
    feasible = mass >= target
    masks = np.flatnonzero(feasible)
    keep = np.ones(masks.size, dtype=bool)
    for i in range(L):
        bit = 1 << i
        has = (masks & bit) != 0
        keep[has] &= ~feasible[masks[has] ^ bit]
    return masks[keep]


@dataclass
class _Search:
    k: int
    p0: np.ndarray
    p1: np.ndarray
    alpha_f: float
    beta_f: float
    budget: Optional[int]

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameterError(f"k must be a positive integer, got {self.k}")
        if self.k > BEST_EFFORT_MAX_K:
            raise SizeLimitError(f"exact search supports k <= {BEST_EFFORT_MAX_K}, got k={self.k}")
        if self.budget is None:
            self.budget = None if self.k <= EXACT_MAX_K else DEFAULT_PAIR_BUDGET
        self.L = len(self.p0)
        self.m0 = _subset_table(self.p0)
        self.m1 = _subset_table(self.p1)
        self.size = _subset_table(np.ones(self.L)).astype(np.int64)
        if self.m0[-1] < self.alpha_f or self.m1[-1] < self.beta_f:
            raise InfeasibleError("constraints exceed the total tally mass")
        self.a_min = _minimal_feasible(self.m0, self.alpha_f, self.L)
        self.b_min = _minimal_feasible(self.m1, self.beta_f, self.L)

    def run(self, a_cost: np.ndarray, b_cost: np.ndarray, a_tie: np.ndarray, b_tie: np.ndarray):
        """Minimize ``cost(A) + cost(B)`` over disjoint minimal pairs, then maximize the tie score.

        Remaining ties resolve to the smallest ``A`` mask, then the smallest ``B`` mask.
        Returns ``(A, B, exact)``.
        """
        order = np.lexsort((self.a_min, a_cost))
        a_sorted = self.a_min[order]
        b_masks = self.b_min
        b_cost_all = b_cost
        floor_b = b_cost_all.min()
        best = None  # (cost, -tie, A, B)
        evaluated = 0
        exact = True
        for a, ca, ta in zip(a_sorted, a_cost[order], a_tie[order]):
            if best is not None and ca + floor_b > best[0] + 1e-15:
                break
            if self.budget is not None and evaluated > self.budget:
                exact = False
                break
            evaluated += b_masks.size
            ok = (b_masks & a) == 0
            if not ok.any():
                continue
            cost = ca + b_cost_all[ok]
            tie = ta + b_tie[ok]
            cand = b_masks[ok]
            j = np.lexsort((cand, -tie, cost))[0]
            key = (float(cost[j]), -float(tie[j]), int(a), int(cand[j]))
            if best is None or _better(key, best):
                best = key
        if best is None:
            if not exact:
                raise InfeasibleError("no feasible pair found within the search budget")
            raise InfeasibleError("no disjoint pair of sets meets both constraints")
        return best[2], best[3], exact


def _better(key, best) -> bool:
    # costs within 1e-15 count as equal so the tie-breakers decide
    if abs(key[0] - best[0]) > 1e-15:
        return key[0] < best[0]
    if abs(key[1] - best[1]) > 1e-15:
        return key[1] < best[1]
    return key[2:] < best[2:]


def _mask_members(mask: int, L: int) -> set[int]:
    return {i for i in range(L) if mask >> i & 1}


def exhaustive_optimal_51(
    k: int,
    row0: ConfusionRow,
    row1: ConfusionRow,
    alpha_f: float,
    beta_f: float,
    budget: Optional[int] = None,
) -> FusionPolicy:
    """Policy with the largest ``S2`` meeting both global constraints.

    Among equally large ``S2`` the one with the largest
    ``Pr(D=H0|H0) + Pr(D=H1|H1)`` wins. Exact for ``k <= 4``; at ``k = 5`` the
    pair search stops after ``budget`` evaluations and the policy is flagged
    ``exact=False`` if it had to stop early.
    """
    _check_global(alpha_f, beta_f)
    s = _Search(k, count_pmf_vector(k, row0), count_pmf_vector(k, row1), alpha_f, beta_f, budget)
    a_cost = s.size[s.a_min].astype(float)
    b_cost = s.size[s.b_min].astype(float)
    a, b, exact = s.run(a_cost, b_cost, s.m0[s.a_min], s.m1[s.b_min])
    return _policy_from_sets(k, _mask_members(a, s.L), _mask_members(b, s.L), alpha_f, beta_f, "OPT51", exact=exact)


def oracle_49(
    k: int,
    row0: ConfusionRow,
    row1: ConfusionRow,
    row2: ConfusionRow,
    alpha_f: float,
    beta_f: float,
    budget: Optional[int] = None,
) -> FusionPolicy:
    """Policy maximizing ``Pr(D=H2|H2)`` when the misuse row is known.

    Ties in the objective prefer the larger ``S2``.
    """
    _check_global(alpha_f, beta_f)
    s = _Search(k, count_pmf_vector(k, row0), count_pmf_vector(k, row1), alpha_f, beta_f, budget)
    m2 = _subset_table(count_pmf_vector(k, row2))
    a, b, exact = s.run(
        m2[s.a_min],
        m2[s.b_min],
        -s.size[s.a_min].astype(float),
        -s.size[s.b_min].astype(float),
    )
    return _policy_from_sets(k, _mask_members(a, s.L), _mask_members(b, s.L), alpha_f, beta_f, "ORACLE49", exact=exact)


def build_policy(
    method: str,
    k: int,
    row0: ConfusionRow,
    row1: ConfusionRow,
    alpha_f: float,
    beta_f: float,
    row2: Optional[ConfusionRow] = None,
) -> FusionPolicy:
    method = method.upper()
    if method == "ALG1":
        return algorithm1(k, row0, row1, alpha_f, beta_f)
    if method == "OPT51":
        return exhaustive_optimal_51(k, row0, row1, alpha_f, beta_f)
    if method == "ORACLE49":
        if row2 is None:
            raise InvalidParameterError("ORACLE49 needs the confusion row under H2")
        return oracle_49(k, row0, row1, row2, alpha_f, beta_f)
    raise InvalidParameterError(f"unknown fusion method {method!r}")


def fuse_decide(policy: FusionPolicy, d: Sequence[int]) -> Hypothesis:
    d = ReportCounts(*d)
    if min(d) < 0 or d.k != policy.k:
        raise InvalidParameterError(f"tally {tuple(d)} does not sum to k={policy.k}")
    return policy.assignment[policy._index[d]]


def policy_performance(policy: FusionPolicy, row: ConfusionRow) -> ConfusionRow:
    """Global confusion row of ``policy`` when every sensor follows ``row``."""
    pmf = count_pmf_vector(policy.k, row)
    sums = [math.fsum(pmf[i] for i, a in enumerate(policy.assignment) if a == h) for h in Hypothesis]
    # rounding in the pmf can push a sum a few ulps past one
    return ConfusionRow(*(min(max(s, 0.0), 1.0) for s in sums))


def satisfies_constraints(policy: FusionPolicy, row0: ConfusionRow, row1: ConfusionRow) -> bool:
    return (
        policy_performance(policy, row0).p0 >= policy.alpha_f
        and policy_performance(policy, row1).p1 >= policy.beta_f
    )
