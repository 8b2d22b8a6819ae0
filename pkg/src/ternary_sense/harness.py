"""Monte Carlo experiments and analytic sweeps emitted as tables.

Every run is a function of an :class:`ExperimentSpec` only. Random draws come
from independent streams keyed by ``(master_seed, grid point, hypothesis,
block)``, and the block layout depends on the problem size alone, so a table
is bit-identical whatever the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._version import __version__
from .detector import (
    ConfusionRow,
    DecisionRegions,
    Rule,
    asymptotic_detection,
    build_regions,
    build_upper_bound_regions,
    confusion_row,
    decide_array,
    matching_upper_case,
)
from .errors import InfeasibleError, InvalidParameterError, OverlapError, SizeLimitError
from .fusion import BEST_EFFORT_MAX_K, build_policy, policy_performance
from .model import Hypothesis, SceneConfig, db_to_ratio, make_rng, sample_energy, scene_from_illegitimate_access

AXES = ("sigma2_sq", "alpha_beta", "n_samples", "k_sensors", "alpha_beta_f")
RULES = ("GLRT", "RAO", "UPPER", "ASYMPTOTIC")
METHODS = ("ORACLE49", "OPT51", "ALG1")
SAMPLERS = ("gaussian", "chi2")
THREADS_ENV = "TERNARY_SENSE_THREADS"

OK = "OK"
OVERLAP = "OVERLAP"
INFEASIBLE = "INFEASIBLE"
SIZE_LIMIT = "SIZE_LIMIT"
SELFCHECK_FAIL = "SELFCHECK_FAIL"

SELF_CHECK_SIGMAS = 4.0
_BLOCK_VALUES = 1 << 22  # random values per work item

# five entries reported per rule: Pr(decide | true)
_ENTRIES = (("h0h0", 0, 0), ("h1h1", 1, 1), ("h0h2", 0, 2), ("h1h2", 1, 2), ("h2h2", 2, 2))


@dataclass(frozen=True)
class GridPoint:
    n: int
    k: int
    sigma2_sq: float
    alpha: float
    beta: float
    alpha_f: Optional[float]
    beta_f: Optional[float]


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a base scene, the rules to evaluate, and a grid over one or more axes.

    ``axis`` names the swept parameters (see :data:`AXES`); ``grid`` holds one
    value per axis for every point. ``alpha_beta`` sets ``alpha = beta`` and
    ``alpha_beta_f`` sets ``alpha_f = beta_f``.
    """

    scene: SceneConfig
    axis: tuple[str, ...]
    grid: tuple[tuple[float, ...], ...]
    rules: tuple[str, ...] = RULES
    alpha: float = 0.8
    beta: float = 0.8
    alpha_f: Optional[float] = None
    beta_f: Optional[float] = None
    trials: int = 10_000
    master_seed: int = 0
    sampler: str = "gaussian"
    methods: tuple[str, ...] = ("ALG1",)

    def __post_init__(self) -> None:
        axis = (self.axis,) if isinstance(self.axis, str) else tuple(self.axis)
        grid = tuple(tuple(g) if isinstance(g, (tuple, list)) else (g,) for g in self.grid)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "rules", tuple(str(r).upper() for r in self.rules))
        object.__setattr__(self, "methods", tuple(str(m).upper() for m in self.methods))

        if not axis or len(set(axis)) != len(axis) or any(a not in AXES for a in axis):
            raise InvalidParameterError(f"axis must be distinct names from {AXES}, got {axis}")
        if not grid:
            raise InvalidParameterError("grid must be nonempty")
        if any(len(g) != len(axis) for g in grid):
            raise InvalidParameterError("every grid point needs one value per axis")
        if not self.rules or any(r not in RULES for r in self.rules):
            raise InvalidParameterError(f"rules must be a nonempty subset of {RULES}")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise InvalidParameterError(f"methods must be a nonempty subset of {METHODS}")
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise InvalidParameterError(f"trials must be a positive integer, got {self.trials}")
        if int(self.master_seed) != self.master_seed or not 0 <= self.master_seed < 2**64:
            raise InvalidParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.sampler not in SAMPLERS:
            raise InvalidParameterError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")
        if (self.alpha_f is None) != (self.beta_f is None):
            raise InvalidParameterError("alpha_f and beta_f must be given together")
        for i in range(len(grid)):
            self._validate_point(self.point(i))

    def _validate_point(self, p: GridPoint) -> None:
        s = self.scene
        for name, v in (("alpha", p.alpha), ("beta", p.beta)):
            if not 0.5 < v < 1.0:
                raise InvalidParameterError(f"{name} must lie in (0.5, 1), got {v}")
        for name, v in (("alpha_f", p.alpha_f), ("beta_f", p.beta_f)):
            if v is not None and not 0.0 < v < 1.0:
                raise InvalidParameterError(f"{name} must lie in (0, 1), got {v}")
        # SceneConfig re-checks variances, sample and sensor counts
        SceneConfig(s.sigma0_sq, s.sigma1_sq, p.sigma2_sq, p.n, p.k)

    def point(self, i: int) -> GridPoint:
        s = self.scene
        values = dict(
            n=s.n_samples, k=s.n_sensors, sigma2_sq=s.sigma2_sq,
            alpha=self.alpha, beta=self.beta, alpha_f=self.alpha_f, beta_f=self.beta_f,
        )
        for name, v in zip(self.axis, self.grid[i]):
            if name == "sigma2_sq":
                values["sigma2_sq"] = float(v)
            elif name == "alpha_beta":
                values["alpha"] = values["beta"] = float(v)
            elif name == "alpha_beta_f":
                values["alpha_f"] = values["beta_f"] = float(v)
            else:
                if int(v) != v:
                    raise InvalidParameterError(f"{name} values must be integers, got {v}")
                values["n" if name == "n_samples" else "k"] = int(v)
        return GridPoint(**values)

    def to_dict(self) -> dict:
        grid = [list(g) if len(self.axis) > 1 else g[0] for g in self.grid]
        return {
            "scene": self.scene.to_dict(),
            "axis": list(self.axis),
            "grid": grid,
            "rules": list(self.rules),
            "alpha": self.alpha,
            "beta": self.beta,
            "alpha_f": self.alpha_f,
            "beta_f": self.beta_f,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "sampler": self.sampler,
            "methods": list(self.methods),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        data = dict(data)
        scene = data.pop("scene")
        if not isinstance(scene, SceneConfig):
            scene = SceneConfig(**scene)
        return cls(scene=scene, **data)

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        if v == 0.0:
            v = 0.0  # drop the sign of negative zero
        return "%.12g" % v
    return str(v)


def _is_probability_column(name: str) -> bool:
    head = name[:-3] if name.endswith("_mc") else name
    return len(head) >= 4 and head[-4] == "h" and head[-2] == "h" and head[-3:-2].isdigit() and head[-1].isdigit()


@dataclass
class ResultTable:
    """Named columns, one row per grid point, and string metadata."""

    columns: list[str]
    rows: list[list]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.columns)) != len(self.columns):
            raise InvalidParameterError("duplicate column names")
        width = len(self.columns)
        for r in self.rows:
            if len(r) != width:
                raise InvalidParameterError("row width does not match the header")
        for j, name in enumerate(self.columns):
            if not _is_probability_column(name):
                continue
            for r in self.rows:
                v = r[j]
                if v is not None and not (isinstance(v, float) and math.isnan(v)) and not 0.0 <= v <= 1.0:
                    raise InvalidParameterError(f"column {name} holds {v}, outside [0, 1]")

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        vals = [r[j] for r in self.rows]
        if all(isinstance(v, str) for v in vals):
            return np.array(vals)
        return np.array([np.nan if v is None else v for v in vals], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([_format_cell(v) for v in r])
        return buf.getvalue()

    def write_csv(self, path: str) -> None:
        atomic_write(path, self.to_csv())


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- sampling plumbing ----------------------------------------------------------------


def worker_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            w = int(env)
        except ValueError:
            raise InvalidParameterError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if w < 1:
            raise InvalidParameterError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return w
    return os.cpu_count() or 1


def _ordered_map(fn: Callable, items: Sequence) -> list:
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def block_sizes(trials: int, values_per_trial: int) -> list[int]:
    """Split ``trials`` into work items; depends on the problem size only."""
    per = max(1, _BLOCK_VALUES // values_per_trial)
    full, rest = divmod(trials, per)
    return [per] * full + ([rest] if rest else [])


def _draw(rng: np.random.Generator, sampler: str, variance: float, n: int, shape: tuple[int, ...]) -> np.ndarray:
    if sampler == "gaussian":
        return sample_energy(rng, variance, n, shape)
    return rng.chisquare(n, size=shape) * variance


def simulate_counts(
    seed: int,
    grid_index: int,
    hypothesis: int,
    variance: float,
    n: int,
    k: int,
    trials: int,
    sampler: str,
    classifiers: Sequence[Callable[[np.ndarray], np.ndarray]],
) -> np.ndarray:
    """Decision counts, shape ``(len(classifiers), 3)``, from ``trials`` draws of ``k`` energies each.

    With ``k == 1`` classifiers receive a 1-D array of energies, otherwise a
    ``(block, k)`` array.
    """
    sizes = block_sizes(trials, k * n)
    shape_tail = () if k == 1 else (k,)

    def work(b: int) -> np.ndarray:
        rng = make_rng(seed, grid_index, hypothesis, b)
        y = _draw(rng, sampler, variance, n, (sizes[b], *shape_tail))
        return np.stack([np.bincount(c(y), minlength=3)[:3] for c in classifiers])

    parts = _ordered_map(work, range(len(sizes)))
    return np.sum(parts, axis=0)


def binomial_z(count: int, trials: int, p: float) -> float:
    """Distance of ``count / trials`` from ``p`` in binomial standard deviations (floored at one count)."""
    sd = math.sqrt(max(p * (1.0 - p), 1.0 / trials) / trials)
    return abs(count / trials - p) / sd


def _metadata(runner: str, spec: ExperimentSpec) -> dict[str, str]:
    return {
        "runner": runner,
        "version": __version__,
        "spec_hash": spec.spec_hash(),
        "master_seed": str(spec.master_seed),
        "trials": str(spec.trials),
        "sampler": spec.sampler,
        "axis": ",".join(spec.axis),
    }


def _point_columns(spec: ExperimentSpec, cooperative: bool) -> list[str]:
    cols = ["n_samples", "sigma2_sq", "alpha", "beta"]
    if cooperative:
        cols += ["k_sensors", "alpha_f", "beta_f"]
    return cols


def _point_values(p: GridPoint, cooperative: bool) -> list:
    vals = [p.n, p.sigma2_sq, p.alpha, p.beta]
    if cooperative:
        vals += [p.k, p.alpha_f, p.beta_f]
    return vals


def _rows_under(regions: DecisionRegions, scene: SceneConfig, p: GridPoint) -> list[ConfusionRow]:
    return [confusion_row(regions, v, p.n) for v in (scene.sigma0_sq, scene.sigma1_sq, p.sigma2_sq)]


def _entries(rows: Sequence[ConfusionRow]) -> list[float]:
    return [rows[t][d] for _, d, t in _ENTRIES]


def _mc_entries(counts: Sequence[np.ndarray], trials: int) -> list[float]:
    return [counts[t][d] / trials for _, d, t in _ENTRIES]


def _max_z(counts: Sequence[np.ndarray], rows: Sequence[ConfusionRow], trials: int) -> float:
    return max(binomial_z(int(counts[t][d]), trials, rows[t][d]) for t in range(3) for d in range(3))


# -- single sensor ------------------------------------------------------------------------


def _single_regions(rule: str, scene: SceneConfig, p: GridPoint) -> DecisionRegions:
    if rule == "UPPER":
        case = matching_upper_case(scene.sigma1_sq, p.sigma2_sq)
        return build_upper_bound_regions(case, p.n, scene.sigma0_sq, scene.sigma1_sq, p.alpha, p.beta)
    return build_regions(Rule(rule), p.n, scene.sigma0_sq, scene.sigma1_sq, p.alpha, p.beta)


def run_single_sensor(spec: ExperimentSpec) -> ResultTable:
    """Analytic and simulated single-sensor confusion entries for every rule at every grid point.

    Columns ``<rule>_hDhT`` hold ``Pr(decide HD | true HT)``; the ``_mc``
    twins are Monte Carlo estimates. ``<rule>_maxz`` is the largest gap
    between the two in binomial standard deviations over all nine entries.
    Infeasible rules give zero rows; overlap-repaired rules are flagged
    ``OVERLAP`` and the asymptotic value is left empty there.
    """
    if spec.alpha_f is not None or "k_sensors" in spec.axis or "alpha_beta_f" in spec.axis:
        raise InvalidParameterError("single-sensor runs take no global constraints")
    scene = spec.scene
    sim_rules = [r for r in spec.rules if r != "ASYMPTOTIC"]
    cols = list(_point_columns(spec, False))
    for r in sim_rules:
        low = r.lower()
        cols += [f"{low}_{e}" for e, _, _ in _ENTRIES] + [f"{low}_{e}_mc" for e, _, _ in _ENTRIES]
        if r == "UPPER":
            cols.append("upper_case")
        cols += [f"{low}_maxz", f"{low}_status"]
    if "ASYMPTOTIC" in spec.rules:
        cols += ["asymptotic_h2h2", "asymptotic_status"]

    rows = []
    for g in range(len(spec.grid)):
        p = spec.point(g)
        built: dict[str, Optional[DecisionRegions]] = {}
        for r in sim_rules:
            try:
                built[r] = _single_regions(r, scene, p)
            except InfeasibleError:
                built[r] = None
        feasible = [r for r in sim_rules if built[r] is not None]
        classifiers = [lambda y, R=built[r]: decide_array(R, y) for r in feasible]
        counts = {}
        if feasible:
            for h, var in enumerate((scene.sigma0_sq, scene.sigma1_sq, p.sigma2_sq)):
                counts[h] = simulate_counts(spec.master_seed, g, h, var, p.n, 1, spec.trials, spec.sampler, classifiers)

        row = _point_values(p, False)
        for r in sim_rules:
            R = built[r]
            if R is None:
                row += [0.0] * 10
                if r == "UPPER":
                    row.append(matching_upper_case(scene.sigma1_sq, p.sigma2_sq).value)
                row += [None, INFEASIBLE]
                continue
            j = feasible.index(r)
            analytic = _rows_under(R, scene, p)
            mc = [counts[h][j] for h in range(3)]
            z = _max_z(mc, analytic, spec.trials)
            row += _entries(analytic) + _mc_entries(mc, spec.trials)
            if r == "UPPER":
                row.append(matching_upper_case(scene.sigma1_sq, p.sigma2_sq).value)
            if z > SELF_CHECK_SIGMAS:
                status = SELFCHECK_FAIL
            elif R.thresholds.overlap_adjusted:
                status = OVERLAP
            else:
                status = OK
            row += [z, status]
        if "ASYMPTOTIC" in spec.rules:
            try:
                value = asymptotic_detection(p.n, scene.sigma0_sq, scene.sigma1_sq, p.sigma2_sq, p.alpha, p.beta)
                row += [value, OK]
            except OverlapError:
                row += [None, OVERLAP]
        rows.append(row)
    return ResultTable(cols, rows, _metadata("single_sensor", spec))


# -- cooperative sensing ---------------------------------------------------------------------


def _fused_classifier(regions: DecisionRegions, table: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    def classify(y: np.ndarray) -> np.ndarray:
        labels = decide_array(regions, y).reshape(len(y), -1)
        return table[(labels == 0).sum(axis=1), (labels == 1).sum(axis=1)]

    return classify


def run_cooperative(spec: ExperimentSpec) -> ResultTable:
    """Global confusion entries of the fused decision, analytic and end-to-end simulated.

    Each sensor runs the local GLRT or Rao rule; the fusion center applies the
    policy built by ``spec.methods[0]``. ``<rule>_agreement`` is the largest
    absolute gap between analytic and simulated entries, and
    ``<rule>_single_h2h2`` is the single-sensor reference.
    """
    if spec.alpha_f is None and "alpha_beta_f" not in spec.axis:
        raise InvalidParameterError("cooperative runs need alpha_f and beta_f")
    rules = [r for r in spec.rules if r in ("GLRT", "RAO")]
    if len(rules) != len(spec.rules):
        raise InvalidParameterError("cooperative runs support the GLRT and RAO local rules only")
    scene = spec.scene
    method = spec.methods[0]
    cols = list(_point_columns(spec, True))
    for r in rules:
        low = r.lower()
        cols += [f"{low}_global_{e}" for e, _, _ in _ENTRIES] + [f"{low}_global_{e}_mc" for e, _, _ in _ENTRIES]
        cols += [f"{low}_single_h2h2", f"{low}_s2_size", f"{low}_collisions"]
        cols += [f"{low}_agreement", f"{low}_maxz", f"{low}_status"]

    rows = []
    for g in range(len(spec.grid)):
        p = spec.point(g)
        if p.alpha_f is None:
            raise InvalidParameterError("cooperative runs need alpha_f and beta_f")
        plans: dict[str, tuple] = {}
        status: dict[str, str] = {}
        for r in rules:
            try:
                R = build_regions(Rule(r), p.n, scene.sigma0_sq, scene.sigma1_sq, p.alpha, p.beta)
                local = _rows_under(R, scene, p)
                policy = build_policy(method, p.k, local[0], local[1], p.alpha_f, p.beta_f, row2=local[2])
                plans[r] = (R, local, policy)
            except InfeasibleError:
                status[r] = INFEASIBLE
            except SizeLimitError:
                status[r] = SIZE_LIMIT
        feasible = [r for r in rules if r in plans]
        classifiers = [_fused_classifier(plans[r][0], plans[r][2].table()) for r in feasible]
        counts = {}
        if feasible:
            for h, var in enumerate((scene.sigma0_sq, scene.sigma1_sq, p.sigma2_sq)):
                counts[h] = simulate_counts(spec.master_seed, g, h, var, p.n, p.k, spec.trials, spec.sampler, classifiers)

        row = _point_values(p, True)
        for r in rules:
            if r not in plans:
                row += [0.0] * 11 + [0, 0, None, None, status[r]]
                continue
            j = feasible.index(r)
            R, local, policy = plans[r]
            analytic = [policy_performance(policy, lr) for lr in local]
            mc = [counts[h][j] for h in range(3)]
            a_vals, m_vals = _entries(analytic), _mc_entries(mc, spec.trials)
            agreement = max(abs(a - m) for a, m in zip(a_vals, m_vals))
            z = _max_z(mc, analytic, spec.trials)
            row += a_vals + m_vals + [local[2].p2, policy.size(Hypothesis.H2), policy.collisions, agreement, z]
            row.append(SELFCHECK_FAIL if z > SELF_CHECK_SIGMAS else OK)
        rows.append(row)
    return ResultTable(cols, rows, _metadata("cooperative", spec))


# -- policy comparison ------------------------------------------------------------------------


def run_two_step_comparison(spec: ExperimentSpec) -> ResultTable:
    """Global ``Pr(H2|H2)`` of each fusion method over the grid (analytic only).

    The local rule is ``spec.rules[0]`` (GLRT or RAO). A method that cannot
    meet the global constraints scores zero. ``<method>_budget_exhausted``
    flags exact searches that stopped at their evaluation budget.
    """
    if spec.alpha_f is None and "alpha_beta_f" not in spec.axis:
        raise InvalidParameterError("policy comparison needs alpha_f and beta_f")
    rule = spec.rules[0]
    if rule not in ("GLRT", "RAO"):
        raise InvalidParameterError(f"local rule must be GLRT or RAO, got {rule}")
    scene = spec.scene
    cols = list(_point_columns(spec, True))
    for m in spec.methods:
        low = m.lower()
        cols += [f"{low}_h2h2", f"{low}_s2_size", f"{low}_budget_exhausted", f"{low}_status"]

    rows = []
    for g in range(len(spec.grid)):
        p = spec.point(g)
        if p.k > BEST_EFFORT_MAX_K:
            raise SizeLimitError(f"policy comparison supports k <= {BEST_EFFORT_MAX_K}, got {p.k}")
        row = _point_values(p, True)
        try:
            R = build_regions(Rule(rule), p.n, scene.sigma0_sq, scene.sigma1_sq, p.alpha, p.beta)
            local = _rows_under(R, scene, p)
        except InfeasibleError:
            local = None
        for m in spec.methods:
            if local is None:
                row += [0.0, 0, False, INFEASIBLE]
                continue
            try:
                policy = build_policy(m, p.k, local[0], local[1], p.alpha_f, p.beta_f, row2=local[2])
            except InfeasibleError:
                row += [0.0, 0, False, INFEASIBLE]
                continue
            value = policy_performance(policy, local[2]).p2
            row += [value, policy.size(Hypothesis.H2), not policy.exact, OK]
        rows.append(row)
    return ResultTable(cols, rows, _metadata("two_step_comparison", spec))


RUNNERS = {
    "single_sensor": run_single_sensor,
    "cooperative": run_cooperative,
    "two_step_comparison": run_two_step_comparison,
}


# -- figure presets ---------------------------------------------------------------------------

NOISE_POWER = 1e-5
LU_SNR_DB = -5.0
FIGURES = (3, 4, 5, 6, 7, 8, 9)


def reference_scene(iu_db: float = -3.0, coexist: bool = False, n: int = 300, k: int = 1) -> SceneConfig:
    """Reference scene: noise power 1e-5 W, legitimate SNR of -5 dB, misuse power ``iu_db`` relative to noise."""
    p_s = NOISE_POWER * db_to_ratio(LU_SNR_DB)
    p_x = NOISE_POWER * db_to_ratio(iu_db)
    return scene_from_illegitimate_access(p_s, p_x, NOISE_POWER, coexist=coexist, n=n, k=k)


def sigma2_grid(
    sigma0_sq: float, sigma1_sq: float, points: int = 20, lo_factor: float = 1.05, exclude: float = 0.05
) -> list[float]:
    """Evenly spaced misuse variances in ``(lo_factor sigma0^2, 2 sigma1^2)`` minus ``sigma1^2 (1 -/+ exclude)``.

    Points sit at cell midpoints of the union of the two pieces, so neither
    open endpoint nor the excluded band is ever hit.
    """
    pieces = [(lo_factor * sigma0_sq, (1.0 - exclude) * sigma1_sq), ((1.0 + exclude) * sigma1_sq, 2.0 * sigma1_sq)]
    pieces = [(a, b) for a, b in pieces if b > a]
    total = sum(b - a for a, b in pieces)
    h = total / points
    out = []
    for i in range(points):
        s = (i + 0.5) * h
        for a, b in pieces:
            if s < b - a:
                out.append(a + s)
                break
            s -= b - a
    return out


def figure_spec(
    figure: int, trials: Optional[int] = None, seed: Optional[int] = None, coexist: bool = False
) -> tuple[str, ExperimentSpec]:
    """Runner name and experiment for one of the reference figures (3 to 9)."""
    seed = 0 if seed is None else seed
    if figure == 3:
        scene = reference_scene()
        grid = sigma2_grid(scene.sigma0_sq, scene.sigma1_sq)
        spec = ExperimentSpec(scene, "sigma2_sq", grid, alpha=0.8, beta=0.8, trials=trials or 10_000, master_seed=seed)
        return "single_sensor", spec
    if figure == 4:
        grid = [round(float(v), 4) for v in np.linspace(0.62, 0.98, 10)]
        spec = ExperimentSpec(reference_scene(-3.0, coexist), "alpha_beta", grid, trials=trials or 10_000, master_seed=seed)
        return "single_sensor", spec
    if figure == 5:
        grid = list(range(100, 1001, 100))
        spec = ExperimentSpec(reference_scene(-3.0, coexist), "n_samples", grid, trials=trials or 10_000, master_seed=seed)
        return "single_sensor", spec
    if figure == 6:
        scene = reference_scene(k=20)
        grid = sigma2_grid(scene.sigma0_sq, scene.sigma1_sq)
        spec = ExperimentSpec(
            scene, "sigma2_sq", grid, rules=("GLRT", "RAO"), alpha=0.85, beta=0.85, alpha_f=0.9, beta_f=0.9,
            trials=trials or 10_000, master_seed=seed, sampler="chi2",
        )
        return "cooperative", spec
    if figure == 7:
        grid = [(round(float(a), 4), f) for f in (0.9, 0.95, 0.99) for a in np.linspace(0.6, 0.96, 10)]
        spec = ExperimentSpec(
            reference_scene(-3.5, coexist, k=20), ("alpha_beta", "alpha_beta_f"), grid, rules=("GLRT",),
            trials=trials or 10_000, master_seed=seed, sampler="chi2",
        )
        return "cooperative", spec
    if figure == 8:
        grid = [(n, k) for n in range(150, 401, 50) for k in (5, 10, 15, 20)]
        spec = ExperimentSpec(
            reference_scene(-3.0, coexist), ("n_samples", "k_sensors"), grid, rules=("GLRT",), alpha=0.85, beta=0.85,
            alpha_f=0.95, beta_f=0.95, trials=trials or 10_000, master_seed=seed, sampler="chi2",
        )
        return "cooperative", spec
    if figure == 9:
        scene = SceneConfig(NOISE_POWER, 1.2e-5, 1.4e-5, 300, 5)
        grid = [round(float(v), 2) for v in np.arange(0.80, 0.995, 0.01)]
        spec = ExperimentSpec(
            scene, "alpha_beta_f", grid, rules=("GLRT",), alpha=0.85, beta=0.85,
            trials=trials or 1, master_seed=seed, methods=METHODS,
        )
        return "two_step_comparison", spec
    raise InvalidParameterError(f"figure must be one of {FIGURES}, got {figure}")


def run(runner: str, spec: ExperimentSpec) -> ResultTable:
    try:
        fn = RUNNERS[runner]
    except KeyError:
        raise InvalidParameterError(f"unknown runner {runner!r}; expected one of {sorted(RUNNERS)}") from None
    return fn(spec)
