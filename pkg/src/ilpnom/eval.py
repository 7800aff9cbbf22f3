"""Baselines, paired statistical comparison and the RDPG simulation harness."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .core import (
    NominationList,
    PersonalDissimilarityMatrix,
    SupervisionInstance,
    WeightVector,
)
from .ilp import Status, build_model, solution_to_ranker, solve
from .ranking import (
    count_beating_worst,
    mean_reciprocal_rank,
    natural_ranker,
    worst_rank,
)
from .solver import SolverConfig
from . import spectral

SCHEMES = ("ILP", "ASE", "LSE")
Z95 = 1.959963984540054


# ---------------------------------------------------------------------------
# baselines


def singleton_objectives(matrix: PersonalDissimilarityMatrix, inst: SupervisionInstance) -> np.ndarray:
    """Worst rank of any S member under each single representation."""
    return np.array([worst_rank(natural_ranker(matrix.column(j)), inst.s_set)
                     for j in range(matrix.n_reps)])


def singleton_baseline(matrix: PersonalDissimilarityMatrix, inst: SupervisionInstance,
                       tie_break: str = "index", rng=None) -> Tuple[int, NominationList]:
    """Best single representation under the min-max-rank objective.

    Ties go to the lowest column index, or to a uniform draw from the
    argmin set when ``tie_break == "seeded"``.
    """
    obj = singleton_objectives(matrix, inst)
    argmin = np.flatnonzero(obj == obj.min())
    if tie_break == "index":
        j = int(argmin[0])
    elif tie_break == "seeded":
        if rng is None:
            raise ValueError("seeded tie-break needs a random generator")
        j = int(rng.choice(argmin))
    else:
        raise ValueError(f"unknown tie-break {tie_break!r}")
    return j, natural_ranker(matrix.column(j))


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank test


class WilcoxonResult(NamedTuple):
    statistic: float
    pvalue: float


EXACT_MAX_N = 20


def average_ranks(values) -> np.ndarray:
    """1-based ranks with tied values sharing the mean of their positions."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.size)
    sv = v[order]
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _exact_upper_tail(ranks: np.ndarray, w_obs: float) -> float:
    # doubled ranks are integers even with ties
    twice = np.rint(2 * ranks).astype(int)
    total = int(twice.sum())
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in twice:
        for s in range(total, r - 1, -1):
            counts[s] += counts[s - r]
    threshold = int(round(2 * w_obs))
    return sum(counts[threshold:]) / 2 ** len(twice)


def wilcoxon_signed_rank(differences) -> WilcoxonResult:
    """One-sided signed-rank test of H0: median difference <= 0.

    Zero differences are dropped. ``statistic`` is the sum of ranks of the
    positive differences; large values favor a positive shift. The p-value
    is exact for up to 20 nonzero differences and otherwise uses the
    tie-corrected normal approximation with continuity correction.
    """
    d = np.asarray(differences, dtype=float).reshape(-1)
    if not np.all(np.isfinite(d)):
        raise ValueError("differences must be finite")
    d = d[d != 0]
    if d.size == 0:
        raise ValueError("no nonzero differences; the test is undefined")
    if d.size < 5:
        raise ValueError(f"need at least 5 nonzero differences, got {d.size}")
    ranks = average_ranks(np.abs(d))
    w = float(ranks[d > 0].sum())
    n = d.size
    if n <= EXACT_MAX_N:
        return WilcoxonResult(w, _exact_upper_tail(ranks, w))
    mean = n * (n + 1) / 4
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24 - np.sum(tie_counts ** 3 - tie_counts) / 48
    z = (w - mean - 0.5) / math.sqrt(var)
    return WilcoxonResult(w, 0.5 * math.erfc(z / math.sqrt(2)))


# ---------------------------------------------------------------------------
# paired comparison


def ci_halfwidth(values) -> float:
    """Normal-approximation 95% half-width of the mean."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    return float(Z95 * v.std(ddof=1) / math.sqrt(v.size))


@dataclass
class ComparisonReport:
    label_a: str
    label_b: str
    keys: List[str]
    values_a: List[float]
    values_b: List[float]
    differences: List[float]
    statistic: float
    pvalue: float
    mean_a: float
    mean_b: float
    ci_a: float
    ci_b: float
    mean_difference: float
    ci_difference: float
    direction: str

    def __post_init__(self):
        if not (len(self.keys) == len(self.values_a) == len(self.values_b) == len(self.differences)):
            raise ValueError("paired arrays must have equal length")

    def to_dict(self) -> dict:
        return asdict(self)


def compare_paired(a, b, label_a: str = "a", label_b: str = "b",
                   keys: Optional[Sequence[str]] = None) -> ComparisonReport:
    """Paired comparison of per-instance scores ``a`` and ``b`` (e.g. MRR).

    Tests H0 "``b`` is as good or better than ``a``" against larger ``a``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired score vectors must be 1-D and of equal length")
    keys = [str(i) for i in range(a.size)] if keys is None else [str(k) for k in keys]
    diff = a - b
    w, p = wilcoxon_signed_rank(diff)
    mean_diff = float(diff.mean())
    if mean_diff > 0:
        direction = f"{label_a} scores higher than {label_b} on average"
    elif mean_diff < 0:
        direction = f"{label_a} scores lower than {label_b} on average"
    else:
        direction = f"{label_a} and {label_b} have equal mean scores"
    direction += f"; one-sided p = {p:.6g} for H0: {label_b} is as good or better"
    return ComparisonReport(
        label_a, label_b, keys, a.tolist(), b.tolist(), diff.tolist(), w, p,
        float(a.mean()), float(b.mean()), ci_halfwidth(a), ci_halfwidth(b),
        mean_diff, ci_halfwidth(diff), direction)


# ---------------------------------------------------------------------------
# simulation


MODES = ("NoiselessP", "NoisyAbar")


def default_grid() -> Tuple[float, ...]:
    return tuple(round(0.1 * i, 10) for i in range(11))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 51
    k: int = 1000
    alpha_truth_grid: Tuple[float, ...] = field(default_factory=default_grid)
    s_size: int = 5
    star_size: int = 6
    monte_carlo_reps: int = 100
    seed: int = 0
    m_embed: int = 2
    mode: str = "NoiselessP"

    def __post_init__(self):
        object.__setattr__(self, "alpha_truth_grid", tuple(float(a) for a in self.alpha_truth_grid))
        if not 1 <= self.s_size < self.star_size <= self.n - 1:
            raise ValueError("need 1 <= s_size < star_size <= n - 1")
        if not self.alpha_truth_grid or any(not 0 <= a <= 1 for a in self.alpha_truth_grid):
            raise ValueError("alpha_truth_grid must be a non-empty subset of [0, 1]")
        if self.k < 1 or self.monte_carlo_reps < 1 or self.m_embed < 1:
            raise ValueError("k, monte_carlo_reps and m_embed must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @classmethod
    def from_strings(cls, raw: dict) -> "ExperimentConfig":
        """Build from string values as read from a key = value file."""
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for key, text in raw.items():
            if key == "alpha_truth_grid":
                kw[key] = tuple(float(t) for t in text.split(",") if t.strip())
            elif key == "mode":
                kw[key] = text.strip()
            else:
                kw[key] = int(text)
        return cls(**kw)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["alpha_truth_grid"] = list(self.alpha_truth_grid)
        return d


@dataclass(frozen=True)
class ReplicateRecord:
    alpha_truth: float
    replicate: int
    scheme: str
    reciprocal_rank: float
    objective: int
    limit_hit: bool


@dataclass(frozen=True)
class SummaryRow:
    alpha_truth: float
    scheme: str
    mean_rr: float
    ci_halfwidth: float
    mean_objective: float
    reps_used: int
    limit_hits: int


@dataclass
class SimulationResult:
    config: ExperimentConfig
    rows: List[SummaryRow]
    replicates: List[ReplicateRecord]


def interestingness(truth: PersonalDissimilarityMatrix, alpha_truth: float) -> np.ndarray:
    """``alpha * d_ASE + (1 - alpha) * d_LSE`` on the embeddings of P."""
    return alpha_truth * truth.column(0) + (1.0 - alpha_truth) * truth.column(1)


def replicate_matrices(cfg: ExperimentConfig, replicate: int):
    """Truth and observed dissimilarity matrices (columns ASE, LSE)."""
    rng = spectral.make_rng(cfg.seed, replicate)
    P = spectral.probability_matrix(spectral.sample_latents(cfg.n, rng))
    truth = spectral.personal_dissimilarity(
        [spectral.ase(P.P, cfg.m_embed), spectral.lse(P.P, cfg.m_embed)], 0)
    if cfg.mode == "NoiselessP":
        return truth, truth
    A = spectral.sample_average_adjacency(P, cfg.k, rng).A_bar
    observed = spectral.personal_dissimilarity(
        [spectral.ase(A, cfg.m_embed), spectral.lse(A, cfg.m_embed)], 0)
    return truth, observed


def _run_replicate(args) -> List[ReplicateRecord]:
    cfg, replicate, solver_cfg, restrict = args
    truth, observed = replicate_matrices(cfg, replicate)
    n_items = truth.n_items
    out = []
    for alpha_truth in cfg.alpha_truth_grid:
        order = natural_ranker(interestingness(truth, alpha_truth)).order()
        inst = SupervisionInstance(n_items, frozenset(order[:cfg.s_size].tolist()))
        held = order[cfg.s_size:cfg.star_size].tolist()

        sol = solve(build_model(observed, inst), solver_cfg)
        limit_hit = sol.status is Status.ITERATION_LIMIT
        for j in range(observed.n_reps):
            corner = count_beating_worst(observed.column(j), inst)
            if sol.objective_value > corner:
                raise AssertionError(
                    f"ILP objective {sol.objective_value} exceeds singleton {corner} "
                    f"(replicate {replicate}, alpha {alpha_truth})")
        rankers = {
            "ILP": solution_to_ranker(observed, sol),
            "ASE": natural_ranker(observed.column(0)),
            "LSE": natural_ranker(observed.column(1)),
        }
        for scheme in SCHEMES:
            nlist = rankers[scheme]
            rr = mean_reciprocal_rank(nlist, held, inst if restrict else None)
            out.append(ReplicateRecord(alpha_truth, replicate, scheme, rr,
                                       worst_rank(nlist, inst.s_set), limit_hit))
    return out


def run_simulation(cfg: ExperimentConfig, solver_cfg: Optional[SolverConfig] = None,
                   restrict_mrr: str = "candidate", workers: int = 1,
                   exclude_limit_hits: bool = False) -> SimulationResult:
    """Monte Carlo comparison of the ILP against the ASE and LSE rankers.

    Each replicate draws latent positions (and, in ``NoisyAbar`` mode, an
    averaged adjacency matrix) once and reuses them across the whole
    ``alpha_truth_grid``. S and the held-out items are always defined from
    the embeddings of P. Replicates that hit the solver limit are counted
    in ``limit_hits`` and dropped from the means only when
    ``exclude_limit_hits`` is set.
    """
    if restrict_mrr not in ("full", "candidate"):
        raise ValueError("restrict_mrr must be 'full' or 'candidate'")
    solver_cfg = solver_cfg or SolverConfig()
    jobs = [(cfg, r, solver_cfg, restrict_mrr == "candidate") for r in range(cfg.monte_carlo_reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_replicate, jobs))
    else:
        batches = [_run_replicate(j) for j in jobs]
    records = [rec for batch in batches for rec in batch]

    rows = []
    for alpha_truth in cfg.alpha_truth_grid:
        at = [r for r in records if r.alpha_truth == alpha_truth]
        hits = {r.replicate for r in at if r.limit_hit}
        for scheme in SCHEMES:
            sel = [r for r in at if r.scheme == scheme
                   and not (exclude_limit_hits and r.replicate in hits)]
            rr = np.array([r.reciprocal_rank for r in sel])
            obj = np.array([r.objective for r in sel], dtype=float)
            rows.append(SummaryRow(
                alpha_truth, scheme,
                float(rr.mean()) if rr.size else math.nan,
                ci_halfwidth(rr),
                float(obj.mean()) if obj.size else math.nan,
                len(sel), len(hits)))
    return SimulationResult(cfg, rows, records)
