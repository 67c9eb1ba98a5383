"""Experiment driver for measuring oracles against the mutants.

Rates follow the operational usage of the experiments: the TP rate is the
percentage of erroneous (mutant, error-exposing) executions the oracle
rejects, the FP rate the percentage of correct executions it rejects.  The
agreement taxonomy of ``oracle.classify`` is available separately through
``audit_counts``.

Random streams are derived from ``data_seed`` with ``numpy.random.SeedSequence``
so that every sampled set is reproducible and independent of the others.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .estimator import TRAIN_DEFAULTS, VARIANTS, ArtificialSpecification
from .fnn import TrainConfig
from .oracle import Classification, Verdict, classify
from .subject import (
    DOMAIN_SIZE,
    MUTANTS,
    N_MUTANTS,
    amounts,
    domain_array,
    exposing_mask,
    index_to_records,
)

log = logging.getLogger(__name__)

MUTANT_IDS = tuple(range(1, N_MUTANTS + 1))
REJECTION_BUDGET = 10_000_000
_DRAW_CHUNK = 8192

# child stream indices under SeedSequence(data_seed)
_TRAIN_STREAM = 0
_CORRECT_STREAM = 1
_BAG_STREAM = 2
_MUTANT_STREAM0 = 3

CSV_HEADER = [
    "variant", "n", "aggressiveness", "mode", "lr", "epochs",
    "data_seed", "weight_seed", "mse_final", "tp_rate", "fp_rate", "fp_sigma",
    *[f"m{m}_tp" for m in MUTANT_IDS],
    "error",
]
MUTANT_CSV_HEADER = [
    "variant", "n", "aggressiveness", "mutant", "tp_rate", "fp_rate", "fp_sigma",
]


class DataError(RuntimeError):
    pass


def _streams(data_seed: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(data_seed).spawn(_MUTANT_STREAM0 + N_MUTANTS)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_training_set(seed, count: int = 500) -> tuple[np.ndarray, np.ndarray]:
    """``count`` distinct records drawn uniformly from the domain, with their amounts."""
    idx = _rng(seed).choice(DOMAIN_SIZE, size=count, replace=False)
    X = index_to_records(idx)
    return X, amounts(X)


def sample_exposing_set(mutant_id: int, seed, count: int = 500) -> np.ndarray:
    """``count`` distinct error-exposing records for a mutant.

    Uniform rejection sampling over the domain; after ``REJECTION_BUDGET``
    draws it falls back to sampling from the enumerated exposing set.
    """
    if mutant_id not in MUTANTS:
        raise DataError(f"unknown mutant M{mutant_id}")
    rng = _rng(seed)
    chosen: list[int] = []
    seen: set[int] = set()
    draws = 0
    while len(chosen) < count and draws < REJECTION_BUDGET:
        idx = rng.integers(0, DOMAIN_SIZE, size=_DRAW_CHUNK)
        draws += _DRAW_CHUNK
        hit = idx[exposing_mask(mutant_id, index_to_records(idx))]
        for i in hit.tolist():
            if i not in seen:
                seen.add(i)
                chosen.append(i)
                if len(chosen) == count:
                    break
    if len(chosen) < count:
        pool = np.flatnonzero(exposing_mask(mutant_id, domain_array()))
        if len(pool) < count:
            raise DataError(
                f"mutant M{mutant_id} has only {len(pool)} error-exposing inputs, need {count}"
            )
        chosen = rng.choice(pool, size=count, replace=False).tolist()
    return index_to_records(np.array(chosen))


def bagged_stddev(rejected, seed=None, bags: int = 5) -> float:
    """Std. deviation (population) of the rejection rate over random equal bags.

    ``rejected`` holds one entry per judgment: a bool (True = rejected) or a
    ``Verdict``.  The default protocol is 500 judgments in 5 bags of 100.
    """
    r = np.array(
        [v is Verdict.REJECT if isinstance(v, Verdict) else bool(v) for v in rejected]
    )
    if len(r) != 500 and bags == 5:
        raise ValueError(f"expected 500 judgments, got {len(r)}")
    if len(r) % bags:
        raise ValueError(f"{len(r)} judgments do not split into {bags} equal bags")
    perm = _rng(seed).permutation(len(r))
    rates = 100.0 * r[perm].reshape(bags, -1).mean(axis=1)
    return float(np.std(rates))


def capped_error_bar(rate: float, sigma: float) -> tuple[float, float]:
    """``(low, high)`` of ``rate ± sigma`` capped to [0, 100]."""
    return max(0.0, rate - sigma), min(100.0, rate + sigma)


class PerfectOracle:
    """Rejects exactly the executions whose amount differs from the original program's."""

    def accepts(self, X, y) -> np.ndarray:
        return np.asarray(y) == amounts(X)


@dataclass(frozen=True)
class ExperimentConfig:
    variant: str = "uni"
    n: int = 30
    aggressiveness: int = 0
    mode: str | None = None
    learning_rate: float | None = None
    epochs: int | None = None
    data_seed: int = 0
    weight_seed: int = 0
    n_train: int = 500
    n_eval_correct: int = 500
    n_eval_mutant: int = 500
    hidden: int = 24
    derivative_clip: float = 0.01
    shuffle: bool = False
    fp_on_training_set: bool = False
    per_mutant_fp_inputs: str = "fresh"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.aggressiveness not in range(6):
            raise ValueError("aggressiveness must be 0..5")
        if self.per_mutant_fp_inputs not in ("fresh", "exposing"):
            raise ValueError("per_mutant_fp_inputs must be 'fresh' or 'exposing'")
        if min(self.n_train, self.n_eval_correct, self.n_eval_mutant) < 1:
            raise ValueError("sample counts must be >= 1")
        mode, lr, epochs = TRAIN_DEFAULTS[self.variant]
        object.__setattr__(self, "mode", self.mode or mode)
        if self.learning_rate is None:
            object.__setattr__(self, "learning_rate", lr)
        if self.epochs is None:
            object.__setattr__(self, "epochs", epochs)
        if self.variant == "direct":
            object.__setattr__(self, "n", 1)

    def estimator(self) -> ArtificialSpecification:
        return ArtificialSpecification(
            variant=self.variant,
            n=self.n,
            aggressiveness=self.aggressiveness,
            mode=self.mode,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            hidden=self.hidden,
            seed=self.weight_seed,
            derivative_clip=self.derivative_clip,
            shuffle=self.shuffle,
        )

    def train_config(self) -> TrainConfig:
        return self.estimator().train_config()

    def training_key(self) -> tuple:
        """Fields that determine the trained network (aggressiveness excluded)."""
        d = asdict(self)
        for k in ("aggressiveness", "fp_on_training_set", "per_mutant_fp_inputs",
                  "n_eval_correct", "n_eval_mutant"):
            del d[k]
        return tuple(sorted(d.items()))

    @property
    def label(self) -> str:
        name = self.variant if self.variant == "direct" else f"{self.variant}_{self.n}"
        return name if self.mode == "incremental" else f"{self.mode} {name}"


@dataclass
class EvaluationReport:
    config: ExperimentConfig
    tp_rate: float = float("nan")
    fp_rate: float = float("nan")
    fp_sigma: float = float("nan")
    per_mutant_tp: dict[int, float] = field(default_factory=dict)
    per_mutant_fp: dict[int, float] = field(default_factory=dict)
    per_mutant_fp_sigma: dict[int, float] = field(default_factory=dict)
    mse_final: float = float("nan")
    error: str = ""

    def csv_row(self) -> list[str]:
        c = self.config
        row = [
            c.variant, str(c.n), str(c.aggressiveness), c.mode, f"{c.learning_rate:g}",
            str(c.epochs), str(c.data_seed), str(c.weight_seed),
        ]
        if self.error:
            return row + [""] * (len(CSV_HEADER) - len(row) - 1) + [self.error]
        row += [f"{self.mse_final:.6e}", f"{self.tp_rate:.2f}", f"{self.fp_rate:.2f}",
                f"{self.fp_sigma:.2f}"]
        row += [f"{self.per_mutant_tp[m]:.2f}" for m in MUTANT_IDS]
        return row + [""]

    def mutant_rows(self) -> list[list[str]]:
        c = self.config
        return [
            [c.variant, str(c.n), str(c.aggressiveness), f"M{m}",
             f"{self.per_mutant_tp[m]:.2f}", f"{self.per_mutant_fp[m]:.2f}",
             f"{self.per_mutant_fp_sigma[m]:.2f}"]
            for m in MUTANT_IDS
        ]


@dataclass
class EvaluationSets:
    train: tuple[np.ndarray, np.ndarray]
    correct: np.ndarray
    exposing: dict[int, np.ndarray]
    # correct executions judged for each mutant's FP rate
    correct_per_mutant: dict[int, np.ndarray]


def training_set(data_seed: int, count: int = 500) -> tuple[np.ndarray, np.ndarray]:
    return sample_training_set(_streams(data_seed)[_TRAIN_STREAM], count)


def evaluation_sets(config: ExperimentConfig) -> EvaluationSets:
    s = _streams(config.data_seed)
    train = training_set(config.data_seed, config.n_train)
    exposing = {
        m: sample_exposing_set(m, s[_MUTANT_STREAM0 + m - 1], config.n_eval_mutant)
        for m in MUTANT_IDS
    }
    if config.fp_on_training_set:
        correct = train[0]
        per_mutant = dict.fromkeys(MUTANT_IDS, correct)
    else:
        correct = sample_training_set(s[_CORRECT_STREAM], config.n_eval_correct)[0]
        fresh = s[_CORRECT_STREAM].spawn(N_MUTANTS)
        per_mutant = {
            m: sample_training_set(fresh[m - 1], config.n_eval_correct)[0] for m in MUTANT_IDS
        }
    if config.per_mutant_fp_inputs == "exposing":
        per_mutant = exposing
    return EvaluationSets(train, correct, exposing, per_mutant)


def _sigma(rejected: np.ndarray, seed) -> float:
    if len(rejected) == 500:
        return bagged_stddev(rejected, seed)
    return float("nan")


def evaluate(config: ExperimentConfig, oracle=None, sets: EvaluationSets | None = None):
    """Train (unless ``oracle`` is given) and measure TP/FP rates.

    ``oracle`` is any object with ``accepts(X, y) -> bool array``.
    Each mutant's FP rate comes from its own sample of correct executions
    (or, with ``per_mutant_fp_inputs="exposing"``, from the original
    program's outputs on that mutant's error-exposing inputs).
    """
    sets = sets or evaluation_sets(config)
    report = EvaluationReport(config)
    if oracle is None:
        oracle = config.estimator().fit(*sets.train)
    elif hasattr(oracle, "set_params"):
        oracle.set_params(aggressiveness=config.aggressiveness)
    report.mse_final = float(getattr(oracle, "mse_", float("nan")))

    bag_seeds = _streams(config.data_seed)[_BAG_STREAM].spawn(N_MUTANTS + 1)
    Xc = sets.correct
    rejected = ~oracle.accepts(Xc, amounts(Xc))
    report.fp_rate = 100.0 * rejected.mean()
    report.fp_sigma = _sigma(rejected, bag_seeds[0])

    total = hits = 0
    for m in MUTANT_IDS:
        Xm = sets.exposing[m]
        caught = ~oracle.accepts(Xm, amounts(Xm, m))
        report.per_mutant_tp[m] = 100.0 * caught.mean()
        total += len(caught)
        hits += int(caught.sum())
        Xf = sets.correct_per_mutant[m]
        false_alarm = ~oracle.accepts(Xf, amounts(Xf))
        report.per_mutant_fp[m] = 100.0 * false_alarm.mean()
        report.per_mutant_fp_sigma[m] = _sigma(false_alarm, bag_seeds[m])
    report.tp_rate = 100.0 * hits / total
    return report


def audit_counts(oracle, sets: EvaluationSets) -> Counter:
    """Counts of the agreement taxonomy (acceptance = positive) over all executions."""
    counts: Counter = Counter()
    Xc = sets.correct
    for ok in oracle.accepts(Xc, amounts(Xc)):
        counts[classify(Verdict.ACCEPT if ok else Verdict.REJECT, True)] += 1
    for m, Xm in sets.exposing.items():
        for ok in oracle.accepts(Xm, amounts(Xm, m)):
            counts[classify(Verdict.ACCEPT if ok else Verdict.REJECT, False)] += 1
    for c in Classification:
        counts.setdefault(c, 0)
    return counts


def _run_group(configs: list[ExperimentConfig]) -> list[EvaluationReport]:
    # configs share one training key: train once, judge at every aggressiveness
    reports = []
    sets = evaluation_sets(configs[0])
    try:
        est = configs[0].estimator().fit(*sets.train)
    except Exception as exc:  # recorded in-row; the sweep goes on
        log.warning("training failed for %s: %s", configs[0].label, exc)
        return [EvaluationReport(c, error=f"{type(exc).__name__}: {exc}") for c in configs]
    for c in configs:
        try:
            s = sets
            if (c.fp_on_training_set, c.per_mutant_fp_inputs) != (
                configs[0].fp_on_training_set, configs[0].per_mutant_fp_inputs
            ):
                s = evaluation_sets(c)
            reports.append(evaluate(c, oracle=est, sets=s))
        except Exception as exc:
            log.warning("evaluation failed for %s: %s", c.label, exc)
            reports.append(EvaluationReport(c, error=f"{type(exc).__name__}: {exc}"))
    return reports


def sweep(grid, workers: int = 1) -> list[EvaluationReport]:
    """Evaluate every config of ``grid``; reports come back in grid order."""
    grid = list(grid)
    groups: dict[tuple, list[int]] = {}
    for i, c in enumerate(grid):
        groups.setdefault(c.training_key(), []).append(i)
    jobs = [[grid[i] for i in idx] for idx in groups.values()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_group, jobs))
    else:
        results = [_run_group(job) for job in jobs]
    out: list[EvaluationReport | None] = [None] * len(grid)
    for idx, reps in zip(groups.values(), results):
        for i, r in zip(idx, reps):
            out[i] = r
    return out


def write_csv(reports, fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(r.csv_row())
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def write_mutant_csv(reports, fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MUTANT_CSV_HEADER)
    for r in reports:
        if not r.error:
            w.writerows(r.mutant_rows())
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def preset(name: str, data_seed: int = 0, weight_seed: int = 0) -> list[ExperimentConfig]:
    seeds = dict(data_seed=data_seed, weight_seed=weight_seed)
    if name == "fig2":
        nets = [
            dict(variant="direct"),
            dict(variant="uni", n=30),
            dict(variant="unimin", n=10),
            dict(variant="unimin", n=10, mode="batch"),
        ]
        return [ExperimentConfig(aggressiveness=a, **net, **seeds) for net in nets for a in range(6)]
    if name == "fig3":
        return [
            ExperimentConfig(variant=v, n=n, aggressiveness=0, **seeds)
            for v in ("uni", "lower", "center")
            for n in range(10, 61, 10)
        ]
    if name == "fig4":
        return [ExperimentConfig(variant=v, n=30, aggressiveness=0, **seeds) for v in ("uni", "lower")]
    raise ValueError(f"unknown preset {name!r}; choose fig2, fig3 or fig4")

