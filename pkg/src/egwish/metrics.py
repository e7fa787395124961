"""Structure-recovery metrics over edge sets and error metrics for
log normalizing constants."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch
from .graph import Graph


@dataclass(frozen=True)
class ConfusionCounts:
    """Edge-presence confusion counts over the p(p-1)/2 vertex pairs;
    an edge present in the truth counts as a positive."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion(est: Graph, truth: Graph) -> ConfusionCounts:
    """Count edge agreements and disagreements between an estimated and a
    true graph on the same vertex set."""
    if est.p != truth.p:
        raise DimensionMismatch(f"graphs differ in size: {est.p} vs {truth.p}")
    tp = len(est.edges & truth.edges)
    fp = len(est.edges - truth.edges)
    fn = len(truth.edges - est.edges)
    tn = est.max_edges - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def sp_se_mcc(c: ConfusionCounts) -> tuple[float, float, float]:
    """Specificity TN/(TN+FP), sensitivity TP/(TP+FN), and the Matthews
    correlation coefficient.  A specificity or sensitivity with empty
    denominator is 1 (nothing to misclassify); an MCC whose denominator has
    a zero factor is 0."""
    sp = c.tn / (c.tn + c.fp) if c.tn + c.fp > 0 else 1.0
    se = c.tp / (c.tp + c.fn) if c.tp + c.fn > 0 else 1.0
    factors = (c.tp + c.fp, c.tp + c.fn, c.tn + c.fp, c.tn + c.fn)
    if any(f == 0 for f in factors):
        mcc = 0.0
    else:
        mcc = (c.tp * c.tn - c.fp * c.fn) / math.sqrt(float(np.prod(factors, dtype=np.float64)))
    return sp, se, mcc


def rel_error_lognorm(log_true: float, log_hat: float) -> float:
    """Relative error of a log normalizing constant:
    |log_true - log_hat| / |log_true|."""
    return abs(log_true - log_hat) / abs(log_true)


@dataclass(frozen=True)
class LogNormErrorReport:
    """Relative error with its absolute companion; reliable is False when
    |log_true| < 1, where the relative error loses meaning."""

    rel_error: float
    abs_error: float
    reliable: bool


def lognorm_error_report(log_true: float, log_hat: float) -> LogNormErrorReport:
    return LogNormErrorReport(
        rel_error=rel_error_lognorm(log_true, log_hat),
        abs_error=abs(log_true - log_hat),
        reliable=abs(log_true) >= 1.0,
    )


@dataclass(frozen=True)
class ReplicationRow:
    """One replication's recovery metrics under a single scenario."""

    model: str
    p: int
    n: int
    delta: float
    rep: int
    sp: float
    se: float
    mcc: float


def write_replication_csv(rows: Sequence[ReplicationRow], path: str | Path) -> None:
    """Per-replication metrics followed by a mean row and a standard-error
    row (standard error of the mean; blank with a single replication)."""
    if not rows:
        raise ValueError("no replication rows to write")
    cols = ("sp", "se", "mcc")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "p", "n", "delta", "rep", "sp", "se", "mcc"])
        for r in rows:
            writer.writerow(
                [r.model, r.p, r.n, repr(r.delta), r.rep]
                + [repr(getattr(r, c)) for c in cols]
            )
        head = [rows[0].model, rows[0].p, rows[0].n, repr(rows[0].delta)]
        means = [float(np.mean([getattr(r, c) for r in rows])) for c in cols]
        writer.writerow(head + ["mean"] + [repr(m) for m in means])
        if len(rows) > 1:
            ses = [
                float(np.std([getattr(r, c) for r in rows], ddof=1) / math.sqrt(len(rows)))
                for c in cols
            ]
            writer.writerow(head + ["se"] + [repr(s) for s in ses])
        else:
            writer.writerow(head + ["se", "", "", ""])


def read_replication_csv(path: str | Path) -> tuple[list[ReplicationRow], dict[str, float]]:
    """Parse a replication CSV back into rows plus the summary means."""
    rows: list[ReplicationRow] = []
    summary: dict[str, float] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            if rec["rep"] == "mean":
                for c in ("sp", "se", "mcc"):
                    summary[f"mean_{c}"] = float(rec[c])
            elif rec["rep"] == "se":
                for c in ("sp", "se", "mcc"):
                    if rec[c] != "":
                        summary[f"se_{c}"] = float(rec[c])
            else:
                rows.append(
                    ReplicationRow(
                        model=rec["model"],
                        p=int(rec["p"]),
                        n=int(rec["n"]),
                        delta=float(rec["delta"]),
                        rep=int(rec["rep"]),
                        sp=float(rec["sp"]),
                        se=float(rec["se"]),
                        mcc=float(rec["mcc"]),
                    )
                )
    return rows, summary
