"""MAE computation and reporting.

Overall is defined as the plain arithmetic mean of the four per-target MAEs.
Display rounding is half-to-even at 3 decimals, applied to the decimal value
(binary float noise below 1e-9 is quenched first); internal values are never
rounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus
from .errors import EmptyInput, LengthMismatch

TARGET_COLUMNS = ("ffd_avg", "ffd_std", "trt_avg", "trt_std")


@dataclass(frozen=True)
class EvalReport:
    mae_ffd_avg: float
    mae_ffd_std: float
    mae_trt_avg: float
    mae_trt_std: float
    overall: float
    n_tokens: int
    slice: Optional[str] = None

    def __post_init__(self):
        assert self.overall == overall_of(self.per_target), "overall must be the mean of the four MAEs"

    @property
    def per_target(self) -> tuple[float, float, float, float]:
        return (self.mae_ffd_avg, self.mae_ffd_std, self.mae_trt_avg, self.mae_trt_std)


def overall_of(per_target: Sequence[float]) -> float:
    a, b, c, d = per_target
    return (a + b + c + d) / 4.0


def make_report(per_target: Sequence[float], n_tokens: int, slice: Optional[str] = None) -> EvalReport:
    a, b, c, d = (float(v) for v in per_target)
    return EvalReport(a, b, c, d, overall_of((a, b, c, d)), n_tokens, slice)


def mae(preds, targets, slice: Optional[str] = None) -> EvalReport:
    """Per-target mean absolute error plus overall."""
    P = np.asarray(preds, dtype=np.float64)
    T = np.asarray(
        [t.as_tuple() if hasattr(t, "as_tuple") else t for t in targets], dtype=np.float64
    )
    if len(P) != len(T):
        raise LengthMismatch(f"{len(P)} predictions vs {len(T)} targets")
    if len(P) == 0:
        raise EmptyInput("cannot evaluate zero tokens")
    per_target = np.abs(P - T).mean(axis=0)
    return make_report(per_target, n_tokens=len(P), slice=slice)


def evaluate_sliced(preds: np.ndarray, corpus: Corpus) -> list[EvalReport]:
    """One overall report, then one per dataset and one per language.

    Slice reports partition the tokens; their token-weighted per-target MAEs
    recompose to the global ones.
    """
    P = np.asarray(preds, dtype=np.float64)
    targets = [r.targets for r in corpus.records]
    reports = [mae(P, targets, slice=None)]
    for field in ("dataset", "language"):
        labels: list[str] = []
        for r in corpus.records:
            value = getattr(r, field)
            if value not in labels:
                labels.append(value)
        for label in labels:
            idx = [i for i, r in enumerate(corpus.records) if getattr(r, field) == label]
            reports.append(
                mae(P[idx], [targets[i] for i in idx], slice=f"{field}:{label}")
            )
    return reports


def round3(x: float) -> str:
    """Render at 3 decimals, half-to-even on the decimal value."""
    d = Decimal(repr(float(x))).quantize(Decimal("1e-9"), rounding=ROUND_HALF_EVEN)
    return str(d.quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN))


def emit_results_table(rows: list[tuple[str, dict[str, EvalReport]]]) -> str:
    """Fixed-order text table: FFDAvg, FFDStd, TRTAvg, TRTStd, Overall per split."""
    header = ["Model", "FFDAvg", "FFDStd", "TRTAvg", "TRTStd", "Overall"]
    lines = [header]
    for name, by_split in rows:
        for split, report in by_split.items():
            label = f"{name} [{split}]" if split else name
            lines.append([label] + [round3(v) for v in (*report.per_target, report.overall)])
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    out = []
    for row in lines:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(out) + "\n"


def eval_csv_lines(rows: list[tuple[str, str, EvalReport]]) -> list[str]:
    """Machine-readable CSV lines: model,split,slice,per-target MAEs,overall,n."""
    lines = ["model,split,slice,ffd_avg,ffd_std,trt_avg,trt_std,overall,n_tokens"]
    for model_name, split, report in rows:
        slice_label = report.slice or "all"
        values = [repr(v) for v in (*report.per_target, report.overall)]
        lines.append(
            ",".join([model_name, split, slice_label] + values + [str(report.n_tokens)])
        )
    return lines
