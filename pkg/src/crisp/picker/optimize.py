"""Exhaustive search over picker algorithms and their (e, s) grids."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..core import CrispError, PickSet
from .algorithms import ALGORITHMS, DEFAULT_GRIDS, pick
from .evaluation import DEFAULT_THRESHOLDS, MapResult, evaluate_many

log = logging.getLogger(__name__)


class NoPicksError(CrispError):
    """Every evaluated configuration produced an empty pick set."""


@dataclass(frozen=True)
class GridRow:
    algorithm: str
    e: float
    s: float
    result: MapResult
    n_picks: int


@dataclass(frozen=True)
class TuneResult:
    algorithm: str
    e: float
    s: float
    mAP: float
    rows: tuple[GridRow, ...]

    @property
    def best(self) -> GridRow:
        return next(r for r in self.rows
                    if (r.algorithm, r.e, r.s) == (self.algorithm, self.e, self.s))


def grid_points(algorithms=ALGORITHMS, grids=None):
    """(algorithm, e, s) in search order: algorithms as given, then ascending e, then s."""
    grids = {} if grids is None else grids
    out = []
    for algo in algorithms:
        es, ss = grids.get(algo, DEFAULT_GRIDS[algo])
        out.extend((algo, float(e), float(s)) for e in sorted(es) for s in sorted(ss))
    return out


def _format_table(rows) -> str:
    lines = ["algorithm       e      s      picks  mAP"]
    lines += [f"{r.algorithm:<15} {r.e:<6g} {r.s:<6g} {r.n_picks:<6d} {r.result.mAP:.4f}" for r in rows]
    return "\n".join(lines)


def optimize_picker(gt_maps, gt_centers, diameter: float, algorithms=ALGORITHMS, grids=None,
                    thresholds=DEFAULT_THRESHOLDS, threads: int = 1) -> TuneResult:
    """Run every grid point on the maps and return the best mean mAP.

    ``gt_maps`` and ``gt_centers`` may be single items or equal-length
    sequences (one per micrograph).  A later point replaces the incumbent
    only with a strictly larger mAP, so ties go to the earlier point of
    :func:`grid_points`.
    """
    if not isinstance(gt_maps, (list, tuple)):
        gt_maps, gt_centers = [gt_maps], [gt_centers]
    if not gt_maps or len(gt_maps) != len(gt_centers):
        raise ValueError("need one ground-truth pick set per map")
    gts = [PickSet(g.centers, diameter, diameter) for g in gt_centers]
    points = grid_points(algorithms, grids)
    if not points:
        raise ValueError("empty search grid")

    def run(point):
        algo, e, s = point
        preds = [pick(algo, m, diameter, e, s).with_box(diameter) for m in gt_maps]
        return GridRow(algo, e, s, evaluate_many(gts, preds, thresholds),
                       sum(len(p) for p in preds))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(run, points))
    else:
        rows = [run(p) for p in points]
    if all(r.n_picks == 0 for r in rows):
        raise NoPicksError("every picker configuration returned no centers\n" + _format_table(rows))
    best = rows[0]
    for row in rows[1:]:
        if row.result.mAP > best.result.mAP:
            best = row
    log.info("best picker %s e=%g s=%g mAP=%.4f", best.algorithm, best.e, best.s, best.result.mAP)
    return TuneResult(best.algorithm, best.e, best.s, best.result.mAP, tuple(rows))
