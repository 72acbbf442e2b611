"""ILS runtime versus instance size on synthetic D=96 histogram-like instances.

The budget follows the long-video rule min(240 s, 10% of the total duration).
Distance-matrix construction is timed separately from the search.

    python3 scripts/scalability.py --sizes 100 300 1000 3000
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from ilssumm.ils import IlsParams, ils_summ
from ilssumm.instance import derive_budget
from ilssumm.objective import distance_matrix
from ilssumm.synthetic import random_instance


@dataclass
class ScalabilityConfig:
    sizes: list[int] = field(default_factory=lambda: [100, 300, 1000])
    dim: int = 96
    ratio: float = 0.10
    cap_s: float = 240.0
    repeats: int = 2
    m_max: int = 5


def run(cfg: ScalabilityConfig) -> list[dict]:
    results = []
    for n in cfg.sizes:
        inst = random_instance(np.random.default_rng(n), n, cfg.dim)
        inst = inst.with_budget(derive_budget(inst.total_duration_s, cfg.ratio, cfg.cap_s))
        t0 = time.perf_counter()
        dm = distance_matrix(inst)
        dm.neighbor_order, dm.neighbor_dist, dm.rank
        t_matrix = time.perf_counter() - t0
        best, sol, trace = np.inf, None, None
        for _ in range(cfg.repeats):
            t0 = time.perf_counter()
            sol, trace = ils_summ(dm, inst, IlsParams(cfg.m_max))
            best = min(best, time.perf_counter() - t0)
        results.append(dict(n=n, matrix_s=t_matrix, ils_s=best, selected=len(sol.selected),
                            steps=trace.local_search_steps, pct_of_video=100.0 * best / inst.total_duration_s))
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 300, 1000])
    parser.add_argument("--dim", type=int, default=96)
    parser.add_argument("--repeats", type=int, default=2)
    args = parser.parse_args()
    results = run(ScalabilityConfig(sizes=args.sizes, dim=args.dim, repeats=args.repeats))
    print(f"{'N':>6}{'matrix s':>10}{'ILS s':>10}{'|S|':>6}{'steps':>7}{'% video':>10}")
    for r in results:
        print(f"{r['n']:>6}{r['matrix_s']:>10.3f}{r['ils_s']:>10.3f}{r['selected']:>6}{r['steps']:>7}"
              f"{r['pct_of_video']:>10.4f}")
    if len(results) > 1:
        slope = np.polyfit(np.log([r["n"] for r in results]), np.log([r["ils_s"] for r in results]), 1)[0]
        print(f"log-log slope of ILS time: {slope:.2f}")


if __name__ == "__main__":
    main()
