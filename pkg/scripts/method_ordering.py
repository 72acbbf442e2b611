"""Mean optimality of ILS, Restart and Local search on a random instance family.

    python3 scripts/method_ordering.py --count 200 --seed 0 --csv ordering.csv
"""

from __future__ import annotations

import argparse
import csv
import time
from dataclasses import asdict, dataclass

from ilssumm.ils import IlsParams, ils_summ
from ilssumm.local_search import init_solution, local_search
from ilssumm.objective import distance_matrix, total_distance
from ilssumm.oracle import enumerate_solve, exact_solve, mean_optimality, optimality_percentage, restart_summ
from ilssumm.synthetic import RandomFamily, sample_family


@dataclass
class OrderingConfig:
    seed: int = 0
    count: int = 200
    n_min: int = 6
    n_max: int = 14
    budget_fraction: float = 0.4
    m_max: int = 5
    csv: str | None = None


def run(cfg: OrderingConfig) -> dict[str, float]:
    family = RandomFamily(n_range=(cfg.n_min, cfg.n_max), budget_fraction=cfg.budget_fraction)
    rows = []
    t0 = time.perf_counter()
    for inst in sample_family(cfg.seed, cfg.count, family):
        dm = distance_matrix(inst)
        oracle = enumerate_solve if inst.n <= 20 else exact_solve
        opt = oracle(dm, inst).td_optimal
        tds = {
            "ils": total_distance(dm, ils_summ(dm, inst, IlsParams(cfg.m_max))[0]),
            "restart": total_distance(dm, restart_summ(dm, inst, time_budget_s=inst.total_duration_s)[0]),
            "local": local_search(dm, inst, init_solution(inst)).total_distance,
        }
        for method, td in tds.items():
            rows.append((inst.name, inst.n, method, td, opt, optimality_percentage(td, opt)))
    means = {m: mean_optimality([r[5] for r in rows if r[2] == m]) for m in ("ils", "restart", "local")}
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["instance", "n", "method", "td", "td_optimal", "optimality_percent"])
            writer.writerows(rows)
    print(f"{cfg.count} instances in {time.perf_counter() - t0:.1f} s")
    return means


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(OrderingConfig()).items():
        kind = type(default) if default is not None else str
        parser.add_argument(f"--{name.replace('_', '-')}", type=kind, default=default)
    cfg = OrderingConfig(**vars(parser.parse_args()))
    means = run(cfg)
    print(f"{'method':<10}{'mean optimality %':>20}")
    for method, value in means.items():
        print(f"{method:<10}{value:>20.3f}")


if __name__ == "__main__":
    main()
