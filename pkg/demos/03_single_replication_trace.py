#!/usr/bin/env python3
"""Run single replications to pool exhaustion and read the learning curves.

Every run starts from the same seeded 5% split, acquires one label per
iteration, and ends with the whole pool labeled (full-pool RMSE exactly
zero).  The interesting part is how fast each strategy gets there.
"""

from wigs.config import ExperimentConfig, MethodSpec
from wigs.harness import resolve_dataset, run_replication
from wigs.metrics import auc_trapezoid, label_efficiency, milestone_iteration, relative_auc

config = ExperimentConfig(dgp="two_regime", n=300, dataset_seed=5,
                          methods=(MethodSpec("igs", "igs"),))
dataset = resolve_dataset(config)

seed = 42
igs = run_replication(dataset, MethodSpec("igs", "igs"), seed)
wigs = run_replication(dataset, MethodSpec("wigs", "wigs_static", {"w": 0.75}), seed)
passive = run_replication(dataset, MethodSpec("passive", "passive"), seed)

print(f"pool size {igs.n_iterations}, shared starting RMSE {igs.rmse[0]:.4f}\n")
print(f"{'labels':>8} {'igs':>9} {'wigs 0.75':>10} {'passive':>9}")
for t in range(0, igs.n_iterations + 1, igs.n_iterations // 10):
    print(f"{igs.labeled_count[t]:>8} {igs.rmse[t]:>9.4f} "
          f"{wigs.rmse[t]:>10.4f} {passive.rmse[t]:>9.4f}")

print(f"\nfinal RMSE (all labels known): {igs.rmse[-1]}, {wigs.rmse[-1]}, {passive.rmse[-1]}")
print(f"area under the curve  igs: {auc_trapezoid(igs.rmse):.2f}  "
      f"wigs: {auc_trapezoid(wigs.rmse):.2f}  passive: {auc_trapezoid(passive.rmse):.2f}")
print(f"relative AUC vs igs   wigs: {relative_auc(wigs.rmse, igs.rmse):.3f}  "
      f"passive: {relative_auc(passive.rmse, igs.rmse):.3f}")

for q in (0.7, 0.8):
    n_igs = milestone_iteration(igs.rmse, q)
    n_wigs = milestone_iteration(wigs.rmse, q)
    print(f"labels to reach {q:.0%} of the possible gain: igs {n_igs}, wigs {n_wigs} "
          f"(ratio {label_efficiency(wigs.rmse, igs.rmse, q):.3f})")
