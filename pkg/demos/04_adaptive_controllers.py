#!/usr/bin/env python3
"""Watch the adaptive weight controllers steer the exploration weight.

The bandit treats a coarse weight grid as arms and credits each pull with
the drop in cross-validated RMSE it produced.  The actor-critic controller
picks a continuous weight from a 5-feature summary of the labeled set and
trains on the same reward signal, one gradient step per acquisition.
"""

import numpy as np

from wigs.config import ExperimentConfig, MethodSpec
from wigs.harness import resolve_dataset, run_replication

config = ExperimentConfig(dgp="two_regime", n=250, dataset_seed=9,
                          methods=(MethodSpec("igs", "igs"),))
dataset = resolve_dataset(config)
seed = 7

mab = run_replication(dataset, MethodSpec(
    "wigs_mab", "wigs_mab", {"arms": (0.25, 0.50, 0.75), "c_explore": 2.0}), seed)
sac = run_replication(dataset, MethodSpec("wigs_sac", "wigs_sac"), seed)

print("bandit arm usage over the whole run:")
weights = mab.weight[1:]  # row 0 precedes the first acquisition
for arm in (0.25, 0.50, 0.75):
    share = float(np.mean(weights == arm))
    print(f"  w={arm}: {'#' * int(40 * share)} {share:.1%}")

print("\nactor-critic weight trajectory (mean per phase of the run):")
chunks = np.array_split(sac.weight[1:], 5)
for i, chunk in enumerate(chunks):
    print(f"  phase {i + 1}/5: mean w = {np.nanmean(chunk):.3f} "
          f"(std {np.nanstd(chunk):.3f})")

print("\nhow the adaptive runs compare on this seed:")
igs = run_replication(dataset, MethodSpec("igs", "igs"), seed)
for name, trace in (("igs", igs), ("wigs_mab", mab), ("wigs_sac", sac)):
    print(f"  {name:<9} mean RMSE over the run: {trace.rmse.mean():.4f}")
