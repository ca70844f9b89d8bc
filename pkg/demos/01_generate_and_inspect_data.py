#!/usr/bin/env python3
"""Generate the two bundled synthetic regression tasks and look inside them.

Both tasks draw x from the same non-uniform Gaussian mixture on [0, 1], so
some regions are crowded and others sparse.  Each places a high-noise band
inside the densest region on purpose: a selector that multiplies a
feature-diversity score into its criterion will struggle to query there.
"""

import numpy as np

from wigs.data import (
    sample_three_regime,
    sample_two_regime,
    save_csv,
    two_regime_mean,
    two_regime_noise_std,
)

ds = sample_two_regime(1000, seed=7)
x = ds.features[:, 0]
y = ds.targets

print("two-regime task:", ds.n_samples, "points, x in",
      f"[{x.min():.3f}, {x.max():.3f}]")

# where did the mixture put mass?
hist, edges = np.histogram(x, bins=10, range=(0.0, 1.0))
for count, lo, hi in zip(hist, edges, edges[1:]):
    print(f"  x in [{lo:.1f}, {hi:.1f}): {'#' * (count // 10)} {count}")

# the residual spread against the noise-free response shows the trap band
resid = y - two_regime_mean(x)
in_band = (x > 0.8) & (x < 0.9)
print(f"residual std inside the 0.8 < x < 0.9 band: {resid[in_band].std():.3f} "
      f"(generator sigma {two_regime_noise_std(np.array([0.85]))[0]})")
print(f"residual std elsewhere:                     {resid[~in_band].std():.3f}")
print(f"band density share: {in_band.mean():.1%} of samples "
      "(densest component sits right on the noisy band)")

ds3 = sample_three_regime(1000, seed=7)
x3 = ds3.features[:, 0]
print("\nthree-regime task adds an extreme-noise sparse band:")
for lo, hi, label in ((0.6, 0.65, "sigma=1.5 band"), (0.7, 1.0, "sigma=0.15 regime")):
    mask = (x3 > lo) & (x3 < hi)
    print(f"  {label}: {mask.sum()} samples")

save_csv(ds, "two_regime_1000.csv")
print("\nwrote two_regime_1000.csv (same format load_csv reads back)")
