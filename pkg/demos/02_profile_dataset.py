"""Characterize datasets with the eight-descriptor profile.

Three synthetic datasets with different shapes: a noisy seasonal series, a
random walk and a seasonal series with a strong level shift.

    python3 demos/02_profile_dataset.py
"""

import numpy as np

from modcast.profiler import profile_dataset, profile_to_text
from modcast.synthetic import random_walk, sinusoid_trend

rng = np.random.default_rng(0)
t = np.arange(1200)
datasets = {
    "seasonal": sinusoid_trend(1200, 3, period=24, slope=0.0, noise=0.2),
    "walk": np.stack([random_walk(1200, s) for s in range(3)], axis=1),
    "shifted": np.stack([np.sin(2 * np.pi * t / 24) + 3.0 * (t > 800) + 0.2 * rng.standard_normal(1200) for _ in range(3)], axis=1),
}

for name, values in datasets.items():
    profile = profile_dataset(values, 96, 24, period=24)
    print(f"# {name}")
    print(profile_to_text(profile, name, 96, 24))

# a univariate view has no cross-channel correlation
single = profile_dataset(datasets["seasonal"][:, :1], 96, 24, period=24)
print("univariate correlation:", single.correlation, "absences:", single.absences)
