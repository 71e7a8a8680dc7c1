"""Monte-Carlo sweep of the NLOS bias on one station.

Runs the built-in magnitude scenario (bias 0..1000 m on station 1, 60 m range
noise) and prints RMSE per algorithm. Least squares degrades steadily with
the bias; SRNI flattens out once the bias is large enough to be picked out
from the noise.

Run: python demos/magnitude_sweep.py [trials]   (default 200 trials)
"""

import sys

from nlos_locate.simkit import run_scenario, scenario_presets, with_overrides

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 200
config = with_overrides(scenario_presets()["C_nlos_magnitude"], trials=trials, seed=7)
result = run_scenario(config, keep_trials=False)

algorithms = config.algorithms
print("bias (m) " + "".join(f"{a:>9}" for a in algorithms))
for point in config.sweep:
    print(f"{point:8.0f} " + "".join(f"{result.rmse(point, a):9.1f}" for a in algorithms))
