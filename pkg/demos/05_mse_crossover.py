"""When does island interaction pay off?

The rule of thumb: interacting islands beat independent ones exactly when
N1 < B^2 N2 / V~.  This script evaluates both sides empirically on the
standard finite instance at a fixed island count.
"""

import numpy as np

from islandpf.asymptotics import constants, crossover_n1
from islandpf.engine import Bootstrap
from islandpf.fk import exact_flow
from islandpf.island import Independent, RunConfig, run
from islandpf.models import standard_instance

model = standard_instance()
tm = model.time_indexed()
f = np.arange(3, dtype=float)
truth = float(exact_flow(model).etas[-1] @ f)
c = constants(model, f)
n2 = 128
thr = crossover_n1(c, n2)
print(f"threshold at N2={n2}: N1 < {thr:.1f} favors interaction\n")

fn = {"identity": lambda x: np.asarray(x, float)}
reps = 300
for n1 in (max(1, round(thr / 4)), round(4 * thr)):
    mses = {}
    for label, across in (("independent", Independent()), ("interacting", Bootstrap())):
        vals = np.empty(reps)
        for r in range(reps):
            vals[r] = run(tm, RunConfig(n1=n1, n2=n2, within=Bootstrap(),
                                        across=across, seed=3_000 + r,
                                        test_functions=fn)).estimates["identity"]
        mses[label] = np.mean((vals - truth) ** 2)
    winner = min(mses, key=mses.get)
    side = "below" if n1 < thr else "above"
    print(f"N1={n1:3d} ({side} threshold): "
          f"MSE independent={mses['independent']:.3e} "
          f"interacting={mses['interacting']:.3e} -> {winner} wins")
