"""Closed-form bias/variance constants versus simulated islands.

Evaluates (B, V, B~, V~) exactly on the standard finite instance, then
shows the two scaling laws they predict: N1 * Var -> V for one bootstrap
island and N1*N2 * Var -> V + V~ for the doubly interacting system.
"""

import numpy as np

from islandpf.asymptotics import constants, crossover_n1, mse_predict
from islandpf.engine import Bootstrap
from islandpf.fk import exact_flow
from islandpf.island import Independent, RunConfig, run
from islandpf.models import standard_instance

model = standard_instance()
tm = model.time_indexed()
f = np.arange(3, dtype=float)
c = constants(model, f, name="identity")
truth = float(exact_flow(model).etas[-1] @ f)

print(f"B = {c.b:.4f}   V = {c.v:.4f}")
print(f"B~ = {c.b_tilde:.4f}  V~ = {c.v_tilde:.4f}")
print(f"MSE crossover threshold per island count: N1 < {crossover_n1(c, 1):.4f} * N2\n")

fn = {"identity": lambda x: np.asarray(x, float)}

reps = 3000
vals = np.empty(reps)
for r in range(reps):
    vals[r] = run(tm, RunConfig(n1=2000, n2=1, within=Bootstrap(),
                                across=Independent(), seed=r,
                                test_functions=fn)).estimates["identity"]
print(f"single island, N1=2000: N1*Var = {2000 * vals.var():.3f} (V = {c.v:.3f})")

reps = 1500
vals = np.empty(reps)
for r in range(reps):
    vals[r] = run(tm, RunConfig(n1=64, n2=64, within=Bootstrap(),
                                across=Bootstrap(), seed=10_000 + r,
                                test_functions=fn)).estimates["identity"]
nn = 64 * 64
print(f"double bootstrap, 64x64: N1N2*Var = {nn * vals.var():.3f} "
      f"(V + V~ = {c.v + c.v_tilde:.3f})")

n2 = 256
thr = crossover_n1(c, n2)
print(f"\npredicted MSE at N2={n2} around the threshold N1={thr:.1f}:")
for n1 in (max(1, round(thr / 4)), round(4 * thr)):
    ind = mse_predict(c, n1, n2, "independent")
    inter = mse_predict(c, n1, n2, "interacting")
    better = "interacting" if inter < ind else "independent"
    print(f"  N1={n1:3d}: independent={ind:.3e} interacting={inter:.3e} -> {better}")
