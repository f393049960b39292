# %% [markdown]
# # Benchmark matrices
#
# Every benchmark matrix under every ordering, verified on random vectors,
# then compared with the published counter counts.

# %%
from gpcforge.toolfront import bench_counters, bench_csv

rows = bench_counters(samples=2000)
print(bench_csv(rows))

# %%
for r in rows:
    print(f"{r.label:10} {r.scheme:10} stages {r.stages} (ref {r.ref_stages})"
          f"  LUTs {r.counter_luts} (ref {r.ref_luts})")
