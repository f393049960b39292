# %% [markdown]
# # Counters and their metrics
#
# A counter sums weighted input bits into a short binary word.  Each one is
# scored by how many bits it removes per LUT (efficiency), how strongly it
# shrinks a column (strength) and how much of its output range is wasted
# (slack).  All three are exact fractions.

# %%
from gpcforge import CounterSpec, SliceAtom, compose_slice, default_catalog, metrics
from gpcforge.gpc_core import catalog_csv

fa = CounterSpec.parse("(3:1,1]", 1, name="FA")
print(fa.signature, metrics(fa))

# %% [markdown]
# Whole-slice counters are built from two 2-column atoms.  If the low atom is
# not (0,6), a spare carry input becomes one more weight-1 bit.

# %%
for high in SliceAtom:
    row = []
    for low in SliceAtom:
        m = compose_slice(low, high).metrics
        row.append(f"{str(m.efficiency):>4} {str(m.strength):>5} {str(m.slack):>4}")
    print(high.name, " | ".join(row))

# %% [markdown]
# The catalog order is what the scheduler tries first.

# %%
for order in ("efficiency", "strength"):
    print(order, [c.name for c in default_catalog(order)])

print(catalog_csv(default_catalog("strength")))
