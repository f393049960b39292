# %% [markdown]
# # Checking a multiplier tree
#
# The partial products of an n x m multiplier form a diamond-shaped matrix.
# After scheduling, the netlist is simulated and compared with the plain sum
# of the input bits.

# %%
from gpcforge import EXHAUSTIVE, RandomVectors, build_schedule, default_catalog, elaborate
from gpcforge import shape_multiplier, simulate, verify
from gpcforge.bitheap import mul_partial_products

m4 = shape_multiplier(4, 4)
net = elaborate(build_schedule(m4, default_catalog("strength")), m4)
print(verify(net, m4, EXHAUSTIVE))

# %%
m16 = shape_multiplier(16, 16)
net16 = elaborate(build_schedule(m16, default_catalog("efficiency")), m16)
print(hex(simulate(net16, mul_partial_products(0xFFFF, 0xFFFF, 16, 16)).value))
print(verify(net16, m16, RandomVectors(10_000, seed=1)))

# %% [markdown]
# The same netlist can be written out as HDL.

# %%
from gpcforge import emit_hdl

text = emit_hdl(net, "verilog")
print("\n".join(text.splitlines()[:30]))
