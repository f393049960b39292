# %% [markdown]
# # Scheduling a population count
#
# Seven bits of equal weight.  The scheduler places counters stage by stage
# until every column can be absorbed by the final carry-propagate chain.

# %%
from gpcforge import build_schedule, default_catalog, parse_shape, render_dots, schedule_stats

matrix = parse_shape("popcount:7")
print(render_dots(matrix))

# %%
for order in ("efficiency", "strength"):
    sched = build_schedule(matrix, default_catalog(order))
    print(order, schedule_stats(sched))
    for h in sched.heights:
        print("  heights", h)
    print("  chain", [e.kind.value for e in sched.cp_chain])

# %% [markdown]
# FA and (6) both remove one bit per LUT.  By default the tie goes to the
# stronger counter; breaking it on slack instead picks two full adders.

# %%
sched = build_schedule(matrix, default_catalog("efficiency", "slack"))
print(schedule_stats(sched), [e.kind.value for e in sched.cp_chain])

# %% [markdown]
# A larger input shows the stage count growing slowly with the height.

# %%
for n in (16, 64, 128, 512):
    sched = build_schedule(parse_shape(f"popcount:{n}"), default_catalog("strength"))
    print(n, schedule_stats(sched), "live bits per stage:", sched.live_counts)
