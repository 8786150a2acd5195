"""
Throughput before and after an attack
=====================================

Ten users each send 100 requests per second, which keeps the two active
fog servers exactly full. At second 4 user U10 sends 200 requests, twice
its declared maximum, and is migrated to the sleeping attack fog.
"""

from fogmtd import builtin_fixture, export_metrics, parse_scenario, run
from fogmtd.scenario_io import fixture_text

attacked = builtin_fixture("eval-fig12")
baseline = parse_scenario(fixture_text("eval-fig12").replace("inject = U10@4:200", ""))

print("second  baseline  attacked  absorbed  rejected")
for before, after in zip(run(baseline), run(attacked)):
    print(f"{after.second:6}  {before.fog_served:8}  {after.fog_served:8}"
          f"  {after.absorbed:8}  {after.rejected_at_detection:8}")

# Only the detection second loses the oversized batch; afterwards the fog
# layer keeps serving everyone except the isolated attacker, whose traffic
# is absorbed by F2 without using any serving capacity.

# The same numbers in the plot-ready export format:
print()
print(export_metrics(run(attacked)), end="")
