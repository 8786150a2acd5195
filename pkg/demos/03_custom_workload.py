"""
Writing and generating scenarios
================================

Scenarios are plain text. A ``[workload]`` section generates a seeded
random schedule; ``render_scenario`` writes the expanded schedule back out.
"""

from fogmtd import WorkloadSpec, SimParams, generate_workload, parse_scenario, render_scenario, run
from fogmtd.reference import first_divergence

text = """\
format=1
[params]
thresh = 600
req_size = 10
users = alice:20, bob:20, carol:20, mallory:20
fogs = edge1:1, edge2:1, quarantine:0
seed = 3

[workload]
duration = 4
demand = 5..20
shuffle = yes
inject = mallory@2:90
"""

scenario = parse_scenario(text)
print(render_scenario(scenario))

for second in run(scenario, check=True):
    print(second.second, second.served_per_fog, "cloud", second.cloud_served,
          "absorbed", second.absorbed, "blacklist", second.blacklist)

# The same thing from Python, with a tighter capacity so the cloud is needed.
params = SimParams(thresh=300, req_size=10,
                   users=tuple((f"u{i}", 25) for i in range(6)),
                   fogs=(("f1", 1), ("f2", 0)))
scenario = generate_workload(WorkloadSpec(params, duration=3, demand=(5, 25)), seed=11)
metrics = run(scenario)
print([(m.fog_served, m.cloud_served) for m in metrics])

# Every run can be cross-checked against the naive step-by-step replay.
print("divergence:", first_divergence(scenario, metrics))
