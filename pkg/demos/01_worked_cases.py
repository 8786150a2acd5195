"""
Replaying the worked cases
==========================

Each built-in fixture is a single second of traffic against three fog
servers: F1 and F3 active, F2 asleep and reserved for attackers.
"""

from fogmtd import builtin_fixture, run
from fogmtd.scenario_io import PAPER_TABLES, flag_rows

# Capacity per fog server: 5000 Mb/s of processing over 10 Mb requests.
scenario = builtin_fixture("case-a")
print("F_cap =", scenario.params.f_cap)

# Run every case and print the flag rows next to the published ones.
for name, table in PAPER_TABLES.items():
    scenario = builtin_fixture(name)
    second = run(scenario)[0]
    rows = flag_rows(second, scenario.params.f_cap)
    print(f"\n{name}  (cloud={second.cloud_served}, blacklist={second.blacklist})")
    for row, expected in table.items():
        mark = "" if rows[row] == expected else "   <-- differs"
        print(f"  {row:8} {rows[row]}{mark}")

# In case C the last user does not fit in F1; the remainder lands on F3.
second = run(builtin_fixture("case-c"))[0]
for event in second.events:
    if event.uid == "U6":
        print(event)
