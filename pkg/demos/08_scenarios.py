"""Running a scenario file from Python; the same as `gcverify run scenarios/acceptance.yaml`."""

# %%
from pathlib import Path

from gcverify.scenario import run_file

here = Path(__file__).resolve().parent
report = run_file(here.parent / "scenarios" / "acceptance.yaml")
body = report.body()
print(body["summary"])
for c in body["checks"][:5]:
    print(f"{c['name']:28s} {c['op']:18s} verdict={c['verdict']} status={c['status']}")
