"""
One run file, three doors
=========================

The same analysis is reachable through the Python API, the command line,
and the HTTP service, and all three hand back the same bytes.  This script
writes a run file, serves it from a background thread, and checks.
"""

import json
import tempfile
import threading
import time
import urllib.request
from pathlib import Path

import uvicorn

from runlens import RunRegistry, simulate_random_search, write_run_history
from runlens.cli import main
from runlens.service import create_app

workdir = Path(tempfile.mkdtemp(prefix="runlens-demo-"))
history = simulate_random_search(run_id="demo", n_candidates=8, n_rows=120,
                                 seed=7)
run_file = workdir / "demo.json"
write_run_history(history, run_file)
print(f"run file: {run_file} ({run_file.stat().st_size} bytes)")

# door 1: the in-process registry
registry = RunRegistry(seed=0)
registry.add_file(run_file)
api_bytes = registry.render("demo", "leaderboard", {})

# door 2: the command line writes the same payload to disk
out = workdir / "cli"
main(["analyze", "leaderboard", str(run_file), "--out", str(out),
      "--seed", "0"])
cli_bytes = (out / "leaderboard.json").read_bytes()
print(f"CLI output matches API render: {cli_bytes == api_bytes}")

# door 3: a live HTTP server on a spare port
served = RunRegistry(seed=0)
served.add_file(run_file)
app = create_app(served)
config = uvicorn.Config(app, host="127.0.0.1", port=8311, log_level="error")
server = uvicorn.Server(config)
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)

base = "http://127.0.0.1:8311"
url = base + "/runs/demo/leaderboard"
first = urllib.request.urlopen(url).read()
second = urllib.request.urlopen(url).read()   # served from cache
print(f"HTTP body matches API render:  {first == api_bytes}")
print(f"cache hit is byte-identical:   {second == first}")

doc = json.loads(first)
print()
print("leaderboard over HTTP:")
for row in doc["rows"][:5]:
    print(f"  #{row['rank']}  {row['candidate_id']}  "
          f"{row['validation_performance']:.3f}")

# exports go through POST and come back as file attachments
body = json.dumps({"run_id": "demo", "artifact": "config",
                   "params": {"candidate_id": doc["rows"][0]["candidate_id"]}})
request = urllib.request.Request(base + "/export", data=body.encode(),
                                 headers={"Content-Type": "application/json"})
response = urllib.request.urlopen(request)
print()
print(f"export: {response.headers['Content-Disposition']}")
print(f"        {len(response.read())} bytes of configuration JSON")

server.should_exit = True
thread.join(timeout=5)
