"""Small Monte-Carlo run: composite-likelihood fit against the naive average.

Uses the ``rcon-compare`` preset scaled down so it finishes in seconds.
"""

from symggm import preset, run_experiment

cfg = preset("rcon-compare", replicates=8, n=500, p=24)
report = run_experiment(cfg, workers=None)

for row in report.summary():
    print(f"{row['estimator']:<10} SSE {row['sse_mean']:.4f} ({row['sse_sd']:.4f})"
          f"  matrix SSE {row['sse_matrix_mean']:.4f}")

wins = sum(c["sse"] < nv["sse"] for c, nv in zip(
    [r for r in report.rows if r["estimator"] == "composite"],
    [r for r in report.rows if r["estimator"] == "naive"]))
print(f"composite had the smaller error in {wins}/{cfg.replicates} replicates")
