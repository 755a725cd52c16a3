"""The whole benchmark protocol in one call.

Runs every model over one seeded dataset for a handful of trials, then
prints the aggregate report: per-model metric summaries, the one-sided
t-test of the hybrid against each benchmark, and root-cause hit rates per
explainer and rank budget.  Equivalent CLI:

    gridseer run --config configs/tiny.json --trials 3
"""

import tempfile
from pathlib import Path

from gridseer.experiment import load_run_config, run_experiment

config_path = Path(__file__).resolve().parent.parent / "configs" / "tiny.json"
cfg = load_run_config(config_path)

with tempfile.TemporaryDirectory() as scratch:
    from dataclasses import replace

    cfg = replace(cfg, trials=3, out_dir=str(Path(scratch) / "run"))
    result = run_experiment(cfg)
    print((result.out_dir / "report.txt").read_text())
    print("files written:")
    for path in sorted(result.out_dir.rglob("*")):
        if path.is_file():
            print(f"  {path.relative_to(result.out_dir)}")
