"""A scaled-down benchmark run through the harness API.

Generates a small custom suite (2 seeds per stress family), runs every
policy, and prints the aggregate table the CLI would write to
aggregate.json. The full frozen suite is `trackmem run --config
configs/default.json --out results/`.

Run with: python3 demos/05_benchmark.py
"""

import tempfile
from pathlib import Path

from trackmem.harness import run_benchmark, scene_list
from trackmem.simulator import config_to_dict, suite_standard

# shrink the frozen suite: same families, first two seeds of each
small = [config_to_dict(s) for s in suite_standard(n_seeds=2)]
cfg = {
    "suite": "custom",
    "scenes": small,
    "policies": ["sam2_fifo", "dam4sam", "samurai_drm",
                 "sam2long_drm", "samite_drm", "him2sam_drm"],
    "k_ram": 6,
    "k_drm": 3,
}
print(f"running {len(scene_list(cfg))} scenes x {len(cfg['policies'])} policies ...")

with tempfile.TemporaryDirectory() as out:
    aggregate = run_benchmark(cfg, out)
    written = sorted(p.relative_to(out) for p in Path(out).rglob("*") if p.is_file())
    print("outputs:", ", ".join(str(p) for p in written[:6]), "...")

print(f"\n{'policy':14s} {'family':12s} {'AO':>6s} {'S':>6s} {'Rob':>6s}")
for policy, families in aggregate["per_policy_family"].items():
    for family, m in families.items():
        print(f"{policy:14s} {family:12s} {m['ao']:6.3f} "
              f"{m['success_auc']:6.3f} {m['rob']:6.3f}")

print("\noverall mean AO per policy:")
for policy, m in aggregate["per_policy"].items():
    print(f"  {policy:14s} {m['ao']:.3f}")
