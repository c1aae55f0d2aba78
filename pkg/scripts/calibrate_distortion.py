#!/usr/bin/env python3
"""Record the distortion-trend calibration constant.

Runs the same deterministic sweep as the acceptance regression test
(k in {8, 16, 32, 64}, 50 seeds each on fixed random graphs) and writes
calibration/distortion.json with the observed per-k maxima and the largest
max-distortion / ln k ratio.  The regression test fails only if a later
build exceeds that ratio by more than 25%.
"""

import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from test_acceptance import distortion_sweep  # noqa: E402


def main() -> int:
    observed = distortion_sweep()
    ratio = max(d / math.log(k) for k, d in observed.items())
    out = {
        "per_k_max_distortion": {str(k): d for k, d in observed.items()},
        "max_over_lnk": ratio,
        "seeds_per_k": 50,
    }
    path = Path(__file__).resolve().parent.parent / "calibration" / "distortion.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(f"wrote {path}")
    for k, d in observed.items():
        print(f"  k={k:3d}: max distortion {d:.4f}  (/ln k = {d / math.log(k):.4f})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
