"""Run every attack scenario with defences off and on and print one row per arm."""

import argparse
import csv
import tempfile
from pathlib import Path

from manetga.cli import cmd_attack_eval
from manetga.scenario import load

ROOT = Path(__file__).resolve().parent.parent / "scenarios"
COLUMNS = ("arm", "delivery_ratio", "control_msgs", "blacklist_events", "route_discoveries")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenarios", default=str(ROOT))
    ap.add_argument("--out", help="keep per-scenario outputs here instead of a temp dir")
    args = ap.parse_args()
    out = Path(args.out or tempfile.mkdtemp(prefix="attack-matrix-"))
    print(f"{'scenario':<18}" + "".join(f"{c:>18}" for c in COLUMNS) + f"{'detections':>30}")
    for path in sorted(Path(args.scenarios).glob("*.scn")):
        sc = load(path)
        if not sc.attackers:
            continue
        cmd_attack_eval(str(path), str(out / path.stem))
        with open(out / path.stem / "comparison.csv", newline="") as fh:
            for row in csv.DictReader(fh):
                hits = " ".join(f"{k[3:]}={row[k]}/{row['fp_' + k[3:]]}/{row['fn_' + k[3:]]}"
                                for k in row if k.startswith("tp_") and row["arm"] == "on"
                                and any(row[p + k[3:]] != "0" for p in ("tp_", "fp_", "fn_")))
                print(f"{path.stem:<18}" + "".join(f"{row[c]:>18}" for c in COLUMNS) + f"{hits:>30}")
    print(f"outputs in {out}  (detections shown as tp/fp/fn)")


if __name__ == "__main__":
    main()
