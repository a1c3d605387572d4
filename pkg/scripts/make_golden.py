"""Regenerate the golden CLI outputs shipped with each bundled model.

    python scripts/make_golden.py

Run after any intentional change to the numerics and review the diff.
"""

from pathlib import Path
import sys

from mwassoc.cli import main

MODELS = Path(__file__).resolve().parents[1] / "src" / "mwassoc" / "models"

# (output file, CLI arguments after --model NAME)
RUNS = [
    ("levels_a_l1.csv", ["levels", "--state", "a", "--ell", "1", "--no-trap"]),
    ("microwave_a.csv", ["scan-microwave", "--state", "a"]),
    ("microwave_X.csv", ["scan-microwave", "--state", "X"]),
    ("feshbach_a_top0.csv", ["scan-feshbach", "--state", "a", "--from-top", "0"]),
    ("feshbach_a_top1.csv", ["scan-feshbach", "--state", "a", "--from-top", "1"]),
    ("raman.csv", ["scan-raman"]),
    ("scaling_a.csv", ["scaling", "--state", "a"]),
]


def generate(model, outdir):
    outdir.mkdir(parents=True, exist_ok=True)
    for name, args in RUNS:
        cmd, rest = args[0], args[1:]
        rc = main([cmd, "--model", model, "--output", str(outdir / name), *rest])
        if rc != 0:
            raise SystemExit(f"{model}: {name} failed with exit status {rc}")
        print(f"wrote {outdir / name}")


if __name__ == "__main__":
    names = sys.argv[1:] or sorted(p.name for p in MODELS.iterdir() if (p / "system.yaml").is_file())
    for model in names:
        generate(model, MODELS / model / "golden")
