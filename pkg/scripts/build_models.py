"""Render the bundled model systems from their params.yaml files.

    python scripts/build_models.py            # all models
    python scripts/build_models.py krb_like   # one model

Each potential is a Morse well blended into a dispersion tail with a tanh
switch; each dipole is a tanh step between a short- and a long-range value.
"""

from pathlib import Path
import re
import sys

import numpy as np
import yaml

from mwassoc.potentials import format_table
from mwassoc.units import CONSTANTS

MODELS = Path(__file__).resolve().parents[1] / "src" / "mwassoc" / "models"


def file_stem(label):
    return re.sub(r"[()]", "_", label).strip("_").replace("__", "_")


def model_potential(p, R):
    De = p["De_cm1"] / CONSTANTS.hartree_in_cm1
    morse = De * ((1.0 - np.exp(-p["a"] * (R - p["Re"]))) ** 2 - 1.0)
    disp = -p["c6"] / R**6 - p["c8"] / R**8
    f = 0.5 * (1.0 + np.tanh((R - p["switch_R"]) / p["switch_width"]))
    return (1.0 - f) * morse + f * disp


def model_dipole(p, R):
    s = 0.5 * (1.0 - np.tanh((R - p["Rc"]) / p["w"]))
    return p["d_long"] + (p["d_short"] - p["d_long"]) * s


def build(model_dir):
    params = yaml.safe_load((model_dir / "params.yaml").read_text())
    tab = params["tabulation"]
    for label, p in params["potentials"].items():
        R = np.arange(p["r_start"], tab["r_end"] + 1e-9, tab["step"])
        V_cm1 = model_potential(p, R) * CONSTANTS.hartree_in_cm1 + p["asymptote_cm1"]
        header = [
            ("label", label),
            ("unit_R", "bohr"),
            ("unit_V", "cm-1"),
            ("asymptote", repr(float(p["asymptote_cm1"]))),
            ("c6", repr(float(p["c6"]))),
            ("c8", repr(float(p["c8"]))),
        ]
        comment = f"{params['name']} {label}: Morse + dispersion model, see params.yaml"
        text = format_table(header, R, V_cm1, comment)
        (model_dir / f"{file_stem(label)}.pot").write_text(text)
    for label, p in params["dipoles"].items():
        R = np.arange(tab["dipole_r_start"], tab["dipole_r_end"] + 1e-9, tab["step"])
        header = [
            ("label", label),
            ("kind", p["kind"]),
            ("couples", ",".join(p["couples"])),
            ("unit_R", "bohr"),
            ("unit_d", "au"),
        ]
        comment = f"{params['name']} {label}: tanh-step dipole model, see params.yaml"
        text = format_table(header, R, model_dipole(p, R), comment)
        (model_dir / f"{file_stem(label)}.dip").write_text(text)


def main(names):
    dirs = [MODELS / n for n in names] if names else sorted(p.parent for p in MODELS.glob("*/params.yaml"))
    for d in dirs:
        build(d)
        print(f"wrote {d}")


if __name__ == "__main__":
    main(sys.argv[1:])
