"""Regenerate src/bcikit/resources/layout_1020_64.csv.

Positions follow the idealised spherical 10-10 system: 10 % of the
nasion-inion arc is 22.5 degrees, Cz sits at the vertex and the Fpz-T7-Oz
ring on the equator. Lateral electrodes are spaced evenly along the great
circle from the midline electrode of their row to the row's "7"/"8" position
on the equator. The sphere is flattened with an azimuthal equidistant
projection scaled so that the ring 22.5 degrees below the equator (Iz, T9,
T10) lands on the unit circle.
"""

import sys
from pathlib import Path

import numpy as np

STEP = 22.5
# midline polar angle (deg) and azimuth of the row's equator end point (left side)
ROWS = {
    "AF": (3 * STEP, 126.0),
    "F": (2 * STEP, 144.0),
    "FC": (STEP, 162.0),
    "C": (0.0, 180.0),
    "CP": (STEP, 198.0),
    "P": (2 * STEP, 216.0),
    "PO": (3 * STEP, 234.0),
}
# front rows sit in front of Cz (azimuth 90), back rows behind (azimuth 270)
FRONT = {"AF": True, "F": True, "FC": True, "C": True, "CP": False, "P": False, "PO": False}

CHANNELS = [
    "FC5", "FC3", "FC1", "FCz", "FC2", "FC4", "FC6",
    "C5", "C3", "C1", "Cz", "C2", "C4", "C6",
    "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6",
    "Fp1", "Fpz", "Fp2", "AF7", "AF3", "AFz", "AF4", "AF8",
    "F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8",
    "FT7", "FT8", "T7", "T8", "T9", "T10", "TP7", "TP8",
    "P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8",
    "PO7", "PO3", "POz", "PO4", "PO8", "O1", "Oz", "O2", "Iz",
]


def unit(polar, azimuth):
    p, a = np.radians(polar), np.radians(azimuth)
    return np.array([np.sin(p) * np.cos(a), np.sin(p) * np.sin(a), np.cos(p)])


def slerp(u, v, frac):
    omega = np.arccos(np.clip(u @ v, -1, 1))
    if omega < 1e-12:
        return u
    return (np.sin((1 - frac) * omega) * u + np.sin(frac * omega) * v) / np.sin(omega)


def position(name):
    fixed = {
        "Fpz": (90.0, 90.0), "Fp1": (90.0, 108.0), "Fp2": (90.0, 72.0),
        "Oz": (90.0, 270.0), "O1": (90.0, 252.0), "O2": (90.0, 288.0),
        "Iz": (112.5, 270.0), "T7": (90.0, 180.0), "T8": (90.0, 0.0),
        "T9": (112.5, 180.0), "T10": (112.5, 0.0),
        "FT7": (90.0, 162.0), "FT8": (90.0, 18.0),
        "TP7": (90.0, 198.0), "TP8": (90.0, 342.0),
    }
    if name in fixed:
        return unit(*fixed[name])
    row = name.rstrip("0123456789z")
    suffix = name[len(row):]
    mid_polar, left_az = ROWS[row]
    mid = unit(mid_polar, 90.0 if FRONT[row] else 270.0)
    if suffix == "z":
        return mid
    num = int(suffix)
    left = num % 2 == 1
    end_az = left_az if left else 180.0 - left_az
    end = unit(90.0, end_az)
    step = (num + 1) // 2 if left else num // 2  # 1,3,5,7 -> 1..4 ; 2,4,6,8 -> 1..4
    return slerp(mid, end, step / 4.0)


def project(v):
    polar = np.degrees(np.arccos(np.clip(v[2], -1, 1)))
    az = np.arctan2(v[1], v[0])
    r = polar / 112.5
    return r * np.cos(az), r * np.sin(az)


def main(out):
    lines = []
    for ch in CHANNELS:
        x, y = project(position(ch))
        lines.append(f"{ch},{float(round(x, 6))!r},{float(round(y, 6))!r}\n")
    Path(out).write_text("".join(lines), encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else
         Path(__file__).resolve().parents[1] / "src/bcikit/resources/layout_1020_64.csv")
