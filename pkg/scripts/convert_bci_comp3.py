"""One-time conversion of the BCI Competition III files to ASCII exports.

The competition distributes MATLAB files. This script turns them into the
plain text files read by ``bcikit reproduce`` (needs scipy for ``loadmat``)::

    python3 scripts/convert_bci_comp3.py p300 Subject_A_Train.mat OUT/Subject_A_Train
    python3 scripts/convert_bci_comp3.py p300 Subject_A_Test.mat OUT/Subject_A_Test \
        --text-file true_labels_A.txt
    python3 scripts/convert_bci_comp3.py ecog Competition_train.mat OUT/Competition_train
    python3 scripts/convert_bci_comp3.py ecog Competition_test.mat OUT/Competition_test \
        --labels-file true_labels.txt

For every PREFIX it writes ``PREFIX_signal.txt`` (one row per sample),
``PREFIX_markers.txt`` (``time_ms<TAB>label``), ``PREFIX_channels.txt`` and,
for the speller data, ``PREFIX_text.txt``.

Speller (data set II, 240 Hz): the character blocks are concatenated. A
marker is placed at every flash onset, labelled ``C1``..``C6`` for stimulus
codes 1-6 (columns) and ``R1``..``R6`` for codes 7-12 (rows); training
files get a ``:T``/``:N`` suffix from ``StimulusType``. The test set's true
characters are published separately and passed with ``--text-file``.

ECoG (data set I, 1000 Hz): the 3 s trials are concatenated; a marker at
every trial onset is labelled ``finger`` (label -1) or ``tongue`` (label 1).
The test labels are published separately and passed with ``--labels-file``.
"""

import argparse
from pathlib import Path

import numpy as np

from bcikit.formats import default_layout


def _write(prefix: Path, signal: np.ndarray, markers, channels, text=None):
    prefix.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(f"{prefix}_signal.txt", signal, fmt="%.9g")
    with open(f"{prefix}_markers.txt", "w", encoding="utf-8") as fh:
        for t, lbl in markers:
            fh.write(f"{float(t)!r}\t{lbl}\n")
    Path(f"{prefix}_channels.txt").write_text("\n".join(channels) + "\n", encoding="utf-8")
    if text is not None:
        Path(f"{prefix}_text.txt").write_text(text + "\n", encoding="utf-8")


def convert_p300(mat, prefix: Path, text_file=None):
    signal = np.asarray(mat["Signal"], dtype=float)  # chars x samples x channels
    flashing = np.asarray(mat["Flashing"])
    codes = np.asarray(mat["StimulusCode"]).astype(int)
    types = np.asarray(mat["StimulusType"]).astype(int) if "StimulusType" in mat else None
    n_char, n_samp, _ = signal.shape
    dt = 1000.0 / 240.0
    markers = []
    for c in range(n_char):
        onset = np.flatnonzero(np.diff(np.concatenate([[0], flashing[c]])) > 0)
        for i in onset:
            code = codes[c, i]
            label = f"C{code}" if code <= 6 else f"R{code - 6}"
            if types is not None:
                label += ":T" if types[c, i] else ":N"
            markers.append(((c * n_samp + i) * dt, label))
    if text_file is not None:
        text = Path(text_file).read_text(encoding="utf-8").strip()
    elif "TargetChar" in mat:
        text = "".join(np.atleast_1d(mat["TargetChar"]).astype(str)).strip()
    else:
        raise SystemExit("test files need --text-file with the true characters")
    _write(prefix, signal.reshape(-1, signal.shape[2]), markers, default_layout().names, text)


def convert_ecog(mat, prefix: Path, labels_file=None):
    x = np.asarray(mat["X"], dtype=float)  # trials x channels x samples
    if labels_file is not None:
        y = np.loadtxt(labels_file).astype(int).ravel()
    elif "Y" in mat:
        y = np.asarray(mat["Y"]).astype(int).ravel()
    else:
        raise SystemExit("test files need --labels-file")
    n_trial, n_ch, n_samp = x.shape
    names = {-1: "finger", 1: "tongue"}
    markers = [(k * n_samp * 1.0, names[int(v)]) for k, v in enumerate(y)]
    signal = x.transpose(0, 2, 1).reshape(-1, n_ch)
    _write(prefix, signal, markers, [f"ch{i + 1}" for i in range(n_ch)])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("kind", choices=["p300", "ecog"])
    p.add_argument("mat")
    p.add_argument("prefix")
    p.add_argument("--text-file")
    p.add_argument("--labels-file")
    args = p.parse_args(argv)
    from scipy.io import loadmat

    mat = loadmat(args.mat)
    if args.kind == "p300":
        convert_p300(mat, Path(args.prefix), args.text_file)
    else:
        convert_ecog(mat, Path(args.prefix), args.labels_file)


if __name__ == "__main__":
    main()
