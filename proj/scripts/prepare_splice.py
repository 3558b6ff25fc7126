#!/usr/bin/env python3
"""Build data/splice.tsv (label<TAB>sequence) from the KEEL copy of the UCI
splice-junction dataset.

Usage: prepare_splice.py [splice.dat] [-o data/splice.tsv]

Without a path the KEEL file is taken from the `keel-ds` wheel, fetched with
`pip download`. Ambiguity codes (D, N, R, S) are replaced by one compatible
base drawn with a fixed seed, so the output alphabet is ACGT.
"""

import argparse
import pathlib
import random
import subprocess
import sys
import tempfile
import zipfile

AMBIGUITY = {"D": "AGT", "N": "ACGT", "R": "AG", "S": "CG"}
SEED = 12345


def fetch_dat(workdir: pathlib.Path) -> str:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "keel-ds", "-d", str(workdir)],
        check=True,
        stdout=subprocess.DEVNULL,
    )
    wheel = next(workdir.glob("keel_ds-*.whl"))
    with zipfile.ZipFile(wheel) as z:
        return z.read("keel_ds/data/balanced/raw/splice.dat").decode()


def convert(text: str) -> list[str]:
    rng = random.Random(SEED)
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        fields = [f.strip() for f in line.split(",")]
        label, bases = fields[-1], fields[:-1]
        seq = "".join(b if b in "ACGT" else rng.choice(AMBIGUITY[b]) for b in bases)
        out.append(f"{label}\t{seq}")
    return out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("dat", nargs="?")
    ap.add_argument("-o", "--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "splice.tsv"))
    args = ap.parse_args()
    if args.dat:
        text = pathlib.Path(args.dat).read_text()
    else:
        with tempfile.TemporaryDirectory() as tmp:
            text = fetch_dat(pathlib.Path(tmp))
    rows = convert(text)
    pathlib.Path(args.out).write_text("\n".join(rows) + "\n")
    print(f"wrote {len(rows)} records to {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
