#!/usr/bin/env python3
"""Fetch MovieLens-100k ratings as a user<TAB>item<TAB>rating<TAB>timestamp TSV.

Tries the GroupLens archive first. When that host is unreachable, falls back to
the copy bundled in the pytorch-widedeep wheel on PyPI (same 100,000 rows as
u.data). The data is not redistributed with this repository.
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL_MEMBER = "pytorch_widedeep/datasets/data/MovieLens100k_data.parquet.brotli"


def from_grouplens():
    with urllib.request.urlopen(GROUPLENS_URL, timeout=15) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data").decode("utf-8")


def from_wheel():
    import pandas as pd

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q",
             "-d", tmp, "pytorch-widedeep==1.7.0"],
            check=True,
        )
        wheel = next(pathlib.Path(tmp).glob("*.whl"))
        raw = zipfile.ZipFile(wheel).read(WHEEL_MEMBER)
    df = pd.read_parquet(io.BytesIO(raw))
    cols = ["user_id", "movie_id", "rating", "timestamp"]
    return df[cols].to_csv(sep="\t", header=False, index=False)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="data/ml-100k.tsv")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        text = from_grouplens()
        source = "grouplens"
    except Exception as exc:  # noqa: BLE001
        print(f"grouplens unavailable ({exc}); using PyPI wheel copy", file=sys.stderr)
        text = from_wheel()
        source = "pytorch-widedeep wheel"
    out.write_text(text)
    rows = text.count("\n")
    print(f"wrote {rows} rows to {out} ({source})")
    if rows != 100000:
        sys.exit(f"expected 100000 rows, got {rows}")


if __name__ == "__main__":
    main()
