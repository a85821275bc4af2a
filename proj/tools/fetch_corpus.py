#!/usr/bin/env python3
"""Fetch a public-domain English book sample as plain .txt files.

Downloads parquet shards of the Wikisource English dump (transcribed
public-domain books and documents) and writes one UTF-8 .txt file per
document. An optional Wikipedia shard can be fetched the same way for
frequency counting.

Usage:
  tools/fetch_corpus.py --out corpora/books --megabytes 400
  tools/fetch_corpus.py --source wikipedia --out corpora/wiki --megabytes 200

Set HF_ENDPOINT to use a mirror.
"""
import argparse
import json
import os
import sys
import urllib.request

SOURCES = {
    "wikisource": {
        "repo": "datasets/wikimedia/wikisource",
        "shards": ["20231201.en/train-{:05d}-of-00005.parquet".format(i) for i in range(5)],
        "text_col": "text",
        "title_col": "title",
    },
    "wikipedia": {
        "repo": "datasets/wikimedia/wikipedia",
        "shards": ["20231101.en/train-{:05d}-of-00041.parquet".format(i) for i in range(41)],
        "text_col": "text",
        "title_col": "title",
    },
}


def fetch(url: str, dest: str) -> None:
    if os.path.exists(dest):
        print(f"[skip] {dest}")
        return
    print(f"[get ] {url}")
    tmp = dest + ".part"
    with urllib.request.urlopen(url) as r, open(tmp, "wb") as f:
        while True:
            chunk = r.read(1 << 20)
            if not chunk:
                break
            f.write(chunk)
    os.rename(tmp, dest)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--source", choices=sorted(SOURCES), default="wikisource")
    ap.add_argument("--out", required=True, help="output directory for .txt files")
    ap.add_argument("--megabytes", type=float, default=400.0,
                    help="stop after writing this much text")
    ap.add_argument("--min-doc-chars", type=int, default=2000,
                    help="skip documents shorter than this")
    ap.add_argument("--cache", default=None, help="where to keep parquet shards")
    args = ap.parse_args()

    import polars as pl

    src = SOURCES[args.source]
    endpoint = os.environ.get("HF_ENDPOINT", "https://huggingface.co")
    cache = args.cache or os.path.join(args.out, "_parquet")
    os.makedirs(cache, exist_ok=True)
    os.makedirs(args.out, exist_ok=True)

    budget = int(args.megabytes * 1e6)
    written = 0
    ndocs = 0
    manifest = []
    for shard in src["shards"]:
        if written >= budget:
            break
        url = f"{endpoint}/{src['repo']}/resolve/main/{shard}"
        local = os.path.join(cache, os.path.basename(shard))
        fetch(url, local)
        df = pl.read_parquet(local, columns=[src["text_col"], src["title_col"]])
        for text, title in df.iter_rows():
            if written >= budget:
                break
            if text is None or len(text) < args.min_doc_chars:
                continue
            name = f"doc{ndocs:06d}.txt"
            with open(os.path.join(args.out, name), "w", encoding="utf-8") as f:
                f.write(text)
            manifest.append({"file": name, "title": title, "chars": len(text)})
            written += len(text)
            ndocs += 1
    with open(os.path.join(args.out, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump({"source": args.source, "documents": manifest}, f, indent=1)
    print(f"wrote {ndocs} documents, {written / 1e6:.1f} MB -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
