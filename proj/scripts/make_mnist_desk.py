#!/usr/bin/env python3
# Copyright 2026 The pixreg Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the desk-scale MNIST IDX files shipped in data/mnist-desk.tar.gz.

Sources are two package-bundled MNIST subsets that need no dataset download:
  * the npm `mnist` package (10,000 digits, pixels stored as v/255 rounded to
    three decimals, which round-trips exactly to the original bytes), used
    as the training split;
  * the `mlxtend` wheel's mnist_5k.csv.gz (5,000 digits, 500 per class,
    disjoint from the npm set), used as the test split.

Usage: make_mnist_desk.py OUT_DIR [--npm-tgz PATH] [--mlxtend-whl PATH]
Missing archives are fetched with `npm pack mnist` / `pip download mlxtend`.
"""

import argparse
import gzip
import io
import json
import pathlib
import struct
import subprocess
import tarfile
import tempfile
import zipfile


def write_idx_images(path, images):
    n = len(images)
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def npm_digits(tgz):
    images, labels = [], []
    with tarfile.open(tgz) as tar:
        for d in range(10):
            raw = tar.extractfile(f"package/src/digits/{d}.json").read()
            flat = json.loads(raw)["data"]
            assert len(flat) % 784 == 0
            for k in range(len(flat) // 784):
                px = [int(round(v * 255)) for v in flat[k * 784:(k + 1) * 784]]
                images.append(px)
                labels.append(d)
    return images, labels


def mlxtend_digits(whl):
    with zipfile.ZipFile(whl) as z:
        text = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    images, labels = [], []
    for line in text.strip().split("\n"):
        vals = [int(float(v)) for v in line.split(",")]
        images.append(vals[:784])
        labels.append(vals[784])
    return images, labels


def interleave(images, labels, seed):
    # Class-sorted sources are shuffled once so that prefix subsets stay balanced.
    import random
    order = list(range(len(labels)))
    random.Random(seed).shuffle(order)
    return [images[i] for i in order], [labels[i] for i in order]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir")
    ap.add_argument("--npm-tgz")
    ap.add_argument("--mlxtend-whl")
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        tgz = args.npm_tgz
        if tgz is None:
            subprocess.run(["npm", "pack", "mnist", "--pack-destination", tmp], check=True)
            tgz = next(pathlib.Path(tmp).glob("mnist-*.tgz"))
        whl = args.mlxtend_whl
        if whl is None:
            subprocess.run(["pip", "download", "--no-deps", "-d", tmp, "mlxtend"], check=True)
            whl = next(pathlib.Path(tmp).glob("mlxtend-*.whl"))
        tr_x, tr_y = interleave(*npm_digits(tgz), seed=20240601)
        te_x, te_y = interleave(*mlxtend_digits(whl), seed=20240602)
    write_idx_images(out / "train-images-idx3-ubyte", tr_x)
    write_idx_labels(out / "train-labels-idx1-ubyte", tr_y)
    write_idx_images(out / "t10k-images-idx3-ubyte", te_x)
    write_idx_labels(out / "t10k-labels-idx1-ubyte", te_y)
    print(f"train {len(tr_y)} test {len(te_y)} -> {out}")


if __name__ == "__main__":
    main()
