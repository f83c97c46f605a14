#!/usr/bin/env python3
"""Regenerates the synthetic test images under data/synthetic/ (binary PGM, 256x256)."""
import os
import numpy as np

N = 256
OUT = os.path.join(os.path.dirname(__file__), "..", "data", "synthetic")


def save_pgm(name, img):
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    with open(os.path.join(OUT, name + ".pgm"), "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        f.write(img.tobytes())


def main():
    os.makedirs(OUT, exist_ok=True)
    y, x = np.mgrid[0:N, 0:N].astype(np.float64)

    save_pgm("checker", np.where(((x // 32) + (y // 32)) % 2 == 0, 40.0, 215.0))
    save_pgm("ramp", 20.0 + 215.0 * x / (N - 1))

    disks = np.full((N, N), 60.0)
    for cy, cx, r, v in [(64, 64, 40, 200), (180, 90, 55, 140), (100, 190, 45, 240), (200, 200, 30, 20)]:
        disks[(y - cy) ** 2 + (x - cx) ** 2 <= r * r] = v
    save_pgm("disks", disks)

    bars = 128.0 + 100.0 * np.sign(np.sin(2 * np.pi * x / (8 + 56 * y / N)))
    save_pgm("chirp_bars", bars)

    shapes = np.full((N, N), 180.0)
    shapes[40:120, 30:220] = 70.0
    shapes[150:230, 60:140] = 120.0
    tri = (y > 140) & (y < 240) & (np.abs(x - 190) < (y - 140) * 0.5)
    shapes[tri] = 30.0
    save_pgm("shapes", shapes)

    r = np.hypot(x - N / 2, y - N / 2)
    save_pgm("rings", 128.0 + 100.0 * np.cos(r * r / 300.0))


if __name__ == "__main__":
    main()
