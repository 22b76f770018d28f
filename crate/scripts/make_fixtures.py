"""Regenerate the photographic fixtures under crates/core/assets/photos.

Sources are the public-domain / CC0 sample photos shipped with scikit-image
and matplotlib. Each fixture is a square crop resized to 256x256 (8-bit PNG).
"""
import os

import matplotlib
import numpy as np
from PIL import Image
from skimage import io

SK = os.path.join(os.path.dirname(__import__("skimage").__file__), "data")
MPL = os.path.join(os.path.dirname(matplotlib.__file__), "mpl-data", "sample_data")
OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "assets", "photos")

# (file, [(top, left, side), ...]) in source pixel coordinates
CROPS = [
    (os.path.join(SK, "astronaut.png"), [(0, 0, 512), (40, 180, 300), (250, 0, 260)]),
    (os.path.join(SK, "chelsea.png"), [(0, 0, 300), (0, 150, 300), (60, 60, 200)]),
    (os.path.join(SK, "coffee.png"), [(0, 0, 400), (0, 200, 400), (100, 250, 250), (150, 0, 250)]),
    (os.path.join(SK, "hubble_deep_field.jpg"), [(0, 0, 600), (300, 400, 500), (500, 0, 370)]),
    (os.path.join(SK, "rocket.jpg"), [(0, 100, 427), (50, 300, 300)]),
    (os.path.join(SK, "retina.jpg"), [(200, 200, 1000), (0, 600, 700)]),
    (os.path.join(SK, "ihc.png"), [(0, 0, 512), (100, 250, 256)]),
    (os.path.join(MPL, "grace_hopper.jpg"), [(0, 0, 512), (120, 130, 300)]),
]


def main():
    os.makedirs(OUT, exist_ok=True)
    n = 0
    for path, crops in CROPS:
        img = io.imread(path)[..., :3].astype(np.uint8)
        stem = os.path.splitext(os.path.basename(path))[0]
        for top, left, side in crops:
            tile = img[top : top + side, left : left + side]
            im = Image.fromarray(tile).resize((256, 256), Image.BILINEAR)
            im.save(os.path.join(OUT, f"{n:02d}_{stem}.png"), optimize=True)
            n += 1
    print(f"wrote {n} fixtures to {OUT}")


if __name__ == "__main__":
    main()
