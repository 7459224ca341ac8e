"""
Synthetic lesion images and PGM files
=====================================

Generates the seeded dataset used for tuning, then writes and reads it back
as PGM images.
"""

import tempfile

import numpy as np

from oysteropt.data import generate_dataset, load_dataset, read_pgm, save_dataset, write_pgm
from oysteropt.data.prng import SplitMix64

# %%
# The generator is driven by counter-mode SplitMix64, so the stream is
# reproducible from the seed alone.
print([hex(v) for v in SplitMix64(0).next_u64(3)])

# %%
ds = generate_dataset(n=300, h=32, w=32, positive_fraction=0.5, seed=0)
print(len(ds), int(ds.labels.sum()), "positives")
train, validation = ds.train_validation()
print(len(train), len(validation))

# %%
# A coarse look at one positive image and its mask.
i = int(np.flatnonzero(ds.labels)[0])
for row_img, row_mask in zip(ds.images[i][::3], ds.masks[i][::3]):
    print("".join(" .:-=+*#%@"[min(int(v * 10), 9)] for v in row_img[::2]), "  ",
          "".join("#" if m else "." for m in row_mask[::2]))

# %%
# Binary and ASCII encodings decode to the same pixels.
p5 = write_pgm(ds.images[i])
p2 = write_pgm(ds.images[i], binary=False)
print(p5[:15], len(p5), len(p2), np.array_equal(read_pgm(p5), read_pgm(p2)))

with tempfile.TemporaryDirectory() as tmp:
    save_dataset(ds.subset(range(10)), tmp)
    back = load_dataset(tmp)
    print(np.array_equal(back.masks, ds.masks[:10]), np.abs(back.images - ds.images[:10]).max())
