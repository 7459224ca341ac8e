"""
Decoding unit-cube positions into hyperparameters
=================================================

Optimizers work on [0, 1]^d; a search space maps each coordinate onto a
continuous, integer or categorical parameter.
"""

import numpy as np

from oysteropt.search import (
    SearchSpace,
    categorical,
    continuous,
    decode,
    integer,
    preset_classification_space,
    preset_segmentation_space,
)

# %%
# The two presets used for tuning the surrogate models.
seg = preset_segmentation_space()
clf = preset_classification_space()
print(seg.names, clf.names)

for u in ([0, 0, 0], [0.5, 0.5, 0.5], [1, 1, 1], [1, 1, 0.49]):
    print(u, decode(u, seg), decode(u, clf))

# %%
# A custom mixed space. Integers round half away from zero; categorical
# choices split the unit interval into equal bins.
space = SearchSpace((
    continuous("learning_rate", 1e-4, 1e-1),
    integer("layers", 1, 6),
    categorical("optimizer", ("sgd", "adam", "rmsprop")),
))
rng = np.random.default_rng(0)
for u in rng.random((4, space.dimension)):
    print(np.round(u, 3), decode(u, space))
