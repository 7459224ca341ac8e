"""
Scoring predictions with the metric suite
=========================================

Confusion counts, the full report, and mask overlap.
"""

import numpy as np

from oysteropt.metrics import (
    ConfusionCounts,
    classification_report,
    confusion_from_labels,
    confusion_from_masks,
    dice,
    jaccard,
)

# %%
# Count agreements between predicted and true labels.
pred = [1, 1, 1, 0, 0, 0, 0, 0]
truth = [1, 1, 0, 1, 1, 0, 0, 0]
cc = confusion_from_labels(pred, truth)
print(cc)

# %%
# Every rate in the report is a fraction; ``to_dict(percent=True)`` scales by 100.
report = classification_report(cc)
for name, value in report.to_dict().items():
    if name != "degenerate":
        print(f"{name:>12s}  {value:.4f}")

# %%
# A zero denominator yields 0 and is flagged rather than raising.
print(sorted(classification_report(ConfusionCounts(tp=0, fp=0, tn=4, fn=0)).degenerate))

# %%
# Overlap between two square lesion masks, offset by two pixels.
a = np.zeros((12, 12), bool)
b = np.zeros((12, 12), bool)
a[2:8, 2:8] = True
b[4:10, 4:10] = True
d, j = dice(a, b), jaccard(a, b)
print(f"dice {d:.4f}  jaccard {j:.4f}  dice/(2-dice) {d / (2 - d):.4f}")
print(confusion_from_masks(a, b))
