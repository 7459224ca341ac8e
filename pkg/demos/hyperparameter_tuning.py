"""
Tuning the surrogate classifier and segmenter
=============================================

The optimizer searches hidden units, epochs and batch size (classifier) or
filters, epochs and steps per epoch (segmenter), minimizing
``1/accuracy + fpr`` and ``1/(dice + accuracy)`` on a validation split.
"""

from oysteropt.data import generate_dataset
from oysteropt.optimizers import OptimizerConfig
from oysteropt.surrogates import (
    ClassificationObjective,
    ClfHyper,
    SegHyper,
    SegmentationObjective,
    tune_classification,
    tune_segmentation,
)

data = generate_dataset()

# %%
# Classifier: population 10, 20 iterations.
best, trace = tune_classification(data, OptimizerConfig("mml-eoo", 10, 20, seed=0))
midpoint = ClassificationObjective(data, seed=0)(
    {"hidden": 130, "epochs": 28, "batch": 16})
report = trace.extras["best_report"]
print(best, f"fitness {trace.final_fitness:.4f} vs midpoint {midpoint.value:.4f}")
print(f"accuracy {report.accuracy:.3f}  fpr {report.fpr:.3f}  mcc {report.mcc:.3f}")

# %%
# Segmenter: the training budget is scaled down so each candidate trains in
# well under a second.
scale = 0.03
best, trace = tune_segmentation(data, OptimizerConfig("mml-eoo", 6, 5, seed=0), step_scale=scale)
midpoint = SegmentationObjective(data, 0, scale).evaluate(SegHyper(130, 28, 650))[0]
seg = trace.extras["best_report"]
print(best, f"fitness {trace.final_fitness:.4f} vs midpoint {midpoint.value:.4f}")
print(f"dice {seg['dice']:.3f}  jaccard {seg['jaccard']:.3f}  pixel accuracy {seg['pixel_accuracy']:.3f}")
print([round(f, 4) for f in trace.best_fitness])

# %%
# Objectives are memoized and deterministic: repeated candidates cost nothing.
objective = ClassificationObjective(data, seed=3)
h = ClfHyper(40, 10, 8)
print(objective.evaluate(h)[0] == objective.evaluate(h)[0])
