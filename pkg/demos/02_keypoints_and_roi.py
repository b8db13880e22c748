"""From one image to its two ROIs: mask, wrinkle paths, template and crops.

Run with ``python demos/02_keypoints_and_roi.py [out_dir]``.
"""
# %%
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from wristmatch.evaluation import make_identity, skin_training_data, synth_image
from wristmatch.features import extract_features
from wristmatch.roi import build_template, keypoints_both, roi_from_keypoints
from wristmatch.segmentation import segment, train_skin_classifier

out = sys.argv[1] if len(sys.argv) > 1 else "demo_output"
os.makedirs(out, exist_ok=True)

# %% [markdown]
# A skin classifier is trained on superpixels of synthetic images from other
# identities (their own seed), then applied to a fresh image.

# %%
X, y = skin_training_data(seed=1, count=10)
clf = train_skin_classifier(X, y, tree_count=100)
print("superpixels %d, out-of-bag accuracy %.3f" % (len(y), clf.oob_accuracy))

images = [synth_image(make_identity(0, i), 0, 0, 0.2) for i in range(6)]
rgb, truth = images[0]
mask = segment(rgb, clf).mask
print("mask IoU against the truth: %.3f" % ((mask & truth).sum() / (mask | truth).sum()))

# %% [markdown]
# Key points live in a 40-row frame. Proc2 takes the two cheapest
# boundary-to-boundary paths; Proc2/3 first trims poorly supported ends of
# the first one.

# %%
kps = [keypoints_both(im, segment(im, clf).mask) for im, _ in images]
kp = kps[0]
for variant in ("ROI#1", "ROI#2"):
    w1, w2 = kp[variant].wrinkles
    print("%s: wrinkle costs %.2f and %.2f over %d and %d edges"
          % (variant, w1.cost, w2.cost, w1.n_edges, w2.n_edges))

# %% [markdown]
# The template is the ridge of the summed key-point heat maps of a small
# gallery. Each image is registered to it with affine CPD, then cropped
# between the template wrinkles.

# %%
templates = {v: build_template([k[v] for k in kps]) for v in ("ROI#1", "ROI#2")}
print("template wrinkle columns:", np.round(templates["ROI#1"].wrinkle_columns(), 2))
rois = {v: roi_from_keypoints(rgb, mask, kp[v], templates[v], v, kp["graph"].scale)
        for v in ("ROI#1", "ROI#2")}
fv = extract_features(rois["ROI#1"])
print("feature vector length", fv.values.size)

# %%
fig, axes = plt.subplots(1, 4, figsize=(13, 3.5), gridspec_kw={"width_ratios": [3, 3, 1, 1]})
axes[0].imshow(rgb)
axes[0].set_title("input")
frame = kp["graph"].mask
axes[1].imshow(frame, cmap="gray")
for lab, pts in kp["ROI#1"].by_label().items():
    pts = np.asarray(pts)
    axes[1].plot(pts[:, 1], pts[:, 0], ".", ms=3, label=lab)
axes[1].legend(fontsize=7)
axes[1].set_title("key points (40-row frame)")
for ax, v in zip(axes[2:], ("ROI#1", "ROI#2")):
    ax.imshow(np.clip(rois[v].pixels, 0, 1))
    ax.set_title(v)
for ax in axes:
    ax.set_axis_off()
fig.tight_layout()
fig.savefig(os.path.join(out, "keypoints_and_roi.png"), dpi=80)
print("wrote", os.path.join(out, "keypoints_and_roi.png"))
