"""Score a few hand-made predictions with every evaluation measure."""
import numpy as np

from odcsa.metrics import image_metrics

yy, xx = np.mgrid[0:64, 0:64]
gt = ((yy - 30) ** 2 + (xx - 34) ** 2 < 15 ** 2).astype(float)
rng = np.random.default_rng(0)

cases = {
    "perfect": gt,
    "blurred": np.clip(0.8 * gt + 0.2 * rng.random(gt.shape), 0, 1),
    "shifted": np.roll(gt, 6, axis=1),
    "empty": np.zeros_like(gt),
    "inverted": 1 - gt,
}
print(f"{'case':<10}" + "".join(f"{k:>10}" for k in image_metrics(gt, gt)))
for name, pred in cases.items():
    print(f"{name:<10}" + "".join(f"{v:>10.4f}" for v in image_metrics(pred, gt).values()))
