"""Build a tiny graph by hand, backpropagate, and check it against finite differences."""
import numpy as np

from odcsa.autograd import Tensor, finite_diff_check
from odcsa.autograd import functional as F
from odcsa.gradsuite import BLOCKS, run_suite

rng = np.random.default_rng(0)
x = Tensor(rng.standard_normal((1, 2, 6, 6)), requires_grad=True)
w = Tensor(rng.standard_normal((3, 2, 3, 3)), requires_grad=True)


def loss():
    y = F.relu(F.conv2d(x, w, pad=1))
    return F.sum(F.bilinear_resize(y, 12, 12))


out = loss()
out.backward()
print(f"loss {out.item():.4f}, |dL/dw| {np.linalg.norm(w.grad):.4f}")
print(f"finite-difference max rel err {finite_diff_check(loss, [x, w]):.1e}")

for result in run_suite(list(BLOCKS)):
    print(result.line())
