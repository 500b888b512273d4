"""The ODC block: 4x channel expansion, rotation behaviour of tied branches, weight budget."""
import numpy as np

from odcsa.autograd import Prng, Tensor, no_grad
from odcsa.nn import ODC, OdcSaNet, count_params_flops


def rot(a):
    return np.ascontiguousarray(np.rot90(a, k=-1, axes=(2, 3)))


ch = 8
odc = ODC(Prng(0), ch)
x = np.random.default_rng(1).standard_normal((1, ch, 8, 8))
with no_grad():
    q, parts = odc(Tensor(x), return_parts=True)
print(f"input {x.shape}, row/column features {parts['r'].shape}, expanded h {parts['h'].shape}, output {q.shape}")

# make the column branch the transpose of the row branch
for r, c in zip(odc.r_branch.layers, odc.c_branch.layers):
    c.weight.data[...] = np.swapaxes(r.weight.data, 2, 3)
    c.bias.data[...] = r.bias.data
with no_grad():
    gap = np.abs(odc.c_branch(Tensor(rot(x))).data - rot(odc.r_branch(Tensor(x)).data)).max()
print(f"column(rot x) vs rot(row(x)): max gap {gap:.1e}")

print("\n".join(count_params_flops(OdcSaNet(seed=0), 352).lines()))
