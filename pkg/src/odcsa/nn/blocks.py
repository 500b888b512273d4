"""Building blocks of the segmentation network.

All blocks take an explicit channel width ``ch`` (32 in the full network)
so that reduced-width copies can be gradient-checked cheaply.
"""
from __future__ import annotations

from ..autograd import Prng, Tensor
from ..autograd import functional as F
from .layers import Conv2d, ConvStack, Module, pointwise


class Encoder(Module):
    """Four stride-2 stages standing in for a pyramid backbone.

    Stage 1 halves twice to reach H/4; stages 2-4 halve once each, giving
    outputs at strides 4, 8, 16 and 32.
    """

    def __init__(self, prng: Prng, widths=(64, 128, 320, 512), c_in: int = 3):
        w1, w2, w3, w4 = widths
        self.widths = tuple(widths)
        self.stage1 = ConvStack([Conv2d(prng, c_in, w1, 3, stride=2, relu=True),
                                 Conv2d(prng, w1, w1, 3, stride=2, relu=True)])
        self.stage2 = ConvStack([Conv2d(prng, w1, w2, 3, stride=2, relu=True),
                                 Conv2d(prng, w2, w2, 3, relu=True)])
        self.stage3 = ConvStack([Conv2d(prng, w2, w3, 3, stride=2, relu=True),
                                 Conv2d(prng, w3, w3, 3, relu=True)])
        self.stage4 = ConvStack([Conv2d(prng, w3, w4, 3, stride=2, relu=True),
                                 Conv2d(prng, w4, w4, 3, relu=True)])

    def forward(self, image: Tensor) -> dict[str, Tensor]:
        h, w = image.shape[2:]
        if h % 32 or w % 32:
            raise ValueError(f"encoder input height/width must be multiples of 32, got {h}x{w}")
        x1 = self.stage1(image)
        x2 = self.stage2(x1)
        x3 = self.stage3(x2)
        x4 = self.stage4(x3)
        return {"x1": x1, "x2": x2, "x3": x3, "x4": x4}


class RFB(Module):
    """Receptive field block: four dilated branches, 3x3 fusion, 1x1 shortcut."""

    def __init__(self, prng: Prng, c_in: int, c_out: int = 32):
        self.branch0 = ConvStack([pointwise(prng, c_in, c_out)])
        branches = []
        for k, dil in ((3, 3), (5, 5), (7, 7)):
            branches.append(ConvStack([
                pointwise(prng, c_in, c_out),
                Conv2d(prng, c_out, c_out, (1, k)),
                Conv2d(prng, c_out, c_out, (k, 1)),
                Conv2d(prng, c_out, c_out, 3, dilation=dil),
            ]))
        self.branch1, self.branch2, self.branch3 = branches
        self.fuse = Conv2d(prng, 4 * c_out, c_out, 3)
        self.shortcut = pointwise(prng, c_in, c_out)

    def forward(self, x: Tensor) -> Tensor:
        cat = F.concat_channels([self.branch0(x), self.branch1(x), self.branch2(x), self.branch3(x)])
        return F.relu(self.fuse(cat) + self.shortcut(x))


class ODC(Module):
    """Orthogonal direction convolution.

    Two three-layer branches of transposed rectangular kernels (1x3 and 3x1)
    produce row and column features; a linear 1x1 map expands their concat to
    4C channels and a second linear 1x1 map folds that together with the input
    back to C channels.
    """

    def __init__(self, prng: Prng, ch: int = 32):
        self.ch = ch
        self.r_branch = ConvStack([Conv2d(prng, ch, ch, (1, 3), pad=(0, 1), relu=True) for _ in range(3)])
        self.c_branch = ConvStack([Conv2d(prng, ch, ch, (3, 1), pad=(1, 0), relu=True) for _ in range(3)])
        self.combine_h = pointwise(prng, 2 * ch, 4 * ch)
        self.combine_q = pointwise(prng, 5 * ch, ch)

    def forward(self, f4: Tensor, return_parts: bool = False):
        if f4.shape[1] != self.ch:
            raise ValueError(f"ODC expects {self.ch} input channels, got {f4.shape[1]}")
        r = self.r_branch(f4)
        c = self.c_branch(f4)
        h = self.combine_h(F.concat_channels([r, c]))
        q = self.combine_q(F.concat_channels([h, f4]))
        if return_parts:
            return q, {"r": r, "c": c, "h": h}
        return q


class S2E(Module):
    """Spatial dual path: three 3x3 convs plus 2x2 average pool upsampled back."""

    def __init__(self, prng: Prng, ch: int = 32):
        self.path1 = ConvStack([Conv2d(prng, ch, ch, 3, relu=True),
                                Conv2d(prng, ch, ch, 3, relu=True),
                                Conv2d(prng, ch, ch, 3)])

    def forward(self, x: Tensor) -> Tensor:
        h, w = x.shape[2:]
        pooled = F.bilinear_resize(F.avg_pool2x2(x), h, w)
        return self.path1(x) + pooled


class CSA(Module):
    """Channel dual path: per-pixel 1x1 branch plus globally pooled 1x1 branch."""

    def __init__(self, prng: Prng, ch: int = 32):
        self.b1 = pointwise(prng, ch, ch)
        self.b2 = pointwise(prng, ch, ch)

    def forward(self, s: Tensor, v: Tensor) -> tuple[Tensor, Tensor]:
        if s.shape[1] != v.shape[1] or s.shape[2:] != v.shape[2:]:
            raise ValueError(f"CSA: attention source {s.shape} and value map {v.shape} disagree")
        attn = F.sigmoid(self.b1(s) + self.b2(F.global_avg_pool(s)))
        return attn, attn * v


class RFA(Module):
    """Residual fusion of an upsampled deep map with the next shallower level."""

    def __init__(self, prng: Prng, ch: int = 32):
        self.pw_up = pointwise(prng, ch, ch)
        self.conv_block = ConvStack([
            pointwise(prng, ch, ch, relu=True),
            Conv2d(prng, ch, ch, 3, relu=True),
            Conv2d(prng, ch, ch, 3, relu=True),
            Conv2d(prng, ch, ch, 3, relu=True),
            pointwise(prng, ch, ch),
        ])

    def forward(self, d: Tensor, f3: Tensor, return_parts: bool = False):
        h, w = d.shape[2:]
        if f3.shape[2:] != (2 * h, 2 * w):
            raise ValueError(f"RFA: guide map must be {2 * h}x{2 * w}, got {f3.shape[2]}x{f3.shape[3]}")
        u = self.pw_up(F.bilinear_resize(d, 2 * h, 2 * w))
        fused = F.relu(u + f3)
        g = self.conv_block(fused) + fused
        # spatial softmax rescaled to unit mean per channel
        e = F.softmax_spatial(g) * float(4 * h * w)
        out = e * u
        if return_parts:
            return out, {"u": u, "E": e}
        return out


class MSFA(Module):
    def __init__(self, prng: Prng, ch: int = 32):
        self.s2e = S2E(prng, ch)
        self.csa = CSA(prng, ch)
        self.rfa = RFA(prng, ch)

    def forward(self, q: Tensor, f3: Tensor, return_parts: bool = False):
        s = self.s2e(q)
        w, d = self.csa(s, q)
        c, parts = self.rfa(d, f3, return_parts=True)
        if return_parts:
            return c, {"S": s, "W": w, "D": d, **parts}
        return c


class ChannelAttention(Module):
    def __init__(self, prng: Prng, ch: int, reduction: int = 8):
        hidden = max(1, ch // reduction)
        self.fc1 = pointwise(prng, ch, hidden, relu=True)
        self.fc2 = pointwise(prng, hidden, ch)

    def gate(self, x: Tensor) -> Tensor:
        avg = self.fc2(self.fc1(F.global_avg_pool(x)))
        mx = self.fc2(self.fc1(F.global_max_pool(x)))
        return F.sigmoid(avg + mx)

    def forward(self, x: Tensor) -> Tensor:
        return self.gate(x) * x


class SpatialAttention(Module):
    def __init__(self, prng: Prng, kernel: int = 7):
        self.conv = Conv2d(prng, 2, 1, kernel)

    def gate(self, x: Tensor) -> Tensor:
        return F.sigmoid(self.conv(F.concat_channels([F.channel_mean(x), F.channel_max(x)])))

    def forward(self, x: Tensor) -> Tensor:
        return self.gate(x) * x


class CBAM(Module):
    def __init__(self, prng: Prng, ch: int, reduction: int = 8, kernel: int = 7):
        self.channel = ChannelAttention(prng, ch, reduction)
        self.spatial = SpatialAttention(prng, kernel)

    def forward(self, x: Tensor) -> Tensor:
        return self.spatial(self.channel(x))


class ERA(Module):
    """S2E -> CSA -> CBAM re-attention chain ending in a one-channel logit head."""

    def __init__(self, prng: Prng, ch: int = 32):
        self.s2e = S2E(prng, ch)
        self.csa = CSA(prng, ch)
        self.cbam = CBAM(prng, ch)
        self.head = pointwise(prng, ch, 1)

    def forward(self, c_in: Tensor) -> Tensor:
        t = self.s2e(c_in)
        _, t2 = self.csa(t, t)
        return self.head(self.cbam(t2))


class SRA(Module):
    """Shallow reverse attention: erase confident foreground, refine the shallowest map."""

    def __init__(self, prng: Prng, ch: int = 32):
        self.refine = ConvStack([Conv2d(prng, ch, ch, 3, relu=True),
                                 Conv2d(prng, ch, ch, 3, relu=True),
                                 pointwise(prng, ch, 1)])

    def forward(self, z: Tensor, f1: Tensor, return_parts: bool = False):
        h, w = z.shape[2:]
        if f1.shape[2:] != (4 * h, 4 * w):
            raise ValueError(f"SRA: shallow map must be {4 * h}x{4 * w}, got {f1.shape[2]}x{f1.shape[3]}")
        z_up = F.bilinear_resize(z, 4 * h, 4 * w)
        reverse = 1.0 - F.sigmoid(z_up)
        edge = self.refine(reverse * f1)
        p = z_up + edge
        if return_parts:
            return z_up, p, {"A": reverse, "F_edge": edge}
        return z_up, p
