from __future__ import annotations

import contextlib
from dataclasses import asdict, dataclass

from ..autograd import Prng, Tensor
from ..autograd import functional as F
from .blocks import ERA, MSFA, ODC, RFB, SRA, Encoder
from .layers import Module, pointwise


@dataclass(frozen=True)
class Ablation:
    use_odc: bool = True
    use_msfa: bool = True
    use_era: bool = True
    use_sra: bool = True

    def as_dict(self) -> dict[str, bool]:
        return asdict(self)


# Structural ladder of the ablation table: (a) full model ... (e) backbone only.
ABLATION_LADDER = {
    "a": Ablation(),
    "b": Ablation(use_odc=False),
    "c": Ablation(use_odc=False, use_sra=False),
    "d": Ablation(use_odc=False, use_sra=False, use_era=False),
    "e": Ablation(use_odc=False, use_sra=False, use_era=False, use_msfa=False),
}


class OdcSaNet(Module):
    """Encoder, three RFBs and the ODC -> MSFA -> ERA -> SRA decoder.

    Disabled components are replaced by bypasses: ``Q = F4`` without ODC,
    a 2x upsample plus 1x1 conv without MSFA, a 1x1 logit head without ERA,
    and ``p = z`` without SRA.
    """

    def __init__(self, seed: int = 0, ablation: Ablation = Ablation(), ch: int = 32,
                 widths=(64, 128, 320, 512)):
        prng = Prng(seed)
        self.ablation = ablation
        self.ch = ch
        self.encoder = Encoder(prng, widths)
        self.rfb1 = RFB(prng, widths[0], ch)
        self.rfb3 = RFB(prng, widths[2], ch)
        self.rfb4 = RFB(prng, widths[3], ch)
        if ablation.use_odc:
            self.odc = ODC(prng, ch)
        if ablation.use_msfa:
            self.msfa = MSFA(prng, ch)
        else:
            self.msfa_bypass = pointwise(prng, ch, ch)
        if ablation.use_era:
            self.era = ERA(prng, ch)
        else:
            self.era_bypass = pointwise(prng, ch, 1)
        if ablation.use_sra:
            self.sra = SRA(prng, ch)

    def forward(self, image: Tensor, keep: bool = False, profile: dict | None = None) -> dict[str, Tensor]:
        """Return full-resolution logits ``z`` and ``p``; ``keep`` adds intermediates."""
        stage = _profiler(profile)
        H, W = image.shape[2:]
        with stage("encoder"):
            enc = self.encoder(image)
        with stage("rfb"):
            f1 = self.rfb1(enc["x1"])
            f3 = self.rfb3(enc["x3"])
            f4 = self.rfb4(enc["x4"])
        with stage("odc"):
            q = self.odc(f4) if self.ablation.use_odc else f4
        with stage("msfa"):
            if self.ablation.use_msfa:
                c = self.msfa(q, f3)
            else:
                c = self.msfa_bypass(F.bilinear_resize(q, 2 * q.shape[2], 2 * q.shape[3]))
        with stage("era"):
            z = self.era(c) if self.ablation.use_era else self.era_bypass(c)
        with stage("sra"):
            if self.ablation.use_sra:
                z_up4, p = self.sra(z, f1)
            else:
                z_up4, p = None, z
        out = {
            "z": F.bilinear_resize(z, H, W),
            "p": F.bilinear_resize(p, H, W),
        }
        if keep:
            out.update(enc)
            out.update({"F1": f1, "F3": f3, "F4": f4, "Q": q, "C": c, "z_native": z, "p_native": p})
            if z_up4 is not None:
                out["z_up4"] = z_up4
        return out


def _profiler(profile: dict | None):
    @contextlib.contextmanager
    def stage(name):
        if profile is None:
            yield
            return
        with F.count_macs() as counter:
            yield
        profile[name] = profile.get(name, 0) + counter["macs"]

    return stage


def ablation_from_names(names) -> Ablation:
    """Recover ablation flags from the parameter names of a saved model."""
    names = list(names)
    has = lambda prefix: any(n.startswith(prefix + ".") for n in names)  # noqa: E731
    return Ablation(use_odc=has("odc"), use_msfa=has("msfa"), use_era=has("era"), use_sra=has("sra"))
