import struct

import numpy as np
import pytest

from odcsa.autograd import Prng, Tensor, no_grad
from odcsa.gradsuite import BLOCKS, SOFTMAX_INVARIANT, run_block
from odcsa.nn import (
    ABLATION_LADDER, CSA, ERA, ODC, RFA, RFB, S2E, SRA, Ablation, ConvStack, Conv2d, Encoder, OdcSaNet,
    count_params_flops, dense_branch_weights, load_model, load_state, rect_branch_weights, save_model, save_state,
)
from odcsa.nn.blocks import CBAM
from odcsa.nn.checkpoint import MAGIC, CheckpointError


def rot(x):
    """Clockwise quarter turn of the spatial axes."""
    return np.ascontiguousarray(np.rot90(x, k=-1, axes=(2, 3)))


@pytest.fixture(scope="module")
def net64():
    net = OdcSaNet(seed=0)
    with no_grad():
        out = net(Tensor(np.random.default_rng(0).random((1, 3, 64, 64))), keep=True)
    return net, out


# shape contract

def test_shape_contract_64(net64):
    _, out = net64
    expect = {
        "x1": (1, 64, 16, 16), "x2": (1, 128, 8, 8), "x3": (1, 320, 4, 4), "x4": (1, 512, 2, 2),
        "F1": (1, 32, 16, 16), "F3": (1, 32, 4, 4), "F4": (1, 32, 2, 2), "Q": (1, 32, 2, 2),
        "C": (1, 32, 4, 4), "z_native": (1, 1, 4, 4), "z_up4": (1, 1, 16, 16), "p_native": (1, 1, 16, 16),
        "z": (1, 1, 64, 64), "p": (1, 1, 64, 64),
    }
    for key, shape in expect.items():
        assert out[key].shape == shape, key
        assert np.all(np.isfinite(out[key].data)), key


def test_encoder_at_352_and_rejects_bad_size():
    enc = Encoder(Prng(0), widths=(4, 4, 4, 4))
    with no_grad():
        out = enc(Tensor(np.zeros((1, 3, 352, 352))))
    assert [out[k].shape[2] for k in ("x1", "x2", "x3", "x4")] == [88, 44, 22, 11]
    with pytest.raises(ValueError, match="multiples of 32"):
        enc(Tensor(np.zeros((1, 3, 48, 64))))


def test_forward_bitwise_deterministic():
    x = Tensor(np.random.default_rng(3).random((1, 3, 32, 32)))
    a = OdcSaNet(seed=4)(x)
    b = OdcSaNet(seed=4)(x)
    assert a["p"].data.tobytes() == b["p"].data.tobytes()


# ODC

@pytest.mark.parametrize("ch", [4, 8, 32])
def test_odc_channel_expansion(ch):
    odc = ODC(Prng(1), ch)
    q, parts = odc(Tensor(np.random.default_rng(0).standard_normal((1, ch, 2, 2))), return_parts=True)
    assert parts["h"].shape[1] == 4 * ch and q.shape == (1, ch, 2, 2)
    assert parts["r"].shape == parts["c"].shape == (1, ch, 2, 2)


def test_odc_rejects_channel_mismatch():
    with pytest.raises(ValueError, match="channels"):
        ODC(Prng(0), 8)(Tensor(np.zeros((1, 4, 2, 2))))


def _tie_branches(odc):
    for r_layer, c_layer in zip(odc.r_branch.layers, odc.c_branch.layers):
        c_layer.weight.data[...] = np.swapaxes(r_layer.weight.data, 2, 3)
        c_layer.bias.data[...] = r_layer.bias.data


@pytest.mark.parametrize("ch", [4, 32])
def test_odc_tied_transpose_equivariance(ch):
    rng = np.random.default_rng(ch)
    odc = ODC(Prng(2), ch)
    for layer in odc.r_branch.layers:
        layer.bias.data[...] = 0.1 * rng.standard_normal(ch)
    _tie_branches(odc)
    x = rng.standard_normal((1, ch, 6, 6))
    with no_grad():
        lhs = odc.c_branch(Tensor(rot(x))).data
        rhs = rot(odc.r_branch(Tensor(x)).data)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_odc_full_block_equivariance_with_matching_permutation():
    # palindromic row kernels make the branches swap under rotation; pairing
    # the combine_h coefficients and sharing combine_q weights across each
    # pair then makes the whole block commute with the quarter turn
    ch, rng = 4, np.random.default_rng(7)
    odc = ODC(Prng(3), ch)
    for layer in odc.r_branch.layers:
        w = layer.weight.data
        w[..., 2] = w[..., 0]
        layer.bias.data[...] = 0.1 * rng.standard_normal(ch)
    _tie_branches(odc)
    a = rng.standard_normal((2 * ch, ch))
    b = rng.standard_normal((2 * ch, ch))
    wh = np.concatenate([np.hstack([a, b]), np.hstack([b, a])])
    odc.combine_h.weight.data[...] = wh[:, :, None, None]
    bh = rng.standard_normal(2 * ch)
    odc.combine_h.bias.data[...] = np.concatenate([bh, bh])
    m = rng.standard_normal((ch, 2 * ch))
    wq = odc.combine_q.weight.data[:, :, 0, 0]
    wq[:, :2 * ch] = m
    wq[:, 2 * ch:4 * ch] = m
    x = rng.standard_normal((1, ch, 6, 6))
    with no_grad():
        lhs = odc(Tensor(rot(x))).data
        rhs = rot(odc(Tensor(x)).data)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_branch_weight_accounting():
    assert rect_branch_weights(32) == 18432 and dense_branch_weights(32) == 27648
    odc = ODC(Prng(0), 32)
    assert sum(l.weight.data.size for l in odc.r_branch.layers + odc.c_branch.layers) == 18432
    assert odc.combine_h.weight.data.size == 8 * 32 * 32
    acc = count_params_flops(OdcSaNet(seed=0), 64)
    assert abs(acc.ratio - 0.6667) <= 1e-4
    assert "ratio odc/dense: 0.6667" in acc.lines()


# other blocks

def test_rfb_shapes():
    rfb = RFB(Prng(0), 320, 32)
    with no_grad():
        assert rfb(Tensor(np.ones((1, 320, 4, 4)))).shape == (1, 32, 4, 4)
        assert RFB(Prng(1), 8, 8)(Tensor(np.ones((1, 8, 6, 6)))).shape == (1, 8, 6, 6)


def test_s2e_constant_with_zero_path_weights():
    s2e = S2E(Prng(0), 4)
    for layer in s2e.path1.layers:
        layer.weight.data[...] = 0.0
    out = s2e(Tensor(np.full((1, 4, 8, 8), 3.0)))
    assert np.all(out.data == 3.0)
    assert S2E(Prng(1), 32)(Tensor(np.ones((1, 32, 8, 8)))).shape == (1, 32, 8, 8)


def test_csa_zero_weights_and_range():
    csa = CSA(Prng(0), 4)
    v = np.random.default_rng(0).standard_normal((1, 4, 5, 5))
    for p in csa.parameters():
        p.data[...] = 0.0
    w, d = csa(Tensor(v * 3), Tensor(v))
    assert np.all(w.data == 0.5) and np.allclose(d.data, 0.5 * v)
    w, _ = CSA(Prng(1), 4)(Tensor(v * 3), Tensor(v))
    assert np.all((w.data > 0) & (w.data < 1))


def test_rfa_softmax_mean_one_and_shapes():
    rng = np.random.default_rng(0)
    rfa = RFA(Prng(0), 32)
    out, parts = rfa(Tensor(rng.standard_normal((1, 32, 2, 2))), Tensor(rng.standard_normal((1, 32, 4, 4))),
                     return_parts=True)
    assert out.shape == (1, 32, 4, 4)
    e = parts["E"].data
    assert np.all(e >= 0) and np.allclose(e.mean(axis=(2, 3)), 1.0, atol=1e-9)
    with pytest.raises(ValueError):
        rfa(Tensor(np.zeros((1, 32, 2, 2))), Tensor(np.zeros((1, 32, 6, 6))))


def test_cbam_channel_gate_uniform_per_channel():
    cbam = CBAM(Prng(0), 16)
    x = np.broadcast_to(np.random.default_rng(0).random((1, 16, 1, 1)), (1, 16, 5, 5)).copy() + 0.1
    out = cbam.channel(Tensor(x)).data
    ratio = out / x
    assert np.allclose(ratio, ratio[:, :, :1, :1])
    g = cbam.spatial.gate(Tensor(x * 3)).data
    assert np.all((g > 0) & (g < 1))


def test_era_output_channel():
    assert ERA(Prng(0), 32)(Tensor(np.ones((1, 32, 4, 4)))).shape == (1, 1, 4, 4)


def test_sra_confident_foreground_and_range():
    sra = SRA(Prng(0), 32)
    f1 = Tensor(np.random.default_rng(0).standard_normal((1, 32, 8, 8)))
    z_up, p, parts = sra(Tensor(np.full((1, 1, 2, 2), 20.0)), f1, return_parts=True)
    assert np.allclose(p.data, z_up.data, atol=1e-6)
    assert np.allclose(p.data, z_up.data + parts["F_edge"].data)
    _, _, parts = sra(Tensor(np.random.default_rng(1).standard_normal((1, 1, 2, 2)) * 5), f1, return_parts=True)
    a = parts["A"].data
    assert np.all((a > 0) & (a < 1))
    with pytest.raises(ValueError):
        sra(Tensor(np.zeros((1, 1, 2, 2))), Tensor(np.zeros((1, 32, 4, 4))))


def test_conv_stack_rejects_broken_chain():
    with pytest.raises(ValueError):
        ConvStack([Conv2d(Prng(0), 2, 3), Conv2d(Prng(0), 4, 2)])


# ablations

def test_ablation_ladder_outputs_and_param_order():
    counts = []
    for row, flags in ABLATION_LADDER.items():
        net = OdcSaNet(seed=0, ablation=flags)
        with no_grad():
            out = net(Tensor(np.zeros((1, 3, 64, 64))))
        assert out["z"].shape == out["p"].shape == (1, 1, 64, 64), row
        counts.append(net.num_params())
    assert all(a > b for a, b in zip(counts, counts[1:]))


@pytest.mark.parametrize("flag", ["use_odc", "use_msfa", "use_era", "use_sra"])
def test_disabling_any_flag_reduces_params(flag):
    full = OdcSaNet(seed=0).num_params()
    assert OdcSaNet(seed=0, ablation=Ablation(**{flag: False})).num_params() < full


# gradient suite

@pytest.mark.parametrize("name", list(BLOCKS))
def test_gradient_suite_block(name):
    r = run_block(name)
    assert r.max_rel_err < 1e-4, r.line()
    assert r.passed


def test_softmax_invariant_bias_has_zero_gradient():
    assert run_block("rfa").invariant_grad <= 1e-12
    assert SOFTMAX_INVARIANT["rfa"] == ("conv_block.4.bias",)


# checkpoints

def test_checkpoint_roundtrip_and_structure_inference(tmp_path):
    net = OdcSaNet(seed=5, ablation=ABLATION_LADDER["c"], ch=8, widths=(8, 8, 16, 16))
    path = tmp_path / "m.ckpt"
    save_model(net, path)
    loaded = load_model(path)
    assert loaded.ablation == ABLATION_LADDER["c"] and loaded.ch == 8
    for (na, pa), (nb, pb) in zip(net.named_parameters(), loaded.named_parameters()):
        assert na == nb and np.array_equal(pa.data.astype(np.float32), pb.data)


def test_checkpoint_byte_layout(tmp_path):
    path = tmp_path / "s.ckpt"
    save_state({"a.weight": np.array([[1.5, -2.0]])}, path)
    raw = path.read_bytes()
    expect = MAGIC + struct.pack("<I", 1) + struct.pack("<H", 8) + b"a.weight" + bytes([2])
    expect += struct.pack("<II", 1, 2) + np.array([1.5, -2.0], dtype="<f4").tobytes()
    assert raw == expect
    assert np.array_equal(load_state(path)["a.weight"], [[1.5, -2.0]])


def test_checkpoint_errors(tmp_path):
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"NOTCKPT\n")
    with pytest.raises(CheckpointError, match="magic"):
        load_state(bad)
    good = tmp_path / "g.ckpt"
    save_state({"w": np.ones((2, 2))}, good)
    trunc = tmp_path / "t.ckpt"
    trunc.write_bytes(good.read_bytes()[:-3])
    with pytest.raises(CheckpointError, match="byte"):
        load_state(trunc)
    extra = tmp_path / "e.ckpt"
    extra.write_bytes(good.read_bytes() + b"x")
    with pytest.raises(CheckpointError, match="trailing"):
        load_state(extra)


def test_macs_counted_per_stage():
    acc = count_params_flops(OdcSaNet(seed=0), 64)
    assert acc.macs["encoder"] > 0 and acc.macs["odc"] > 0
    # ODC rectangular branches at 2x2: 18C^2 weights times 4 positions
    assert acc.odc_rect_macs == 18432 * 4
