import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from odcsa.autograd import Tensor, finite_diff_check
from odcsa.loss import total_loss, weight_map, weighted_bce, weighted_iou
from odcsa.optim import Adam, lr_at

masks = arrays(np.float64, (1, 1, 12, 12), elements=st.sampled_from([0.0, 1.0]))


def saturated(gt, mag=30.0):
    return Tensor(np.where(gt > 0, mag, -mag))


def weight_map_oracle(gt, amp=5.0, window=31):
    """Direct window average with zero padding."""
    r = window // 2
    g = gt[0, 0]
    h, w = g.shape
    padded = np.pad(g, r)
    out = np.empty_like(g)
    for i in range(h):
        for j in range(w):
            out[i, j] = padded[i:i + window, j:j + window].mean()
    return 1.0 + amp * np.abs(out - g)[None, None]


# weight map

def test_weight_map_examples():
    assert np.all(weight_map(np.zeros((1, 1, 40, 40))) == 1.0)
    ones = weight_map(np.ones((1, 1, 64, 64)))
    assert np.all(ones[0, 0, 15:49, 15:49] == 1.0)
    assert ones[0, 0, 0, 0] > 1.0 and ones[0, 0, 0, 32] > 1.0
    single = np.zeros((1, 1, 61, 61))
    single[0, 0, 30, 30] = 1.0
    assert np.isclose(weight_map(single)[0, 0, 30, 30], 1 + 5 * (1 - 1 / 961), atol=1e-15)


@given(masks)
def test_weight_map_matches_oracle_and_bounds(gt):
    w = weight_map(gt, window=5)
    assert np.allclose(w, weight_map_oracle(gt, window=5), atol=1e-12)
    assert np.all((w >= 1.0) & (w <= 6.0))


def test_weight_map_rejects_non_binary():
    with pytest.raises(ValueError, match="binary"):
        weight_map(np.full((1, 1, 4, 4), 0.5))


# weighted losses

def test_bce_examples(rng):
    gt = (rng.random((2, 1, 8, 8)) > 0.5).astype(float)
    w = weight_map(gt)
    assert weighted_bce(saturated(gt), gt, w).item() < 1e-6
    assert abs(weighted_bce(Tensor(np.zeros_like(gt)), gt, rng.random(gt.shape) + 1).item() - np.log(2)) < 1e-9
    logits = rng.standard_normal(gt.shape)
    a = weighted_bce(Tensor(logits), gt, w).item()
    b = weighted_bce(Tensor(-logits), 1 - gt, w).item()
    assert np.isclose(a, b, atol=1e-12)


def test_iou_examples():
    gt = np.ones((1, 1, 4, 4))
    assert np.isclose(weighted_iou(Tensor(np.zeros_like(gt)), gt, np.ones_like(gt)).item(), 1 - 9 / 17, atol=1e-4)
    assert abs(weighted_iou(Tensor(np.zeros_like(gt)), gt, np.ones_like(gt)).item() - 0.4706) < 1e-4
    empty = np.zeros((1, 1, 4, 4))
    assert weighted_iou(Tensor(np.full(empty.shape, -1e4)), empty, np.ones_like(empty)).item() == 0.0
    assert weighted_iou(saturated(gt), gt, weight_map(gt)).item() < 1e-6


def test_loss_shape_mismatch():
    with pytest.raises(ValueError):
        weighted_bce(Tensor(np.zeros((1, 1, 4, 4))), np.zeros((1, 1, 4, 5)), np.ones((1, 1, 4, 5)))
    with pytest.raises(ValueError):
        weighted_iou(Tensor(np.zeros((1, 1, 4, 4))), np.zeros((1, 1, 5, 4)), np.ones((1, 1, 5, 4)))


@given(masks, st.floats(0.1, 50.0))
def test_weight_scaling(gt, scale):
    w = weight_map(gt)
    logits = Tensor(np.linspace(-3, 3, gt.size).reshape(gt.shape))
    assert np.isclose(weighted_bce(logits, gt, w).item(), weighted_bce(logits, gt, w * scale).item(), atol=1e-12)
    p = 1 / (1 + np.exp(-logits.data))
    ratio = lambda ww: (ww * p * gt).sum() / ((ww * (p + gt)).sum() - (ww * p * gt).sum())
    assert np.isclose(ratio(w), ratio(w * scale), rtol=1e-12)


@given(masks)
def test_losses_non_negative_and_small_when_saturated(gt):
    w = weight_map(gt)
    for fn in (weighted_bce, weighted_iou):
        assert fn(Tensor(np.linspace(-4, 4, gt.size).reshape(gt.shape)), gt, w).item() >= 0
        assert fn(saturated(gt), gt, w).item() < 1e-5


def test_total_loss_definition_and_gradient(rng):
    gt = (rng.random((2, 1, 8, 8)) > 0.4).astype(float)
    z = Tensor(rng.standard_normal(gt.shape))
    p = Tensor(rng.standard_normal(gt.shape))
    loss, rep = total_loss(z, p, gt)
    parts = sum(v for head in rep.heads.values() for v in head.values())
    assert abs(loss.item() - parts) < 1e-12 and abs(rep.total - rep.bce_w - rep.iou_w) < 1e-12
    assert finite_diff_check(lambda: total_loss(z, p, gt)[0], [z, p]) < 1e-4
    sat_loss, _ = total_loss(saturated(gt), saturated(gt), gt)
    assert sat_loss.item() < 1e-5


# optimizer / schedule

def test_lr_schedule():
    assert lr_at(0) == 1e-4
    assert np.isclose(lr_at(30), 1e-5) and np.isclose(lr_at(75), 1e-6) and lr_at(29) == 1e-4


def test_adam_zero_gradient_keeps_params():
    p = Tensor(np.array([1.0, -2.0]), requires_grad=True)
    opt = Adam([p], lr=0.1)
    p.grad = np.zeros(2)
    opt.step()
    assert np.array_equal(p.data, [1.0, -2.0])


def test_adam_constant_gradient_moves_against_sign():
    p = Tensor(np.array([0.0, 0.0]), requires_grad=True)
    opt = Adam([p], lr=1e-2)
    trail = []
    for _ in range(100):
        p.grad = np.array([0.5, -3.0])
        opt.step()
        trail.append(p.data.copy())
    trail = np.array(trail)
    assert np.all(np.diff(trail[:, 0]) < 0) and np.all(np.diff(trail[:, 1]) > 0)
    assert opt.t == 100 and opt.m[0].shape == p.data.shape


def test_adam_first_step_matches_closed_form():
    p = Tensor(np.array([0.3]), requires_grad=True)
    opt = Adam([p], lr=1e-3)
    p.grad = np.array([4.0])
    opt.step()
    # bias-corrected first step is lr * g / (|g| + eps)
    assert np.isclose(p.data[0], 0.3 - 1e-3 * 4.0 / (4.0 + 1e-8), atol=1e-15)


def test_adam_step_without_grads_raises():
    with pytest.raises(RuntimeError):
        Adam([Tensor(np.zeros(2), requires_grad=True)]).step()
