import math

import numpy as np
import pytest

from textvote.nn import Network, ShapeError, bce_loss, grad_check


def test_zero_weight_sigmoid_head_gives_half():
    net = Network([], (3,), head="sigmoid", seed=0)
    net.head_dense.params[0][:] = 0.0
    net.head_dense.params[1][:] = 0.0
    p = net.forward(np.array([[1.0, -2.0, 5.0]]))
    assert p[0] == 0.5


def test_dense_sigmoid_hand_value():
    # w=[1,-1], b=0.5, input [2,1] -> sigmoid(1.5)
    net = Network([], (2,), head="sigmoid", seed=0)
    net.head_dense.params[0][:] = np.array([[1.0], [-1.0]])
    net.head_dense.params[1][:] = 0.5
    p = net.forward(np.array([[2.0, 1.0]]))
    assert p[0] == pytest.approx(1 / (1 + math.exp(-1.5)), abs=1e-12)


def test_maxpool_windowed_max():
    from textvote.nn import MaxPool1d
    x = np.array([1.0, 3.0, 2.0, 0.0]).reshape(1, 4, 1)
    out = MaxPool1d(2).forward(x, False, None)
    assert out.reshape(-1).tolist() == [3.0, 2.0]


def test_maxpool_dominates_inputs():
    from textvote.nn import MaxPool1d
    rng = np.random.default_rng(0)
    x = rng.normal(size=(2, 9, 3))
    out = MaxPool1d(2).forward(x, False, None)
    windows = x[:, :8, :].reshape(2, 4, 2, 3)
    assert np.all(out[:, :, None, :] >= windows)
    assert np.all(out == windows.max(axis=2))


def test_conv1d_all_ones_kernel_is_sliding_sum():
    from textvote.nn import Conv1d
    rng = np.random.default_rng(1)
    conv = Conv1d(width=3, in_channels=2, filters=1, rng=rng)
    conv.params[0][:] = 1.0
    conv.params[1][:] = 0.0
    x = rng.normal(size=(4, 10, 2))
    out = conv.forward(x, False, None)
    expected = np.array([
        [x[b, i:i + 3, :].sum() for i in range(8)] for b in range(4)
    ])
    assert np.allclose(out[:, :, 0], expected, atol=1e-12)


def test_bce_values():
    assert bce_loss(1.0, 1) <= 1.2e-7
    assert bce_loss(0.5, 0) == pytest.approx(math.log(2), abs=1e-12)
    assert bce_loss(0.5, 1) == pytest.approx(math.log(2), abs=1e-12)
    assert bce_loss(0.9, 0) == pytest.approx(-math.log(0.1), rel=1e-9)
    assert bce_loss(0.0, 0) >= 0.0


def test_softmax_head_simplex():
    rng = np.random.default_rng(2)
    net = Network([{"kind": "dense", "units": 6}, {"kind": "relu"}],
                  (4,), head="softmax", seed=3)
    p = net.forward(rng.normal(size=(10, 4)))
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-9)
    assert np.all((p > 0) & (p < 1))


def test_dropout_rate_zero_and_inference_identity():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(5, 8))
    net = Network([{"kind": "dropout", "rate": 0.0}], (8,), seed=5)
    net_drop = Network([{"kind": "dropout", "rate": 0.5}], (8,), seed=5)
    # same head weights so outputs are comparable
    net_drop.head_dense.params[0][:] = net.head_dense.params[0]
    assert np.array_equal(net.forward(x, training=True),
                          net.forward(x, training=False))
    assert np.array_equal(net_drop.forward(x, training=False),
                          net.forward(x, training=False))


def test_forward_deterministic():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(3, 5))
    a = Network([{"kind": "dense", "units": 4}, {"kind": "relu"}], (5,), seed=7)
    b = Network([{"kind": "dense", "units": 4}, {"kind": "relu"}], (5,), seed=7)
    assert np.array_equal(a.forward(x), b.forward(x))


def test_shape_mismatch_raises():
    net = Network([{"kind": "dense", "units": 4}], (5,), seed=0)
    with pytest.raises(ShapeError):
        net.forward(np.zeros((2, 6)))


def test_sigmoid_head_bias_gradient_is_p_minus_y():
    # zero net: p = 0.5, so d(loss)/d(head bias) must be 0.5 - y
    for y in (0, 1):
        net = Network([], (3,), head="sigmoid", seed=0)
        net.head_dense.params[0][:] = 0.0
        net.head_dense.params[1][:] = 0.0
        net.loss_and_backward(np.zeros((1, 3)), np.array([y]), training=False)
        assert net.head_dense.grads[1][0] == pytest.approx(0.5 - y, abs=1e-12)


def test_zero_input_zero_weight_gradient():
    net = Network([{"kind": "dense", "units": 4}, {"kind": "relu"}], (3,), seed=1)
    net.loss_and_backward(np.zeros((2, 3)), np.array([0, 1]), training=False)
    assert np.all(net.layers[0].grads[0] == 0.0)


def test_grad_check_dnn():
    rng = np.random.default_rng(8)
    net = Network([{"kind": "dense", "units": 6}, {"kind": "relu"},
                   {"kind": "dense", "units": 4}, {"kind": "relu"}],
                  (8,), seed=9)
    x = rng.normal(size=(6, 8))
    y = rng.integers(0, 2, size=6)
    assert grad_check(net, x, y) < 1e-4


def test_grad_check_head_only():
    rng = np.random.default_rng(10)
    net = Network([], (4,), seed=11)
    assert grad_check(net, rng.normal(size=(3, 4)), rng.integers(0, 2, 3)) < 1e-6


def test_grad_check_cnn():
    rng = np.random.default_rng(12)
    net = Network([{"kind": "embedding", "rows": 9, "dim": 4},
                   {"kind": "conv1d", "filters": 3, "width": 3},
                   {"kind": "relu"},
                   {"kind": "maxpool1d", "width": 2},
                   {"kind": "flatten"},
                   {"kind": "dense", "units": 5},
                   {"kind": "relu"}],
                  (12,), head="softmax", seed=13)
    x = rng.integers(0, 9, size=(4, 12))
    y = rng.integers(0, 2, size=4)
    assert grad_check(net, x, y) < 1e-4


def test_save_load_roundtrip(tmp_path):
    rng = np.random.default_rng(14)
    net = Network([{"kind": "dense", "units": 5}, {"kind": "relu"},
                   {"kind": "dropout", "rate": 0.25}], (6,), seed=15)
    path = str(tmp_path / "net.bin")
    net.save(path)
    back = Network.load(path)
    x = rng.normal(size=(4, 6))
    assert np.array_equal(net.forward(x), back.forward(x))
    assert back.head == net.head and back.seed == net.seed
