import numpy as np
import pytest

from mobpredict.errors import NumericalDivergence
from mobpredict.neural import NeuralConfig, make_model, nn_forward, nn_predict, nn_train_step, pad_window
from mobpredict.neural.base import Adam, ParamSet, softmax
from oracles import gradient_error, random_case, random_gradcheck, straddles_kink

ARCHS = ["lstm", "cnn"]
SMALL = dict(hidden=8, embed=4, layers=2)


@pytest.fixture(params=ARCHS)
def arch(request):
    return request.param


def test_softmax_sums_to_one(arch):
    m = make_model(6, NeuralConfig(arch=arch, seq_len=4, seed=3))
    p = nn_forward(m, [1, 2, 3, 0])
    assert p.shape == (6,)
    assert abs(p.sum() - 1.0) < 1e-6
    assert np.all(p > 0)


def test_deterministic(arch):
    a = make_model(5, NeuralConfig(arch=arch, seq_len=3, seed=11, **SMALL))
    b = make_model(5, NeuralConfig(arch=arch, seq_len=3, seed=11, **SMALL))
    assert np.array_equal(a.params.flat, b.params.flat)
    assert np.array_equal(nn_forward(a, [1, 2, 3]), nn_forward(a, [1, 2, 3]))
    c = make_model(5, NeuralConfig(arch=arch, seq_len=3, seed=12, **SMALL))
    assert not np.array_equal(a.params.flat, c.params.flat)


def test_left_padding(arch):
    assert pad_window([4, 5], 4).tolist() == [0, 0, 4, 5]
    assert pad_window([1, 2, 3, 4, 5], 3).tolist() == [3, 4, 5]
    m = make_model(3, NeuralConfig(arch=arch, seq_len=5, seed=0, **SMALL))
    short, padded = nn_forward(m, [2]), nn_forward(m, [0, 0, 0, 0, 2])
    assert np.array_equal(short, padded) and short.shape == (3,)


def test_tiny_net_gradient(arch):
    m = make_model(3, NeuralConfig(arch=arch, seq_len=4, hidden=8, embed=4, seed=5))
    m.params.flat[:] += np.random.default_rng(0).normal(0, 0.2, m.params.flat.size)
    assert gradient_error(m, [1, 2, 0, 1], 2) < 1e-4


def test_random_gradients(arch):
    rng = np.random.default_rng(99)
    errors = [random_gradcheck(arch, rng)[0] for _ in range(10)]
    assert max(errors) < 1e-4


def test_kink_is_not_a_gradient_error():
    # the 14th draw of this stream puts a max-pool switch within 1e-4 of the
    # point: the 1e-4 difference quotient is off, a smaller step agrees
    rng = np.random.default_rng(0)
    for _ in range(14):
        model, window, target = random_case("cnn", rng)
    assert gradient_error(model, window, target) > 1e-4
    assert straddles_kink(model, window, target)
    assert gradient_error(model, window, target, h=1e-6) < 1e-8


def test_overfit_single_pattern(arch):
    m = make_model(3, NeuralConfig(arch=arch, seq_len=2, seed=1, **SMALL))
    for _ in range(500):
        loss = nn_train_step(m, [1, 2], 1)
    assert 0 <= loss < 0.01


def test_zero_learning_rate_is_noop(arch):
    m = make_model(4, NeuralConfig(arch=arch, seq_len=3, lr=0.0, seed=2, **SMALL))
    before = m.params.flat.copy()
    nn_train_step(m, [1, 2, 3], 0)
    assert np.array_equal(before, m.params.flat)


def test_learns_alternation(arch):
    m = make_model(3, NeuralConfig(arch=arch, seq_len=4, seed=4, lr=1e-2, **SMALL))
    seq = [1, 2] * 200
    for t in range(4, len(seq)):
        nn_train_step(m, seq[t - 4:t], seq[t])
    assert nn_predict(m, [2, 1, 2, 1]) == 2
    assert nn_predict(m, [1, 2, 1, 2]) == 1


def test_untrained_predict_is_total(arch):
    m = make_model(7, NeuralConfig(arch=arch, seq_len=3, seed=9, **SMALL))
    for w in ([0, 0, 0], [6, 5, 4], [1]):
        p = nn_predict(m, w)
        assert 0 <= p < 7
        assert p == int(np.argmax(nn_forward(m, w)))


def test_fused_step_matches_two_calls(arch):
    cfg = NeuralConfig(arch=arch, seq_len=3, seed=6, **SMALL)
    a, b = make_model(4, cfg), make_model(4, cfg)
    for w, y in [([1, 2, 3], 1), ([2, 3, 1], 2), ([3, 1, 2], 3)]:
        pa = a.predict_then_update(w, y)
        pb = b.predict(w)
        b.update(w, y)
        assert pa == pb
    assert np.array_equal(a.params.flat, b.params.flat)


def test_exclude_unknown(arch):
    m = make_model(3, NeuralConfig(arch=arch, seq_len=2, seed=1, **SMALL))
    for _ in range(200):
        nn_train_step(m, [1, 1], 0)
    assert m.predict([1, 1]) == 0
    assert m.predict([1, 1], exclude=0) != 0


def test_divergence_detected(arch):
    m = make_model(3, NeuralConfig(arch=arch, seq_len=2, seed=1, **SMALL))
    m.params.flat[:] = np.nan
    with pytest.raises(NumericalDivergence):
        m.train_step([1, 2], 1)


def test_paramset_views_share_storage():
    ps = ParamSet([("a", (2, 3)), ("b", (4,))])
    ps["a"][1, 2] = 5.0
    assert ps.flat[5] == 5.0 and len(ps) == 10


def test_adam_first_step_is_lr_sign():
    # bias-corrected first step moves each coordinate by lr * g/|g| (up to eps)
    opt = Adam(3, 0.1, 0.9, 0.999, 1e-8)
    x = np.zeros(3)
    opt.step(x, np.array([2.0, -0.5, 0.0]))
    assert np.allclose(x, [-0.1, 0.1, 0.0], atol=1e-6)


def test_softmax_stable():
    p = softmax(np.array([1000.0, 1000.0, -1000.0]))
    assert np.allclose(p, [0.5, 0.5, 0.0])


def test_config_validation():
    with pytest.raises(ValueError):
        NeuralConfig(arch="gru")
    with pytest.raises(ValueError):
        NeuralConfig(hidden=0)
