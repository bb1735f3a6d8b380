import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fadas.core import EtaRule, HyperParams
from fadas.data import gen_quadratic_problem
from fadas.core import ModelKind, ModelSpec
from fadas.models import local_sgd, loss_and_grad
from fadas.optim import (
    PseudoGradient,
    ServerOptState,
    delay_adaptive_lr,
    fadas_step,
    fedams_sync_step,
    fedasync_step,
    fedavg_aggregate,
    fedbuff_step,
    polynomial_staleness,
)


def scalar_amsgrad(x, deltas, beta1, beta2, eps, eta):
    """Coordinate-wise reference of the moment recursion and model step, zero-initialized."""
    d = len(x)
    x, m, v, vh = list(x), [0.0] * d, [0.0] * d, [0.0] * d
    for delta in deltas:
        for j in range(d):
            m[j] = beta1 * m[j] + (1 - beta1) * delta[j]
            v[j] = beta2 * v[j] + (1 - beta2) * delta[j] * delta[j]
            vh[j] = max(vh[j], v[j])
            x[j] = x[j] + eta * m[j] / (math.sqrt(vh[j]) + eps)
    return x, m, v, vh


@pytest.mark.parametrize("rule", list(EtaRule))
def test_below_threshold_keeps_eta(rule):
    assert delay_adaptive_lr(0.5, 4, 8, rule) == 0.5


def test_appendix_rule_scales_by_delay():
    assert delay_adaptive_lr(0.001, 127, 8, EtaRule.APPENDIX) == 0.001 / 127


def test_main_text_rule_caps_at_inverse_delay():
    assert delay_adaptive_lr(0.5, 10, 8, EtaRule.MAIN_TEXT) == 0.1


@given(eta=st.floats(1e-6, 5.0), tau=st.integers(0, 500), tau_c=st.integers(0, 50),
       rule=st.sampled_from(list(EtaRule)))
def test_eta_contract(eta, tau, tau_c, rule):
    eta_t = delay_adaptive_lr(eta, tau, tau_c, rule)
    assert eta_t <= eta
    if tau <= tau_c:
        assert eta_t == eta
    if rule is EtaRule.APPENDIX and tau > max(tau_c, 1):
        assert eta_t == eta / tau


def test_fadas_hand_arithmetic():
    h = HyperParams(beta1=0.0, beta2=0.0, eps=1.0, eta=1.0)
    state = ServerOptState.initial(np.zeros(2))
    new, eta_t = fadas_step(state, PseudoGradient(np.array([1.0, 0.0])), h)
    assert new.m.tolist() == [1.0, 0.0] and new.v.tolist() == [1.0, 0.0] and new.vhat.tolist() == [1.0, 0.0]
    assert new.x.tolist() == [0.5, 0.0]
    assert eta_t == 1.0 and new.t == 2


def test_fadas_zero_delta_from_initial_state():
    h = HyperParams()
    state = ServerOptState.initial(np.array([1.0, -2.0, 3.0]))
    new, _ = fadas_step(state, PseudoGradient(np.zeros(3)), h)
    assert np.array_equal(new.x, state.x)


def test_fadas_matches_scalar_reference():
    rng = np.random.default_rng(5)
    h = HyperParams(beta1=0.9, beta2=0.99, eps=1e-8, eta=0.01)
    x0 = rng.standard_normal(4)
    deltas = [rng.standard_normal(4) for _ in range(3)]
    state = ServerOptState.initial(x0)
    for d in deltas:
        state, _ = fadas_step(state, PseudoGradient(d), h)
    x, m, v, vh = scalar_amsgrad(x0.tolist(), [d.tolist() for d in deltas], 0.9, 0.99, 1e-8, 0.01)
    for got, want in ((state.x, x), (state.m, m), (state.v, v), (state.vhat, vh)):
        assert np.abs(got - np.array(want)).max() <= 1e-14


def test_fadas_delay_adaptive_uses_rule():
    h = HyperParams(eta=0.5, tau_c=2)
    state = ServerOptState.initial(np.zeros(1))
    _, eta_t = fadas_step(state, PseudoGradient(np.ones(1), 5), h, EtaRule.APPENDIX, delay_adaptive=True)
    assert eta_t == 0.1
    _, eta_t = fadas_step(state, PseudoGradient(np.ones(1), 5), h, EtaRule.APPENDIX, delay_adaptive=False)
    assert eta_t == 0.5


def test_fadas_rejects_bad_delta():
    state = ServerOptState.initial(np.zeros(2))
    with pytest.raises(ValueError):
        fadas_step(state, PseudoGradient(np.zeros(3)), HyperParams())
    with pytest.raises(ValueError):
        fadas_step(state, PseudoGradient(np.array([np.nan, 0.0])), HyperParams())


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(seq=st.lists(arrays(np.float64, 3, elements=finite), min_size=1, max_size=12),
       beta2=st.floats(0.0, 0.999))
def test_vhat_monotone_and_step_bounded(seq, beta2):
    h = HyperParams(beta1=0.9, beta2=beta2, eps=1e-3, eta=0.1)
    state = ServerOptState.initial(np.zeros(3))
    for d in seq:
        new, eta_t = fadas_step(state, PseudoGradient(d), h)
        assert np.all(new.vhat >= state.vhat) and np.all(new.v >= 0)
        step = np.abs(new.x - state.x).max()
        assert step <= eta_t * np.abs(new.m).max() / h.eps * (1 + 1e-12) + 1e-300
        state = new


def test_large_eps_reduces_to_scaled_fedbuff():
    eps, eta = 1e6, 0.3
    h = HyperParams(beta1=0.0, beta2=0.0, eps=eps, eta=eta)
    x = np.array([1.0, 2.0, -1.0])
    delta = np.array([0.5, -2.0, 3.0])
    new, _ = fadas_step(ServerOptState.initial(x), PseudoGradient(delta), h)
    ref = fedbuff_step(x, delta, eta / eps)
    assert np.allclose(new.x - x, ref - x, rtol=1e-5, atol=0)


def test_fedbuff_step():
    x, d = np.array([1.0, 2.0]), np.array([0.5, -0.25])
    assert np.array_equal(fedbuff_step(x, d, 1.0), x + d)
    assert np.array_equal(fedbuff_step(x, np.zeros(2), 0.7), x)
    with pytest.raises(ValueError):
        fedbuff_step(x, np.zeros(3), 1.0)


def test_fedbuff_all_clients_equals_fedavg_round():
    # oracle: one synchronous FedAvg round written out directly on a 2-client quadratic
    q = gen_quadratic_problem(4, 2, 3, 1.0)
    ds, shards = q.as_dataset()
    spec = ModelSpec(ModelKind.QUADRATIC, 3)
    hyper = HyperParams(eta_l=0.05, K=1)
    x = np.array([0.3, 0.1, -0.2])
    deltas = [local_sgd(spec, x, ds, s, hyper) for s in shards]
    buffered = fedbuff_step(x, (deltas[0] + deltas[1]) / 2, 1.0)
    local_models = [x - 0.05 * loss_and_grad(spec, x, s, ds).grad for s in shards]
    direct = (local_models[0] + local_models[1]) / 2
    assert np.allclose(buffered, direct, atol=1e-15)


def test_fedasync_fresh_update():
    x, xn = np.array([0.0, 2.0]), np.array([1.0, 0.0])
    out, alpha = fedasync_step(x, xn, 0.6, 0)
    assert alpha == 0.6 and np.allclose(out, 0.4 * x + 0.6 * xn)
    out, _ = fedasync_step(x, xn, 1.0, 0)
    assert np.array_equal(out, xn)


def test_fedasync_polynomial_staleness():
    _, alpha = fedasync_step(np.zeros(1), np.ones(1), 0.6, 3, polynomial_staleness(0.5))
    assert alpha == pytest.approx(0.3, abs=1e-15)


def test_fedavg_aggregate():
    x, d = np.array([1.0, -1.0]), np.array([0.25, 0.5])
    assert np.array_equal(fedavg_aggregate(x, [d]), x + d)
    assert np.array_equal(fedavg_aggregate(x, [d, -d]), x)
    with pytest.raises(ValueError):
        fedavg_aggregate(x, [])


def test_fedavg_mean_independent_of_summation_order():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(6)
    deltas = [rng.standard_normal(6) for _ in range(3)]
    got = fedavg_aggregate(x, deltas)
    # oracle: exactly rounded per-coordinate sum over a sorted index order
    order = sorted(range(3), key=lambda i: -i)
    oracle = x + np.array([math.fsum(deltas[i][j] for i in order) / 3 for j in range(6)])
    assert np.abs(got - oracle).max() <= 1e-15 * max(1.0, np.abs(oracle).max())


def test_fedams_matches_fadas():
    h = HyperParams(beta1=0.0, beta2=0.0, eps=1.0, eta=1.0)
    state = ServerOptState.initial(np.zeros(2))
    assert fedams_sync_step(state, [np.array([1.0, 0.0])], h).x.tolist() == [0.5, 0.0]
    assert not fedams_sync_step(state, [np.zeros(2), np.zeros(2)], h).x.any()
