import itertools

import numpy as np
import pytest
from scipy.stats import chisquare

import scalar_reference as ref
from dmala_mimo.components.ProposalUtils import ProposalUtils
from dmala_mimo.exceptions.DmalaError import ConfigError
from dmala_mimo.models.SamplerConfig import ProposalTable, SamplerConfig


def test_metric_matches_scalar(instance_2x2):
    x = instance_2x2.true_x
    expected = ref.metric(instance_2x2.H, instance_2x2.y, instance_2x2.sigma2, x, tau=2.0)
    assert ProposalUtils.metric_f(instance_2x2, x, tau=2.0) == pytest.approx(expected, rel=1e-12)


def test_metric_is_batched(instance_2x2):
    x = np.stack([instance_2x2.true_x, -instance_2x2.true_x])
    f = ProposalUtils.metric_f(instance_2x2, x)
    assert f.shape == (2,)
    assert f[0] == pytest.approx(ProposalUtils.metric_f(instance_2x2, x[0]))


def test_gradient_matches_central_differences(make_instance):
    instance = make_instance(nt=4, nr=4, q=4, snr_db=12.0, seed=5)
    x = np.random.default_rng(0).standard_normal(instance.N)
    grad = ProposalUtils.gradient_f(instance, x, tau=1.5)
    h = 1e-5
    numeric = np.array(
        [
            (ProposalUtils.metric_f(instance, x + h * e, 1.5) - ProposalUtils.metric_f(instance, x - h * e, 1.5)) / (2 * h)
            for e in np.eye(instance.N)
        ]
    )
    assert np.max(np.abs(grad - numeric)) / np.max(np.abs(numeric)) <= 1e-6


def test_preconditioner_is_symmetric_positive_definite(instance_2x2):
    precond = ProposalUtils.compute_preconditioner(instance_2x2.H, 0.3)
    assert np.allclose(precond.m, precond.m.T, atol=1e-10)
    assert np.all(np.linalg.eigvalsh(precond.m) > 0)
    assert np.allclose(precond.m, ref.preconditioner(instance_2x2.H, 0.3), atol=1e-10)


def test_preconditioner_rejects_non_positive_damping(instance_2x2):
    with pytest.raises(ConfigError):
        ProposalUtils.compute_preconditioner(instance_2x2.H, 0.0)


@pytest.mark.parametrize("mode", ["naive", "preconditioned"])
def test_proposal_rows_match_scalar(instance_2x2, mode):
    config = SamplerConfig(mode=mode).resolve(instance_2x2)
    precond = ProposalUtils.compute_preconditioner(instance_2x2.H, config.gamma_damp)
    x = instance_2x2.constellation.real_alphabet[[0, 1, 1, 0]]
    grad = ProposalUtils.gradient_f(instance_2x2, x)
    table = ProposalUtils.build_proposal(x, *ProposalUtils.effective_gradient(grad, config, precond), instance_2x2.constellation)

    g, a_eff = ref.effective(ref.gradient(instance_2x2.H, instance_2x2.y, instance_2x2.sigma2, x), mode, config.alpha, config.beta, precond.m)
    rows = ref.proposal_rows(x, g, a_eff, instance_2x2.constellation.real_alphabet)
    assert np.allclose(table.probs, rows, atol=1e-12)
    assert np.allclose(table.probs.sum(axis=-1), 1.0, atol=1e-12)
    assert np.all(table.probs > 0)


def test_rows_sum_to_one_at_high_snr(make_instance):
    instance = make_instance(nt=4, nr=4, q=8, snr_db=40.0, seed=1)
    config = SamplerConfig(mode="naive").resolve(instance)
    x = instance.constellation.real_alphabet[np.random.default_rng(0).integers(0, 8, size=(64, instance.N))]
    grad = ProposalUtils.gradient_f(instance, x)
    table = ProposalUtils.build_proposal(x, *ProposalUtils.effective_gradient(grad, config), instance.constellation)
    assert table.probs.shape == (64, instance.N, 8)
    assert np.all(np.isfinite(table.log_probs))
    assert np.allclose(table.probs.sum(axis=-1), 1.0, atol=1e-12)


def test_proposal_normalizes_over_all_targets(qpsk):
    x = qpsk.real_alphabet[[0, 1]]
    table = ProposalUtils.build_proposal(x, np.array([0.3, -1.2]), 0.5, qpsk)
    targets = np.array(list(itertools.product(qpsk.real_alphabet, repeat=2)))
    total = np.exp(ProposalUtils.proposal_log_prob(table, targets)).sum()
    assert total == pytest.approx(1.0, abs=1e-12)


def test_deterministic_table_is_sampled_exactly(qpsk):
    probs = np.array([[1.0 - 1e-15, 1e-15], [1e-15, 1.0 - 1e-15]])
    table = ProposalTable(probs=probs, log_probs=np.log(probs), alphabet=qpsk.real_alphabet)
    x_prime, log_q = ProposalUtils.sample_proposal(table, np.random.default_rng(0))
    assert np.array_equal(x_prime, qpsk.real_alphabet[[0, 1]])
    assert log_q == pytest.approx(0.0, abs=1e-12)
    assert log_q == ProposalUtils.proposal_log_prob(table, x_prime)


def test_sampling_frequencies_match_rows(qam16):
    x = qam16.real_alphabet[[0, 2, 3]]
    table = ProposalUtils.build_proposal(x, np.array([2.0, -1.0, 0.5]), 0.4, qam16)
    rng = np.random.default_rng(7)
    batch = ProposalTable(
        probs=np.broadcast_to(table.probs, (100_000,) + table.probs.shape),
        log_probs=np.broadcast_to(table.log_probs, (100_000,) + table.probs.shape),
        alphabet=table.alphabet,
    )
    draws, _ = ProposalUtils.sample_proposal(batch, rng)
    indices = np.argmin(np.abs(draws[..., None] - qam16.real_alphabet), axis=-1)
    for n in range(3):
        observed = np.bincount(indices[:, n], minlength=4)
        expected = table.probs[n] * observed.sum()
        keep = expected > 5
        observed, expected = observed[keep], expected[keep]
        assert chisquare(observed, expected * observed.sum() / expected.sum()).pvalue > 0.01


def test_acceptance_symmetric_case_is_one():
    assert ProposalUtils.acceptance_probability(-3.0, -3.0, -1.2, -1.2) == 1.0


def test_acceptance_at_high_snr_does_not_overflow():
    a = ProposalUtils.acceptance_probability(-1e5, -2e5, -1.0, -800.0)
    assert a == 0.0
    assert ProposalUtils.acceptance_probability(-2e5, -1e5, -800.0, -1.0) == 1.0


def test_acceptance_matches_scalar(instance_2x2):
    config = SamplerConfig(mode="naive").resolve(instance_2x2)
    alphabet = instance_2x2.constellation.real_alphabet
    x = alphabet[[0, 0, 1, 1]]
    xp = alphabet[[1, 0, 1, 0]]
    tables = []
    for state in (x, xp):
        grad = ProposalUtils.gradient_f(instance_2x2, state)
        tables.append(ProposalUtils.build_proposal(state, grad, config.alpha, instance_2x2.constellation))
    f_x, f_xp = ProposalUtils.metric_f(instance_2x2, x), ProposalUtils.metric_f(instance_2x2, xp)
    a = ProposalUtils.acceptance_probability(
        f_x, f_xp, ProposalUtils.proposal_log_prob(tables[0], xp), ProposalUtils.proposal_log_prob(tables[1], x)
    )

    H, y, s2 = instance_2x2.H, instance_2x2.y, instance_2x2.sigma2
    rows_x = ref.proposal_rows(x, ref.gradient(H, y, s2, x), config.alpha, alphabet)
    rows_xp = ref.proposal_rows(xp, ref.gradient(H, y, s2, xp), config.alpha, alphabet)
    expected = ref.acceptance(
        ref.metric(H, y, s2, x), ref.metric(H, y, s2, xp), ref.proposal_prob(rows_x, xp, alphabet), ref.proposal_prob(rows_xp, x, alphabet)
    )
    assert a == pytest.approx(expected, abs=1e-12)
    assert 0.0 < a <= 1.0
