import numpy as np
import pytest

from dmala_mimo.components.ChannelUtils import ChannelUtils
from dmala_mimo.exceptions.DmalaError import ChannelError, ConfigError, InstanceError
from dmala_mimo.models.DetectionInstance import ChannelSpec, DetectionInstance


def test_real_block_form_matches_complex_product():
    rng = np.random.default_rng(0)
    h_c = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    x_c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    H = ChannelUtils.complex_to_real_matrix(h_c)
    x = ChannelUtils.complex_to_real_vector(x_c)
    assert H.shape == (6, 4)
    assert np.allclose(H @ x, ChannelUtils.complex_to_real_vector(h_c @ x_c))
    assert np.allclose(ChannelUtils.real_to_complex_vector(x), x_c)


def test_snr_to_sigma2():
    assert ChannelUtils.snr_to_sigma2(0.0, nt=2) == pytest.approx(2.0)
    assert ChannelUtils.snr_to_sigma2(10.0, nt=4) == pytest.approx(0.4)


def test_rayleigh_entries_have_unit_variance():
    rng = np.random.default_rng(1)
    spec = ChannelSpec(nt=4, nr=4)
    H = np.stack([ChannelUtils.generate_channel(spec, rng) for _ in range(2000)])
    # each real entry of a CN(0, 1) channel has variance 1/2
    assert np.mean(H**2) == pytest.approx(0.5, rel=0.03)


def test_kronecker_adjacent_rows_correlate_at_rho():
    rng = np.random.default_rng(2)
    spec = ChannelSpec(kind="kronecker", rho=0.5, nt=2, nr=2)
    # real parts of receive antennas 0 and 1 at transmit antenna 0
    h = np.stack([ChannelUtils.generate_channel(spec, rng)[:2, 0] for _ in range(8000)])
    assert np.corrcoef(h[:, 0], h[:, 1])[0, 1] == pytest.approx(0.5, abs=0.05)


def test_transmit_noise_free_and_noise_variance():
    rng = np.random.default_rng(3)
    H = np.eye(4)
    x = np.ones(4)
    assert np.array_equal(ChannelUtils.transmit(H, x, 0.0, rng), x)
    noise = np.stack([ChannelUtils.transmit(H, x, 0.8, rng) - x for _ in range(5000)])
    assert np.var(noise) == pytest.approx(0.4, rel=0.05)


def test_transmit_dimension_mismatch():
    with pytest.raises(ChannelError):
        ChannelUtils.transmit(np.eye(4), np.ones(3), 1.0, np.random.default_rng(0))


def test_perturb_csi_zero_nmse_is_exact():
    H = np.arange(8.0).reshape(2, 4)
    assert np.array_equal(ChannelUtils.perturb_csi(H, 0.0, np.random.default_rng(0)), H)
    with pytest.raises(ConfigError):
        ChannelUtils.perturb_csi(H, -0.1, np.random.default_rng(0))


def test_perturb_csi_error_energy():
    rng = np.random.default_rng(4)
    H = np.zeros((8, 8))
    errors = np.stack([ChannelUtils.perturb_csi(H, 0.1, rng) for _ in range(500)])
    # E||E||_F^2 / E||H||_F^2 with E||H||_F^2 = M N / 2
    assert np.mean(np.sum(errors**2, axis=(1, 2))) / 32.0 == pytest.approx(0.1, rel=0.05)


def test_draw_instance_with_zero_nmse_matches_perfect_csi(qpsk):
    spec = ChannelSpec(nt=2, nr=2)
    perfect = ChannelUtils.draw_instance(spec, qpsk, 8.0, np.random.default_rng(5))
    zero = ChannelUtils.draw_instance(spec, qpsk, 8.0, np.random.default_rng(5), nmse=0.0, csi_rng=np.random.default_rng(6))
    assert np.array_equal(perfect.H, zero.H)
    assert np.array_equal(perfect.y, zero.y)


def test_imperfect_csi_keeps_transmission(qpsk):
    spec = ChannelSpec(nt=2, nr=2)
    perfect = ChannelUtils.draw_instance(spec, qpsk, 8.0, np.random.default_rng(5))
    noisy = ChannelUtils.draw_instance(spec, qpsk, 8.0, np.random.default_rng(5), nmse=0.05, csi_rng=np.random.default_rng(6))
    assert np.array_equal(perfect.y, noisy.y)
    assert np.array_equal(perfect.true_x, noisy.true_x)
    assert not np.array_equal(perfect.H, noisy.H)


def test_instance_round_trip(instance_2x2):
    restored = DetectionInstance.from_dict(instance_2x2.to_dict())
    assert np.array_equal(restored.H, instance_2x2.H)
    assert np.array_equal(restored.y, instance_2x2.y)
    assert restored.sigma2 == instance_2x2.sigma2
    assert restored.seed == instance_2x2.seed


@pytest.mark.parametrize(
    "H, y, sigma2",
    [
        (np.eye(4), np.zeros(3), 1.0),
        (np.eye(4), np.zeros(4), 0.0),
        (np.eye(3), np.zeros(3), 1.0),
    ],
)
def test_invalid_instances(qpsk, H, y, sigma2):
    with pytest.raises(InstanceError):
        DetectionInstance(H=H, y=y, sigma2=sigma2, constellation=qpsk)


def test_invalid_channel_spec():
    with pytest.raises(ConfigError):
        ChannelSpec(kind="rician")
    with pytest.raises(ConfigError):
        ChannelSpec(kind="kronecker", rho=1.0)
