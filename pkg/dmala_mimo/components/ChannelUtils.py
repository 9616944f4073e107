import numpy as np
import scipy.linalg

from dmala_mimo.components.ConstellationUtils import ConstellationUtils
from dmala_mimo.exceptions.DmalaError import ChannelError, ConfigError
from dmala_mimo.models.Constellation import Constellation
from dmala_mimo.models.DetectionInstance import ChannelSpec, DetectionInstance


class ChannelUtils:
    """
    Draw channels and noise for the real-valued model y = Hx + n.

    Complex quantities are stacked as x = [Re(x_c); Im(x_c)] and
    H = [[Re, -Im], [Im, Re]], so a complex system with N_t transmit and N_r receive
    antennas becomes a real one with N = 2 N_t and M = 2 N_r. Every operation takes
    an explicit ``numpy.random.Generator``.

    Examples:
        >>> rng = np.random.default_rng(7)
        >>> H = ChannelUtils.generate_channel(ChannelSpec("rayleigh", nt=2, nr=2), rng)
        >>> sigma2 = ChannelUtils.snr_to_sigma2(8.0, nt=2)
        >>> y = ChannelUtils.transmit(H, x, sigma2, rng)
    """

    @staticmethod
    def complex_to_real_matrix(h_c) -> np.ndarray:
        h_c = np.asarray(h_c)
        return np.block([[h_c.real, -h_c.imag], [h_c.imag, h_c.real]])

    @staticmethod
    def complex_to_real_vector(x_c) -> np.ndarray:
        x_c = np.asarray(x_c)
        return np.concatenate([x_c.real, x_c.imag], axis=-1)

    @staticmethod
    def real_to_complex_vector(x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        half = x.shape[-1] // 2
        return x[..., :half] + 1j * x[..., half:]

    @staticmethod
    def exponential_correlation(n: int, rho: float) -> np.ndarray:
        """R[i, j] = rho^|i - j|."""
        return scipy.linalg.toeplitz(rho ** np.arange(n))

    @staticmethod
    def _matrix_sqrt(r: np.ndarray) -> np.ndarray:
        eigenvalues, vectors = scipy.linalg.eigh(r)
        if eigenvalues.min() <= 0:
            raise ChannelError(f"Correlation matrix is not positive-definite (min eigenvalue {eigenvalues.min():.3g})")
        return (vectors * np.sqrt(eigenvalues)) @ vectors.T

    @staticmethod
    def generate_channel(spec: ChannelSpec, rng: np.random.Generator) -> np.ndarray:
        """
        Draw one channel realization in its real-valued block form.

        Rayleigh entries are CN(0, 1). The Kronecker model applies the exponential
        correlation on both sides, H_c = R_r^{1/2} G R_t^{1/2}.

        Args:
            spec: Channel ensemble.
            rng: Random generator.

        Returns:
            np.ndarray: (2 N_r, 2 N_t) real matrix.

        Raises:
            ChannelError: If a correlation matrix is not positive-definite.
        """
        g = (rng.standard_normal((spec.nr, spec.nt)) + 1j * rng.standard_normal((spec.nr, spec.nt))) / np.sqrt(2.0)
        if spec.kind == "kronecker":
            r_rx = ChannelUtils._matrix_sqrt(ChannelUtils.exponential_correlation(spec.nr, spec.rho))
            r_tx = ChannelUtils._matrix_sqrt(ChannelUtils.exponential_correlation(spec.nt, spec.rho))
            g = r_rx @ g @ r_tx
        return ChannelUtils.complex_to_real_matrix(g)

    @staticmethod
    def snr_to_sigma2(snr_db: float, nt: int) -> float:
        """
        Complex noise variance for SNR = E||Hx||^2 / E||n||^2 with unit-variance
        channel entries and unit-power symbols: sigma2 = N_t / 10^(snr_db / 10).

        Examples:
            >>> ChannelUtils.snr_to_sigma2(0.0, nt=2)
            2.0
        """
        if not np.isfinite(snr_db):
            raise ConfigError(f"SNR must be finite, got {snr_db}")
        return float(nt / 10.0 ** (snr_db / 10.0))

    @staticmethod
    def transmit(H, x, sigma2: float, rng: np.random.Generator) -> np.ndarray:
        """
        Return y = Hx + n, n with i.i.d. N(0, sigma2 / 2) entries.

        ``sigma2 = 0`` gives the noise-free y = Hx and draws nothing from ``rng``.

        Raises:
            ChannelError: On dimension mismatch or negative sigma2.
        """
        H = np.asarray(H, dtype=float)
        x = np.asarray(x, dtype=float)
        if H.ndim != 2 or x.shape[-1] != H.shape[1]:
            raise ChannelError(f"Cannot transmit x of shape {x.shape} through H of shape {H.shape}")
        if sigma2 < 0:
            raise ChannelError(f"sigma2 must be >= 0, got {sigma2}")
        y = x @ H.T
        if sigma2 > 0:
            y = y + rng.normal(0.0, np.sqrt(sigma2 / 2.0), size=y.shape)
        return y

    @staticmethod
    def perturb_csi(H, nmse: float, rng: np.random.Generator) -> np.ndarray:
        """
        Imperfect CSI: H_hat = H + E with E[||E||_F^2] / E[||H||_F^2] = nmse.

        The normalization uses the Rayleigh expectation E[||H||_F^2] = M N / 2, so each
        entry of E has variance nmse / 2. ``nmse = 0`` returns a copy of H.

        Raises:
            ConfigError: If nmse is negative.
        """
        if nmse < 0:
            raise ConfigError(f"nmse must be >= 0, got {nmse}")
        H = np.array(H, dtype=float)
        if nmse == 0:
            return H
        return H + rng.normal(0.0, np.sqrt(nmse / 2.0), size=H.shape)

    @staticmethod
    def draw_instance(
        spec: ChannelSpec,
        constellation: Constellation,
        snr_db: float,
        rng: np.random.Generator,
        nmse=None,
        csi_rng=None,
        seed=None,
    ) -> DetectionInstance:
        """
        Draw random bits, a channel and noise, and package the detection problem.

        The detector sees H_hat when ``nmse`` is set; the CSI error comes from
        ``csi_rng`` so the bits, channel and noise do not depend on ``nmse``.

        Returns:
            DetectionInstance: with ``true_x`` set.
        """
        n = 2 * spec.nt
        bits = rng.choice(np.array([-1, 1]), size=n * constellation.bits_per_real_symbol)
        x = ConstellationUtils.map_bits(bits, constellation)
        H = ChannelUtils.generate_channel(spec, rng)
        sigma2 = ChannelUtils.snr_to_sigma2(snr_db, spec.nt)
        y = ChannelUtils.transmit(H, x, sigma2, rng)
        if nmse:
            H = ChannelUtils.perturb_csi(H, nmse, csi_rng if csi_rng is not None else rng)
        return DetectionInstance(H=H, y=y, sigma2=sigma2, constellation=constellation, true_x=x, seed=seed)
