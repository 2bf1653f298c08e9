import math

import numpy as np
import pytest
from scipy.special import gammaln, genlaguerre

from lossyphase.fock import (
    FockVector,
    TruncationError,
    coherent_vector,
    default_cutoff,
    density_from_vector,
    displacement_operator,
    eigh,
    expectation,
    identity_operator,
    number_operator,
    number_state,
    phase_generator,
    phase_shift,
    rotate_phase,
    tensor,
)


def poisson_tail_beyond(mean, cutoff):
    # independent tail oracle: direct sum of Poisson weights above the cutoff
    n = np.arange(cutoff + 1, cutoff + 400)
    return float(np.exp(-mean + n * np.log(mean) - gammaln(n + 1)).sum())


class TestCoherent:
    def test_vacuum(self):
        v = coherent_vector(0.0, 10)
        assert v.amplitudes[0] == 1.0
        assert np.all(v.amplitudes[1:] == 0.0)

    def test_alpha3_norm_at_cutoff40(self):
        # oracle: the Poisson tail beyond 40 at mean 9 is ~6e-16 < 1e-12
        assert poisson_tail_beyond(9.0, 40) < 1e-12
        v = coherent_vector(3.0, 40)
        assert abs(v.norm_sq() - 1.0) < 1e-12

    def test_vacuum_overlap_closed_form(self):
        v = coherent_vector(3.0, 40)
        # <0|alpha> = exp(-|alpha|^2/2)
        assert abs(v.amplitudes[0] - 1.1108996538242306e-2) < 1e-15

    def test_truncation_not_silently_renormalized(self):
        with pytest.raises(TruncationError):
            coherent_vector(3.0, 12)

    @pytest.mark.parametrize("alpha", [0.5, 1.5, 3.0, 5.0, 2.0 + 1.0j])
    def test_mean_photon_number(self, alpha):
        cut = default_cutoff(abs(alpha) ** 2)
        v = coherent_vector(alpha, cut)
        n_mean = expectation(number_operator(cut), v)
        assert abs(n_mean - abs(alpha) ** 2) < 1e-9

    def test_default_cutoff_covers_tail(self):
        for mu in [0.1, 1.0, 9.0, 25.0, 400.0]:
            assert poisson_tail_beyond(mu, default_cutoff(mu)) < 1e-12


class TestPhaseShift:
    def test_zero_is_identity(self):
        u = phase_shift(0.0, 12)
        assert np.abs(u.matrix - np.eye(13)).max() == 0.0

    def test_two_pi_periodicity(self):
        u = phase_shift(2.0 * math.pi, 12)
        assert np.abs(u.matrix - np.eye(13)).max() < 1e-12

    def test_rotates_coherent_amplitude(self):
        cut = 45
        v = coherent_vector(2.0, cut)
        rotated = rotate_phase(v, 0.7)
        target = coherent_vector(2.0 * np.exp(0.7j), cut)
        assert np.abs(rotated.amplitudes - target.amplitudes).max() < 1e-10

    def test_commutes_with_number_operator(self):
        u = phase_shift(0.3, 20).matrix
        n = number_operator(20).matrix
        assert np.abs(u @ n - n @ u).max() == 0.0


class TestDisplacement:
    def test_zero_displacement_is_identity(self):
        d = displacement_operator(0.0, 25)
        assert np.abs(d.matrix - np.eye(26)).max() < 1e-12

    def test_displaces_vacuum_to_coherent(self):
        beta = 2.0
        cut = default_cutoff(beta**2)
        d = displacement_operator(beta, cut)
        target = coherent_vector(beta, cut)
        assert np.abs(d.matrix[:, 0] - target.amplitudes).max() < 1e-9

    def test_inverse_composition(self):
        beta = 1.5 + 0.5j
        cut = default_cutoff(abs(beta) ** 2)
        d = displacement_operator(beta, cut)
        d_inv = displacement_operator(-beta, cut)
        assert np.abs(d_inv.matrix @ d.matrix - np.eye(cut + 1)).max() < 1e-8

    def test_unitary_on_truncated_space(self):
        d = displacement_operator(16.0, 580)
        gram = d.matrix.conj().T @ d.matrix
        assert np.abs(gram - np.eye(581)).max() < 1e-8

    def test_matches_closed_form_matrix_elements(self):
        # oracle: Cahill-Glauber associated-Laguerre closed form, evaluated
        # deep inside a basis generously larger than the displaced support
        beta = 1.7
        cut = 120
        d = displacement_operator(beta, cut).matrix

        def elem(m, n):
            if n > m:
                return np.conj(elem_at(-beta, n, m))
            return elem_at(beta, m, n)

        def elem_at(b, m, n):
            x = abs(b) ** 2
            pref = math.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)) - x / 2.0)
            return pref * b ** (m - n) * genlaguerre(n, m - n)(x)

        for m in range(10):
            for n in range(10):
                assert abs(d[m, n] - elem(m, n)) < 1e-10

    def test_guard_raises_when_cutoff_too_small(self):
        with pytest.raises(TruncationError):
            displacement_operator(16.0, 100)


class TestTensor:
    def test_vacuum_pair(self):
        v = tensor(number_state(0, 3), number_state(0, 3))
        assert v.amplitudes[0] == 1.0
        assert v.norm_sq() == 1.0

    def test_identity_tensor_identity(self):
        ii = tensor(identity_operator(3), identity_operator(3))
        assert np.abs(ii.matrix - np.eye(16)).max() == 0.0

    def test_phase_mode_photon_number(self):
        cut = 45
        v = tensor(coherent_vector(2.0, cut), number_state(0, cut))
        g = phase_generator(cut, 2)
        assert abs(expectation(g, v) - 4.0) < 1e-9

    def test_mode_order_row_major(self):
        # |n1=1, n2=0> must sit at flat index 1*(cutoff+1)
        v = tensor(number_state(1, 3), number_state(0, 3))
        assert v.amplitudes[4] == 1.0

    def test_cutoff_mismatch_rejected(self):
        with pytest.raises(ValueError):
            tensor(number_state(0, 3), number_state(0, 4))


class TestEigh:
    def test_diagonal_sorted_descending(self):
        es = eigh(np.diag([3.0, 1.0, 2.0]).astype(complex))
        assert np.allclose(es.eigenvalues, [3.0, 2.0, 1.0])

    def test_pauli_x(self):
        es = eigh(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
        assert np.allclose(es.eigenvalues, [1.0, -1.0])
        v = np.abs(es.eigenvectors)
        assert np.allclose(v, 1.0 / math.sqrt(2.0), atol=1e-12)

    def test_random_hermitian_reconstruction(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50))
        a = a + a.conj().T
        es = eigh(a)
        recon = (es.eigenvectors * es.eigenvalues) @ es.eigenvectors.conj().T
        assert np.abs(recon - a).max() < 1e-9
        gram = es.eigenvectors.conj().T @ es.eigenvectors
        assert np.abs(gram - np.eye(50)).max() < 1e-10

    def test_spectrum_stable_under_reapplication(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((30, 30))
        a = a + a.T
        es = eigh(a.astype(complex))
        recon = (es.eigenvectors * es.eigenvalues) @ es.eigenvectors.conj().T
        es2 = eigh(recon)
        assert np.abs(es2.eigenvalues - es.eigenvalues).max() < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            eigh(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


class TestInvariants:
    def test_density_records_tail(self):
        v = coherent_vector(3.0, 40)
        rho = density_from_vector(v)
        assert rho.tail_loss < 1e-12
        assert abs(rho.trace() - 1.0) < 1e-10

    def test_fock_vector_shape_checked(self):
        with pytest.raises(ValueError):
            FockVector(np.zeros(5, dtype=complex), cutoff=5, modes=1)

    def test_amplitudes_frozen(self):
        v = coherent_vector(1.0, 30)
        with pytest.raises(ValueError):
            v.amplitudes[0] = 0.0
