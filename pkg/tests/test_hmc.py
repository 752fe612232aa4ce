"""HMC: Hamiltonian arithmetic, leapfrog properties, chains, step-size tuning."""

import math

import numpy as np
import pytest
from scipy import stats

from tailprob.densities import truncated_normal
from tailprob.hmc import (
    HmcParams,
    PhasePoint,
    hamiltonian,
    hmc_step,
    leapfrog,
    run_hmc_chain,
    tune_step_size,
)
from tailprob.metropolis import ProposalSpec, ProposalTuningWarning, run_chain


class FlatPotential:
    """Free particle: U = 0 on all of the real line."""

    def log_gprime_at(self, q):
        return 0.0

    def grad_log_gprime_at(self, q):
        return 0.0

    def in_support(self, q):
        return True


class HarmonicPotential:
    """U(q) = q^2 / 2, i.e. log g'(q) = -q^2 / 2, unbounded support."""

    def log_gprime_at(self, q):
        return -0.5 * q * q

    def grad_log_gprime_at(self, q):
        return -q

    def in_support(self, q):
        return True


class ConstantPotential:
    """U(q) = 1 everywhere."""

    def log_gprime_at(self, q):
        return -1.0

    def grad_log_gprime_at(self, q):
        return 0.0

    def in_support(self, q):
        return True


def truncated_cdf(mu, sigma, x_t):
    tail = stats.norm.sf(x_t, mu, sigma)

    def cdf(x):
        return np.clip((tail - stats.norm.sf(x, mu, sigma)) / tail, 0.0, 1.0)

    return cdf


class TestHmcParams:
    def test_step_count_rounds_trajectory_length(self):
        assert HmcParams(0.1, 1.0).n_steps == 10
        assert HmcParams(0.5, 5.0).n_steps == 10

    def test_step_count_is_at_least_one(self):
        assert HmcParams(0.3, 0.1).n_steps == 1

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            HmcParams(0.0, 1.0)
        with pytest.raises(ValueError):
            HmcParams(0.1, -1.0)
        with pytest.raises(ValueError):
            HmcParams(0.1, 1.0, mass=0.0)


class TestHamiltonian:
    def test_zero_momentum_at_mode(self):
        # H = -log phi(0) for the standard Normal with the threshold far left
        d = truncated_normal(0.0, 1.0, -10.0)
        h = hamiltonian(d, PhasePoint(0.0, 0.0), HmcParams(0.1, 1.0))
        assert h == pytest.approx(0.918939, abs=1e-6)

    def test_forbidden_region_is_infinite(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        assert hamiltonian(d, PhasePoint(14.0, 1.0), HmcParams(0.1, 1.0)) == math.inf

    def test_kinetic_plus_potential_arithmetic(self):
        # p^2/(2m) + U = 4/4 + 1 = 2
        h = hamiltonian(
            ConstantPotential(), PhasePoint(0.0, 2.0), HmcParams(0.1, 1.0, mass=2.0)
        )
        assert h == 2.0

    def test_divergent_point_is_infinite(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        pt = PhasePoint(16.0, 0.0, divergent=True)
        assert hamiltonian(d, pt, HmcParams(0.1, 1.0)) == math.inf


class TestLeapfrog:
    def test_free_particle_drifts_linearly(self):
        params = HmcParams(0.1, 0.5, mass=1.0)  # 5 steps
        out = leapfrog(FlatPotential(), PhasePoint(1.3, 0.7), params)
        assert out.p == 0.7
        assert out.q == pytest.approx(1.3 + 5 * 0.1 * 0.7, abs=1e-12)
        assert not out.divergent

    def test_free_particle_mass_scales_drift(self):
        params = HmcParams(0.1, 0.5, mass=2.0)
        out = leapfrog(FlatPotential(), PhasePoint(0.0, 1.0), params)
        assert out.q == pytest.approx(5 * 0.1 * 1.0 / 2.0, abs=1e-12)

    def test_harmonic_single_step_by_hand(self):
        # p_half = -0.05, q' = 0.995, p' = -0.05 - 0.05 * 0.995 = -0.09975
        params = HmcParams(0.1, 0.1, mass=1.0)
        out = leapfrog(HarmonicPotential(), PhasePoint(1.0, 0.0), params)
        assert out.q == pytest.approx(0.995, abs=1e-15)
        assert out.p == pytest.approx(-0.09975, abs=1e-15)

    def test_reversibility_over_random_draws(self):
        rng = np.random.default_rng(17)
        worst = 0.0
        d = HarmonicPotential()
        for _ in range(1000):
            q = float(rng.normal(0.0, 2.0))
            p = float(rng.normal(0.0, 2.0))
            eps = float(rng.uniform(0.01, 0.3))
            n_steps = int(rng.integers(1, 51))
            params = HmcParams(eps, eps * n_steps)
            fwd = leapfrog(d, PhasePoint(q, p), params)
            back = leapfrog(d, PhasePoint(fwd.q, -fwd.p), params)
            worst = max(worst, abs(back.q - q), abs(-back.p - p))
        assert worst <= 1e-10

    def test_exit_below_threshold_marks_divergent(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        out = leapfrog(d, PhasePoint(15.05, -2.0), HmcParams(1.0, 1.0))
        assert out.divergent

    def test_start_outside_support_marks_divergent(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        out = leapfrog(d, PhasePoint(14.0, 1.0), HmcParams(0.1, 1.0))
        assert out.divergent


class TestVolumePreservation:
    @pytest.mark.parametrize("n_steps", [1, 3])
    def test_jacobian_determinant_is_unity(self, n_steps):
        d = HarmonicPotential()
        eps = 0.1
        params = HmcParams(eps, eps * n_steps)
        h = 1e-5
        for q0, p0 in [(1.0, 0.5), (-0.3, 1.2), (2.0, -1.0)]:

            def flow(q, p):
                out = leapfrog(d, PhasePoint(q, p), params)
                return out.q, out.p

            qp, pp = flow(q0 + h, p0)
            qm, pm = flow(q0 - h, p0)
            j_qq = (qp - qm) / (2 * h)
            j_pq = (pp - pm) / (2 * h)
            qp, pp = flow(q0, p0 + h)
            qm, pm = flow(q0, p0 - h)
            j_qp = (qp - qm) / (2 * h)
            j_pp = (pp - pm) / (2 * h)
            det = j_qq * j_pp - j_qp * j_pq
            assert det == pytest.approx(1.0, abs=1e-8)


class TestEnergyErrorScaling:
    def test_halving_step_quarters_energy_error(self):
        d = HarmonicPotential()

        def max_energy_drift(eps, total_time):
            params = HmcParams(eps, eps)  # single step, iterated
            pt = PhasePoint(1.0, 0.5)
            h0 = hamiltonian(d, pt, params)
            drift = 0.0
            for _ in range(int(round(total_time / eps))):
                pt = leapfrog(d, pt, params)
                drift = max(drift, abs(hamiltonian(d, pt, params) - h0))
            return drift

        coarse = max_energy_drift(0.1, total_time=2.0)
        fine = max_energy_drift(0.05, total_time=2.0)
        assert 3.5 <= coarse / fine <= 4.5


class TestHmcStep:
    def test_energy_conserving_step_always_accepts(self):
        # free particle conserves H exactly, so delta_H = 0 and alpha = 1
        rng = np.random.default_rng(5)
        d = FlatPotential()
        q = 0.0
        for _ in range(50):
            q, accepted, dh = hmc_step(d, q, HmcParams(0.1, 1.0), rng)
            assert accepted
            assert dh == 0.0

    def test_divergent_trajectory_rejects_in_place(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        params = HmcParams(1.0, 1.0)
        saw_divergence = False
        for seed in range(20):
            rng = np.random.default_rng(seed)
            q_next, accepted, dh = hmc_step(d, 15.05, params, rng)
            if math.isinf(dh):
                saw_divergence = True
                assert not accepted
                assert q_next == 15.05
        assert saw_divergence


class TestRunHmcChain:
    def test_tiny_step_single_leapfrog_accepts_everything(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        params = HmcParams(1e-8, 1e-8)
        ch = run_hmc_chain(d, params, n=2000, burn_in=0, seed=3, initial=17.0)
        assert ch.acceptance_rate > 0.999

    def test_fixed_seed_is_bit_identical(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        params = HmcParams(0.5, 5.0)
        a = run_hmc_chain(d, params, n=1000, burn_in=100, seed=8)
        b = run_hmc_chain(d, params, n=1000, burn_in=100, seed=8)
        np.testing.assert_array_equal(a.samples, b.samples)
        np.testing.assert_array_equal(a.accepted, b.accepted)

    def test_burn_in_budget_validated(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        with pytest.raises(ValueError):
            run_hmc_chain(d, HmcParams(0.5, 5.0), n=50, burn_in=50, seed=1)

    def test_four_sigma_tail_chain(self):
        # all mass sits beyond 20 and the histogram decays away from it
        d = truncated_normal(0.0, 5.0, 20.0)
        ch = run_hmc_chain(d, HmcParams(0.5, 5.0), n=10_000, burn_in=1_000, seed=12)
        kept = ch.kept()
        assert kept.mean() > 20.0
        counts, _ = np.histogram(kept, bins=np.arange(20.0, 26.0))
        assert np.all(np.diff(counts) < 0)

    def test_samples_stay_in_failure_domain(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        ch = run_hmc_chain(d, HmcParams(0.5, 5.0), n=2000, burn_in=0, seed=4)
        assert np.all(ch.samples >= 15.0)


class TestStepSizeTuning:
    def test_tuned_chain_beats_metropolis_on_ks_distance(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        params, converged = tune_step_size(
            d, HmcParams(0.5, 5.0), target_rate=0.67, seed=101
        )
        assert converged
        hmc = run_hmc_chain(d, params, n=10_000, burn_in=1_000, seed=7)
        assert 0.55 <= hmc.acceptance_rate <= 0.80
        cdf = truncated_cdf(0.0, 5.0, 15.0)
        ks_hmc = stats.kstest(hmc.kept(), cdf).statistic
        rwm = run_chain(d, ProposalSpec(4.31), n=10_000, burn_in=1_000, seed=7)
        ks_rwm = stats.kstest(rwm.kept(), cdf).statistic
        assert ks_hmc < 0.03
        assert ks_hmc < ks_rwm

    def test_step_count_is_frozen_during_tuning(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        initial = HmcParams(0.5, 5.0)
        params, _ = tune_step_size(d, initial, target_rate=0.67, seed=44)
        assert params.n_steps == initial.n_steps
        assert params.ell == pytest.approx(params.epsilon * initial.n_steps)

    def test_exhausted_budget_warns_and_flags(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        with pytest.warns(ProposalTuningWarning):
            _, converged = tune_step_size(
                d, HmcParams(0.5, 5.0), target_rate=0.67, seed=45, max_trajectories=100
            )
        assert not converged

    def test_target_rate_validated(self):
        d = truncated_normal(0.0, 5.0, 15.0)
        with pytest.raises(ValueError):
            tune_step_size(d, HmcParams(0.5, 5.0), target_rate=0.0, seed=1)
