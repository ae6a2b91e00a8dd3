import math

import numpy as np
import pytest

from phasespin import (
    EvolutionError,
    PhaseGrid,
    SymbolField,
    WignerField,
    hamilton_symbol,
    matrix_to_symbol,
    Matrix2,
)
from phasespin.star import (
    Trajectory,
    evolve,
    moyal_bracket,
    moyal_bracket_hamiltonian,
    star,
    star_apply_hamiltonian,
    star_continuous,
    star_discrete,
    star_discrete_direct,
    star_eigen_residual,
)
from phasespin.distributions import sample_distributional
from phasespin.scattering import free_eigenstate_dirac, free_eigenstate_nonrel

from oracles import brute_star

GRID = PhaseGrid(-10, 10, 256, -8, 8, 256)
P, X = np.meshgrid(GRID.p, GRID.x, indexing="ij")


def gauss(x0=0.0, p0=0.0, sx=1.0, sp=1.0, amp=1.0):
    return amp * np.exp(-(X - x0) ** 2 / (2 * sx ** 2) - (P - p0) ** 2 / (2 * sp ** 2))


def rand_sym(rng, n_lobes=3):
    out = np.zeros_like(P, dtype=complex)
    for _ in range(n_lobes):
        out += gauss(rng.uniform(-2, 2), rng.uniform(-1.5, 1.5),
                     rng.uniform(0.7, 1.2), rng.uniform(0.7, 1.2),
                     rng.normal() + 1j * rng.normal())
    return out


class TestDiscreteStar:
    def test_unit_symbol(self):
        g = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
        assert np.array_equal(star_discrete(np.ones((2, 2)), g), g)
        assert np.array_equal(star_discrete(g, np.ones((2, 2))), g)

    def test_pauli_product(self):
        sx = Matrix2(np.array([[0, 1], [1, 0]], dtype=complex))
        sz = Matrix2(np.array([[1, 0], [0, -1]], dtype=complex))
        got = star_discrete(matrix_to_symbol(sx), matrix_to_symbol(sz))
        want = matrix_to_symbol(Matrix2(sx.a @ sz.a))
        assert np.array_equal(got, want)

    def test_matrix_route_equals_direct_sum_on_basis_pairs(self):
        basis = []
        for m in (0, 1):
            for n in (0, 1):
                for phase in (1.0, 1.0j, -1.0, -1.0j):
                    e = np.zeros((2, 2), dtype=complex)
                    e[m, n] = phase
                    basis.append(e)
        for f in basis:
            for g in basis:
                assert np.array_equal(star_discrete(f, g),
                                      star_discrete_direct(f, g))

    def test_random_pairs_against_direct_sum(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            f = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            assert np.max(np.abs(star_discrete(f, g)
                                 - star_discrete_direct(f, g))) < 1e-12


class TestContinuousStar:
    def test_unit_element(self):
        g = gauss(0.5, -0.5)
        one = np.ones_like(g)
        assert np.max(np.abs(star_continuous(one, g, GRID) - g)) < 1e-10
        assert np.max(np.abs(star_continuous(g, one, GRID) - g)) < 1e-10

    def test_windowed_linear_symbols(self):
        # x * p = x p + i hbar / 2 inside a wide window, away from its edges
        sw = 2.5
        w = np.exp(-(X ** 2 + P ** 2) / (2 * sw ** 2))
        got = star_continuous(X * w, P * w, GRID)
        box = (np.abs(X) < 0.4) & (np.abs(P) < 0.4)
        want = (X * P + 0.5j * GRID.hbar) * w ** 2
        assert np.max(np.abs((got - want)[box])) < 1.5e-2
        # the imaginary part at the window centre is hbar/2 up to the
        # window's own third-derivative correction
        ip, ix = np.argmin(np.abs(GRID.p)), np.argmin(np.abs(GRID.x))
        assert got[ip, ix].imag == pytest.approx(0.5, abs=7e-3)

    def test_projector_identity_on_gaussian(self):
        s = 1.3
        w0 = (1 / np.pi) * np.exp(-(X + 0.5) ** 2 / s ** 2 - s ** 2 * (P - 0.8) ** 2)
        got = star_continuous(w0, w0, GRID)
        assert np.max(np.abs(got - w0 / (2 * np.pi))) < 1e-12

    def test_gaussians_against_brute_oracle(self):
        grid = PhaseGrid(-6, 6, 48, -4, 4, 48)
        p, x = np.meshgrid(grid.p, grid.x, indexing="ij")
        f = np.exp(-x ** 2 - 0.8 * (p - 0.3) ** 2) * (1 + 0.2j)
        g = np.exp(-0.7 * (x + 0.4) ** 2 - (p + 0.2) ** 2)
        got = star_continuous(f, g, grid)
        want = brute_star(f, g, grid)
        scale = np.max(np.abs(want))
        assert np.max(np.abs(got - want)) < 1e-6 * scale

    def test_associativity(self):
        rng = np.random.default_rng(7)
        f, g, h = (rand_sym(rng) for _ in range(3))
        lhs = star_continuous(star_continuous(f, g, GRID), h, GRID)
        rhs = star_continuous(f, star_continuous(g, h, GRID), GRID)
        rel = np.sqrt(np.sum(np.abs(lhs - rhs) ** 2) / np.sum(np.abs(lhs) ** 2))
        assert rel < 1e-8

    def test_conjugation_involution(self):
        rng = np.random.default_rng(9)
        f, g = rand_sym(rng), rand_sym(rng)
        lhs = np.conj(star_continuous(f, g, GRID))
        rhs = star_continuous(np.conj(g), np.conj(f), GRID)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_requires_symmetric_momentum_range(self):
        skew = PhaseGrid(-10, 10, 64, -2, 6, 64)
        with pytest.raises(ValueError):
            star_continuous(np.ones((64, 64)), np.ones((64, 64)), skew)


class TestFullStar:
    def field(self, rng, spatially_constant=False, internally_constant=False):
        vals = np.empty((2, 2, GRID.n_p, GRID.n_x), dtype=complex)
        base = rand_sym(rng)
        for m in (0, 1):
            for n in (0, 1):
                if internally_constant:
                    vals[m, n] = base
                elif spatially_constant:
                    vals[m, n] = rng.normal() + 1j * rng.normal()
                else:
                    vals[m, n] = rand_sym(rng, 2)
        return SymbolField(GRID, vals)

    def test_spatially_constant_reduces_to_discrete_star(self):
        rng = np.random.default_rng(21)
        f = self.field(rng, spatially_constant=True)
        g = self.field(rng, spatially_constant=True)
        got = star(f, g)
        want = star_discrete(f.values[:, :, 0, 0], g.values[:, :, 0, 0])
        for m in (0, 1):
            for n in (0, 1):
                assert np.max(np.abs(got.values[m, n] - want[m, n])) < 1e-9

    def test_internally_constant_reduces_to_continuous_star(self):
        rng = np.random.default_rng(23)
        f = self.field(rng, internally_constant=True)
        g = self.field(rng, internally_constant=True)
        got = star(f, g)
        want = star_continuous(f.values[0, 0], g.values[0, 0], GRID)
        for m in (0, 1):
            for n in (0, 1):
                assert np.max(np.abs(got.values[m, n] - want)) < 1e-9

    def test_hamiltonian_cross_route(self):
        rng = np.random.default_rng(25)
        w = self.field(rng)
        h = hamilton_symbol("dirac", mass=1.0, c=1.0)
        diff_route = star_apply_hamiltonian(h, w, "left")
        hvals = np.empty_like(w.values)
        for m in (0, 1):
            for n in (0, 1):
                hvals[m, n] = h.evaluate(P, X)[m, n]
        fft_route = star(SymbolField(GRID, hvals), w)
        rel = (fft_route - diff_route).l2_norm() / diff_route.l2_norm()
        assert rel < 1e-8

    def test_right_application_cross_route(self):
        rng = np.random.default_rng(27)
        w = self.field(rng)
        h = hamilton_symbol("nonrel", mass=1.0)
        diff_route = star_apply_hamiltonian(h, w, "right")
        hvals = np.broadcast_to(P * P / 2.0, w.values.shape).astype(complex).copy()
        fft_route = star(w, SymbolField(GRID, hvals))
        rel = (fft_route - diff_route).l2_norm() / diff_route.l2_norm()
        assert rel < 1e-8


class TestMoyalBracket:
    def test_antisymmetry_zero_on_self(self):
        rng = np.random.default_rng(31)
        vals = np.empty((2, 2, GRID.n_p, GRID.n_x), dtype=complex)
        for m in (0, 1):
            for n in (0, 1):
                vals[m, n] = rand_sym(rng, 2)
        f = SymbolField(GRID, vals)
        br = moyal_bracket(f, f)
        assert np.max(np.abs(br.values)) < 1e-10

    def test_real_for_real_inputs(self):
        rng = np.random.default_rng(33)
        fv = np.empty((2, 2, GRID.n_p, GRID.n_x), dtype=complex)
        gv = np.empty_like(fv)
        for m in (0, 1):
            for n in (0, 1):
                fv[m, n] = rand_sym(rng, 2).real
                gv[m, n] = rand_sym(rng, 2).real
        br = moyal_bracket(SymbolField(GRID, fv), SymbolField(GRID, gv))
        assert np.max(np.abs(br.values.imag)) < 1e-10 * np.max(np.abs(br.values.real))

    def test_free_kinetic_bracket_is_classical_transport(self):
        # {p^2/2M, W} = -(p/M) dW/dx for internally constant W: all hbar
        # corrections cancel for quadratic symbols
        rng = np.random.default_rng(35)
        base = rand_sym(rng).real
        vals = np.broadcast_to(base, (2, 2, GRID.n_p, GRID.n_x)).astype(complex).copy()
        w = SymbolField(GRID, vals)
        h = hamilton_symbol("nonrel", mass=1.0)
        got = moyal_bracket_hamiltonian(w, h)  # {W, H}
        k = 2 * np.pi * np.fft.fftfreq(GRID.n_x, GRID.dx)
        dwdx = np.fft.ifft(np.fft.fft(base, axis=-1) * 1j * k, axis=-1)
        want = (P / 1.0) * dwdx
        assert np.max(np.abs(got.values[0, 0] - want)) < 1e-10

    def test_eigenstate_commutes_with_hamiltonian(self):
        free = free_eigenstate_nonrel(1.0, "up")
        grid = PhaseGrid(-2, 2, 32, -4, 4, 512)
        field = sample_distributional(free.wigner, grid, sigma_p=0.08)
        h = hamilton_symbol("nonrel", mass=1.0)
        br = moyal_bracket_hamiltonian(SymbolField.from_wigner(field), h)
        scale = np.max(np.abs(field.values))
        assert np.max(np.abs(br.values)) < 1e-10 * scale


class TestEvolution:
    def test_free_packet_transport(self):
        grid = PhaseGrid(-10, 10, 128, -6, 6, 128)
        p, x = np.meshgrid(grid.p, grid.x, indexing="ij")
        x0, p0, sig = -2.0, 1.5, 1.0
        packet = (1 / np.pi) * np.exp(-(x - x0) ** 2 / sig ** 2 - sig ** 2 * (p - p0) ** 2)
        vals = np.zeros((2, 2, grid.n_p, grid.n_x))
        vals[0, 1] = packet
        w0 = WignerField(grid, vals)
        h = hamilton_symbol("nonrel", mass=1.0)
        traj = evolve(w0, h, 1.0, 0.4 * grid.dx / 6.0, sample_times=[1.0])
        end = traj.fields[-1].values[0, 1]
        want = (1 / np.pi) * np.exp(-(x - x0 - p * 1.0) ** 2 / sig ** 2
                                    - sig ** 2 * (p - p0) ** 2)
        assert np.max(np.abs(end - want)) < 1e-7
        assert abs(traj.norms[-1] - traj.norms[0]) < 1e-12

    def test_x_independent_state_is_stationary(self):
        grid = PhaseGrid(-5, 5, 64, -6, 6, 128)
        p, x = np.meshgrid(grid.p, grid.x, indexing="ij")
        vals = np.zeros((2, 2, grid.n_p, grid.n_x))
        vals[1, 0] = np.exp(-(p - 1.0) ** 2)
        w0 = WignerField(grid, vals)
        h = hamilton_symbol("nonrel", mass=1.0)
        traj = evolve(w0, h, 0.5, 0.4 * grid.dx / 6.0, sample_times=[0.5])
        assert np.max(np.abs(traj.fields[-1].values - vals)) < 1e-12

    def test_norm_conservation_long_run(self):
        grid = PhaseGrid(-8, 8, 96, -6, 6, 96)
        p, x = np.meshgrid(grid.p, grid.x, indexing="ij")
        vals = np.zeros((2, 2, grid.n_p, grid.n_x))
        vals[0, 1] = (1 / np.pi) * np.exp(-x ** 2 - (p - 1.0) ** 2)
        w0 = WignerField(grid, vals)
        h = hamilton_symbol("nonrel", mass=1.0)
        dt = 0.75 * grid.dx / 6.0
        traj = evolve(w0, h, 1000 * dt, dt, sample_times=[1000 * dt])
        assert abs(traj.norms[-1] - traj.norms[0]) < 1e-6

    def test_cfl_guard(self):
        grid = PhaseGrid(-5, 5, 64, -6, 6, 64)
        vals = np.zeros((2, 2, grid.n_p, grid.n_x))
        w0 = WignerField(grid, vals)
        h = hamilton_symbol("nonrel", mass=1.0)
        with pytest.raises(ValueError):
            evolve(w0, h, 1.0, 10.0 * grid.dx / 6.0)
        with pytest.raises(ValueError):
            evolve(w0, h, 1.0, -0.1)

    def test_nonfinite_detection_carries_step_index(self):
        grid = PhaseGrid(-5, 5, 64, -6, 6, 64)
        p, x = np.meshgrid(grid.p, grid.x, indexing="ij")
        vals = np.zeros((2, 2, grid.n_p, grid.n_x))
        vals[0, 1] = np.exp(-x ** 2 - p ** 2)
        w0 = WignerField(grid, vals)
        bad = hamilton_symbol("nonrel", mass=1.0, v00=1.0, v11=1.0,
                              potential=lambda xx: 1.0 / (xx - 1e9 * (np.abs(xx) < 1e-3)))
        with pytest.raises(EvolutionError) as err:
            evolve(w0, bad, 0.2, 0.4 * grid.dx / 6.0)
        assert err.value.step_index >= 1


class TestEigenResidual:
    def smeared(self, mode, sigma, momentum=0.9):
        if mode == "nonrel":
            free = free_eigenstate_nonrel(momentum, "up")
            h = hamilton_symbol("nonrel", mass=1.0)
        else:
            free = free_eigenstate_dirac(momentum, "particle")
            h = hamilton_symbol("dirac", mass=1.0, c=1.0)
        grid = PhaseGrid(-1, 1, 16, -4, 4, 1024)
        field = sample_distributional(free.wigner, grid, sigma)
        return h, SymbolField.from_wigner(field), free.energy

    @pytest.mark.parametrize("mode", ["nonrel", "dirac"])
    def test_residual_decreases_linearly_with_smearing(self, mode):
        sigmas = [0.4, 0.2, 0.1, 0.05]
        residuals = []
        for sig in sigmas:
            h, w, energy = self.smeared(mode, sig)
            residuals.append(star_eigen_residual(h, w, energy).total / w.l2_norm())
        for r_next, r_prev in zip(residuals[1:], residuals[:-1]):
            assert r_next < r_prev
        # roughly first-order in the smearing width
        slope = np.polyfit(np.log(sigmas), np.log(residuals), 1)[0]
        assert 0.7 < slope < 1.4

    def test_wrong_energy_gives_affine_offset(self):
        h, w, energy = self.smeared("nonrel", 0.1)
        eps = 0.3
        base = star_eigen_residual(h, w, energy)
        off = star_eigen_residual(h, w, energy + eps)
        assert off.residual == pytest.approx(
            math.hypot(base.residual, eps * w.l2_norm()), rel=1e-3)
