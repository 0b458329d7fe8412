"""Contour construction, correction tables, and Gauss rules."""
import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.integrate

import tdse
from tdse.contour import EPS_MACH, alpert_rule, build_quadrature, gauss_legendre
from tdse.errors import ConfigError

# Bernoulli numbers B_0..B_16 (B_1 = -1/2 convention); odd ones > 1 vanish
_BERNOULLI = {0: Fraction(1), 1: Fraction(-1, 2), 2: Fraction(1, 6),
              4: Fraction(-1, 30), 6: Fraction(1, 42), 8: Fraction(-1, 30),
              10: Fraction(5, 66), 12: Fraction(-691, 2730), 14: Fraction(7, 6),
              16: Fraction(-3617, 510)}


def _bernoulli_poly(n: int, x: Fraction) -> Fraction:
    return sum(Fraction(math.comb(n, k)) * _BERNOULLI.get(k, Fraction(0))
               * x ** (n - k) for k in range(n + 1))


class TestSelectH:
    def test_frozen_value(self):
        # closed form evaluated independently: ln(1e-10 / eps_mach) / 2
        expected = math.log(1e-10 / EPS_MACH) / 2.0
        assert expected == pytest.approx(6.50890122958835, rel=1e-12)
        assert tdse.select_H(1e-10) == pytest.approx(expected, rel=1e-14)

    def test_dimension_halves(self):
        assert tdse.select_H(1e-8, d=2) == pytest.approx(tdse.select_H(1e-8, d=1) / 2)

    def test_unattainable_accuracy_rejected(self):
        with pytest.raises(ConfigError):
            tdse.select_H(EPS_MACH * 2.0, Vnorm=1.0)
        with pytest.raises(ConfigError):
            tdse.select_H(EPS_MACH * 0.5)


class TestAlpertRule:
    def test_kappa_for_p8(self):
        assert alpert_rule(8).kappa == 7

    @pytest.mark.parametrize("p", [2, 4, 8])
    def test_moment_conditions(self, p):
        # the corrections satisfy sum w x^m = B_{m+1}(kappa)/(m+1) for
        # m = 0..2p-1; checked against exact rational Bernoulli values
        rule = alpert_rule(p)
        for m in range(2 * p):
            target = _bernoulli_poly(m + 1, Fraction(rule.kappa)) / (m + 1)
            got = float(np.sum(rule.weights * rule.nodes**m))
            assert got == pytest.approx(float(target), rel=2e-13, abs=1e-13)

    def test_exp_integral_13_digits(self):
        rule = alpert_rule(8)
        val = rule.integrate(np.exp, 0.0, 1.0, 64)
        assert abs(val - (math.e - 1.0)) < 1e-14

    def test_constant_exact(self):
        # both-end-corrected rule integrates constants to the interval length
        rule = alpert_rule(8)
        val = rule.integrate(lambda x: np.ones_like(x), 0.0, 3.0, 40)
        assert val == pytest.approx(3.0, abs=1e-13)

    def test_unsupported_order(self):
        with pytest.raises(ConfigError):
            alpert_rule(3)

    def test_convergence_order_16(self):
        rule = alpert_rule(8)
        exact = 1.0 / (0.25 - 1j)

        def f(t):
            return np.exp(1j * t) * np.exp(-t / 4.0)

        errs = []
        hs = []
        for NE in (64, 128, 256):
            h = 160.0 / (NE + 2 * rule.kappa - 1)
            errs.append(abs(rule.integrate_decayed(f, 0.0, 160.0, NE) - exact))
            hs.append(h)
        slopes = [np.log(errs[i] / errs[i + 1]) / np.log(hs[i] / hs[i + 1])
                  for i in range(len(errs) - 1)]
        assert max(slopes) > 13.0


class TestGaussLegendre:
    def test_midpoint(self):
        x, w = gauss_legendre(1)
        assert x[0] == pytest.approx(0.0, abs=1e-15)
        assert w[0] == pytest.approx(2.0, rel=1e-15)

    def test_exactness_degree(self):
        x, w = gauss_legendre(4)
        # x^6 has moment 2/7; x^7 integrates to 0
        assert np.sum(w * x**6) == pytest.approx(2.0 / 7.0, rel=1e-14)
        assert np.sum(w * x**7) == pytest.approx(0.0, abs=1e-14)

    def test_gaussian_integral(self):
        x, w = gauss_legendre(16)
        exact = scipy.special_erf if False else math.erf(1.0) * math.sqrt(math.pi)
        assert np.sum(w * np.exp(-(x**2))) == pytest.approx(exact, rel=1e-14)

    def test_structure(self):
        x, w = gauss_legendre(12)
        assert np.all(np.diff(x) > 0)
        assert np.all(np.abs(x) < 1)
        assert np.all(w > 0)
        assert np.sum(w) == pytest.approx(2.0, rel=1e-14)

    def test_range_check(self):
        with pytest.raises(ConfigError):
            gauss_legendre(0)
        with pytest.raises(ConfigError):
            gauss_legendre(65)


class TestBuildQuadrature:
    def test_node_count_matches_construction(self):
        # p=4, NE=16, q=4, nr=4 gives 2*16 + 2*4 + 2*4*4 = 72 nodes
        cfg = tdse.ContourConfig(eps=1e-10, M=16, NE=16, p=4, q=4, nr=4)
        quad = build_quadrature(cfg)
        assert quad.N == 72

    def test_nr0_leaves_diagonal_empty(self):
        cfg = tdse.ContourConfig(eps=1e-10, M=16, NE=16, p=4, q=4, nr=0)
        quad = build_quadrature(cfg)
        assert quad.NC == 0
        assert quad.N == 2 * 16 + 2 * 4

    def test_nodes_on_contour(self):
        cfg = tdse.ContourConfig(eps=1e-10, M=64, NE=48, p=8, q=10, nr=2)
        quad = build_quadrature(cfg)
        H = quad.H
        for name, im in (("E1", H), ("A1", H), ("E3", -H), ("A3", -H)):
            assert np.all(np.imag(quad.block_nodes(name)) == im)
        zc = quad.block_nodes("C")
        assert np.all(np.imag(zc) == -np.real(zc))

    def test_mirror_symmetry(self):
        cfg = tdse.ContourConfig(eps=1e-10, M=64, NE=48, p=8, q=10, nr=2)
        quad = build_quadrature(cfg)
        np.testing.assert_allclose(quad.block_nodes("E1"),
                                   -quad.block_nodes("E3")[::-1], rtol=0, atol=0)
        np.testing.assert_allclose(quad.block_weights("A1"),
                                   quad.block_weights("A3")[::-1], rtol=0)

    def test_weight_sums(self):
        # diagonal block carries the (1-i) path factor; the corrected leg sums
        # to the leg length minus the mass of the dropped outer correction
        cfg = tdse.ContourConfig(eps=1e-10, M=64, NE=48, p=8, q=10, nr=2)
        quad = build_quadrature(cfg)
        leg = quad.block_weights("E3").sum() + quad.block_weights("A3").sum()
        expect = (quad.K - quad.H) - (quad.kappa - 0.5) * quad.h
        assert leg == pytest.approx(expect, rel=1e-13)
        c = quad.block_weights("C").sum()
        assert c == pytest.approx(2 * quad.H * (1 - 1j), rel=1e-13)

    def test_h_definition(self):
        cfg = tdse.ContourConfig(eps=1e-10, M=64, NE=48, p=8, q=10, nr=2)
        quad = build_quadrature(cfg)
        assert quad.h == pytest.approx((quad.K - quad.H) / (48 + 2 * 7 - 1), rel=1e-14)
        assert quad.h == pytest.approx(np.pi * 64 / (2 * (48 + 13)), rel=1e-14)

    def test_rejects_small_NE(self):
        with pytest.raises(ConfigError):
            build_quadrature(tdse.ContourConfig(eps=1e-10, M=64, NE=32, p=8, q=10, nr=2))

    def test_reconstructs_gaussian_bump(self):
        # transform of a narrow bump computed by adaptive quadrature at every
        # node; the weighted inverse sum must reproduce the bump within eps
        eps = 1e-10
        cfg = tdse.ContourConfig(eps=eps, M=64, NE=256, p=8, q=16, nr=3)
        quad = build_quadrature(cfg)

        def bump(x):
            return np.exp(-(x**2) / (2 * 0.1**2))

        fhat = np.empty(quad.N, dtype=complex)
        for i, z in enumerate(quad.nodes):
            re, _ = scipy.integrate.quad(lambda x: (np.exp(-1j * z * x) * bump(x)).real,
                                         -1, 1, limit=200, epsabs=1e-14)
            im, _ = scipy.integrate.quad(lambda x: (np.exp(-1j * z * x) * bump(x)).imag,
                                         -1, 1, limit=200, epsabs=1e-14)
            fhat[i] = re + 1j * im
        x = quad.grid
        recon = (np.exp(1j * np.outer(x, quad.nodes)) * quad.weights) @ fhat / (2 * np.pi)
        assert np.max(np.abs(recon - bump(x))) < eps


class TestQuiverRadius:
    def test_zero_field(self):
        assert tdse.quiver_radius(tdse.FieldSpec(A0=0.0, omega=1.0, T=1.0), 1.0) == 0.0

    def test_pulse_examples(self):
        # headline quiver radii of the study pulses
        r1 = tdse.quiver_radius(tdse.FieldSpec(A0=100.0, omega=100.0, T=0.5), 0.5)
        assert abs(r1 - 1.0) < 0.1
        r5 = tdse.quiver_radius(tdse.FieldSpec(A0=3500.0, omega=500.0, T=0.1), 0.1)
        assert abs(r5 - 5.0) < 0.25
