import os

import numpy as np
import pytest

from biphoton_transfer import (
    ConvolutionKernel,
    LatticeError,
    LatticeSpec,
    check_unitarity,
    construct_transfer_unitary,
    dense_from_kernel,
    kernel_from_phase,
    kernel_from_phase_2d,
    random_unitary,
)
from biphoton_transfer.lattice import negation_permutation
from biphoton_transfer.masks import (
    MaskParseError,
    PhaseMask,
    load_mask_file,
    parse_mask_terms,
)
from biphoton_transfer.unitaries import UndersampledMaskError, UnitaryOperator

from oracles import bessel_j_series, kernel_quadrature, kernel_quadrature_2d

LAM = 1.0 / 7.0
DK = 2 * np.pi / LAM


def delta_kernel(lattice, shift=0):
    u = np.zeros(lattice.shape, dtype=complex)
    pos = (shift + lattice.half_span,) * lattice.dims
    u[pos if lattice.dims == 2 else pos[0]] = 1.0
    return ConvolutionKernel(lattice, u)


class TestKernelFromPhase:
    def test_identity_mask(self):
        lat = LatticeSpec(15, 1, LAM)
        mask = parse_mask_terms([{"fn": "sin", "amplitude": 0.0}], lat)
        k = kernel_from_phase(mask)
        assert k.coefficient(0) == pytest.approx(1.0, abs=1e-12)
        off_center = np.abs(k.u).copy()
        off_center[lat.half_span] = 0.0
        assert np.max(off_center) < 1e-12

    def test_sinusoid_matches_bessel_series(self, masks_1d):
        # expected values frozen from the series oracle, not scipy/FFT
        k = kernel_from_phase(masks_1d["phi2"])
        for m in range(-6, 7):
            expect = bessel_j_series(m, 1.9) * (1j ** 0)  # real for sin masks
            assert abs(k.coefficient(m) - expect) <= 1e-8

    def test_sinusoid_occupations(self, masks_1d):
        p = kernel_from_phase(masks_1d["phi2"]).probabilities()
        m0 = masks_1d["phi2"].lattice.half_span
        assert p[m0] == pytest.approx(0.0794, abs=5e-4)       # J_0(1.9)^2
        assert p[m0 + 1] == pytest.approx(0.3382, abs=5e-4)   # J_1(1.9)^2
        assert p[m0 - 1] == pytest.approx(0.3382, abs=5e-4)

    def test_quadrature_oracle_agreement(self):
        lat = LatticeSpec(31, 1, LAM)
        for a in (1.4, 1.9, 2.8):
            mask = parse_mask_terms([{"fn": "sin", "amplitude": a}], lat)
            k = kernel_from_phase(mask)
            for m in range(-6, 7):
                expect = kernel_quadrature(lambda x: a * np.sin(DK * x), m, LAM)
                assert abs(k.coefficient(m) - expect) <= 1e-8

    def test_linear_term_is_one_site_displacement(self, masks_1d):
        k3 = kernel_from_phase(masks_1d["phi3"])
        k4 = kernel_from_phase(masks_1d["phi4"])
        assert np.allclose(k4.u, np.roll(k3.u, 1), atol=1e-12)

    def test_parseval(self, masks_1d):
        for mask in masks_1d.values():
            assert kernel_from_phase(mask).norm_sq == pytest.approx(1.0, abs=1e-9)

    def test_undersampling_guard(self):
        lat = LatticeSpec(51, 1, LAM)
        with pytest.raises(UndersampledMaskError):
            PhaseMask(lat, (), samples_per_period=64)

    def test_non_integer_linear_coefficient_rejected(self):
        with pytest.raises(MaskParseError):
            parse_mask_terms([{"fn": "linear", "amplitude": 0.5}], LatticeSpec(15, 1, LAM))


class TestKernelFromPhase2d:
    def test_identity(self):
        lat = LatticeSpec(7, 2, LAM)
        mask = parse_mask_terms([{"fn": "sin", "amplitude": 0.0}], lat)
        k = kernel_from_phase_2d(mask)
        assert k.coefficient((0, 0)) == pytest.approx(1.0, abs=1e-12)

    def test_separable_sin_sin(self, masks_2d):
        k = kernel_from_phase_2d(masks_2d["phi2"])
        for mx in range(-4, 5):
            for my in range(-4, 5):
                expect = bessel_j_series(mx, 1.4) * bessel_j_series(my, 1.4)
                assert abs(k.coefficient((mx, my)) - expect) <= 1e-8

    def test_nonseparable_parseval(self, masks_2d):
        k = kernel_from_phase_2d(masks_2d["phi1"])
        assert k.norm_sq == pytest.approx(1.0, abs=1e-9)

    def test_nonseparable_quadrature_spot_checks(self, masks_2d):
        k = kernel_from_phase_2d(masks_2d["phi1"])
        fn = lambda x, y: 2.8 * np.sin(DK * x) * np.cos(DK * y)
        for mx, my in ((0, 0), (1, 1), (2, -1), (0, 3)):
            expect = kernel_quadrature_2d(fn, mx, my, LAM)
            assert abs(k.coefficient((mx, my)) - expect) <= 1e-7

    def test_requires_2d_lattice(self, masks_1d):
        with pytest.raises(LatticeError):
            kernel_from_phase_2d(masks_1d["phi2"])


class TestDenseFromKernel:
    def test_delta_gives_identity(self):
        lat = LatticeSpec(7, 1, LAM)
        u_op = dense_from_kernel(delta_kernel(lat))
        assert np.allclose(u_op.matrix, np.eye(7))

    def test_shift_delta_gives_cyclic_shift(self):
        lat = LatticeSpec(7, 1, LAM)
        u_op = dense_from_kernel(delta_kernel(lat, shift=1))
        # U|k> = |k+1 mod N>: column k has its 1 at row k+1
        v = np.zeros(7)
        v[lat.offset(0)] = 1.0
        assert np.argmax(u_op.matrix @ v) == lat.offset(1)
        top = np.zeros(7)
        top[lat.offset(lat.half_span)] = 1.0
        assert np.argmax(u_op.matrix @ top) == lat.offset(-lat.half_span)

    def test_mask_circulants_unitary(self, masks_1d, masks_2d):
        for mask in (*masks_1d.values(), *masks_2d.values()):
            u_op = dense_from_kernel(kernel_from_phase(mask))
            ok, dev = check_unitarity(u_op, 1e-9)
            assert ok, f"deviation {dev:.2e}"

    def test_rejects_unnormalized_kernel(self):
        lat = LatticeSpec(7, 1, LAM)
        u = np.zeros(7, dtype=complex)
        u[3] = 0.5
        with pytest.raises(LatticeError):
            dense_from_kernel(ConvolutionKernel(lat, u))


class TestTransferUnitary:
    def test_identity_maps_to_anti_identity(self):
        lat = LatticeSpec(7, 1, LAM)
        u_op = UnitaryOperator(lat, np.eye(7))
        us = construct_transfer_unitary(u_op)
        assert np.allclose(us.matrix, np.eye(7)[::-1])

    def test_cyclic_shift_case(self):
        # U = cyclic shift: U'_s sends |k> to |-k-1 mod N>
        lat = LatticeSpec(7, 1, LAM)
        us = construct_transfer_unitary(dense_from_kernel(delta_kernel(lat, 1)))
        for k in lat.indices():
            out = us.matrix @ lat.basis_vector(k)
            target = (-k - 1 + lat.half_span) % 7 - lat.half_span
            assert np.argmax(np.abs(out)) == lat.offset(target)

    def test_elementwise_definition(self):
        lat = LatticeSpec(7, 1, LAM)
        u_op = random_unitary(lat, 3)
        us = construct_transfer_unitary(u_op)
        neg = negation_permutation(lat)
        for kp in range(7):
            for k in range(7):
                assert us.matrix[kp, k] == pytest.approx(u_op.matrix[neg[k], kp])

    def test_double_transfer_recovers_original(self):
        lat = LatticeSpec(9, 1, LAM)
        u_op = random_unitary(lat, 8)
        twice = construct_transfer_unitary(construct_transfer_unitary(u_op))
        neg = negation_permutation(lat)
        # U''(k',k) = U'(-k,k') = U(-k', -k): undo both negations
        recovered = twice.matrix[np.ix_(neg, neg)]
        assert np.allclose(recovered, u_op.matrix, atol=1e-12)

    def test_preserves_unitarity(self, masks_2d):
        u_op = dense_from_kernel(kernel_from_phase(masks_2d["phi2"]))
        ok, _ = check_unitarity(construct_transfer_unitary(u_op), 1e-9)
        assert ok


class TestRandomUnitary:
    def test_deterministic(self):
        lat = LatticeSpec(15, 1, LAM)
        assert np.array_equal(random_unitary(lat, 4).matrix,
                              random_unitary(lat, 4).matrix)

    def test_unitary(self):
        lat = LatticeSpec(15, 1, LAM)
        for seed in range(5):
            ok, dev = check_unitarity(random_unitary(lat, seed), 1e-10)
            assert ok, dev

    def test_seeds_differ(self):
        lat = LatticeSpec(7, 1, LAM)
        assert not np.allclose(random_unitary(lat, 0).matrix,
                               random_unitary(lat, 1).matrix)


class TestCheckUnitarity:
    def test_identity(self):
        lat = LatticeSpec(5, 1, LAM)
        ok, dev = check_unitarity(UnitaryOperator(lat, np.eye(5)), 1e-12)
        assert ok and dev == 0.0

    def test_broken_identity(self):
        lat = LatticeSpec(5, 1, LAM)
        m = np.eye(5, dtype=complex)
        m[2, 2] = 0.0
        ok, dev = check_unitarity(UnitaryOperator(lat, m), 1e-12)
        assert not ok and dev == pytest.approx(1.0)


class TestMaskFile:
    def test_load_round_trip(self, tmp_path):
        path = tmp_path / "mask.txt"
        path.write_text(
            "# 1D two-grating example\n"
            "dims 1\n"
            "lambda 0.142857142857\n"
            "modes 31\n"
            "term sin 1.3 harmonic=1 axis=x\n"
            "term cos 1.5 harmonic=2 axis=x\n"
            "term linear 1 axis=x\n"
        )
        mask = load_mask_file(path)
        assert mask.lattice.modes_per_axis == 31
        assert mask.linear_shift == (1,)
        assert len(mask.terms) == 3

    def test_product_term(self, tmp_path):
        path = tmp_path / "mask2d.txt"
        path.write_text(
            "dims 2\nlambda 0.142857\nmodes 19\n"
            "term product 2.8 sin:1:x cos:1:y\n"
        )
        mask = load_mask_file(path)
        assert mask.lattice.dims == 2
        assert len(mask.terms[0].factors) == 2

    def test_diagnostics_carry_line_numbers(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("dims 1\nlambda 0.1\nmodes 15\nterm wibble 1.0\n")
        with pytest.raises(MaskParseError, match="bad.txt:4"):
            load_mask_file(path)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("term sin 1.0\n")
        with pytest.raises(MaskParseError):
            load_mask_file(path)

    def test_1d_mask_rejects_y_axis(self):
        with pytest.raises(MaskParseError):
            parse_mask_terms([{"fn": "sin", "amplitude": 1.0, "axis": "y"}],
                             LatticeSpec(15, 1, LAM))
