"""Phase masks as convolution kernels, and their Bessel structure.

A periodic phase mask exp(i phi(x)) scatters each momentum mode into its
neighbours with amplitudes u_m -- the Fourier coefficients of one mask
period. For phi(x) = a sin(dk x) the Jacobi-Anger expansion gives
u_m = J_m(a), so the mode occupations are squared Bessel functions.

The induced lattice operator is the circulant built from u, and the
remapped transfer operator preserves its unitarity.
"""

import numpy as np
from scipy.special import jv

from biphoton_transfer import (
    LatticeSpec,
    check_unitarity,
    construct_transfer_unitary,
    dense_from_kernel,
    kernel_from_phase,
)
from biphoton_transfer.masks import parse_mask_terms

lattice = LatticeSpec(51, dims=1, lambda_x=1.0 / 7.0)
a = 1.9
mask = parse_mask_terms([{"fn": "sin", "amplitude": a}], lattice)
kernel = kernel_from_phase(mask)

print(f"phi(x) = {a} sin(dk x) on {lattice.modes_per_axis} modes")
print(f"truncation leakage: {kernel.leakage:.2e}")
print()
print(" m   u_m (FFT)      J_m(a)        |diff|")
for m in range(-4, 5):
    u_m = kernel.coefficient(m).real
    j_m = jv(m, a)
    print(f"{m:+d}  {u_m:+.9f}  {j_m:+.9f}  {abs(u_m - j_m):.2e}")

u_op = dense_from_kernel(kernel)
ok, dev = check_unitarity(u_op, 1e-9)
print(f"\ncirculant unitarity deviation        : {dev:.2e} ({'ok' if ok else 'FAIL'})")
ok, dev = check_unitarity(construct_transfer_unitary(u_op), 1e-9)
print(f"transfer operator unitarity deviation: {dev:.2e} ({'ok' if ok else 'FAIL'})")

# a linear ramp term is an exact one-mode displacement of the kernel
shifted = parse_mask_terms(
    [{"fn": "sin", "amplitude": a}, {"fn": "linear", "amplitude": 1}], lattice)
k_shifted = kernel_from_phase(shifted)
print(f"\nramp term shifts the kernel by one site: "
      f"max |u'_m - u_(m-1)| = "
      f"{np.max(np.abs(k_shifted.u - np.roll(kernel.u, 1))):.2e}")
