"""Nonlocal transfer of an arbitrary lattice unitary, step by step.

A pair of photons produced with anticorrelated transverse momenta shares
the entangled state sum_k |k>|-k> / sqrt(N). Driving only the signal
photon with the remapped operator U'_s(k', k) = U(-k, k') and projecting
it onto the conjugated input coefficients leaves the *idler* photon --
which never met a modulator -- in U|phi_0>, exactly, with success
probability 1/N.

This script walks through the construction for a Haar-random U and a
random input state and prints the invariants.
"""

import numpy as np

from biphoton_transfer import (
    LatticeSpec,
    ProjectionVector,
    StateVector,
    apply_signal_unitary,
    construct_transfer_unitary,
    fidelity,
    make_correlated_state,
    project_signal,
    random_unitary,
    transfer_general,
)

N = 15
lattice = LatticeSpec(N, dims=1, lambda_x=1.0 / 7.0)
print(f"lattice: {N} momentum modes, k = -{lattice.half_span}..{lattice.half_span}")

# 1. the entangled resource
psi = make_correlated_state(lattice)
print(f"correlated pair prepared, norm = {psi.norm:.12f}")

# 2. the operator to transfer, and a random input for it to act on
u_op = random_unitary(lattice, seed=42)
rng = np.random.default_rng(7)
phi0 = StateVector(
    lattice, rng.standard_normal(N) + 1j * rng.standard_normal(N)).normalized()

# 3. remap U onto the signal arm: U'_s(k', k) = U(-k, k')
us = construct_transfer_unitary(u_op)
steered = apply_signal_unitary(psi, us)

# 4. project the signal photon on A(k') = C(k')*
chi = ProjectionVector(lattice, phi0.amplitudes.conj())
outcome = project_signal(steered, chi)

direct = StateVector(lattice, u_op.apply(phi0.amplitudes)).normalized()
print(f"idler vs direct U|phi0> fidelity : {fidelity(outcome.idler_state, direct):.14f}")
print(f"success probability              : {outcome.success_probability:.6f}"
      f"  (1/N = {1.0 / N:.6f})")

# the one-call version does the same thing
res = transfer_general(u_op, phi0)
print(f"transfer_general fidelity        : {res.fidelity_vs_direct:.14f}")
