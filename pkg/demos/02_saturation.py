"""Ramsey readout reaches the quantum Fisher information near zero phase.

With a real orthogonal splitter U and combiner U^T, the classical Fisher
matrix of population counting converges to the quantum one as theta -> 0.
A complex splitter with its adjoint as combiner does not.
"""

import numpy as np

import multiramsey as mr

D = 4
U = mr.random_orthogonal(D + 1, seed=3)
proto = mr.ramsey(U, 0, mr.make_parametrization("theta_ref", D))
Q = mr.qfim_pure(proto.probe, proto.map).entries

u = np.random.default_rng(0).normal(size=D)
u /= np.linalg.norm(u)
print("real splitter")
for eps in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5):
    C = mr.cfim(proto, eps * u, floor=0.0).entries
    print(f"  |theta| = {eps:.0e}   max-rel |C - Q| = {np.abs(C - Q).max() / np.abs(Q).max():.3e}")

V = mr.random_unitary(D + 1, seed=0)
cproto = mr.RamseyProtocol(V, V.conj().T, 0, proto.map)
Qc = mr.qfim_pure(cproto.probe, cproto.map).entries
C = mr.cfim(cproto, 1e-6 * u, floor=0.0).entries
print(f"complex splitter at |theta| = 1e-6: max-rel |C - Q| = {np.abs(C - Qc).max() / np.abs(Qc).max():.3f}")
