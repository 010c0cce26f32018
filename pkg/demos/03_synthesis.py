"""Building the optimal probe with real optics or a single spin rotation."""

import math

import numpy as np

import multiramsey as mr

D = 3
probe = mr.optimal_probe_theta(D)
angles = mr.bs_cascade_angles(probe)
U = mr.bs_cascade_unitary(angles).entries
print("beam-splitter reflectances cos^2(eta):", np.round(np.cos(angles.etas) ** 2, 6))
print("populations delivered:", np.round(U[:, 0] ** 2, 6))
print("target:               ", np.round(probe.populations, 6))

# spin-1: a single rotation exp(-i F_y chi) from |m=0> gives the D=2 optimum
chi = math.acos(math.sqrt(math.sqrt(2) - 1))
R = mr.spin_rotation(mr.SpinRotationSpec(1, chi)).entries
print(f"\nchi = {chi / math.pi:.6f} pi")
print("spin-1 rotation matrix (rows m = +1, 0, -1):")
print(np.round(R, 6))
print("populations from |m=0>:", np.round(R[:, 1] ** 2, 6))
