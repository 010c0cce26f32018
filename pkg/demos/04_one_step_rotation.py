"""Variance bound of a single spin rotation versus rotation angle.

For each F the best initial sublevel and angle are found; F=1 touches the
optimal simultaneous bound, larger F lands between it and the individual
scheme.
"""

import math

import numpy as np

import multiramsey as mr

for F in range(1, 6):
    chi, m_i, var = mr.osrs_optimize(F, 0)
    print(
        f"F={F}  m_i={m_i:+.0f}  chi*={chi / math.pi:.4f} pi  var={var:8.4f}"
        f"   optimal {mr.qcrb_theta_opt(2 * F):8.4f}   individual {mr.qcrb_individual(2 * F):5.0f}"
    )

# a coarse look at one curve
print("\nF=2, m_i=0:")
for chi in np.linspace(0.1, 0.9, 9) * math.pi:
    try:
        v = mr.osrs_variance(mr.SpinRotationSpec(2, chi, 0, 0))
    except mr.ZeroAmplitude:
        v = math.inf
    print(f"  chi={chi / math.pi:.1f} pi  var={v:10.4f}")
