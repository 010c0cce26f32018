"""Monte-Carlo estimation with the spin-1 protocol, with and without
detection noise, compared with the Cramer-Rao bound of ideal counting."""

import math

import multiramsey as mr

proto = mr.osrs_protocol(mr.SpinRotationSpec(1, 0.2774 * math.pi, 0, 0))
truth = (0.3 * math.pi, 0.3 * math.pi)
atoms = 10_000

crb = mr.qcrb_total_variance(mr.cfim(proto, truth, atoms))
print(f"CRB of ideal counting: {crb:.3e} rad^2, zeta = {mr.zeta_db(crb, mr.qcrb_individual(2, atoms)):.3f} dB")

for sigma in (0.0, 14.0):
    cfg = mr.ExperimentConfig(proto, truth, mr.DetectionModel(sigma, atoms), runs=1000, seed=7)
    est = mr.run_monte_carlo(cfg)
    print(
        f"sigma={sigma:4.1f}: MSE {est.total_variance:.3e} rad^2, "
        f"zeta = {est.zeta_db:.3f} +- {est.zeta_std_error_db:.3f} dB"
    )
