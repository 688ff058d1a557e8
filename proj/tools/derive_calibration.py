#!/usr/bin/env python3
"""Derive the shipped default calibration.

The physical parameters of the reference test bench are not available, only
the identified nominal process

    P_nom(s) = e^{-0.03 s} * 8.255e5 / (s (s^2 + 948 s + 2.219e6)).

Four magnitudes are fixed (supply pressure, piston area, moving mass, bulk
modulus); the remaining three (oil volume, viscous coefficient, valve flow
coefficient) are solved so that the nominal transfer function built from the
integral-mean linearization gains reproduces the three coefficients exactly.
The friction curve is scaled so that its least-squares line through the
origin over [0, v_max] equals the solved viscous coefficient.

Run:  python3 tools/derive_calibration.py > data/default_calibration.json
"""
import json
import math

import numpy as np

NUM = 8.255e5      # k * wn^2
DAMP = 948.0       # 2 xi wn
WN2 = 2.219e6      # wn^2
TAU_NOM = 0.03
TAU_MAX = 0.11

P_S = 1.0e7        # Pa
A_BAR = 2.0e-3     # m^2
MASS = 4.0         # kg
E_BULK = 1.4e9     # Pa
DEADZONE = 0.05
V_MAX = 0.25       # m/s
RES = 401
PL_FRAC = 0.95


def simpson_weights(n, a, b):
    h = (b - a) / (n - 1)
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def unit_means():
    """Integral means of C_q and C_qp for K = 1 and sqrt(P_S/2) = 1."""
    z = np.linspace(-1.0, 1.0, RES)
    p = np.linspace(-PL_FRAC, PL_FRAC, RES)
    wz = simpson_weights(RES, -1.0, 1.0)
    wp = simpson_weights(RES, -PL_FRAC, PL_FRAC)
    Z, P = np.meshgrid(z, p, indexing="ij")
    root = np.sqrt(1.0 - np.sign(Z) * P)
    cq = root
    cqp = np.abs(Z) / (4.0 * root)
    area = 2.0 * 2.0 * PL_FRAC
    return wz @ cq @ wp / area, wz @ cqp @ wp / area


def main():
    c1, c2 = unit_means()
    s = math.sqrt(P_S / 2.0)
    # leakage share of the damping term: m * 4E Cqp / (m V_t) with
    # Cq = (c1/c2) s^2 Cqp and 4E Cq A / (m V_t) = NUM
    leak = MASS * NUM * c2 / (c1 * s * s * A_BAR)
    sigma = MASS * (DAMP - leak)
    a4 = (WN2 - (DAMP - leak) * leak) / A_BAR ** 2     # 4E / (m V_t)
    v_t = 4.0 * E_BULK / (MASS * a4)
    cqp_nom = leak / (a4 * MASS)
    k_flow = cqp_nom * s / c2

    # Stribeck shape; viscous part solved so the LS line hits sigma
    f_c, f_s, v_s, delta = 300.0, 450.0, 0.02, 2.0
    v = np.linspace(0.0, V_MAX, 100001)
    wv = simpson_weights(v.size, 0.0, V_MAX)
    stribeck = f_c + (f_s - f_c) * np.exp(-np.abs(v / v_s) ** delta)
    stribeck[0] = 0.0
    sigma_v = sigma - (wv @ (stribeck * v)) / (V_MAX ** 3 / 3.0)

    doc = {
        "plant": {
            "m": MASS,
            "sigma_lin": float(f"{sigma:.10g}"),
            "V_t": float(f"{v_t:.10g}"),
            "E": E_BULK,
            "A_bar": A_BAR,
            "K": float(f"{k_flow:.10g}"),
            "P_S": P_S,
        },
        "valve": {"deadzone": DEADZONE},
        "friction": {
            "F_c": f_c,
            "F_s": f_s,
            "v_s": v_s,
            "delta": delta,
            "sigma_v": float(f"{sigma_v:.10g}"),
            "v_max": V_MAX,
        },
        "delay": {"tau_nom": TAU_NOM, "tau_max": TAU_MAX},
        "operating_range": {"pl_fraction": PL_FRAC, "resolution": RES},
        "integration": {
            "plant_dt": 0.0005,
            "stiction_velocity": 1e-5,
            "pressure_clamp": 0.98,
        },
    }
    print(json.dumps(doc, indent=2))


if __name__ == "__main__":
    main()
