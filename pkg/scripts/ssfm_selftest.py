#!/usr/bin/env python3
"""Standalone: split-step solver self-test (plane wave, power drift, time reversal)."""
import sys, os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import logging
logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(levelname)s] %(name)s - %(message)s")

from analyzers.spectral_check import self_test

LIMITS = {"plane_wave_error": 1e-8, "power_drift_per_z": 1e-10, "time_reversal_error": 1e-7}

if __name__ == "__main__":
    failed = 0
    for a in (1.0, -1.0):
        result = self_test(a=a, dz=1e-3, z_span=1.0, n_modes=64)
        for key, limit in LIMITS.items():
            ok = result[key] <= limit
            failed += not ok
            logging.info("a=%+.0f %-20s %.3e %s", a, key, result[key], "ok" if ok else "FAILED")
    sys.exit(1 if failed else 0)
