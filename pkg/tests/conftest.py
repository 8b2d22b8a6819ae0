import math

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

N = 300
SIGMA0 = 1e-5
SIGMA1 = 1e-5 * (1.0 + 10.0 ** -0.5)  # -5 dB legitimate SNR
SIGMA2_IU = 1e-5 * (1.0 + 10.0 ** -0.3)  # -3 dB misuse power, misuse-only variance


@pytest.fixture
def scene_args():
    return dict(n=N, sigma0_sq=SIGMA0, sigma1_sq=SIGMA1)


def rel_close(a, b, rtol):
    return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)
