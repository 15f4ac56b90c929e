import numpy as np
import pytest

from modcw.system import KHZ_X2PI, NVParams, Nucleus, SystemModel

A1_KHZ = (-6.71, 11.62, -17.09)
A2_KHZ = (-8.21, 23.70, -34.30)
A3_KHZ = (6.76, 19.53, -8.02)

CLUSTER_COUPLINGS_HZ = {(0, 1): -472.0, (0, 2): 14.95, (1, 2): 50.10}


def nucleus_from_khz(a_khz) -> Nucleus:
    return Nucleus(hyperfine=np.array(a_khz) * KHZ_X2PI)


@pytest.fixture(scope="session")
def fig1_system() -> SystemModel:
    return SystemModel(nv=NVParams(B_z=1.0), nuclei=(nucleus_from_khz(A1_KHZ),))


@pytest.fixture(scope="session")
def cluster_system() -> SystemModel:
    return SystemModel(
        nv=NVParams(B_z=1.0),
        nuclei=tuple(nucleus_from_khz(a) for a in (A1_KHZ, A2_KHZ, A3_KHZ)),
        couplings={k: g * 2 * np.pi for k, g in CLUSTER_COUPLINGS_HZ.items()},
    )
