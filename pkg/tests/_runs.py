"""Cached flow runs shared by several test modules."""

from functools import lru_cache

from pinchflow.flow import FlowConfig, InitialProfile, StopConfig, run
from pinchflow.geometry import Ambient

E, H = Ambient.EUCLIDEAN, Ambient.HYPERBOLIC

SWEEP = [(eps, k, p) for eps in (0.02, 0.05) for k in (2, 3) for p in (1.5, 2.0, 3.0)]
# hyperbolic sweep radius: small enough that the perturbed surfaces start pinched
HYPERBOLIC_SWEEP_R0 = 0.2
# Euclidean sweep stops slightly past 10 r0 so the reference radius grows 10x
EUCLID_SWEEP_STOP = 10.5


@lru_cache(maxsize=None)
def euclid_sphere(n_theta=64):
    return run(FlowConfig(n_theta=n_theta, initial=InitialProfile.sphere(1.0),
                          stop=StopConfig(u_max_stop=10.0)))


@lru_cache(maxsize=None)
def hyperbolic_sphere(n_theta=64):
    return run(FlowConfig(ambient=H, n_theta=n_theta, initial=InitialProfile.sphere(1.0),
                          stop=StopConfig(t_end=40.0)))


@lru_cache(maxsize=None)
def euclid_perturbed(p=2.0, eps=0.05, k=2, r0=1.0, u_stop=10.0):
    return run(FlowConfig(p=p, initial=InitialProfile.perturbed(r0, eps, k),
                          stop=StopConfig(u_max_stop=u_stop * r0)))


@lru_cache(maxsize=None)
def hyperbolic_perturbed(p=2.0, eps=0.05, k=2, r0=1.0, t_end=40.0):
    return run(FlowConfig(ambient=H, p=p, initial=InitialProfile.perturbed(r0, eps, k),
                          stop=StopConfig(t_end=t_end)))
