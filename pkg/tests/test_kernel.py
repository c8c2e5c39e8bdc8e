"""Backend parity: the compiled stepping loop must reproduce the
pure-numpy fallback on identical inputs (different FFT implementations,
so agreement is ~1e-12, not bitwise)."""
import math

import numpy as np
import pytest

from sapopt import kernel
from sapopt.constants import HBAR, KB
from sapopt.core import RB85, Grid1D, gaussian_state
from sapopt.potential import TrapLayout
from sapopt.pulses import SapGuessPair

HAVE_CYTHON = "cython" in kernel.available_backends()


def test_python_backend_always_available():
    assert "python" in kernel.available_backends()
    assert kernel.get_backend("python").BACKEND == "python"


def test_unknown_backend_rejected():
    from sapopt.errors import ConfigError
    with pytest.raises(ConfigError):
        kernel.get_backend("fortran")


@pytest.mark.skipif(not HAVE_CYTHON, reason="compiled kernel not built")
def test_fft_hooks_match_numpy():
    from sapopt import _kernel_cy
    rng = np.random.default_rng(7)
    for n in (16, 128, 1024, 4096):
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        scale = np.max(np.abs(np.fft.fft(a)))
        assert np.max(np.abs(_kernel_cy.fft_forward(a) - np.fft.fft(a))) \
            < 1e-12 * scale
        assert np.max(np.abs(_kernel_cy.fft_inverse(a) - np.fft.ifft(a))) \
            < 1e-12


@pytest.mark.skipif(not HAVE_CYTHON, reason="compiled kernel not built")
@pytest.mark.parametrize("g_n", [0.0, 5e-38])
def test_stepping_parity(g_n):
    mass = RB85.mass
    layout = TrapLayout(depth=KB * 86e-9, waist=0.65e-6)
    omega = layout.omega_x(mass)
    grid = Grid1D(-8e-6, 8e-6, 512)
    ell = math.sqrt(HBAR / (mass * omega))
    psi0 = gaussian_state(grid, -2.5e-6, ell)
    pair = SapGuessPair(horizon=4e-3, t_delay=0.7e-3, x0=2.5e-6,
                        dx0=1.43e-6)
    dt = 2 * np.pi / (omega * 500)
    n_steps = 800
    stride = 100
    t_mid = (np.arange(n_steps) + 0.5) * dt
    args = dict(
        gauss_center=np.exp(-grid.x ** 2 / (2 * layout.waist ** 2)),
        x=grid.x,
        kin_phase=np.exp(-1j * HBAR * grid.k ** 2 * dt / (2 * mass)),
        inv_2w2=1.0 / (2 * layout.waist ** 2),
        c_v=layout.depth * dt / (2 * HBAR),
        c_g=g_n * dt / (2 * HBAR),
        d_m1=pair.d_m1(t_mid), d_p1=pair.d_p1(t_mid),
        v_m1=np.ones(n_steps), v_p1=np.ones(n_steps),
        stride=stride, dx=grid.dx, edge_cells=2)
    outs = {}
    for name in ("python", "cython"):
        states = np.empty((n_steps // stride + 1, 512), dtype=complex)
        edge = np.empty(n_steps // stride + 1)
        kernel.get_backend(name).run_triple_well_real_time(
            psi0.amplitudes, out_states=states, out_edge=edge, **args)
        outs[name] = (states, edge)
    ds = np.max(np.abs(outs["python"][0] - outs["cython"][0]))
    de = np.max(np.abs(outs["python"][1] - outs["cython"][1]))
    assert ds < 5e-11
    assert de < 1e-13


@pytest.mark.skipif(not HAVE_CYTHON, reason="compiled kernel not built")
def test_backend_env_override(monkeypatch):
    monkeypatch.setenv("SAPOPT_KERNEL", "python")
    assert kernel.get_backend().BACKEND == "python"
    monkeypatch.setenv("SAPOPT_KERNEL", "cython")
    assert kernel.get_backend().BACKEND == "cython"
