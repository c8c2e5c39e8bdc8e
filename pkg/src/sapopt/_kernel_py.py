"""Pure-numpy split-operator stepping loop (fallback backend).

Same contract as the compiled kernel in ``_kernel_cy``: Strang splitting
exp(-i V dt/2) . exp(-i K dt) . exp(-i V dt/2) with the potential sampled
at the midpoint of each step and rebuilt from the triple-Gaussian controls,
and (in GPE mode) the density recomputed in each potential half step.
"""
import numpy as np

BACKEND = "python"


def run_triple_well_real_time(psi0, gauss_center, x, kin_phase, inv_2w2,
                              c_v, c_g, d_m1, d_p1, v_m1, v_p1,
                              stride, dx, edge_cells, out_states, out_edge):
    """Propagate ``psi0`` through len(d_m1) steps, sampling every ``stride``.

    Parameters are pre-scaled phases: ``c_v = V0 dt/(2 hbar)``,
    ``c_g = g1D N dt/(2 hbar)``; ``kin_phase = exp(-i hbar k^2 dt/(2m))``.
    ``out_states[s]`` receives the state after s*stride steps (s=0 is the
    initial state); ``out_edge[s]`` the probability in the outermost cells.
    """
    n_steps = d_m1.shape[0]
    psi = psi0.astype(np.complex128, copy=True)

    def record(s):
        out_states[s] = psi
        dens = np.abs(psi) ** 2
        out_edge[s] = (dens[:edge_cells].sum() + dens[-edge_cells:].sum()) * dx
    record(0)

    for j in range(n_steps):
        dips = (v_m1[j] * np.exp(-(x + d_m1[j]) ** 2 * inv_2w2)
                + gauss_center
                + v_p1[j] * np.exp(-(x - d_p1[j]) ** 2 * inv_2w2))
        vphase = c_v * (1.0 - dips)
        if c_g != 0.0:
            psi *= np.exp(-1j * (vphase + c_g * np.abs(psi) ** 2))
        else:
            psi *= np.exp(-1j * vphase)
        psi = np.fft.ifft(kin_phase * np.fft.fft(psi))
        if c_g != 0.0:
            psi *= np.exp(-1j * (vphase + c_g * np.abs(psi) ** 2))
        else:
            psi *= np.exp(-1j * vphase)
        if (j + 1) % stride == 0:
            record((j + 1) // stride)
    return psi
