# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False, language_level=3
"""Compiled split-operator stepping loop (hot kernel).

Same contract as ``_kernel_py``; the whole time loop runs in C with
in-place FFTW transforms, so a full trajectory costs a single Python call.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin

cnp.import_array()

BACKEND = "cython"

cdef extern from "fftw3.h" nogil:
    ctypedef struct fftw_plan_s
    ctypedef fftw_plan_s *fftw_plan
    ctypedef double fftw_complex[2]
    fftw_plan fftw_plan_dft_1d(int n, fftw_complex *inp, fftw_complex *out,
                               int sign, unsigned flags)
    void fftw_execute(fftw_plan plan)
    void fftw_destroy_plan(fftw_plan plan)

cdef int FFTW_FORWARD = -1
cdef int FFTW_BACKWARD = 1
cdef unsigned FFTW_ESTIMATE = 64


def fft_forward(arr):
    """Test hook: forward transform matching numpy.fft.fft."""
    a = np.array(arr, dtype=np.complex128)
    cdef double complex[::1] av = a
    cdef int n = a.shape[0]
    cdef fftw_plan plan = fftw_plan_dft_1d(
        n, <fftw_complex*> &av[0], <fftw_complex*> &av[0],
        FFTW_FORWARD, FFTW_ESTIMATE)
    fftw_execute(plan)
    fftw_destroy_plan(plan)
    return a


def fft_inverse(arr):
    """Test hook: inverse transform matching numpy.fft.ifft."""
    a = np.array(arr, dtype=np.complex128)
    cdef double complex[::1] av = a
    cdef int n = a.shape[0]
    cdef fftw_plan plan = fftw_plan_dft_1d(
        n, <fftw_complex*> &av[0], <fftw_complex*> &av[0],
        FFTW_BACKWARD, FFTW_ESTIMATE)
    fftw_execute(plan)
    fftw_destroy_plan(plan)
    a /= n
    return a


def run_triple_well_real_time(psi0, gauss_center, x, kin_phase,
                              double inv_2w2, double c_v, double c_g,
                              d_m1, d_p1, v_m1, v_p1,
                              Py_ssize_t stride, double dx,
                              Py_ssize_t edge_cells, out_states, out_edge):
    """Propagate through len(d_m1) Strang steps, sampling every ``stride``."""
    cdef Py_ssize_t n = psi0.shape[0]
    cdef Py_ssize_t n_steps = d_m1.shape[0]

    psi = psi0.astype(np.complex128, copy=True)
    kin = np.asarray(kin_phase, dtype=np.complex128) / n  # fold ifft's 1/n

    cdef double complex[::1] psiv = psi
    cdef double complex[::1] kinv = kin
    cdef const double[::1] gcv = np.ascontiguousarray(gauss_center,
                                                      dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] dm = np.ascontiguousarray(d_m1, dtype=np.float64)
    cdef const double[::1] dp = np.ascontiguousarray(d_p1, dtype=np.float64)
    cdef const double[::1] vm = np.ascontiguousarray(v_m1, dtype=np.float64)
    cdef const double[::1] vp = np.ascontiguousarray(v_p1, dtype=np.float64)
    cdef double complex[:, ::1] outs = out_states
    cdef double[::1] oedge = out_edge
    theta_buf = np.empty(n, dtype=np.float64)
    cdef double[::1] thv = theta_buf

    cdef fftw_plan plan_f = fftw_plan_dft_1d(
        <int> n, <fftw_complex*> &psiv[0], <fftw_complex*> &psiv[0],
        FFTW_FORWARD, FFTW_ESTIMATE)
    cdef fftw_plan plan_b = fftw_plan_dft_1d(
        <int> n, <fftw_complex*> &psiv[0], <fftw_complex*> &psiv[0],
        FFTW_BACKWARD, FFTW_ESTIMATE)

    cdef Py_ssize_t i, j, s
    try:
        with nogil:
            _record(&psiv[0], n, dx, edge_cells, &outs[0, 0], &oedge[0], 0)
            for j in range(n_steps):
                _phase_pass(&thv[0], &gcv[0], &xv[0], n, inv_2w2,
                            c_v, dm[j], dp[j], vm[j], vp[j])
                _apply_phase(&psiv[0], &thv[0], n, c_g)
                fftw_execute(plan_f)
                for i in range(n):
                    psiv[i] = psiv[i] * kinv[i]
                fftw_execute(plan_b)
                _apply_phase(&psiv[0], &thv[0], n, c_g)
                if (j + 1) % stride == 0:
                    s = (j + 1) // stride
                    _record(&psiv[0], n, dx, edge_cells, &outs[0, 0],
                            &oedge[0], s)
    finally:
        fftw_destroy_plan(plan_f)
        fftw_destroy_plan(plan_b)
    return psi


cdef void _phase_pass(double* theta, const double* gc, const double* x,
                      Py_ssize_t n, double inv_2w2, double c_v,
                      double dmj, double dpj, double vmj,
                      double vpj) noexcept nogil:
    # plain-double loop so the compiler can vectorize the exponentials
    cdef Py_ssize_t i
    cdef double xm, xp
    for i in range(n):
        xm = x[i] + dmj
        xp = x[i] - dpj
        theta[i] = c_v * (1.0 - (vmj * exp(-xm * xm * inv_2w2) + gc[i]
                                 + vpj * exp(-xp * xp * inv_2w2)))


cdef void _apply_phase(double complex* psi, const double* theta,
                       Py_ssize_t n, double c_g) noexcept nogil:
    # psi_i *= exp(-i (theta_i + c_g |psi_i|^2))
    cdef Py_ssize_t i
    cdef double c, sn, re, im, th
    for i in range(n):
        re = psi[i].real
        im = psi[i].imag
        th = theta[i]
        if c_g != 0.0:
            th = th + c_g * (re * re + im * im)
        c = cos(th)
        sn = sin(th)
        psi[i].real = re * c + im * sn
        psi[i].imag = im * c - re * sn


cdef void _record(double complex* psi, Py_ssize_t n, double dx,
                  Py_ssize_t edge_cells, double complex* out_states,
                  double* out_edge, Py_ssize_t s) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    cdef double re, im
    for i in range(n):
        out_states[s * n + i] = psi[i]
    for i in range(edge_cells):
        re = psi[i].real; im = psi[i].imag
        acc += re * re + im * im
        re = psi[n - 1 - i].real; im = psi[n - 1 - i].imag
        acc += re * re + im * im
    out_edge[s] = acc * dx
