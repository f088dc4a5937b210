# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: RK4 Lindblad stepping and measurement-scan entropies.

Semantics are identical to :mod:`excitonkit._purepy`, which is the readable
reference implementation; this module just turns the per-step and per-grid-
point loops into C.  Eigenvalues for the site scan come from LAPACK's zheev
via the scipy Cython bindings (row- vs column-major order is irrelevant for
the spectrum of a Hermitian matrix).
"""

import numpy as np

from libc.math cimport cos, log, sin, sqrt
from scipy.linalg.cython_lapack cimport zheev

cdef double LOG2 = 0.6931471805599453
cdef double P_FLOOR = 1e-12
cdef double complex CI = 1j


cdef inline double complex cconj(double complex z) noexcept nogil:
    return z.real - CI * z.imag


cdef inline double cabs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef void _apply(const double complex[:, ::1] h, const double[::1] decay,
                 const double[::1] diss, const double[::1] deph, double sink,
                 int k, const double complex[:, ::1] rho,
                 double complex[:, ::1] out, int d, int n) noexcept nogil:
    cdef int a, b, c
    cdef double complex acc, gain
    for a in range(d):
        for b in range(d):
            acc = 0
            for c in range(d):
                acc = acc + h[a, c] * rho[c, b] - rho[a, c] * h[c, b]
            out[a, b] = -CI * acc - (decay[a] + decay[b]) * rho[a, b]
    gain = 0
    for c in range(1, n + 1):
        gain = gain + diss[c - 1] * rho[c, c]
        out[c, c] = out[c, c] + 2.0 * deph[c - 1] * rho[c, c]
    out[0, 0] = out[0, 0] + 2.0 * gain
    out[d - 1, d - 1] = out[d - 1, d - 1] + 2.0 * sink * rho[k, k]


def rk4_evolve(h_rad, diss_rad, deph_rad, sink_rad, k_index, rho0, dt,
               n_steps, stride):
    """Fixed-step RK4 propagation; see _purepy.rk4_evolve for the contract."""
    h_np = np.ascontiguousarray(h_rad, dtype=complex)
    diss_np = np.ascontiguousarray(diss_rad, dtype=float)
    deph_np = np.ascontiguousarray(deph_rad, dtype=float)
    cdef int d = h_np.shape[0]
    cdef int n = d - 2
    cdef int k = int(k_index)
    cdef double sink = float(sink_rad)
    cdef double step_dt = float(dt)
    cdef int nsteps = int(n_steps)
    cdef int strd = int(stride)
    cdef int n_saved = nsteps // strd + 1

    decay_np = np.zeros(d)
    decay_np[1:n + 1] = diss_np + deph_np
    decay_np[k] += sink

    out_np = np.empty((n_saved, d, d), dtype=complex)
    rho_np = np.array(rho0, dtype=complex)
    out_np[0] = rho_np
    k1_np = np.empty((d, d), dtype=complex)
    k2_np = np.empty((d, d), dtype=complex)
    k3_np = np.empty((d, d), dtype=complex)
    k4_np = np.empty((d, d), dtype=complex)
    tmp_np = np.empty((d, d), dtype=complex)

    cdef const double complex[:, ::1] h = h_np
    cdef const double[::1] decay = decay_np
    cdef const double[::1] diss = diss_np
    cdef const double[::1] deph = deph_np
    cdef double complex[:, :, ::1] out = out_np
    cdef double complex[:, ::1] rho = rho_np
    cdef double complex[:, ::1] k1 = k1_np, k2 = k2_np, k3 = k3_np, k4 = k4_np
    cdef double complex[:, ::1] tmp = tmp_np

    cdef int step, a, b, save = 1
    cdef double complex v
    with nogil:
        for step in range(1, nsteps + 1):
            _apply(h, decay, diss, deph, sink, k, rho, k1, d, n)
            for a in range(d):
                for b in range(d):
                    tmp[a, b] = rho[a, b] + 0.5 * step_dt * k1[a, b]
            _apply(h, decay, diss, deph, sink, k, tmp, k2, d, n)
            for a in range(d):
                for b in range(d):
                    tmp[a, b] = rho[a, b] + 0.5 * step_dt * k2[a, b]
            _apply(h, decay, diss, deph, sink, k, tmp, k3, d, n)
            for a in range(d):
                for b in range(d):
                    tmp[a, b] = rho[a, b] + step_dt * k3[a, b]
            _apply(h, decay, diss, deph, sink, k, tmp, k4, d, n)
            for a in range(d):
                for b in range(d):
                    rho[a, b] = rho[a, b] + (step_dt / 6.0) * (
                        k1[a, b] + 2.0 * k2[a, b] + 2.0 * k3[a, b] + k4[a, b])
            # re-Hermitize in place
            for a in range(d):
                rho[a, a] = rho[a, a].real
                for b in range(a + 1, d):
                    v = 0.5 * (rho[a, b] + cconj(rho[b, a]))
                    rho[a, b] = v
                    rho[b, a] = cconj(v)
            if step % strd == 0:
                for a in range(d):
                    for b in range(d):
                        out[save, a, b] = rho[a, b]
                save += 1
    return out_np


cdef double _spectrum_entropy(double complex *m, double *w,
                              double complex *work, double *rwork,
                              int n, int lwork) noexcept nogil:
    """-sum lam*log(lam) + p*log(p) for one outcome matrix (natural log)."""
    cdef int info = 0
    cdef char jobz = b'N'
    cdef char uplo = b'L'
    cdef double ent = 0.0, p = 0.0
    cdef int l
    zheev(&jobz, &uplo, &n, m, &n, w, work, &lwork, rwork, &info)
    if info != 0:
        return 0.0  # degenerate failure; upstream validation rules this out
    for l in range(n):
        p += w[l]
        if w[l] > 0.0:
            ent -= w[l] * log(w[l])
    if p <= P_FLOOR:
        return 0.0
    return ent + p * log(p)


def site_conditional_entropies(rho_ns, site, thetas, phis):
    """Site-vs-rest measurement scan; see _purepy for the contract."""
    rho = np.ascontiguousarray(rho_ns, dtype=complex)
    cdef int d = rho.shape[0]
    cdef int n = d - 1
    cdef int i = int(site)
    rest = [j for j in range(1, d) if j != i]
    idx = [0] + rest
    base_np = np.ascontiguousarray(rho[np.ix_(idx, idx)])
    u_np = np.ascontiguousarray(rho[0, rest])
    v_np = np.ascontiguousarray(rho[i, rest])
    cdef double complex r00 = rho[0, 0]
    cdef double complex r0i = rho[0, i]
    cdef double complex ri0 = rho[i, 0]
    cdef double complex rii = rho[i, i]

    th_np = np.ascontiguousarray(thetas, dtype=float)
    ph_np = np.ascontiguousarray(phis, dtype=float)
    cdef int npts = th_np.shape[0]
    out_np = np.empty(npts)

    cdef int lwork = max(1, 2 * n - 1)
    m_np = np.empty(n * n, dtype=complex)
    w_np = np.empty(n)
    work_np = np.empty(lwork, dtype=complex)
    rwork_np = np.empty(max(1, 3 * n - 2))

    cdef const double complex[:, ::1] base = base_np
    cdef const double complex[::1] u = u_np
    cdef const double complex[::1] v = v_np
    cdef const double[::1] th = th_np
    cdef const double[::1] ph = ph_np
    cdef double[::1] out = out_np
    cdef double complex[::1] m = m_np
    cdef double[::1] w = w_np
    cdef double complex[::1] work = work_np
    cdef double[::1] rwork = rwork_np

    cdef int p, o, x, y
    cdef double c, s, acc, scale
    cdef double complex phase, a_g, a_e, row
    with nogil:
        for p in range(npts):
            c = cos(0.5 * th[p])
            s = sin(0.5 * th[p])
            phase = cos(ph[p]) + CI * sin(ph[p])
            acc = 0.0
            for o in range(2):
                if o == 0:
                    a_g = c
                    a_e = s * phase
                else:
                    a_g = -s * cconj(phase)
                    a_e = c
                scale = cabs2(a_g)
                for x in range(n):
                    for y in range(n):
                        m[x * n + y] = scale * base[x, y]
                for y in range(1, n):
                    row = a_g * (cconj(a_g) * u[y - 1] + cconj(a_e) * v[y - 1])
                    m[y] = row
                    m[y * n] = cconj(row)
                m[0] = (scale * r00 + cconj(a_g) * a_e * r0i
                        + a_g * cconj(a_e) * ri0 + cabs2(a_e) * rii)
                acc += _spectrum_entropy(&m[0], &w[0], &work[0], &rwork[0],
                                         n, lwork)
            out[p] = acc / LOG2
    return out_np


def pair_conditional_entropies(sigma, thetas, phis):
    """Two-qubit measurement scan; see _purepy for the contract."""
    sig = np.ascontiguousarray(sigma, dtype=complex)
    th_np = np.ascontiguousarray(thetas, dtype=float)
    ph_np = np.ascontiguousarray(phis, dtype=float)
    cdef int npts = th_np.shape[0]
    out_np = np.empty(npts)

    cdef const double complex[:, ::1] s4 = sig
    cdef const double[::1] th = th_np
    cdef const double[::1] ph = ph_np
    cdef double[::1] out = out_np

    cdef int p, o, a, csub, b, bp
    cdef double cth, sth, acc, tr, det, disc, lam0, lam1, pa, ent
    cdef double complex phase, mv0, mv1, amp_a, amp_c
    cdef double complex mm[2][2]
    with nogil:
        for p in range(npts):
            cth = cos(0.5 * th[p])
            sth = sin(0.5 * th[p])
            phase = cos(ph[p]) + CI * sin(ph[p])
            acc = 0.0
            for o in range(2):
                if o == 0:
                    mv0 = cth
                    mv1 = sth * phase
                else:
                    mv0 = -sth * cconj(phase)
                    mv1 = cth
                for b in range(2):
                    for bp in range(2):
                        mm[b][bp] = 0
                        for a in range(2):
                            amp_a = cconj(mv0) if a == 0 else cconj(mv1)
                            for csub in range(2):
                                amp_c = mv0 if csub == 0 else mv1
                                mm[b][bp] = mm[b][bp] + amp_a * amp_c * \
                                    s4[2 * a + b, 2 * csub + bp]
                tr = mm[0][0].real + mm[1][1].real
                det = (mm[0][0] * mm[1][1] - mm[0][1] * mm[1][0]).real
                disc = tr * tr - 4.0 * det
                disc = sqrt(disc) if disc > 0.0 else 0.0
                lam0 = 0.5 * (tr - disc)
                lam1 = 0.5 * (tr + disc)
                pa = tr
                ent = 0.0
                if lam0 > 0.0:
                    ent -= lam0 * log(lam0)
                if lam1 > 0.0:
                    ent -= lam1 * log(lam1)
                if pa > P_FLOOR:
                    acc += ent + pa * log(pa)
            out[p] = acc / LOG2
    return out_np
