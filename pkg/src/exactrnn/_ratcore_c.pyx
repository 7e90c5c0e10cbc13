# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of ``_ratcore_py``.

Same contracts, same results bit for bit; only the loop plumbing is
compiled. Values stay arbitrary-precision Python ints.
"""

from math import gcd as _gcd

BACKEND = "cython"


cpdef tuple rnorm(n, d):
    if n == 0:
        return 0, 1
    if d < 0:
        n = -n
        d = -d
    if d == 1:
        return n, d
    g = _gcd(n, d)
    if g > 1:
        return n // g, d // g
    return n, d


cpdef tuple radd(an, ad, bn, bd):
    if ad == 1 and bd == 1:
        return an + bn, 1
    return rnorm(an * bd + bn * ad, ad * bd)


cpdef tuple rmul(an, ad, bn, bd):
    if ad == 1 and bd == 1:
        return an * bn, 1
    return rnorm(an * bn, ad * bd)


cpdef tuple vdot(list an, list ad, list bn, list bd):
    cdef Py_ssize_t i, n = len(an)
    sn = 0
    sd = 1
    for i in range(n):
        p = an[i] * bn[i]
        if p == 0:
            continue
        q = ad[i] * bd[i]
        if q == 1:
            if sd == 1:
                sn = sn + p
            else:
                sn = sn + p * sd
        else:
            if sd == 1:
                sn = sn * q + p
            else:
                sn = sn * q + p * sd
            sd = sd * q
    return rnorm(sn, sd)


cpdef tuple vec_mat(list xn, list xd, list mn, list md, Py_ssize_t rows, Py_ssize_t cols):
    cdef Py_ssize_t i, j, k
    cdef list outn = [0] * cols
    cdef list outd = [1] * cols
    for j in range(cols):
        sn = 0
        sd = 1
        k = j
        for i in range(rows):
            p = xn[i] * mn[k]
            if p != 0:
                q = xd[i] * md[k]
                if q == 1:
                    sn = sn + p if sd == 1 else sn + p * sd
                else:
                    sn = sn * q + (p if sd == 1 else p * sd)
                    sd = sd * q
            k += cols
        outn[j], outd[j] = rnorm(sn, sd)
    return outn, outd


cpdef tuple mat_vec(list mn, list md, Py_ssize_t rows, Py_ssize_t cols, list xn, list xd):
    cdef Py_ssize_t i, j, k = 0
    cdef list outn = [0] * rows
    cdef list outd = [1] * rows
    for i in range(rows):
        sn = 0
        sd = 1
        for j in range(cols):
            p = mn[k] * xn[j]
            if p != 0:
                q = md[k] * xd[j]
                if q == 1:
                    sn = sn + p if sd == 1 else sn + p * sd
                else:
                    sn = sn * q + (p if sd == 1 else p * sd)
                    sd = sd * q
            k += 1
        outn[i], outd[i] = rnorm(sn, sd)
    return outn, outd


cpdef tuple mat_mul(list an, list ad, Py_ssize_t ar, Py_ssize_t ac, list bn, list bd, Py_ssize_t bc):
    cdef Py_ssize_t i, j, t, k, arow, orow
    cdef list outn = [0] * (ar * bc)
    cdef list outd = [1] * (ar * bc)
    for i in range(ar):
        arow = i * ac
        orow = i * bc
        for j in range(bc):
            sn = 0
            sd = 1
            k = j
            for t in range(ac):
                p = an[arow + t] * bn[k]
                if p != 0:
                    q = ad[arow + t] * bd[k]
                    if q == 1:
                        sn = sn + p if sd == 1 else sn + p * sd
                    else:
                        sn = sn * q + (p if sd == 1 else p * sd)
                        sd = sd * q
                k += bc
            outn[orow + j], outd[orow + j] = rnorm(sn, sd)
    return outn, outd


cpdef tuple sparse_affine(tuple idx, tuple wn, tuple wd, tuple bn, tuple bd, list xn, list xd, bint do_relu):
    cdef Py_ssize_t i, t, c, m = len(idx)
    cdef list outn = [0] * m
    cdef list outd = [1] * m
    cdef tuple cols, rown, rowd
    for i in range(m):
        cols = idx[i]
        rown = wn[i]
        rowd = wd[i]
        sn = bn[i]
        sd = bd[i]
        for t in range(len(cols)):
            c = cols[t]
            p = rown[t] * xn[c]
            if p == 0:
                continue
            q = rowd[t] * xd[c]
            if q == 1:
                sn = sn + p if sd == 1 else sn + p * sd
            else:
                sn = sn * q + (p if sd == 1 else p * sd)
                sd = sd * q
        if do_relu and sn < 0:
            continue
        outn[i], outd[i] = rnorm(sn, sd)
    return outn, outd
