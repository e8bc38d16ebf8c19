# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the resampling kernels.

Mirrors pykern.py function for function; the stream-slot layout is
identical, so integer and uniform outputs match the numpy backend bit for
bit (float paths can differ by libm ulps).
"""

from libc.math cimport INFINITY, exp, log
from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef unsigned long long u64

cdef u64 GAMMA = 0x9E3779B97F4A7C15ULL
cdef u64 M1 = 0xBF58476D1CE4E5B9ULL
cdef u64 M2 = 0x94D049BB133111EBULL
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline u64 mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline u64 stream_key(u64 seed, u64 sid) nogil:
    return mix64(mix64(seed + GAMMA) ^ mix64(sid))


cdef inline u64 child_key(u64 seed, u64 sid, u64 j) nogil:
    return stream_key(seed, mix64(sid + GAMMA * (j + 1)))


cdef inline double to_uniform(u64 x) nogil:
    return (<double>(x >> 11) + 0.5) * INV53


def u64_block(seed, stream_id, start, count):
    cdef u64 key = stream_key(<u64>(seed & 0xFFFFFFFFFFFFFFFF), <u64>(stream_id & 0xFFFFFFFFFFFFFFFF))
    cdef Py_ssize_t n = count, i
    cdef u64 s0 = <u64>start
    out = np.empty(n, dtype=np.uint64)
    cdef u64[::1] ov = out
    for i in range(n):
        ov[i] = mix64(key + GAMMA * (s0 + <u64>i + 1))
    return out


def uniform_block(seed, stream_id, start, count):
    cdef u64 key = stream_key(<u64>(seed & 0xFFFFFFFFFFFFFFFF), <u64>(stream_id & 0xFFFFFFFFFFFFFFFF))
    cdef Py_ssize_t n = count, i
    cdef u64 s0 = <u64>start
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    for i in range(n):
        ov[i] = to_uniform(mix64(key + GAMMA * (s0 + <u64>i + 1)))
    return out


def index_block(seed, stream_id, start, count, upper):
    cdef u64 key = stream_key(<u64>(seed & 0xFFFFFFFFFFFFFFFF), <u64>(stream_id & 0xFFFFFFFFFFFFFFFF))
    cdef Py_ssize_t n = count, i
    cdef u64 s0 = <u64>start
    cdef u64 m = <u64>upper
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] ov = out
    for i in range(n):
        ov[i] = <long long>(mix64(key + GAMMA * (s0 + <u64>i + 1)) % m)
    return out


def child_uniform_block(seed, stream_id, n_children, slot):
    cdef u64 sd = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef u64 sid = <u64>(stream_id & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = n_children, j
    cdef u64 sl = <u64>slot
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    for j in range(n):
        ov[j] = to_uniform(mix64(child_key(sd, sid, <u64>j) + GAMMA * (sl + 1)))
    return out


cdef void dsort(double* a, Py_ssize_t n) nogil:
    """In-place quicksort with insertion sort below 16 elements."""
    cdef Py_ssize_t i, j, lo_n
    cdef double pivot, tmp
    if n < 16:
        for i in range(1, n):
            pivot = a[i]
            j = i - 1
            while j >= 0 and a[j] > pivot:
                a[j + 1] = a[j]
                j -= 1
            a[j + 1] = pivot
        return
    # median of three to the middle
    cdef Py_ssize_t mid = n // 2
    if a[0] > a[mid]:
        tmp = a[0]; a[0] = a[mid]; a[mid] = tmp
    if a[0] > a[n - 1]:
        tmp = a[0]; a[0] = a[n - 1]; a[n - 1] = tmp
    if a[mid] > a[n - 1]:
        tmp = a[mid]; a[mid] = a[n - 1]; a[n - 1] = tmp
    pivot = a[mid]
    i = 0
    j = n - 1
    while True:
        while a[i] < pivot:
            i += 1
        while a[j] > pivot:
            j -= 1
        if i >= j:
            break
        tmp = a[i]; a[i] = a[j]; a[j] = tmp
        i += 1
        j -= 1
    lo_n = j + 1
    dsort(a, lo_n)
    dsort(a + lo_n, n - lo_n)


cdef double dselect(double* a, Py_ssize_t n, Py_ssize_t k) nogil:
    """In-place quickselect: returns the k-th smallest of a[0..n-1]."""
    cdef Py_ssize_t lo = 0, hi = n - 1, mid, i, j
    cdef double pivot, tmp
    while True:
        if hi <= lo + 1:
            if hi == lo + 1 and a[hi] < a[lo]:
                tmp = a[lo]; a[lo] = a[hi]; a[hi] = tmp
            return a[k]
        mid = (lo + hi) // 2
        tmp = a[mid]; a[mid] = a[lo + 1]; a[lo + 1] = tmp
        if a[lo] > a[hi]:
            tmp = a[lo]; a[lo] = a[hi]; a[hi] = tmp
        if a[lo + 1] > a[hi]:
            tmp = a[lo + 1]; a[lo + 1] = a[hi]; a[hi] = tmp
        if a[lo] > a[lo + 1]:
            tmp = a[lo]; a[lo] = a[lo + 1]; a[lo + 1] = tmp
        i = lo + 1
        j = hi
        pivot = a[lo + 1]
        while True:
            i += 1
            while a[i] < pivot:
                i += 1
            j -= 1
            while a[j] > pivot:
                j -= 1
            if j < i:
                break
            tmp = a[i]; a[i] = a[j]; a[j] = tmp
        a[lo + 1] = a[j]
        a[j] = pivot
        if j >= k:
            hi = j - 1
        if j <= k:
            lo = i


cdef inline double clip01(double x, double lo, double hi) nogil:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


cdef double privmedian_one(double* s, Py_ssize_t n, double eps, double rho,
                           double lo, double hi, double u_level, double u_pos,
                           double* meas) nogil:
    """Private median draw for one sorted, clipped vector s of length n."""
    cdef double med = s[(n - 1) // 2]
    cdef Py_ssize_t left_of = 0, upto = 0, l, j
    while left_of < n and s[left_of] < med:
        left_of += 1
    upto = left_of
    while upto < n and s[upto] <= med:
        upto += 1

    cdef double a0 = med - rho
    if a0 < lo:
        a0 = lo
    cdef double b0 = med + rho
    if b0 > hi:
        b0 = hi
    meas[0] = b0 - a0 if b0 > a0 else 0.0

    cdef double ra, rb, la, lb, mr, ml
    for l in range(1, n + 1):
        mr = 0.0
        j = left_of + l - 1
        if j <= n - 1:
            ra = s[j] + rho
            rb = s[j + 1] + rho if j + 1 <= n - 1 else INFINITY
            if ra < lo:
                ra = lo
            if rb > hi:
                rb = hi
            if rb > ra:
                mr = rb - ra
        ml = 0.0
        j = upto - l
        if j >= 0:
            lb = s[j] - rho
            la = s[j - 1] - rho if j - 1 >= 0 else -INFINITY
            if la < lo:
                la = lo
            if lb > hi:
                lb = hi
            if lb > la:
                ml = lb - la
        meas[l] = ml + mr

    # categorical over levels in log space
    cdef double best = -INFINITY, lw, pen
    for l in range(n + 1):
        if meas[l] > 0.0:
            pen = 0.0 if l == 0 else l * (eps / 2.0)
            lw = log(meas[l]) - pen
            if lw > best:
                best = lw
    cdef double total = 0.0
    for l in range(n + 1):
        if meas[l] > 0.0:
            pen = 0.0 if l == 0 else l * (eps / 2.0)
            total += exp(log(meas[l]) - pen - best)
    cdef double target = u_level * total
    cdef double cum = 0.0
    cdef Py_ssize_t ksel = 0
    for l in range(n + 1):
        if meas[l] > 0.0:
            pen = 0.0 if l == 0 else l * (eps / 2.0)
            cum += exp(log(meas[l]) - pen - best)
        if cum < target:
            ksel += 1
        else:
            break

    cdef double out, x
    if ksel == 0:
        out = a0 + u_pos * meas[0]
        return clip01(out, lo, hi)
    # rebuild the chosen level's pieces
    mr = 0.0
    ra = 0.0
    j = left_of + ksel - 1
    if j <= n - 1:
        ra = s[j] + rho
        rb = s[j + 1] + rho if j + 1 <= n - 1 else INFINITY
        if ra < lo:
            ra = lo
        if rb > hi:
            rb = hi
        if rb > ra:
            mr = rb - ra
    ml = 0.0
    la = 0.0
    j = upto - ksel
    if j >= 0:
        lb = s[j] - rho
        la = s[j - 1] - rho if j - 1 >= 0 else -INFINITY
        if la < lo:
            la = lo
        if lb > hi:
            lb = hi
        if lb > la:
            ml = lb - la
    x = u_pos * (ml + mr)
    if x < ml or mr == 0.0:
        out = la + x
    else:
        out = ra + (x - ml)
    return clip01(out, lo, hi)


def resample_means(values, n_out, n_mc, seed, stream_id):
    cdef const double[::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t m = vals.shape[0]
    cdef Py_ssize_t no = n_out, nm = n_mc, i, j
    cdef u64 sd = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef u64 sid = <u64>(stream_id & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(nm, dtype=np.float64)
    cdef double[::1] ov = out
    cdef u64 key
    cdef double acc
    with nogil:
        for j in range(nm):
            key = child_key(sd, sid, <u64>j)
            acc = 0.0
            for i in range(no):
                acc += vals[<Py_ssize_t>(mix64(key + GAMMA * (<u64>i + 1)) % <u64>m)]
            ov[j] = acc / no
    return out


def resample_medians(values, n_out, n_mc, seed, stream_id):
    cdef const double[::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t m = vals.shape[0]
    cdef Py_ssize_t no = n_out, nm = n_mc, i, j
    cdef Py_ssize_t mid = (no - 1) // 2
    cdef u64 sd = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef u64 sid = <u64>(stream_id & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(nm, dtype=np.float64)
    cdef double[::1] ov = out
    cdef u64 key
    cdef double* buf = <double*>malloc(no * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for j in range(nm):
                key = child_key(sd, sid, <u64>j)
                for i in range(no):
                    buf[i] = vals[<Py_ssize_t>(mix64(key + GAMMA * (<u64>i + 1)) % <u64>m)]
                ov[j] = dselect(buf, no, mid)
    finally:
        free(buf)
    return out


def resample_privmedians(values, n_out, n_mc, epsilon, rho, range_lo, range_hi, seed, stream_id):
    clipped = np.clip(np.ascontiguousarray(values, dtype=np.float64), range_lo, range_hi)
    cdef const double[::1] vals = clipped
    cdef Py_ssize_t m = vals.shape[0]
    cdef Py_ssize_t no = n_out, nm = n_mc, i, j
    cdef u64 sd = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef u64 sid = <u64>(stream_id & 0xFFFFFFFFFFFFFFFF)
    cdef double eps = epsilon, rh = rho, lo = range_lo, hi = range_hi
    out = np.empty(nm, dtype=np.float64)
    cdef double[::1] ov = out
    cdef u64 key
    cdef double u_level, u_pos
    cdef double* buf = <double*>malloc(no * sizeof(double))
    cdef double* meas = <double*>malloc((no + 1) * sizeof(double))
    if buf == NULL or meas == NULL:
        free(buf)
        free(meas)
        raise MemoryError()
    try:
        with nogil:
            for j in range(nm):
                key = child_key(sd, sid, <u64>j)
                for i in range(no):
                    buf[i] = vals[<Py_ssize_t>(mix64(key + GAMMA * (<u64>i + 1)) % <u64>m)]
                dsort(buf, no)
                u_level = to_uniform(mix64(key + GAMMA * (<u64>no + 1)))
                u_pos = to_uniform(mix64(key + GAMMA * (<u64>no + 2)))
                ov[j] = privmedian_one(buf, no, eps, rh, lo, hi, u_level, u_pos, meas)
    finally:
        free(buf)
        free(meas)
    return out
