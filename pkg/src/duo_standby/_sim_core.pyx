# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernel.

Mirrors ``_sim_py`` operation for operation (same counter-based stream, same
sampling formulas, same draw order) so both backends return identical bits.
"""

from libc.math cimport cos, log, log1p, pow, sqrt, M_PI
from libc.stdint cimport int64_t, uint8_t, uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TO_UNIT = 2.220446049250313e-16  # 2**-52


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef struct Stream:
    uint64_t state


cdef inline double next_uniform(Stream* st) noexcept nogil:
    st.state = st.state + GOLDEN
    return (<double>(mix64(st.state) >> 12) + 0.5) * TO_UNIT


cdef double draw(int code, double p0, double p1, Stream* st) noexcept nogil:
    cdef double a, boost, d, c, u, u1, u2, z, v
    if code == 0:
        return -log1p(-next_uniform(st)) / p0
    if code == 1:
        return p1 * pow(-log1p(-next_uniform(st)), 1.0 / p0)
    if code == 2:
        a = p0
        boost = 1.0
        if a < 1.0:
            boost = pow(next_uniform(st), 1.0 / a)
            a = a + 1.0
        d = a - 1.0 / 3.0
        c = 1.0 / sqrt(9.0 * d)
        while True:
            u1 = next_uniform(st)
            u2 = next_uniform(st)
            z = sqrt(-2.0 * log1p(-u1)) * cos(2.0 * M_PI * u2)
            v = 1.0 + c * z
            if v <= 0.0:
                continue
            v = v * v * v
            u = next_uniform(st)
            if log1p(-u) < 0.5 * z * z + d - d * v + d * log(v):
                return boost * d * v / p1
    if code == 3:
        return p0 + (p1 - p0) * next_uniform(st)
    return p0


def simulate_block(work, repair, seed, int64_t start, int64_t count, int64_t max_cycles,
                   double[::1] lifetimes, int64_t[::1] cycles, uint8_t[::1] censored):
    """Compiled counterpart of ``_sim_py.simulate_block``."""
    cdef int wcode[2]
    cdef int rcode[2]
    cdef double wpar[2][2]
    cdef double rpar[2][2]
    cdef int i
    for i in range(2):
        wcode[i] = work[i].code
        rcode[i] = repair[i].code
        wpar[i][0], wpar[i][1] = work[i].params()
        rpar[i][0], rpar[i][1] = repair[i].params()

    cdef uint64_t key0 = mix64(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF) + GOLDEN)
    cdef Stream st
    cdef int64_t k, n
    cdef int active, nxt
    cdef double elapsed, repair_time, work_time
    cdef uint8_t cens
    with nogil:
        for k in range(count):
            st.state = mix64(key0 + <uint64_t>(start + k))
            elapsed = draw(wcode[0], wpar[0][0], wpar[0][1], &st)
            n = 1
            active = 0
            cens = 1
            while n < max_cycles:
                nxt = 1 - active
                repair_time = draw(rcode[active], rpar[active][0], rpar[active][1], &st)
                work_time = draw(wcode[nxt], wpar[nxt][0], wpar[nxt][1], &st)
                elapsed = elapsed + work_time
                n = n + 1
                if repair_time >= work_time:
                    cens = 0
                    break
                active = nxt
            lifetimes[k] = elapsed
            cycles[k] = n
            censored[k] = cens
