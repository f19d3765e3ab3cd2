"""Pure-Python simulation kernel (fallback for the compiled ``_sim_core``)."""

from __future__ import annotations

from .rng import CounterStream


def run_lifetime(work, repair, rng, max_cycles):
    """One replication with server index 0 starting; returns (lifetime, cycles, censored).

    ``work`` and ``repair`` are pairs of distributions indexed by server.
    Draw order per hand-over: the outgoing server's repair time, then the
    incoming server's work time.  The compiled kernel follows the same order.
    """
    elapsed = work[0].sample(rng)
    cycles = 1
    active = 0
    while cycles < max_cycles:
        nxt = 1 - active
        repair_time = repair[active].sample(rng)
        work_time = work[nxt].sample(rng)
        elapsed += work_time
        cycles += 1
        # a repair finishing exactly at the failure instant is too late
        if repair_time >= work_time:
            return elapsed, cycles, False
        active = nxt
    return elapsed, cycles, True


def simulate_block(work, repair, seed, start, count, max_cycles, lifetimes, cycles, censored):
    """Fill ``lifetimes[k]``, ``cycles[k]``, ``censored[k]`` for replications start..start+count-1."""
    for k in range(count):
        rng = CounterStream(seed, start + k)
        life, n, cens = run_lifetime(work, repair, rng, max_cycles)
        lifetimes[k] = life
        cycles[k] = n
        censored[k] = cens
