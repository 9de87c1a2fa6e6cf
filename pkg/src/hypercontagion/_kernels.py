"""Compiled inner loops. Node states: 0 = S, 1 = I, 2 = R."""

import numpy as np
from numba import njit

SUSCEPTIBLE = 0
INFECTED = 1
REMOVED = 2

# scaling-function variants
F_TRUE = 0
F_SCALE = 1
F_FORM = 2

NEVER = np.iinfo(np.int64).max


@njit(cache=True)
def scale(p, k_gamma, variant, param):
    if p < 0.5:
        if variant == F_FORM:
            return (2.0 * p) ** (1.0 / param)
        return 2.0 * p
    x = 2.0 * p - 1.0
    if variant == F_SCALE:
        return 1.0 + 2.0 * k_gamma * param * x
    if variant == F_FORM:
        return 1.0 + 2.0 * k_gamma * x ** param
    return 1.0 + 2.0 * k_gamma * x


@njit(cache=True)
def edge_prob(n_infected, size, beta, k_gamma, variant, param):
    if n_infected == 0:
        return 0.0
    p = n_infected / (size - 1.0)
    b = scale(p, k_gamma, variant, param) * n_infected * beta
    return b if b < 1.0 else 1.0


@njit(cache=True)
def _infect_edge(members, sizes, states, e, beta, k_gamma, rng, newly):
    """Infection draws on hyperedge ``e``; returns the number of new infections."""
    size = sizes[e]
    n_inf = 0
    for j in range(size):
        if states[members[e, j]] == INFECTED:
            n_inf += 1
    if n_inf == 0 or n_inf == size:
        return 0
    b = edge_prob(n_inf, size, beta, k_gamma, F_TRUE, 1.0)
    count = 0
    for j in range(size):
        v = members[e, j]
        if states[v] == SUSCEPTIBLE:
            if rng.random() < b:
                newly[count] = v
                count += 1
    return count


@njit(cache=True)
def iterate_literal(members, sizes, states, beta, mu, alpha, k_gamma, rng):
    """
    One iteration with a Bernoulli exit draw for every previously infected node.

    Returns the number of new infections.
    """
    n_edges = members.shape[0]
    newly = np.empty(members.shape[1], dtype=np.int64)
    e = rng.integers(0, n_edges)
    count = _infect_edge(members, sizes, states, e, beta, k_gamma, rng, newly)
    exit_p = mu + alpha
    if exit_p > 0.0:
        for v in range(states.shape[0]):
            if states[v] != INFECTED:
                continue
            fresh = False
            for j in range(count):
                if newly[j] == v:
                    fresh = True
            if fresh:
                continue
            u = rng.random()
            if u < mu:
                states[v] = SUSCEPTIBLE
            elif u < exit_p:
                states[v] = REMOVED
    for j in range(count):
        states[newly[j]] = INFECTED
    return count


@njit(cache=True)
def _exit_delay(exit_p, rng):
    # iterations until a node leaves I: geometric on {1, 2, ...}
    if exit_p <= 0.0:
        return NEVER
    if exit_p >= 1.0:
        return 1
    u = 1.0 - rng.random()
    return 1 + np.int64(np.floor(np.log(u) / np.log1p(-exit_p)))


@njit(cache=True)
def schedule_exits(states, clock, iteration, mu, alpha, rng):
    """Assign exit times to every infected node, as if infected at ``iteration``."""
    exit_p = mu + alpha
    nxt = NEVER
    for v in range(states.shape[0]):
        if states[v] == INFECTED:
            d = _exit_delay(exit_p, rng)
            clock[v] = NEVER if d == NEVER else iteration + d
            if clock[v] < nxt:
                nxt = clock[v]
        else:
            clock[v] = NEVER
    return nxt


@njit(cache=True)
def advance(members, sizes, states, clock, iteration, next_exit, n_iter,
            beta, mu, alpha, k_gamma, rng):
    """
    Run ``n_iter`` iterations with scheduled exit clocks.

    ``clock[v]`` is the iteration at which infected node ``v`` leaves I.
    Per-iteration exit trials are memoryless, so drawing the geometric
    waiting time once at infection is equivalent in distribution to one
    Bernoulli draw per iteration. Returns ``(iteration, next_exit)``.
    """
    n_edges = members.shape[0]
    newly = np.empty(members.shape[1], dtype=np.int64)
    exit_p = mu + alpha
    n = states.shape[0]
    for _ in range(n_iter):
        iteration += 1
        e = rng.integers(0, n_edges)
        count = _infect_edge(members, sizes, states, e, beta, k_gamma, rng, newly)
        for j in range(count):
            v = newly[j]
            states[v] = INFECTED
            d = _exit_delay(exit_p, rng)
            clock[v] = NEVER if d == NEVER else iteration + d
            if clock[v] < next_exit:
                next_exit = clock[v]
        if iteration >= next_exit:
            nxt = NEVER
            for v in range(n):
                if states[v] != INFECTED:
                    continue
                if clock[v] <= iteration:
                    if alpha <= 0.0 or rng.random() * exit_p < mu:
                        states[v] = SUSCEPTIBLE
                    else:
                        states[v] = REMOVED
                    clock[v] = NEVER
                elif clock[v] < nxt:
                    nxt = clock[v]
            next_exit = nxt
    return iteration, next_exit


@njit(cache=True)
def activity_sums(members, sizes, states, beta, k_gamma, variant, param, max_order):
    """Per-order sums of ``n_S(e) * beta_e``; index k holds order k."""
    out = np.zeros(max_order + 1)
    for e in range(members.shape[0]):
        size = sizes[e]
        n_inf = 0
        n_sus = 0
        for j in range(size):
            s = states[members[e, j]]
            if s == INFECTED:
                n_inf += 1
            elif s == SUSCEPTIBLE:
                n_sus += 1
        if n_inf == 0 or n_sus == 0:
            continue
        out[size - 1] += n_sus * edge_prob(n_inf, size, beta, k_gamma, variant, param)
    return out
