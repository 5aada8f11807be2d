"""Brute-force reference computations, written independently of the package."""

import itertools

import numpy as np


def entry(p, a, b, x, y):
    return p[2 * x + y][2 * a + b]


def brute_correlation(p, x, y):
    return sum((1 if a == b else -1) * entry(p, a, b, x, y) for a in (0, 1) for b in (0, 1))


def brute_chsh(p):
    """Max of |sum_xy s_xy C_xy| over all sign patterns with an odd number of minus signs."""
    best = 0.0
    for signs in itertools.product((1, -1), repeat=4):
        if signs.count(-1) % 2 == 0:
            continue
        total = 0.0
        # direct summation over all 16 table entries
        for s, (x, y) in enumerate(itertools.product((0, 1), repeat=2)):
            for a in (0, 1):
                for b in (0, 1):
                    total += signs[s] * (1 if a == b else -1) * entry(p, a, b, x, y)
        best = max(best, abs(total))
    return best


def brute_xor(p1, p2):
    out = np.zeros((4, 4))
    for x, y in itertools.product((0, 1), repeat=2):
        for a1, b1, a2, b2 in itertools.product((0, 1), repeat=4):
            a, b = a1 ^ a2, b1 ^ b2
            out[2 * x + y, 2 * a + b] += entry(p1, a1, b1, x, y) * entry(p2, a2, b2, x, y)
    return out


def brute_marginals(p):
    alice = {(x, y, a): sum(entry(p, a, b, x, y) for b in (0, 1))
             for x, y, a in itertools.product((0, 1), repeat=3)}
    bob = {(x, y, b): sum(entry(p, a, b, x, y) for a in (0, 1))
           for x, y, b in itertools.product((0, 1), repeat=3)}
    return alice, bob


def brute_nonsignalling(p, tol):
    alice, bob = brute_marginals(p)
    for x, a in itertools.product((0, 1), repeat=2):
        if abs(alice[(x, 0, a)] - alice[(x, 1, a)]) > tol:
            return False
    for y, b in itertools.product((0, 1), repeat=2):
        if abs(bob[(0, y, b)] - bob[(1, y, b)]) > tol:
            return False
    return True


def unequal_family_map(e1, g1, e2, g2):
    """XOR of two family boxes with different parameters: q = q1 + q2 - 2 q1 q2."""
    return e1 + e2 - 2 * e1 * e2, g1 + g2 - 2 * g1 * g2


def ns_vertices():
    """The 24 extremal non-signalling boxes: 16 deterministic, 8 PR-type."""
    verts = []
    for al, be, ga, de in itertools.product((0, 1), repeat=4):
        p = np.zeros((4, 4))
        for x, y in itertools.product((0, 1), repeat=2):
            a, b = (al * x) ^ be, (ga * y) ^ de
            p[2 * x + y, 2 * a + b] = 1.0
        verts.append(p)
    for al, be, ga in itertools.product((0, 1), repeat=3):
        p = np.zeros((4, 4))
        for x, y in itertools.product((0, 1), repeat=2):
            for a, b in itertools.product((0, 1), repeat=2):
                if a ^ b == (x & y) ^ (al * x) ^ (be * y) ^ ga:
                    p[2 * x + y, 2 * a + b] = 0.5
        verts.append(p)
    return np.array(verts)


def random_ns_table(rng):
    verts = ns_vertices()
    w = rng.dirichlet(np.full(len(verts), 0.3))
    return np.tensordot(w, verts, axes=1)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
