"""Brute-force enumeration oracles for the table-driven toy systems.

These work directly on the integer transition/cost tables (never through
the grid solvers) so they stay independent of the code paths they check.
"""

import itertools
import math

import numpy as np


def _path_distribution(mdp, policy, x0):
    """Cost distribution {z: prob} under a Markov policy from state x0.

    policy[t][x] is a control index; disturbance sequences are expanded
    exhaustively.
    """
    f = np.asarray(mdp["f"], dtype=int)
    stage = np.asarray(mdp["stage"], dtype=float)
    terminal = np.asarray(mdp["terminal"], dtype=float)
    probs = np.asarray(mdp["probs"], dtype=float)
    horizon = mdp["horizon"]

    dist = {}

    def walk(t, x, cost, prob):
        if t == horizon:
            z = cost + terminal[x]
            dist[z] = dist.get(z, 0.0) + prob
            return
        u = policy[t][x]
        for k, pk in enumerate(probs):
            walk(t + 1, f[x, u, k], cost + stage[x, u], prob * pk)

    walk(0, x0, 0.0, 1.0)
    return dist


def _all_markov_policies(mdp):
    n_states = len(mdp["terminal"])
    n_controls = len(mdp["stage"][0])
    per_step = list(itertools.product(range(n_controls), repeat=n_states))
    return itertools.product(per_step, repeat=mdp["horizon"])


def _eu_of_dist(dist, theta):
    values = list(dist)
    b = min(values)
    total = sum(p * math.exp((-theta / 2.0) * (z - b))
                for z, p in dist.items())
    return b + (-2.0 / theta) * math.log(total)


def enumerate_eu(mdp, theta):
    """min over all Markov policies of the exponential certainty
    equivalent, per start state."""
    n_states = len(mdp["terminal"])
    best = [math.inf] * n_states
    for policy in _all_markov_policies(mdp):
        for x0 in range(n_states):
            dist = _path_distribution(mdp, policy, x0)
            best[x0] = min(best[x0], _eu_of_dist(dist, theta))
    return np.array(best)


def enumerate_risk_neutral(mdp, translated=True):
    """min over all Markov policies of the expected (translated) cost."""
    n_states = len(mdp["terminal"])
    shift = 0.0
    if translated:
        low = min(np.min(mdp["stage"]), np.min(mdp["terminal"]))
        shift = (mdp["horizon"] + 1) * low
    best = [math.inf] * n_states
    for policy in _all_markov_policies(mdp):
        for x0 in range(n_states):
            dist = _path_distribution(mdp, policy, x0)
            mean = sum(z * p for z, p in dist.items()) - shift
            best[x0] = min(best[x0], mean)
    return np.array(best)


def deterministic_tree_min(mdp, x0):
    """Shortest-path total cost over the control tree (single atom)."""
    f = np.asarray(mdp["f"], dtype=int)
    stage = np.asarray(mdp["stage"], dtype=float)
    terminal = np.asarray(mdp["terminal"], dtype=float)

    def go(t, x):
        if t == mdp["horizon"]:
            return terminal[x]
        return min(stage[x, u] + go(t + 1, f[x, u, 0])
                   for u in range(stage.shape[1]))

    return go(0, x0)


def enumerate_cvar_excess(mdp, x0, s0, return_dist=False):
    """min over augmented policies of E max(Z' - s0, 0) from (x0, s0).

    Augmented policies may condition on (t, x, s); the enumeration
    assigns one control per distinct reachable augmented node, level by
    level, and expands disturbance sequences exactly.  Costs here are the
    translated ones (c' = c - d_lo).
    """
    f = np.asarray(mdp["f"], dtype=int)
    low = min(np.min(mdp["stage"]), np.min(mdp["terminal"]))
    stage = np.asarray(mdp["stage"], dtype=float) - low
    terminal = np.asarray(mdp["terminal"], dtype=float) - low
    probs = np.asarray(mdp["probs"], dtype=float)
    horizon = mdp["horizon"]
    n_controls = stage.shape[1]

    def expand(t, reached):
        # reached: dict (x, s) -> prob; one control choice per node
        if t == horizon:
            value = sum(p * max(terminal[x] - s, 0.0)
                        for (x, s), p in reached.items())
            dist = {}
            for (x, s), p in reached.items():
                z = terminal[x] + (s0 - s)     # s0 - s == spent stage cost
                dist[z] = dist.get(z, 0.0) + p
            return [(value, dist)]
        outcomes = []
        nodes = sorted(reached)
        for choice in itertools.product(range(n_controls),
                                        repeat=len(nodes)):
            nxt = {}
            for (x, s), u in zip(nodes, choice):
                p = reached[(x, s)]
                s_next = s - stage[x, u]
                for k, pk in enumerate(probs):
                    key = (int(f[x, u, k]), s_next)
                    nxt[key] = nxt.get(key, 0.0) + p * pk
            outcomes.extend(expand(t + 1, nxt))
        return outcomes

    outcomes = expand(0, {(x0, float(s0)): 1.0})
    best_value, best_dist = min(outcomes, key=lambda vd: vd[0])
    if return_dist:
        return best_value, best_dist
    return best_value
