"""Direct, definition-level evaluators used as test oracles."""

from itertools import product


def holds(A, atoms, env):
    def val(t):
        if t in env:
            return env[t]
        return A.constants[t]
    for r, args in atoms:
        vals = tuple(val(a) for a in args)
        if r == "=":
            if vals[0] != vals[1]:
                return False
        elif not A.holds(r, vals):
            return False
    return True


def play(A, phi, tuples, env=None, i=0, u=0):
    """Game value with the universal player confined to ``tuples``."""
    env = env or {}
    if i == len(phi.prefix):
        return holds(A, phi.atoms, env)
    q, v = phi.prefix[i]
    if q == "forall":
        choices = sorted({t[u] for t in tuples})
        return all(play(A, phi, [t for t in tuples if t[u] == a], {**env, v: a}, i + 1, u + 1)
                   for a in choices)
    return any(play(A, phi, tuples, {**env, v: a}, i + 1, u) for a in A.elements)


def truth(A, phi):
    m = len(phi.universals)
    return play(A, phi, list(product(A.elements, repeat=m)))


def restricted(A, phi, omega):
    return all(play(A, phi, sorted(adv.tuples)) for adv in omega.adversaries)
