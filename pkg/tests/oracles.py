"""Independent reference computations shared by several test modules."""
import itertools

import numpy as np


def brute_sigma(N, a0, a1, selected):
    """Average of product states over every admissible label sequence."""
    rhos = [np.diag([a0, 1 - a0]), np.diag([a1, 1 - a1])]
    acc = np.zeros((2 ** (N - 1),) * 2)
    count = 0
    for seq in itertools.product((0, 1), repeat=N - 1):
        if all(s == selected for s in seq):
            continue  # the whole batch would share one label
        m = np.array([[1.0]])
        for s in seq:
            m = np.kron(m, rhos[s])
        acc += m
        count += 1
    return acc / count
