"""Hot numeric loops: postfix expression evaluation and Pareto dominance.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics (bitwise-identical results, NaN for
singularities).  The numba path is used when numba imports cleanly and the
environment variable ``PARETOGP_DISABLE_NUMBA`` is unset or ``0``.

Programs are flat postfix arrays produced by :func:`paretogp.expr.tree.compile_tree`:

* ``ops``    int64 opcodes (see the ``OP_*`` constants)
* ``args``   int64 operand: constant slot, variable column, or arity
* ``consts`` float64 constant pool
"""

import os

import numpy as np

OP_CONST = 0
OP_VAR = 1
OP_PLUS = 2
OP_TIMES = 3
OP_SUBTRACT = 4
OP_DIVIDE = 5
OP_MINUS = 6
OP_SQRT = 7
OP_SQUARE = 8
OP_INVERSE = 9


def _env_disabled() -> bool:
    return os.environ.get("PARETOGP_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")


try:
    if _env_disabled():
        raise ImportError("numba disabled by PARETOGP_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# -- numpy implementations ---------------------------------------------------

def eval_program_numpy(ops, args, consts, X):
    n = X.shape[0]
    stack = []
    with np.errstate(all="ignore"):
        for i in range(ops.shape[0]):
            op = ops[i]
            if op == OP_CONST:
                stack.append(np.full(n, consts[args[i]]))
            elif op == OP_VAR:
                stack.append(X[:, args[i]].astype(np.float64, copy=True))
            elif op == OP_PLUS or op == OP_TIMES:
                k = args[i]
                operands = stack[len(stack) - k:]
                del stack[len(stack) - k:]
                acc = operands[0].copy()
                for v in operands[1:]:
                    if op == OP_PLUS:
                        acc += v
                    else:
                        acc *= v
                stack.append(acc)
            elif op == OP_SUBTRACT:
                b = stack.pop()
                a = stack.pop()
                stack.append(a - b)
            elif op == OP_DIVIDE:
                b = stack.pop()
                a = stack.pop()
                stack.append(np.where(b == 0.0, np.nan, a / b))
            elif op == OP_MINUS:
                stack.append(-stack.pop())
            elif op == OP_SQRT:
                a = stack.pop()
                stack.append(np.where(a < 0.0, np.nan, np.sqrt(a)))
            elif op == OP_SQUARE:
                a = stack.pop()
                stack.append(a * a)
            elif op == OP_INVERSE:
                a = stack.pop()
                stack.append(np.where(a == 0.0, np.nan, 1.0 / a))
            else:
                raise ValueError(f"unknown opcode {op}")
    return stack[0]


def dominance_matrix_numpy(F):
    """``D[i, j]`` is True when row ``i`` Pareto-dominates row ``j`` (minimisation)."""
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


# -- numba implementations ---------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, error_model="numpy")
    def eval_program_numba(ops, args, consts, X):
        n = X.shape[0]
        m = ops.shape[0]
        out = np.empty(n)
        stack = np.empty(m)
        for r in range(n):
            sp = 0
            for i in range(m):
                op = ops[i]
                if op == OP_CONST:
                    stack[sp] = consts[args[i]]
                    sp += 1
                elif op == OP_VAR:
                    stack[sp] = X[r, args[i]]
                    sp += 1
                elif op == OP_PLUS:
                    k = args[i]
                    base = sp - k
                    acc = stack[base]
                    for j in range(1, k):
                        acc += stack[base + j]
                    stack[base] = acc
                    sp = base + 1
                elif op == OP_TIMES:
                    k = args[i]
                    base = sp - k
                    acc = stack[base]
                    for j in range(1, k):
                        acc *= stack[base + j]
                    stack[base] = acc
                    sp = base + 1
                elif op == OP_SUBTRACT:
                    stack[sp - 2] = stack[sp - 2] - stack[sp - 1]
                    sp -= 1
                elif op == OP_DIVIDE:
                    b = stack[sp - 1]
                    if b == 0.0:
                        stack[sp - 2] = np.nan
                    else:
                        stack[sp - 2] = stack[sp - 2] / b
                    sp -= 1
                elif op == OP_MINUS:
                    stack[sp - 1] = -stack[sp - 1]
                elif op == OP_SQRT:
                    a = stack[sp - 1]
                    stack[sp - 1] = np.nan if a < 0.0 else np.sqrt(a)
                elif op == OP_SQUARE:
                    a = stack[sp - 1]
                    stack[sp - 1] = a * a
                elif op == OP_INVERSE:
                    a = stack[sp - 1]
                    stack[sp - 1] = np.nan if a == 0.0 else 1.0 / a
            out[r] = stack[0]
        return out

    @njit(cache=True)
    def dominance_matrix_numba(F):
        n, d = F.shape
        D = np.zeros((n, n), dtype=np.bool_)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                le = True
                lt = False
                for k in range(d):
                    if F[i, k] > F[j, k]:
                        le = False
                        break
                    if F[i, k] < F[j, k]:
                        lt = True
                D[i, j] = le and lt
        return D

    eval_program = eval_program_numba
    dominance_matrix = dominance_matrix_numba
    BACKEND = "numba"
else:
    eval_program = eval_program_numpy
    dominance_matrix = dominance_matrix_numpy
    BACKEND = "numpy"
