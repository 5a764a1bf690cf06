# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled row evaluator for bytecode from ``triggerforge.bytecode``.

Same contract as ``_pykernel.eval_rows``: status 0 ok, 1 division or
modulo by zero, 2 int64 overflow somewhere in the row's evaluation.
"""
from libc.stdint cimport int64_t, uint64_t, uint8_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    static inline int tf_add(long long a, long long b, long long *r) { return __builtin_add_overflow(a, b, r); }
    static inline int tf_sub(long long a, long long b, long long *r) { return __builtin_sub_overflow(a, b, r); }
    static inline int tf_mul(long long a, long long b, long long *r) { return __builtin_mul_overflow(a, b, r); }
    """
    int tf_add(long long a, long long b, long long *r) nogil
    int tf_sub(long long a, long long b, long long *r) nogil
    int tf_mul(long long a, long long b, long long *r) nogil

cdef enum:
    CONST = 0
    PARAM = 1
    VAR = 2
    ACCESS = 3
    NEG = 4
    ADD = 5
    SUB = 6
    MUL = 7
    DIV = 8
    MOD = 9
    ABS = 10
    LT = 11
    LE = 12
    GT = 13
    GE = 14
    EQ = 15
    NE = 16
    NOT = 17
    JZK = 18
    JNZK = 19

cdef long long LLMIN = -9223372036854775807LL - 1


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = z + 0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline long long seeded(uint64_t seed, uint64_t key, long long index) noexcept nogil:
    cdef uint64_t h = mix64(mix64(seed ^ (key << 20)) ^ <uint64_t>index)
    cdef uint64_t density = 4 + (seed % 16) * 6
    if (h & 0xFF) >= density:
        return 0
    return <long long>((h >> 32) % 7) - 3


cdef int run_row(const int64_t[::1] code, Py_ssize_t ninstr, const int64_t[::1] params,
                 const int64_t[:, ::1] cols, Py_ssize_t r, uint64_t seed,
                 long long *stack, long long *result) noexcept nogil:
    cdef Py_ssize_t pc = 0
    cdef Py_ssize_t sp = 0
    cdef long long a, b, v
    cdef int64_t op, arg
    while pc < ninstr:
        op = code[2 * pc]
        arg = code[2 * pc + 1]
        pc += 1
        if op == CONST:
            stack[sp] = arg
            sp += 1
        elif op == PARAM:
            stack[sp] = params[arg]
            sp += 1
        elif op == VAR:
            stack[sp] = cols[r, arg]
            sp += 1
        elif op == ACCESS:
            stack[sp - 1] = seeded(seed, <uint64_t>arg, stack[sp - 1])
        elif op == NEG:
            if stack[sp - 1] == LLMIN:
                return 2
            stack[sp - 1] = -stack[sp - 1]
        elif op == ABS:
            if stack[sp - 1] == LLMIN:
                return 2
            if stack[sp - 1] < 0:
                stack[sp - 1] = -stack[sp - 1]
        elif op == NOT:
            stack[sp - 1] = stack[sp - 1] == 0
        elif op == JZK:
            if stack[sp - 1] == 0:
                pc = arg
            else:
                sp -= 1
        elif op == JNZK:
            if stack[sp - 1] != 0:
                stack[sp - 1] = 1
                pc = arg
            else:
                sp -= 1
        else:
            b = stack[sp - 1]
            a = stack[sp - 2]
            sp -= 1
            if op == ADD:
                if tf_add(a, b, &v):
                    return 2
            elif op == SUB:
                if tf_sub(a, b, &v):
                    return 2
            elif op == MUL:
                if tf_mul(a, b, &v):
                    return 2
            elif op == DIV or op == MOD:
                if b == 0:
                    return 1
                if a == LLMIN and b == -1:
                    return 2
                v = a / b if op == DIV else a % b
            elif op == LT:
                v = a < b
            elif op == LE:
                v = a <= b
            elif op == GT:
                v = a > b
            elif op == GE:
                v = a >= b
            elif op == EQ:
                v = a == b
            else:
                v = a != b
            stack[sp - 1] = v
    result[0] = stack[0]
    return 0


def eval_rows(program, const int64_t[::1] params, const int64_t[:, ::1] cols, uint64_t seed,
              int64_t[::1] out, uint8_t[::1] status):
    cdef const int64_t[::1] code = program.code
    cdef Py_ssize_t ninstr = code.shape[0] // 2
    cdef Py_ssize_t n = cols.shape[0]
    cdef Py_ssize_t r
    cdef long long value
    cdef int st
    cdef long long *stack = <long long *>malloc((program.stack + 1) * sizeof(long long))
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(n):
                st = run_row(code, ninstr, params, cols, r, seed, stack, &value)
                status[r] = st
                if st == 0:
                    out[r] = value
    finally:
        free(stack)
