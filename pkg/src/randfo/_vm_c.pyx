# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled interpreter for programs built by ``_compile`` (same semantics as
``_vm_py``)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t

from ._compile import memo_layout

BACKEND = "cython"

cdef enum:
    OP_TRUE = 0
    OP_FALSE = 1
    OP_ATOM = 2
    OP_EQ = 3
    OP_NOT = 4
    OP_AND = 5
    OP_OR = 6
    OP_IFF = 7
    OP_EXISTS = 8
    OP_FORALL = 9
    OP_ATLEAST = 10
    OP_EXACT1 = 11


cdef class Machine:
    cdef object prog
    cdef public int n
    cdef int32_t[::1] op, nparams, fsize, kval, aux, ch_ptr, ch_shape, ch_arg, at_arg, argv, arity
    cdef int64_t[::1] rel_off, memo_off, pw
    cdef uint8_t[::1] tables_v
    cdef int32_t[::1] memo
    cdef int32_t[::1] stack
    cdef int32_t stamp
    cdef public int table_size
    cdef int root

    def __init__(self, prog, int n, per_shape_cap=1 << 22, total_cap=1 << 26):
        self.prog = prog
        self.n = n
        self.op = np.ascontiguousarray(prog.op, dtype=np.int32)
        self.nparams = np.ascontiguousarray(prog.nparams, dtype=np.int32)
        self.fsize = np.ascontiguousarray(prog.fsize, dtype=np.int32)
        self.kval = np.ascontiguousarray(prog.kval, dtype=np.int32)
        self.aux = np.ascontiguousarray(prog.aux, dtype=np.int32)
        self.ch_ptr = np.ascontiguousarray(prog.ch_ptr, dtype=np.int32)
        self.ch_shape = np.ascontiguousarray(prog.ch_shape if prog.ch_shape.size else np.zeros(1, np.int32), dtype=np.int32)
        self.ch_arg = np.ascontiguousarray(prog.ch_arg if prog.ch_arg.size else np.zeros(1, np.int32), dtype=np.int32)
        self.at_arg = np.ascontiguousarray(prog.at_arg, dtype=np.int32)
        self.argv = np.ascontiguousarray(prog.argv if prog.argv.size else np.zeros(1, np.int32), dtype=np.int32)
        ar = [int(a) for a in prog.arities]
        self.arity = np.ascontiguousarray(np.array(ar + [0], dtype=np.int32))
        offs = [0]
        run = 0
        for a in ar:
            run += n ** a
            offs.append(run)
        self.rel_off = np.array(offs, dtype=np.int64)
        self.table_size = run
        self.tables_v = np.zeros(max(self.table_size, 1), dtype=np.uint8)
        moff, total = memo_layout(prog, n, per_shape_cap, total_cap)
        self.memo_off = np.ascontiguousarray(moff, dtype=np.int64)
        self.memo = np.zeros(max(total, 1), dtype=np.int32)
        self.stamp = 1
        self.stack = np.zeros(prog.stack_need + 4, dtype=np.int32)
        maxp = int(max(prog.nparams.max() if prog.nparams.size else 0, 0)) + 2
        self.pw = np.array([n ** i for i in range(maxp)], dtype=np.int64)
        self.root = prog.root

    def set_tables(self, flat):
        arr = np.ascontiguousarray(flat, dtype=np.uint8).reshape(-1)
        if arr.size != self.table_size:
            raise ValueError("table vector has the wrong length")
        cdef uint8_t[::1] src
        if self.table_size:
            src = arr
            self.tables_v[:] = src
        self.new_epoch()

    def new_epoch(self):
        self._bump()

    cdef inline void _bump(self):
        self.stamp += 1
        if self.stamp >= (1 << 29):
            self.memo[:] = 0
            self.stamp = 1

    cdef int _call(self, int c, int base, int cb):
        cdef int cs = self.ch_shape[c]
        cdef int p = self.ch_arg[c]
        cdef int j
        cdef int np_ = self.nparams[cs]
        for j in range(np_):
            self.stack[cb + j] = self.stack[base + self.argv[p + j]]
        return self._ev(cs, cb)

    cdef int _ev(self, int s, int base):
        cdef int op = self.op[s]
        cdef int r, p, j, c, c0, c1, cb, npar, slot, v, k, cnt, res
        cdef int64_t idx, mo
        cdef int n = self.n
        cdef int32_t m
        if op == OP_ATOM:
            r = self.aux[s]
            p = self.at_arg[s]
            idx = 0
            for j in range(self.arity[r]):
                idx = idx * n + self.stack[base + self.argv[p + j]]
            return self.tables_v[self.rel_off[r] + idx]
        if op == OP_EQ:
            return 1 if self.stack[base] == self.stack[base + 1] else 0
        if op == OP_TRUE:
            return 1
        if op == OP_FALSE:
            return 0
        cb = base + self.fsize[s]
        c0 = self.ch_ptr[s]
        c1 = self.ch_ptr[s + 1]
        if op == OP_NOT:
            return 1 - self._call(c0, base, cb)
        if op == OP_AND:
            for c in range(c0, c1):
                if not self._call(c, base, cb):
                    return 0
            return 1
        if op == OP_OR:
            for c in range(c0, c1):
                if self._call(c, base, cb):
                    return 1
            return 0
        if op == OP_IFF:
            return 1 if self._call(c0, base, cb) == self._call(c0 + 1, base, cb) else 0
        npar = self.nparams[s]
        mo = self.memo_off[s]
        idx = 0
        if mo >= 0:
            for j in range(npar):
                idx += self.stack[base + j] * self.pw[j]
            m = self.memo[mo + idx]
            if (m >> 1) == self.stamp:
                return m & 1
        slot = base + npar
        res = 0
        if op == OP_EXISTS:
            for v in range(n):
                self.stack[slot] = v
                if self._call(c0, base, cb):
                    res = 1
                    break
        elif op == OP_FORALL:
            res = 1
            for v in range(n):
                self.stack[slot] = v
                if not self._call(c0, base, cb):
                    res = 0
                    break
        elif op == OP_ATLEAST:
            k = self.kval[s]
            cnt = 0
            for v in range(n):
                if cnt + (n - v) < k:
                    break
                self.stack[slot] = v
                if self._call(c0, base, cb):
                    cnt += 1
                    if cnt >= k:
                        res = 1
                        break
        else:
            cnt = 0
            for v in range(n):
                self.stack[slot] = v
                if self._call(c0, base, cb):
                    cnt += 1
                    if cnt > 1:
                        break
            res = 1 if cnt == 1 else 0
        if mo >= 0:
            self.memo[mo + idx] = self.stamp * 2 + res
        return res

    def eval_root(self, values=()):
        cdef int i = 0
        for v in values:
            self.stack[i] = int(v)
            i += 1
        return bool(self._ev(self.root, 0))

    def table(self, positions, int arity):
        cdef int n = self.n
        cdef int64_t total = n ** arity
        cdef int64_t idx, rem
        cdef int j, i
        cdef int npos = len(positions)
        cdef int32_t[::1] pos = np.ascontiguousarray(np.array(list(positions) + [0], dtype=np.int32))
        cdef int32_t[::1] digits = np.zeros(arity + 1, dtype=np.int32)
        out = np.zeros(total, dtype=np.uint8)
        cdef uint8_t[::1] ov = out
        for idx in range(total):
            rem = idx
            for j in range(arity - 1, -1, -1):
                digits[j] = rem % n
                rem = rem // n
            for i in range(npos):
                self.stack[i] = digits[pos[i]]
            ov[idx] = self._ev(self.root, 0)
        return out

    cdef void _load(self, int64_t idx, int32_t[::1] bp, int64_t[::1] bq, int nbits):
        cdef int j, q
        cdef uint8_t val
        for j in range(nbits):
            val = (idx >> (nbits - 1 - j)) & 1
            for q in range(bp[j], bp[j + 1]):
                self.tables_v[bq[q]] = val
        self._bump()

    def count_range(self, bit_ptr, bit_pos, base_tables, int64_t start, int64_t stop):
        cdef int32_t[::1] bp = np.ascontiguousarray(bit_ptr, dtype=np.int32)
        cdef int64_t[::1] bq = np.ascontiguousarray(np.asarray(list(bit_pos) + [0], dtype=np.int64))
        cdef int nbits = bp.shape[0] - 1
        cdef int64_t idx, total = 0
        self.set_tables(base_tables)
        for idx in range(start, stop):
            self._load(idx, bp, bq, nbits)
            total += self._ev(self.root, 0)
        return total

    def models_range(self, bit_ptr, bit_pos, base_tables, int64_t start, int64_t stop):
        cdef int32_t[::1] bp = np.ascontiguousarray(bit_ptr, dtype=np.int32)
        cdef int64_t[::1] bq = np.ascontiguousarray(np.asarray(list(bit_pos) + [0], dtype=np.int64))
        cdef int nbits = bp.shape[0] - 1
        cdef int64_t idx
        out = []
        self.set_tables(base_tables)
        for idx in range(start, stop):
            self._load(idx, bp, bq, nbits)
            if self._ev(self.root, 0):
                out.append(idx)
        return np.array(out, dtype=np.int64)
