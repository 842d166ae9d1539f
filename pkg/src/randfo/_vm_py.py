"""Pure-Python interpreter for compiled programs (fallback backend).

Mirrors ``_vm_c.pyx`` operation for operation; the two are cross-checked by
the test-suite.
"""

from __future__ import annotations

import numpy as np

from ._compile import (OP_AND, OP_ATLEAST, OP_ATOM, OP_EQ, OP_EXISTS, OP_FALSE, OP_FORALL,
                       OP_IFF, OP_NOT, OP_OR, OP_TRUE, Program, memo_layout)

BACKEND = "python"


class Machine:
    def __init__(self, prog: Program, n: int, per_shape_cap: int = 1 << 22, total_cap: int = 1 << 26):
        self.prog = prog
        self.n = n
        self.op = prog.op.tolist()
        self.nparams = prog.nparams.tolist()
        self.fsize = prog.fsize.tolist()
        self.kval = prog.kval.tolist()
        self.aux = prog.aux.tolist()
        self.ch_ptr = prog.ch_ptr.tolist()
        self.ch_shape = prog.ch_shape.tolist()
        self.ch_arg = prog.ch_arg.tolist()
        self.at_arg = prog.at_arg.tolist()
        self.argv = prog.argv.tolist()
        self.arity = prog.arities.tolist()
        offs = [0]
        for a in self.arity:
            offs.append(offs[-1] + n**a)
        self.rel_off = offs[:-1]
        self.table_size = offs[-1]
        self.tables = [0] * self.table_size
        moff, total = memo_layout(prog, n, per_shape_cap, total_cap)
        self.memo_off = moff.tolist()
        self.memo = [0] * total
        self.stamp = 1
        self.stack = [0] * (prog.stack_need + 4)
        self.pw = [n**i for i in range(max(self.nparams + [0]) + 2)]

    # state --------------------------------------------------------------------
    def set_tables(self, flat) -> None:
        flat = np.asarray(flat, dtype=np.uint8)
        if flat.size != self.table_size:
            raise ValueError("table vector has the wrong length")
        self.tables = flat.tolist()
        self.new_epoch()

    def new_epoch(self) -> None:
        self.stamp += 1

    # evaluation -------------------------------------------------------------------
    def _ev(self, s: int, base: int) -> int:
        op = self.op[s]
        stk = self.stack
        if op == OP_ATOM:
            r = self.aux[s]
            p = self.at_arg[s]
            argv = self.argv
            idx = 0
            n = self.n
            for j in range(self.arity[r]):
                idx = idx * n + stk[base + argv[p + j]]
            return self.tables[self.rel_off[r] + idx]
        if op == OP_EQ:
            return 1 if stk[base] == stk[base + 1] else 0
        if op == OP_TRUE:
            return 1
        if op == OP_FALSE:
            return 0
        cb = base + self.fsize[s]
        c0, c1 = self.ch_ptr[s], self.ch_ptr[s + 1]
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
        # binders
        npar = self.nparams[s]
        mo = self.memo_off[s]
        if mo >= 0:
            idx = 0
            for i in range(npar):
                idx += stk[base + i] * self.pw[i]
            m = self.memo[mo + idx]
            if (m >> 1) == self.stamp:
                return m & 1
        n = self.n
        slot = base + npar
        res = 0
        if op == OP_EXISTS:
            for v in range(n):
                stk[slot] = v
                if self._call(c0, base, cb):
                    res = 1
                    break
        elif op == OP_FORALL:
            res = 1
            for v in range(n):
                stk[slot] = v
                if not self._call(c0, base, cb):
                    res = 0
                    break
        elif op == OP_ATLEAST:
            k = self.kval[s]
            cnt = 0
            for v in range(n):
                if cnt + (n - v) < k:
                    break
                stk[slot] = v
                if self._call(c0, base, cb):
                    cnt += 1
                    if cnt >= k:
                        res = 1
                        break
        else:  # exactly one
            cnt = 0
            for v in range(n):
                stk[slot] = v
                if self._call(c0, base, cb):
                    cnt += 1
                    if cnt > 1:
                        break
            res = 1 if cnt == 1 else 0
        if mo >= 0:
            self.memo[mo + idx] = self.stamp * 2 + res
        return res

    def _call(self, c: int, base: int, cb: int) -> int:
        cs = self.ch_shape[c]
        p = self.ch_arg[c]
        stk = self.stack
        argv = self.argv
        for j in range(self.nparams[cs]):
            stk[cb + j] = stk[base + argv[p + j]]
        return self._ev(cs, cb)

    def eval_root(self, values=()) -> bool:
        for i, v in enumerate(values):
            self.stack[i] = int(v)
        return bool(self._ev(self.prog.root, 0))

    def table(self, positions, arity: int) -> np.ndarray:
        """Truth table over all ``n**arity`` tuples; ``positions[i]`` is the
        tuple coordinate feeding root parameter ``i``."""
        n = self.n
        out = np.zeros(n**arity, np.uint8)
        digits = [0] * arity
        for idx in range(n**arity):
            rem = idx
            for j in range(arity - 1, -1, -1):
                rem, digits[j] = divmod(rem, n)
            for i, pos in enumerate(positions):
                self.stack[i] = digits[pos]
            out[idx] = self._ev(self.prog.root, 0)
        return out

    # enumeration --------------------------------------------------------------------
    def _load(self, idx: int, bit_ptr, bit_pos, nbits: int) -> None:
        t = self.tables
        for j in range(nbits):
            val = (idx >> (nbits - 1 - j)) & 1
            for q in range(bit_ptr[j], bit_ptr[j + 1]):
                t[bit_pos[q]] = val
        self.stamp += 1

    def count_range(self, bit_ptr, bit_pos, base_tables, start: int, stop: int) -> int:
        self.tables = np.asarray(base_tables, np.uint8).tolist()
        bp, bq = list(bit_ptr), list(bit_pos)
        nbits = len(bp) - 1
        total = 0
        for idx in range(start, stop):
            self._load(idx, bp, bq, nbits)
            total += self._ev(self.prog.root, 0)
        return total

    def models_range(self, bit_ptr, bit_pos, base_tables, start: int, stop: int) -> np.ndarray:
        self.tables = np.asarray(base_tables, np.uint8).tolist()
        bp, bq = list(bit_ptr), list(bit_pos)
        nbits = len(bp) - 1
        out = []
        for idx in range(start, stop):
            self._load(idx, bp, bq, nbits)
            if self._ev(self.prog.root, 0):
                out.append(idx)
        return np.array(out, dtype=np.int64)
