"""Pure-Python dynamic-programming kernels.

Fallback twin of the compiled module ``capedit._speedups``; both expose the
same functions with identical results. Sequences are int token ids; op codes
are OP_KEEP=0, OP_DELETE=1, OP_ADD=2.

The cost model has no substitution: KEEP costs 0 and is only legal on equal
tokens, DELETE and ADD cost 1 each, so the minimum cost is
len(a) + len(b) - 2*LCS(a, b).
"""

OP_KEEP = 0
OP_DELETE = 1
OP_ADD = 2


def lcs_len(a, b):
    """Length of the longest common subsequence of two int sequences."""
    a = list(a)
    b = list(b)
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0
    row = [0] * (lb + 1)
    for i in range(1, la + 1):
        ai = a[i - 1]
        diag = 0
        for j in range(1, lb + 1):
            tmp = row[j]
            if ai == b[j - 1]:
                v = diag + 1
            else:
                v = row[j] if row[j] >= row[j - 1] else row[j - 1]
            row[j] = v
            diag = tmp
    return row[lb]


def edit_distance(a, b):
    """Minimum KEEP/DELETE/ADD cost turning ``a`` into ``b``."""
    a = list(a)
    b = list(b)
    la, lb = len(a), len(b)
    row = list(range(lb + 1))
    for i in range(1, la + 1):
        ai = a[i - 1]
        diag = row[0]
        row[0] = i
        for j in range(1, lb + 1):
            tmp = row[j]
            if ai == b[j - 1]:
                v = diag
            else:
                v = (row[j] if row[j] < row[j - 1] else row[j - 1]) + 1
            row[j] = v
            diag = tmp
    return row[lb]


def edit_ops(a, b):
    """Canonical minimal op sequence turning ``a`` into ``b``, as bytes.

    Canonical means: walking from the front, prefer KEEP, then DELETE, then
    ADD among the moves that stay on a minimum-cost path. Deletions in a
    mixed gap therefore precede additions, and a run of additions attaches
    immediately before the next kept token.
    """
    a = list(a)
    b = list(b)
    la, lb = len(a), len(b)
    if la == 0:
        return bytes([OP_ADD]) * lb
    if lb == 0:
        return bytes([OP_DELETE]) * la
    w = lb + 1
    # cost[i*w + j] = minimal ops turning a[i:] into b[j:]
    cost = [0] * ((la + 1) * w)
    base = la * w
    for j in range(lb + 1):
        cost[base + j] = lb - j
    for i in range(la - 1, -1, -1):
        base = i * w
        below = base + w
        cost[base + lb] = la - i
        ai = a[i]
        for j in range(lb - 1, -1, -1):
            if ai == b[j]:
                cost[base + j] = cost[below + j + 1]
            else:
                dn = cost[below + j]
                ad = cost[base + j + 1]
                cost[base + j] = (dn if dn < ad else ad) + 1
    ops = bytearray()
    i = j = 0
    while i < la or j < lb:
        here = cost[i * w + j]
        if i < la and j < lb and a[i] == b[j] and here == cost[(i + 1) * w + j + 1]:
            ops.append(OP_KEEP)
            i += 1
            j += 1
        elif i < la and here == cost[(i + 1) * w + j] + 1:
            ops.append(OP_DELETE)
            i += 1
        else:
            ops.append(OP_ADD)
            j += 1
    return bytes(ops)


def edit_distance_block(flat_a, off_a, flat_b, off_b, idx_a, idx_b, out):
    """Batch edit_distance.

    Sequence i of side a is flat_a[off_a[i]:off_a[i+1]]; pair k compares
    sequences idx_a[k] and idx_b[k]; distances land in out[k].
    """
    fa = list(flat_a)
    fb = list(flat_b)
    for k in range(len(idx_a)):
        ia = idx_a[k]
        ib = idx_b[k]
        out[k] = edit_distance(fa[off_a[ia]:off_a[ia + 1]], fb[off_b[ib]:off_b[ib + 1]])


def edit_steps_block(flat_a, off_a, flat_b, off_b, idx_a, idx_b, out):
    """Batch non-KEEP op count, routed through the canonical ops walk."""
    fa = list(flat_a)
    fb = list(flat_b)
    for k in range(len(idx_a)):
        ia = idx_a[k]
        ib = idx_b[k]
        ops = edit_ops(fa[off_a[ia]:off_a[ia + 1]], fb[off_b[ib]:off_b[ib + 1]])
        out[k] = sum(1 for o in ops if o != OP_KEEP)
