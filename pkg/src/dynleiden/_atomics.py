"""Lock-free primitives for numba kernels.

numba exposes no atomics on CPU targets, so these lower straight to LLVM
``atomicrmw`` / ``cmpxchg`` on a pointer into the array buffer.  Floats are
compared bitwise in ``atomic_cas`` (cmpxchg only accepts integer operands).
"""

from llvmlite import ir
from numba import types
from numba.core import cgutils
from numba.extending import intrinsic

__all__ = ["atomic_add", "atomic_cas"]


def _item_pointer(context, builder, arr_t, arr, idx, idx_t):
    aryobj = context.make_array(arr_t)(context, builder, arr)
    idx = context.cast(builder, idx, idx_t, types.intp)
    return cgutils.get_item_pointer(context, builder, arr_t, aryobj, [idx])


@intrinsic
def atomic_add(typingctx, arr, idx, val):
    """``old = arr[idx]; arr[idx] += val`` atomically; returns ``old``."""
    if not isinstance(arr, types.Array) or not isinstance(idx, types.Integer):
        return None
    dtype = arr.dtype

    def codegen(context, builder, sig, args):
        ary, index, value = args
        ptr = _item_pointer(context, builder, sig.args[0], ary, index, sig.args[1])
        value = context.cast(builder, value, sig.args[2], dtype)
        op = "fadd" if isinstance(dtype, types.Float) else "add"
        return builder.atomic_rmw(op, ptr, value, "monotonic")

    return dtype(arr, idx, val), codegen


@intrinsic
def atomic_cas(typingctx, arr, idx, old, new):
    """Compare-and-swap ``arr[idx]``: store ``new`` iff it equals ``old``.

    Returns the value observed before the operation, so the swap succeeded
    iff the return value equals ``old``.
    """
    if not isinstance(arr, types.Array) or not isinstance(idx, types.Integer):
        return None
    dtype = arr.dtype

    def codegen(context, builder, sig, args):
        ary, index, expected, desired = args
        ptr = _item_pointer(context, builder, sig.args[0], ary, index, sig.args[1])
        expected = context.cast(builder, expected, sig.args[2], dtype)
        desired = context.cast(builder, desired, sig.args[3], dtype)
        if isinstance(dtype, types.Float):
            ity = ir.IntType(dtype.bitwidth)
            iptr = builder.bitcast(ptr, ity.as_pointer())
            res = builder.cmpxchg(
                iptr,
                builder.bitcast(expected, ity),
                builder.bitcast(desired, ity),
                "monotonic",
                "monotonic",
            )
            return builder.bitcast(
                builder.extract_value(res, 0), context.get_value_type(dtype)
            )
        res = builder.cmpxchg(ptr, expected, desired, "monotonic", "monotonic")
        return builder.extract_value(res, 0)

    return dtype(arr, idx, old, new), codegen
