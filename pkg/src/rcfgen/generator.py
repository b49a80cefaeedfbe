"""The coupled map lattice that produces the output word stream.

State is a vector x[0..n] of reals strictly inside (0, 1).  One step
replaces every coordinate simultaneously:

    divisor r_j = r_min + (r_max - r_min) * x[psi(j)]
    x'_j       = frac(r_j / x_j)

where psi is either the self-indexing rule psi(j) = floor((n+1) x_j)
or a fixed cyclic shift.  Whenever finite-precision arithmetic pushes a
coordinate out of the open interval (an exact-integer quotient, an
overflow, a NaN) that coordinate is replaced by a fresh entropy draw
instead, and a reseed counter is incremented.

Output is the row-major stream of truncated words floor(x[t, j] * 2^w):
the seed row itself first, then each stepped row in coordinate order.

Precision contract: for 32-bit words the state is stored in float64,
and the quotient plus its fractional part are evaluated in compensated
double-double arithmetic (~106 significand bits), comfortably above
the 64-bit-significand minimum the update rule needs to keep low-order
output bits meaningful.  For 64-bit words the state itself must carry
more than 53 bits, so extended-precision ``numpy.longdouble`` storage
and arithmetic are used; platforms whose longdouble is plain double
cannot honor that contract and are rejected for 64-bit mode.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .entropy import OsEntropy
from .errors import BufferSizeError, InvalidSeedError, QualityWarning

_SPLIT = 134217729.0  # 2**27 + 1, Dekker splitting constant for float64

_LONGDOUBLE_OK = np.finfo(np.longdouble).nmant >= 63


@dataclass(frozen=True)
class GeneratorConfig:
    """Structural parameters of the generator.

    ``n`` is the largest coordinate index (the state has n+1 entries);
    ``r_min``/``r_max`` bound the per-coordinate divisors; ``psi`` is
    ``"self"`` or ``"cyclic"`` (with ``cyclic_offset``); ``word_size``
    is 32 or 64.  ``synchronous=False`` selects the in-place variant
    where coordinates update sequentially and psi lookups can see
    already-updated entries.
    """

    n: int = 1000
    r_min: float = 1000.0
    r_max: float = 10000.0
    psi: str = "self"
    cyclic_offset: int = 1
    word_size: int = 32
    synchronous: bool = True

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if not 0 < self.r_min < self.r_max:
            raise ValueError(f"need 0 < r_min < r_max, got [{self.r_min}, {self.r_max}]")
        if self.psi not in ("self", "cyclic"):
            raise ValueError(f"psi must be 'self' or 'cyclic', got {self.psi!r}")
        if self.psi == "cyclic":
            if self.cyclic_offset < 1:
                raise ValueError("cyclic_offset must be >= 1")
            if self.cyclic_offset % (self.n + 1) == 0:
                raise ValueError("cyclic_offset must not be a multiple of n+1 "
                                 "(the shift would have fixed points)")
        if self.word_size not in (32, 64):
            raise ValueError(f"word_size must be 32 or 64, got {self.word_size}")
        if self.word_size == 64 and not _LONGDOUBLE_OK:
            raise RuntimeError("64-bit mode needs extended-precision longdouble "
                               "state, which this platform does not provide")
        if self.r_max > 10000.0 or self.r_min > 1000.0:
            warnings.warn(
                "divisor bounds beyond [1000, 10000] make overflow reseeds more "
                "likely and tend to lower output quality",
                QualityWarning,
                stacklevel=3,
            )


class GeneratorState:
    """A single-owner generator instance: state vector plus stream cursor.

    Build one with :func:`seed_from_entropy` or :func:`seed_from_vector`.
    Not safe for concurrent mutation; independent instances may run in
    parallel freely.
    """

    def __init__(self, config: GeneratorConfig, x: np.ndarray, source):
        self.config = config
        self.x = x
        self.source = source
        self.t = 0
        self.j_cursor = 0
        self.reseed_count = 0
        self._dtype = np.longdouble if config.word_size == 64 else np.float64
        self._word_dtype = np.uint64 if config.word_size == 64 else np.uint32
        self._scale = self._dtype(2.0) ** config.word_size
        self._row_words = None

    # -- indexing ----------------------------------------------------------

    def psi(self, j: int) -> int:
        """Index of the coordinate that supplies coordinate j's divisor."""
        n = self.config.n
        if not 0 <= j <= n:
            raise IndexError(f"j must lie in [0, {n}], got {j}")
        if self.config.psi == "cyclic":
            return (j + self.config.cyclic_offset) % (n + 1)
        # x < 1 keeps floor((n+1)x) <= n; the min() is a guard against
        # rounding anomalies only.
        return min(int((n + 1) * float(self.x[j])), n)

    # -- dynamics ----------------------------------------------------------

    def step(self) -> "GeneratorState":
        """Advance every coordinate one iteration; returns self."""
        if self.config.synchronous:
            self._step_synchronous()
        else:
            self._step_sequential()
        self.t += 1
        self.j_cursor = 0
        self._row_words = None
        return self

    def _psi_indices(self) -> np.ndarray:
        n = self.config.n
        if self.config.psi == "cyclic":
            return (np.arange(n + 1) + self.config.cyclic_offset) % (n + 1)
        return np.minimum(((n + 1) * self.x).astype(np.int64), n)

    def _step_synchronous(self) -> None:
        cfg = self.config
        x = self.x
        r = self._dtype(cfg.r_min) + self._dtype(cfg.r_max - cfg.r_min) * x[self._psi_indices()]
        with np.errstate(all="ignore"):
            if cfg.word_size == 64:
                q = r / x
                f = q - np.floor(q)
            else:
                q1 = r / x
                # two_prod(q1, x) via Dekker splitting: p + e == q1 * x exactly
                c = _SPLIT * q1
                qh = c - (c - q1)
                ql = q1 - qh
                c = _SPLIT * x
                xh = c - (c - x)
                xl = x - xh
                p = q1 * x
                e = ((qh * xh - p) + qh * xl + ql * xh) + ql * xl
                q2 = ((r - p) - e) / x
                f = (q1 - np.floor(q1)) + q2
                f = np.where(f >= 1.0, f - 1.0, f)
                f = np.where(f < 0.0, f + 1.0, f)
            bad = ~np.isfinite(f) | (f <= 0.0) | (f >= 1.0)
        if bad.any():
            k = int(bad.sum())
            f[bad] = self.source.uniform_array(k).astype(self._dtype)
            self.reseed_count += k
        self.x = f

    def _step_sequential(self) -> None:
        # In-place variant: psi lookups for later coordinates see the
        # already-updated values of earlier ones.
        cfg = self.config
        n = cfg.n
        x = self.x
        wide = cfg.word_size == 64
        lo = self._dtype(cfg.r_min)
        span = self._dtype(cfg.r_max) - lo
        for j in range(n + 1):
            if cfg.psi == "cyclic":
                idx = (j + cfg.cyclic_offset) % (n + 1)
            else:
                idx = min(int((n + 1) * float(x[j])), n)
            r = lo + span * x[idx]
            if wide:
                with np.errstate(all="ignore"):
                    q = r / x[j]
                    y = q - np.floor(q)
                ok = bool(np.isfinite(y)) and 0.0 < y < 1.0
            else:
                y = _frac_div_dd(float(r), float(x[j]))
                ok = math.isfinite(y) and 0.0 < y < 1.0
            if ok:
                x[j] = y
            else:
                x[j] = self.source.uniform()
                self.reseed_count += 1

    # -- output stream -----------------------------------------------------

    def _current_row(self) -> np.ndarray:
        if self._row_words is None:
            self._row_words = np.floor(self.x * self._scale).astype(self._word_dtype)
        return self._row_words

    def words(self, count: int) -> np.ndarray:
        """Next ``count`` stream words as an array of uint32/uint64."""
        if count < 0:
            raise ValueError("count must be >= 0")
        out = np.empty(count, dtype=self._word_dtype)
        n1 = self.config.n + 1
        filled = 0
        while filled < count:
            row = self._current_row()
            k = min(n1 - self.j_cursor, count - filled)
            out[filled:filled + k] = row[self.j_cursor:self.j_cursor + k]
            self.j_cursor += k
            filled += k
            if self.j_cursor >= n1:
                self.step()
        return out

    def next_word(self) -> int:
        """Next stream word: floor(x[cursor] * 2^word_size), cursor advancing."""
        return int(self.words(1)[0])

    def fill_bytes(self, out) -> None:
        """Fill a writable buffer with consecutive little-endian words."""
        mem = memoryview(out)
        word_bytes = self.config.word_size // 8
        if mem.nbytes % word_bytes:
            raise BufferSizeError(
                f"buffer of {mem.nbytes} bytes is not a multiple of {word_bytes}")
        if mem.nbytes == 0:
            return
        w = self.words(mem.nbytes // word_bytes)
        mem[:] = w.astype("<u4" if word_bytes == 4 else "<u8").tobytes()

    def unit_stream(self, count: int) -> np.ndarray:
        """Next ``count`` outputs scaled to [0, 1) as float64."""
        return self.words(count).astype(np.float64) * 2.0 ** -self.config.word_size

    def skip(self, count: int) -> None:
        """Discard ``count`` stream words (burn-in)."""
        n1 = self.config.n + 1
        remaining = count
        while remaining > 0:
            k = min(n1 - self.j_cursor, remaining)
            self.j_cursor += k
            remaining -= k
            if self.j_cursor >= n1:
                self.step()


def _frac_div_dd(r: float, x: float) -> float:
    """frac(r/x) with the quotient refined to double-double accuracy."""
    q1 = r / x
    if not math.isfinite(q1):
        return math.nan
    c = _SPLIT * q1
    qh = c - (c - q1)
    ql = q1 - qh
    c = _SPLIT * x
    xh = c - (c - x)
    xl = x - xh
    p = q1 * x
    e = ((qh * xh - p) + qh * xl + ql * xh) + ql * xl
    q2 = ((r - p) - e) / x
    f = (q1 - math.floor(q1)) + q2
    if f >= 1.0:
        f -= 1.0
    elif f < 0.0:
        f += 1.0
    return f


def seed_from_entropy(config: GeneratorConfig, source=None) -> GeneratorState:
    """Fresh state with every coordinate drawn independently from ``source``.

    The source also serves later reseed draws, so a deterministic
    source makes the whole output stream reproducible.  Defaults to
    :class:`rcfgen.entropy.OsEntropy`.
    """
    src = source if source is not None else OsEntropy()
    n1 = config.n + 1
    if config.word_size == 64:
        # use all 64 bits so the extended-precision state is fully seeded
        u = src.u64_array(n1)
        x = u / np.longdouble(2.0) ** 64
        while True:
            zeros = x == 0
            if not zeros.any():
                break
            x[zeros] = src.u64_array(int(zeros.sum())) / np.longdouble(2.0) ** 64
    else:
        x = src.uniform_array(n1)
    return GeneratorState(config, x, src)


def seed_from_vector(config: GeneratorConfig, v, source=None) -> GeneratorState:
    """State seeded with an explicit vector of n+1 reals, each in (0, 1).

    A constant vector is accepted (it is legal, if degenerate: all
    coordinates then evolve identically forever).  ``source`` supplies
    any later reseed draws.
    """
    dtype = np.longdouble if config.word_size == 64 else np.float64
    x = np.asarray(v, dtype=dtype).copy()
    if x.ndim != 1 or x.shape[0] != config.n + 1:
        raise InvalidSeedError(
            f"seed vector must have length {config.n + 1}, got shape {x.shape}")
    if not bool(np.all((x > 0.0) & (x < 1.0))):
        raise InvalidSeedError("every seed entry must lie strictly inside (0, 1)")
    src = source if source is not None else OsEntropy()
    return GeneratorState(config, x, src)
