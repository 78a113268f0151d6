"""Counter-based random numbers.

Every uniform is a pure function of ``(seed, step, index, lane)``: the four
64-bit words are folded through the splitmix64 finaliser.  Monte Carlo
results therefore depend only on the seed, never on evaluation order or on
how work is chunked.
"""
import numpy as np

ALGORITHM = "splitmix64-counter-hash/v1"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_MASK64 = (1 << 64) - 1


def _mix(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _word(v):
    return np.atleast_1d(np.asarray(v, dtype=np.uint64))


def hash_words(seed, step, index, lane=0):
    """64-bit hash of the counter tuple; broadcasts over array inputs."""
    h = _mix(_word(int(seed) & _MASK64))
    h = _mix(h ^ _word(int(step) & _MASK64))
    h = _mix(h ^ _word(index))
    return _mix(h ^ _word(int(lane) & _MASK64))


def uniforms(seed, step, index, lane=0):
    """Uniforms in ``[0, 1)`` with 53 random bits each."""
    return (hash_words(seed, step, index, lane) >> _S11).astype(np.float64) * 2.0**-53


class CounterStream:
    """Sequential view of the counter generator.

    Parameters
    ----------
    seed : int
        Unsigned 64-bit seed.
    step : int
        Substream selector.

    Examples
    --------
    >>> a = CounterStream(7).random(3)
    >>> b = CounterStream(7).random(3)
    >>> bool((a == b).all())
    True
    """

    algorithm = ALGORITHM

    def __init__(self, seed=0, step=0):
        seed = int(seed)
        if not 0 <= seed <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        self.step = int(step)
        self._counter = 0

    def random(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        idx = np.arange(self._counter, self._counter + n, dtype=np.uint64)
        self._counter += n
        u = uniforms(self.seed, self.step, idx)
        if size is None:
            return float(u[0])
        return u.reshape(size)

    def substream(self, step):
        return CounterStream(self.seed, step)

    def __repr__(self):
        return f"CounterStream(seed={self.seed}, step={self.step}, counter={self._counter})"
