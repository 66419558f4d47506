""" Reflect vectors, B-bit phase alphabets, uniform random generation and
nearest-point quantization.

"""

from collections import namedtuple

import numpy as np

__all__ = ['PhaseAlphabet', 'ReflectVector', 'random_reflect', 'quantize']

#: Largest alphabet handled (2^16 phases per element)
MAX_BITS = 16

#: Tolerance on |entry| - 1 for inputs claimed to be unit modulus
MODULUS_TOL = 1e-6


class PhaseAlphabet(namedtuple('PhaseAlphabet', ['bits'])):
    """ The uniform 2^B-point phase set {2*pi*m/2^B : m = 0 .. 2^B - 1}.

    `bits=0` is accepted as the degenerate single-phase set {0}.

    """
    __slots__ = ()

    def __new__(cls, bits):
        bits = int(bits)
        if not 0 <= bits <= MAX_BITS:
            raise ValueError("alphabet bits must be in [0, %d]; got %d"
                             % (MAX_BITS, bits))
        return super(PhaseAlphabet, cls).__new__(cls, bits)

    @property
    def size(self):
        return 2**self.bits

    @property
    def values(self):
        return 2.*np.pi*np.arange(self.size)/self.size

    @property
    def step(self):
        return 2.*np.pi/self.size

    def __contains__(self, phase):
        return bool(np.any(self.values == phase))


class ReflectVector(namedtuple('ReflectVector', ['phases', 'alphabet'])):
    """ IRS reflection vector phi = exp(j*phases).

    `alphabet` is the PhaseAlphabet every phase belongs to, or None for a
    continuous vector.

    """
    __slots__ = ()

    def __new__(cls, phases, alphabet=None):
        phases = np.array(phases, dtype=float).ravel()
        if phases.size < 1:
            raise ValueError("reflect vector needs at least one element")
        if alphabet is not None:
            in_set = np.isin(phases, alphabet.values)
            if not np.all(in_set):
                raise ValueError("phases outside the %d-bit alphabet"
                                 % alphabet.bits)
        phases.setflags(write=False)
        return super(ReflectVector, cls).__new__(cls, phases, alphabet)

    @classmethod
    def from_entries(cls, entries):
        """ Continuous reflect vector from unit-modulus complex entries. """
        entries = np.asarray(entries, dtype=complex)
        _check_unit_modulus(entries)
        return cls(np.mod(np.angle(entries), 2.*np.pi))

    @property
    def entries(self):
        return np.exp(1j*self.phases)

    @property
    def n_elements(self):
        return self.phases.size

    @property
    def is_discrete(self):
        return self.alphabet is not None


def _check_unit_modulus(entries, tol=MODULUS_TOL):
    err = np.max(np.abs(np.abs(entries) - 1.))
    if err > tol:
        raise ValueError("entries are not unit modulus (max error %.3g)" % err)


def random_reflect(rng, n, alphabet):
    """ Draw each of `n` phases independently and uniformly from
    `alphabet`. """
    if n < 1:
        raise ValueError("reflect vector needs at least one element")
    idx = rng.integers(0, alphabet.size, size=n)
    return ReflectVector(alphabet.values[idx], alphabet)


def quantize(continuous, alphabet):
    """ Element-wise nearest alphabet point to a unit-modulus vector.

    Since ||phi - phi_bar||^2 separates over elements, picking the nearest
    phase per element attains the global minimum over the discrete set.
    Exact midpoints go to the smaller phase value.

    Parameters
    ----------
    continuous : array-like of complex, or ReflectVector
        Unit-modulus entries (within 1e-6)
    alphabet : PhaseAlphabet

    Returns
    -------
    ReflectVector tagged with `alphabet`

    """
    entries = np.asarray(getattr(continuous, 'entries', continuous),
                         dtype=complex)
    _check_unit_modulus(entries)

    angles = np.angle(entries)
    values = alphabet.values
    # Wrapped distance to every alphabet phase; argmin keeps the first
    # (smallest) phase on ties
    dist = np.abs(np.mod(angles[:, None] - values[None, :] + np.pi,
                         2.*np.pi) - np.pi)
    idx = np.argmin(dist, axis=1)
    return ReflectVector(values[idx], alphabet)
