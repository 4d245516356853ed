"""Hermitian Pauli operators with explicit +/-1 signs.

An n-qubit Pauli is stored as two uint8 bit vectors ``x`` and ``z`` plus a
sign bit.  Per qubit, (x, z) = (0,0) is I, (1,0) is X, (0,1) is Z and (1,1)
is the Hermitian Y.  Products are tracked with the usual mod-4 phase
bookkeeping; only +/-1 signs are ever exposed, and composing two operators
whose product would be purely imaginary (e.g. X * Z on one qubit) raises.
Nothing in the correction circuits ever forms such a product.
"""
from __future__ import annotations

import numpy as np

_LABEL_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LABEL = {v: k for k, v in _LABEL_BITS.items()}


class PauliOperator:
    __slots__ = ("x", "z", "sign_bit")

    def __init__(self, x, z, sign=1):
        self.x = np.asarray(x, dtype=np.uint8) & 1
        self.z = np.asarray(z, dtype=np.uint8) & 1
        if self.x.shape != self.z.shape or self.x.ndim != 1:
            raise ValueError("x and z must be 1-d bit vectors of equal length")
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.sign_bit = 0 if sign == 1 else 1

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def from_label(cls, label: str) -> "PauliOperator":
        """Build from a string like ``"+XIZ"`` or ``"-YY"`` (qubit 0 first)."""
        sign = 1
        if label and label[0] in "+-":
            sign = 1 if label[0] == "+" else -1
            label = label[1:]
        try:
            bits = [_LABEL_BITS[ch] for ch in label]
        except KeyError as exc:
            raise ValueError(f"bad Pauli letter {exc}") from None
        x = np.array([b[0] for b in bits], np.uint8)
        z = np.array([b[1] for b in bits], np.uint8)
        return cls(x, z, sign)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliOperator":
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        x[qubit], z[qubit] = _LABEL_BITS[letter]
        return cls(x, z)

    @classmethod
    def on_support(cls, n: int, support, letter: str) -> "PauliOperator":
        """Uniform product like Z1 Z2 Z3: ``letter`` on every qubit in support."""
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        bx, bz = _LABEL_BITS[letter]
        for q in support:
            x[q], z[q] = bx, bz
        return cls(x, z)

    # -- queries ------------------------------------------------------

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def sign(self) -> int:
        return -1 if self.sign_bit else 1

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def support(self) -> tuple:
        return tuple(np.nonzero(self.x | self.z)[0].tolist())

    def is_identity(self) -> bool:
        return self.weight() == 0

    def commutes_with(self, other: "PauliOperator") -> bool:
        sym = int(self.x @ other.z) + int(self.z @ other.x)
        return sym % 2 == 0

    def label(self) -> str:
        body = "".join(
            _BITS_LABEL[(int(a), int(b))] for a, b in zip(self.x, self.z)
        )
        return ("-" if self.sign_bit else "+") + body

    # -- algebra ------------------------------------------------------

    def compose(self, other: "PauliOperator") -> "PauliOperator":
        """Return self * other.  Raises if the product is not +/-1 real."""
        if self.n != other.n:
            raise ValueError("length mismatch")
        phase = pauli_product_phase(
            self.x, self.z, self.sign_bit, other.x, other.z, other.sign_bit
        )
        if phase % 2:
            raise ValueError(
                "product carries an imaginary phase; not representable "
                "with a +/-1 sign"
            )
        out = PauliOperator(self.x ^ other.x, self.z ^ other.z)
        out.sign_bit = phase // 2
        return out

    def expanded(self, n_total: int) -> "PauliOperator":
        """Pad with identities out to ``n_total`` qubits (same sign)."""
        if n_total < self.n:
            raise ValueError("cannot shrink")
        x = np.zeros(n_total, np.uint8)
        z = np.zeros(n_total, np.uint8)
        x[: self.n] = self.x
        z[: self.n] = self.z
        out = PauliOperator(x, z)
        out.sign_bit = self.sign_bit
        return out

    def copy(self) -> "PauliOperator":
        out = PauliOperator(self.x.copy(), self.z.copy())
        out.sign_bit = self.sign_bit
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliOperator)
            and self.sign_bit == other.sign_bit
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self):
        return hash((self.x.tobytes(), self.z.tobytes(), self.sign_bit))

    def __repr__(self) -> str:
        return f"PauliOperator({self.label()!r})"


def pauli_product_phase(x1, z1, r1, x2, z2, r2) -> int:
    """Exponent e of i in (row1 * row2) relative to its Hermitian normal
    form: row1*row2 = i**e * (normal form with + sign).  e in {0,1,2,3};
    even values mean a real +/- sign (e//2 is the sign bit)."""
    c1 = int(np.sum(x1 & z1))
    c2 = int(np.sum(x2 & z2))
    xr = x1 ^ x2
    zr = z1 ^ z2
    c_out = int(np.sum(xr & zr))
    cross = int(np.sum(z1 & x2))
    return (c1 + c2 - c_out + 2 * (int(r1) + int(r2) + cross)) % 4
