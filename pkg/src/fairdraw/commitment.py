"""Hash-based commitments binding a stakeholder to a hidden contribution.

A commitment is SHA-256 over a fixed byte layout::

    "FAIRDRAW-COMMIT-V1"            ASCII domain tag, 18 octets
    len(session_id) as 1 octet      then session_id, UTF-8
    len(stakeholder_id) as 1 octet  then stakeholder_id, UTF-8
    mask                            32 octets
    modulus                         8 octets, big-endian unsigned
    value                           8 octets, big-endian unsigned

The mask precedes the value and is 256 bits of secret randomness, which
makes brute-forcing the small value space infeasible.  Length prefixes
and the domain tag remove any cross-field ambiguity: no two distinct
(session, stakeholder, value, mask) tuples share an encoding.
"""

import hashlib
import hmac
import secrets
from dataclasses import dataclass
from typing import Callable, Optional

from .draw import ContributionValue
from .errors import DomainError, EncodingError

COMMIT_DOMAIN_TAG = b"FAIRDRAW-COMMIT-V1"

MASK_BYTES = 32
DIGEST_BYTES = 32


@dataclass(frozen=True)
class Mask:
    """256 bits of secret randomness mixed into a commitment."""

    data: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.data, bytes) or len(self.data) != MASK_BYTES:
            raise DomainError(f"mask must be exactly {MASK_BYTES} bytes")

    def hex(self) -> str:
        return self.data.hex()


@dataclass(frozen=True)
class CommitmentDigest:
    """SHA-256 output committing to one stakeholder's contribution."""

    data: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.data, bytes) or len(self.data) != DIGEST_BYTES:
            raise DomainError(f"digest must be exactly {DIGEST_BYTES} bytes")

    def hex(self) -> str:
        return self.data.hex()

    @classmethod
    def from_hex(cls, text: str) -> "CommitmentDigest":
        try:
            raw = bytes.fromhex(text)
        except ValueError as exc:
            raise DomainError(f"invalid digest hex: {text!r}") from exc
        return cls(raw)


@dataclass(frozen=True)
class Opening:
    """The (value, mask) pair that opens a commitment."""

    value: ContributionValue
    mask: Mask


def new_mask(entropy: Optional[Callable[[int], bytes]] = None) -> Mask:
    """Draw 32 fresh octets from a cryptographically secure source.

    ``entropy`` may be supplied for deterministic tests; the default is
    the operating system CSPRNG via ``secrets``.  If the OS source is
    unavailable the underlying error propagates; there is no fallback.
    """
    source = entropy if entropy is not None else secrets.token_bytes
    return Mask(source(MASK_BYTES))


def _encode_identifier(label: str, value: str) -> bytes:
    raw = value.encode("utf-8")
    if len(raw) > 255:
        raise EncodingError(f"{label} longer than 255 octets after UTF-8 encoding")
    return bytes([len(raw)]) + raw


def commit_encoding(
    session_id: str, stakeholder_id: str, value: ContributionValue, mask: Mask
) -> bytes:
    """The exact byte string hashed by commit(); see the module docstring."""
    return (
        COMMIT_DOMAIN_TAG
        + _encode_identifier("session_id", session_id)
        + _encode_identifier("stakeholder_id", stakeholder_id)
        + mask.data
        + value.modulus.m.to_bytes(8, "big")
        + value.n.to_bytes(8, "big")
    )


def commit(
    session_id: str, stakeholder_id: str, value: ContributionValue, mask: Mask
) -> CommitmentDigest:
    """Bind (value, mask) to this session and stakeholder."""
    encoded = commit_encoding(session_id, stakeholder_id, value, mask)
    return CommitmentDigest(hashlib.sha256(encoded).digest())


def verify_opening(
    digest: CommitmentDigest, session_id: str, stakeholder_id: str, opening: Opening
) -> bool:
    """True iff the opening reproduces the digest.

    The comparison is constant-time so the reveal path leaks no timing
    information about how close a forged opening came.
    """
    recomputed = commit(session_id, stakeholder_id, opening.value, opening.mask)
    return hmac.compare_digest(recomputed.data, digest.data)
