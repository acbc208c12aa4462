"""NDN-style packets with PHY identities in the name, plus a minimal forwarder.

Wire format is a self-contained TLV: 1-byte type, 4-byte big-endian length,
value.  Data and certificate packets share one layout (Name, Content,
KeyLocator, SignatureValue); interests carry a name and an 8-byte nonce.
Signatures are RSA PKCS#1 v1.5 over SHA-256 of the encoded Name and Content,
binding the claimed identity to the signature.  The forwarding model is a
single node with an exact-match LRU content store and a pending-interest
table with requester aggregation; this layer never authenticates identities.
"""

from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa

TLV_INTEREST = 0x05
TLV_DATA = 0x06
TLV_NAME = 0x07
TLV_NAME_COMPONENT = 0x08
TLV_NONCE = 0x0A
TLV_CONTENT = 0x15
TLV_SIGNATURE_VALUE = 0x17
TLV_KEY_LOCATOR = 0x1C

_MAX_LEN = 2**32 - 1


class WireError(ValueError):
    pass


class ChainError(RuntimeError):
    pass


def _tlv(tlv_type: int, value: bytes) -> bytes:
    if len(value) > _MAX_LEN:
        raise WireError("value exceeds 4-byte length field")
    return bytes([tlv_type]) + len(value).to_bytes(4, "big") + value


def _read_tlv(buf: bytes, pos: int) -> tuple[int, bytes, int]:
    if pos + 5 > len(buf):
        raise WireError(f"truncated TLV header at offset {pos}")
    tlv_type = buf[pos]
    length = int.from_bytes(buf[pos + 1 : pos + 5], "big")
    end = pos + 5 + length
    if end > len(buf):
        raise WireError(f"TLV length {length} overruns buffer at offset {pos}")
    return tlv_type, buf[pos + 5 : end], end


@dataclass(frozen=True)
class NdnName:
    """Hierarchical name; canonical layout /<prefix>/<phy-id-hex>/<path...>/<seq>."""

    components: tuple[bytes, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "components", tuple(bytes(c) for c in self.components)
        )

    @classmethod
    def from_uri(cls, uri: str) -> "NdnName":
        parts = [p for p in uri.split("/") if p != ""]
        return cls(tuple(p.encode() for p in parts))

    def to_uri(self) -> str:
        def show(c: bytes) -> str:
            try:
                text = c.decode()
            except UnicodeDecodeError:
                return "0x" + c.hex()
            if text.isprintable() and "/" not in text:
                return text
            return "0x" + c.hex()

        return "/" + "/".join(show(c) for c in self.components)

    @classmethod
    def for_content(cls, prefix: str, phy_id_hex: str, path: tuple[str, ...], seq: int) -> "NdnName":
        comps = (prefix.encode(), phy_id_hex.encode())
        comps += tuple(p.encode() for p in path)
        comps += (str(seq).encode(),)
        return cls(comps)

    def claimed_phy_id_hex(self) -> str:
        """The PHY-ID component (64 lowercase hex chars) under the app prefix."""
        if len(self.components) < 2:
            raise WireError("name has no identity component")
        comp = self.components[1]
        text = comp.decode("ascii", errors="replace")
        if len(text) != 64 or any(ch not in "0123456789abcdef" for ch in text):
            raise WireError(f"identity component {text!r} is not 64 lowercase hex chars")
        return text

    def encode(self) -> bytes:
        inner = b"".join(_tlv(TLV_NAME_COMPONENT, c) for c in self.components)
        return _tlv(TLV_NAME, inner)

    @classmethod
    def decode_value(cls, value: bytes) -> "NdnName":
        comps = []
        pos = 0
        while pos < len(value):
            t, v, pos = _read_tlv(value, pos)
            if t != TLV_NAME_COMPONENT:
                raise WireError(f"unexpected TLV type {t:#x} inside name")
            comps.append(v)
        return cls(tuple(comps))


@dataclass(frozen=True)
class NdnPacket:
    """Data or certificate packet; unsigned packets have no signature value."""

    name: NdnName
    content: bytes = b""
    signature_value: bytes | None = None
    key_locator: NdnName | None = None

    @property
    def signed(self) -> bool:
        return self.signature_value is not None


@dataclass(frozen=True)
class InterestPacket:
    name: NdnName
    nonce: bytes

    def __post_init__(self):
        if len(self.nonce) != 8:
            raise WireError("nonce must be 8 bytes")


def encode(packet) -> bytes:
    """Deterministic wire encoding of a data or interest packet."""
    if isinstance(packet, NdnPacket):
        body = packet.name.encode() + _tlv(TLV_CONTENT, packet.content)
        if packet.key_locator is not None:
            body += _tlv(TLV_KEY_LOCATOR, packet.key_locator.encode())
        if packet.signature_value is not None:
            body += _tlv(TLV_SIGNATURE_VALUE, packet.signature_value)
        return _tlv(TLV_DATA, body)
    if isinstance(packet, InterestPacket):
        body = packet.name.encode() + _tlv(TLV_NONCE, packet.nonce)
        return _tlv(TLV_INTEREST, body)
    raise WireError(f"cannot encode {type(packet).__name__}")


def decode(wire: bytes):
    """Inverse of ``encode``; rejects truncation, trailing bytes, unknown types."""
    tlv_type, value, end = _read_tlv(wire, 0)
    if end != len(wire):
        raise WireError(f"{len(wire) - end} trailing bytes after packet")
    if tlv_type == TLV_DATA:
        return _decode_data(value)
    if tlv_type == TLV_INTEREST:
        return _decode_interest(value)
    raise WireError(f"unknown top-level TLV type {tlv_type:#x}")


def _decode_data(value: bytes) -> NdnPacket:
    pos = 0
    name = None
    content = b""
    sig = None
    locator = None
    seen = set()
    while pos < len(value):
        t, v, pos = _read_tlv(value, pos)
        if t in seen:
            raise WireError(f"duplicate field {t:#x} in data packet")
        seen.add(t)
        if t == TLV_NAME:
            name = NdnName.decode_value(v)
        elif t == TLV_CONTENT:
            content = v
        elif t == TLV_SIGNATURE_VALUE:
            sig = v
        elif t == TLV_KEY_LOCATOR:
            t2, v2, end2 = _read_tlv(v, 0)
            if t2 != TLV_NAME or end2 != len(v):
                raise WireError("key locator must hold exactly one name")
            locator = NdnName.decode_value(v2)
        else:
            raise WireError(f"unknown field {t:#x} in data packet")
    if name is None:
        raise WireError("data packet missing name")
    return NdnPacket(name=name, content=content, signature_value=sig, key_locator=locator)


def _decode_interest(value: bytes) -> InterestPacket:
    pos = 0
    name = None
    nonce = None
    while pos < len(value):
        t, v, pos = _read_tlv(value, pos)
        if t == TLV_NAME:
            name = NdnName.decode_value(v)
        elif t == TLV_NONCE:
            nonce = v
        else:
            raise WireError(f"unknown field {t:#x} in interest packet")
    if name is None or nonce is None:
        raise WireError("interest packet missing name or nonce")
    return InterestPacket(name=name, nonce=nonce)


# ---------------------------------------------------------------------------
# signing


def generate_rsa_key(bits: int = 2048) -> rsa.RSAPrivateKey:
    if not 1024 <= bits <= 4096:
        raise WireError(f"unsupported RSA key size {bits}")
    return rsa.generate_private_key(public_exponent=65537, key_size=bits)


def save_private_key_pem(key: rsa.RSAPrivateKey, path: str) -> None:
    pem = key.private_bytes(
        serialization.Encoding.PEM,
        serialization.PrivateFormat.PKCS8,
        serialization.NoEncryption(),
    )
    with open(path, "wb") as fh:
        fh.write(pem)


def load_private_key_pem(path: str) -> rsa.RSAPrivateKey:
    with open(path, "rb") as fh:
        key = serialization.load_pem_private_key(fh.read(), password=None)
    if not isinstance(key, rsa.RSAPrivateKey):
        raise WireError(f"{path} does not hold an RSA private key")
    return key


def signed_portion(packet: NdnPacket) -> bytes:
    """Bytes covered by the signature: encoded Name then encoded Content."""
    return packet.name.encode() + _tlv(TLV_CONTENT, packet.content)


def sign(packet: NdnPacket, key: rsa.RSAPrivateKey, key_name: NdnName) -> NdnPacket:
    """RSA PKCS#1 v1.5 / SHA-256 signature over the name and content."""
    if packet.signed:
        raise WireError("packet is already signed")
    sig = key.sign(signed_portion(packet), padding.PKCS1v15(), hashes.SHA256())
    return NdnPacket(
        name=packet.name,
        content=packet.content,
        signature_value=sig,
        key_locator=key_name,
    )


def verify(packet: NdnPacket, public_key: rsa.RSAPublicKey) -> bool:
    if not packet.signed:
        return False
    try:
        public_key.verify(
            packet.signature_value,
            signed_portion(packet),
            padding.PKCS1v15(),
            hashes.SHA256(),
        )
        return True
    except InvalidSignature:
        return False


def public_key_packet(
    key_name: NdnName, public_key: rsa.RSAPublicKey
) -> NdnPacket:
    """Unsigned certificate payload: the DER-encoded public key as content."""
    der = public_key.public_bytes(
        serialization.Encoding.DER, serialization.PublicFormat.SubjectPublicKeyInfo
    )
    return NdnPacket(name=key_name, content=der)


def _load_public_key(packet: NdnPacket) -> rsa.RSAPublicKey:
    key = serialization.load_der_public_key(packet.content)
    if not isinstance(key, rsa.RSAPublicKey):
        raise ChainError(f"certificate {packet.name.to_uri()} does not hold an RSA key")
    return key


def verify_chain(
    packet: NdnPacket,
    cert_store: dict[str, NdnPacket],
    anchors: dict[str, rsa.RSAPublicKey],
    max_depth: int = 8,
) -> bool:
    """Walk key locators through certificates to a pre-configured trust anchor.

    True iff every signature on the walk verifies and the final locator names
    an anchor key.  Cycles and walks longer than ``max_depth`` raise.
    """
    visited: set[str] = set()
    current = packet
    for _ in range(max_depth):
        if not current.signed or current.key_locator is None:
            return False
        locator = current.key_locator.to_uri()
        if locator in visited or locator == current.name.to_uri():
            raise ChainError(f"key locator cycle at {locator}")
        visited.add(current.name.to_uri())
        if locator in anchors:
            return verify(current, anchors[locator])
        cert = cert_store.get(locator)
        if cert is None:
            return False
        if not verify(current, _load_public_key(cert)):
            return False
        current = cert
    raise ChainError(f"trust chain exceeded depth {max_depth}")


# ---------------------------------------------------------------------------
# forwarding


class ActionKind(enum.Enum):
    RESPOND = "respond"          # serve data to one or more faces
    FORWARD = "forward"          # send the interest upstream
    AGGREGATE = "aggregate"      # interest folded into an existing PIT entry
    DROP = "drop"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    packet: object = None
    faces: tuple[str, ...] = ()
    reason: str = ""


@dataclass
class PitEntry:
    requesters: list[str]
    expires_at: float


@dataclass
class Node:
    """Single forwarding node: exact-match content store plus a PIT."""

    cs_capacity: int = 64
    pit_lifetime: float = 4.0
    cs: "OrderedDict[str, NdnPacket]" = field(default_factory=OrderedDict)
    pit: dict[str, PitEntry] = field(default_factory=dict)
    drop_count: int = 0

    def handle_interest(self, interest: InterestPacket, face: str, now: float = 0.0) -> list[Action]:
        uri = interest.name.to_uri()
        cached = self.cs.get(uri)
        if cached is not None:
            self.cs.move_to_end(uri)
            return [Action(ActionKind.RESPOND, cached, (face,))]
        entry = self.pit.get(uri)
        if entry is not None and entry.expires_at > now:
            if face not in entry.requesters:
                entry.requesters.append(face)
            return [Action(ActionKind.AGGREGATE)]
        self.pit[uri] = PitEntry([face], now + self.pit_lifetime)
        return [Action(ActionKind.FORWARD, interest)]

    def handle_data(self, packet: NdnPacket, now: float = 0.0) -> list[Action]:
        uri = packet.name.to_uri()
        entry = self.pit.pop(uri, None)
        if entry is None or entry.expires_at <= now:
            self.drop_count += 1
            return [Action(ActionKind.DROP, packet, reason="unsolicited")]
        self.insert_cs(packet)
        return [Action(ActionKind.RESPOND, packet, tuple(entry.requesters))]

    def handle_wire(self, wire: bytes, face: str, now: float = 0.0) -> list[Action]:
        try:
            packet = decode(wire)
        except WireError as exc:
            self.drop_count += 1
            return [Action(ActionKind.DROP, reason=str(exc))]
        if isinstance(packet, InterestPacket):
            return self.handle_interest(packet, face, now)
        return self.handle_data(packet, now)

    def insert_cs(self, packet: NdnPacket):
        uri = packet.name.to_uri()
        self.cs[uri] = packet
        self.cs.move_to_end(uri)
        while len(self.cs) > self.cs_capacity:
            self.cs.popitem(last=False)

    def expire_pit(self, now: float):
        stale = [k for k, e in self.pit.items() if e.expires_at <= now]
        for k in stale:
            del self.pit[k]
