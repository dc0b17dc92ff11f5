"""Key and corpus I/O: DER/PEM SubjectPublicKeyInfo, ssh-rsa lines, and a
JSON-lines corpus format.

The DER parser is deliberately hand-rolled, minimal, and strict: definite
lengths only, minimal length and integer encodings, zero unused bits in the
bit string, no trailing bytes at any level. An audit tool that quietly
normalizes a malformed key would hide exactly the kind of generator bug it
exists to find. Only the productions needed for an RSA public key are
implemented.

All parse failures raise a subclass of KeyFormatError (itself a ValueError).
The DER categories are distinct classes so callers can tell a wrong
algorithm OID from a non-minimal integer from trailing garbage.
"""

import base64
import binascii
import json
import re
from dataclasses import dataclass, field

from .rsa import PublicKey

__all__ = [
    "KeyFormatError",
    "DerError",
    "DerStructureError",
    "DerOidError",
    "DerIntegerError",
    "DerTrailingDataError",
    "PemError",
    "SshKeyError",
    "CorpusError",
    "KeyRecord",
    "parse_der_spki",
    "encode_der_spki",
    "parse_pem",
    "encode_pem",
    "parse_ssh_rsa",
    "encode_ssh_rsa",
    "read_corpus",
    "write_corpus",
]


class KeyFormatError(ValueError):
    """Base class for every parse failure raised by this module."""


class DerError(KeyFormatError):
    pass


class DerStructureError(DerError):
    """Bad tag, bad length octets, or truncated data."""


class DerOidError(DerError):
    """Algorithm identifier is not rsaEncryption."""


class DerIntegerError(DerError):
    """INTEGER content is empty, negative, or not minimally encoded."""


class DerTrailingDataError(DerError):
    """Bytes left over after a complete structure."""


class PemError(KeyFormatError):
    pass


class SshKeyError(KeyFormatError):
    pass


class CorpusError(KeyFormatError):
    pass


@dataclass(frozen=True)
class KeyRecord:
    """One public key in a corpus.

    source carries file/line provenance for error messages and is excluded
    from equality so a write/read round trip compares equal.
    """

    id: str
    key: PublicKey
    tag: str | None = None
    source: str = field(default="", compare=False)


_TAG_SEQUENCE = 0x30
_TAG_INTEGER = 0x02
_TAG_BIT_STRING = 0x03
_TAG_NULL = 0x05
_TAG_OID = 0x06

# OID 1.2.840.113549.1.1.1 (rsaEncryption), content octets.
_RSA_OID = bytes.fromhex("2a864886f70d010101")

_TAG_NAMES = {
    _TAG_SEQUENCE: "SEQUENCE",
    _TAG_INTEGER: "INTEGER",
    _TAG_BIT_STRING: "BIT STRING",
    _TAG_NULL: "NULL",
    _TAG_OID: "OBJECT IDENTIFIER",
}


def _read_length(data: bytes, pos: int) -> tuple[int, int]:
    if pos >= len(data):
        raise DerStructureError("truncated: missing length octet")
    first = data[pos]
    pos += 1
    if first < 0x80:
        return first, pos
    if first == 0x80:
        raise DerStructureError("indefinite length is not allowed in DER")
    if first == 0xFF:
        raise DerStructureError("reserved length octet 0xff")
    count = first & 0x7F
    if pos + count > len(data):
        raise DerStructureError("truncated: long-form length runs past input")
    if data[pos] == 0:
        raise DerStructureError("non-minimal length: leading zero octet")
    length = int.from_bytes(data[pos : pos + count], "big")
    if length < 0x80:
        raise DerStructureError("non-minimal length: long form used for short value")
    return length, pos + count


def _read_tlv(data: bytes, pos: int, tag: int, context: str) -> tuple[bytes, int]:
    """Consume one element with the exact expected tag; return its content."""
    if pos >= len(data):
        raise DerStructureError(f"truncated: expected {_TAG_NAMES[tag]} in {context}")
    got = data[pos]
    if got != tag:
        raise DerStructureError(
            f"expected {_TAG_NAMES[tag]} (0x{tag:02x}) in {context}, got tag 0x{got:02x}"
        )
    length, pos = _read_length(data, pos + 1)
    if pos + length > len(data):
        raise DerStructureError(f"truncated: {_TAG_NAMES[tag]} content in {context}")
    return data[pos : pos + length], pos + length


def _read_integer(data: bytes, pos: int, context: str) -> tuple[int, int]:
    content, pos = _read_tlv(data, pos, _TAG_INTEGER, context)
    if not content:
        raise DerIntegerError(f"empty INTEGER in {context}")
    if content[0] & 0x80:
        raise DerIntegerError(f"negative INTEGER in {context}")
    if len(content) >= 2 and content[0] == 0 and content[1] < 0x80:
        raise DerIntegerError(f"non-minimal INTEGER in {context}")
    return int.from_bytes(content, "big"), pos


def parse_der_spki(data: bytes) -> PublicKey:
    """Parse a DER SubjectPublicKeyInfo carrying an RSA public key.

    Structure: SEQUENCE { SEQUENCE { OID rsaEncryption, NULL },
    BIT STRING { SEQUENCE { INTEGER n, INTEGER e } } }.
    """
    outer, end = _read_tlv(data, 0, _TAG_SEQUENCE, "SubjectPublicKeyInfo")
    if end != len(data):
        raise DerTrailingDataError(
            f"{len(data) - end} trailing byte(s) after SubjectPublicKeyInfo"
        )

    alg, pos = _read_tlv(outer, 0, _TAG_SEQUENCE, "AlgorithmIdentifier")
    oid, alg_pos = _read_tlv(alg, 0, _TAG_OID, "AlgorithmIdentifier")
    if oid != _RSA_OID:
        raise DerOidError(f"algorithm OID is not rsaEncryption: {oid.hex()}")
    params, alg_pos = _read_tlv(alg, alg_pos, _TAG_NULL, "AlgorithmIdentifier")
    if params:
        raise DerStructureError("rsaEncryption parameters must be an empty NULL")
    if alg_pos != len(alg):
        raise DerTrailingDataError("trailing bytes inside AlgorithmIdentifier")

    bit_string, pos = _read_tlv(outer, pos, _TAG_BIT_STRING, "SubjectPublicKeyInfo")
    if pos != len(outer):
        raise DerTrailingDataError("trailing bytes after subjectPublicKey")
    if not bit_string:
        raise DerStructureError("empty BIT STRING")
    if bit_string[0] != 0:
        raise DerStructureError(
            f"BIT STRING must have zero unused bits, got {bit_string[0]}"
        )

    rsa_key = bit_string[1:]
    body, key_end = _read_tlv(rsa_key, 0, _TAG_SEQUENCE, "RSAPublicKey")
    if key_end != len(rsa_key):
        raise DerTrailingDataError("trailing bytes after RSAPublicKey")
    n, body_pos = _read_integer(body, 0, "modulus")
    e, body_pos = _read_integer(body, body_pos, "publicExponent")
    if body_pos != len(body):
        raise DerTrailingDataError("trailing bytes inside RSAPublicKey")
    return PublicKey(n, e)


def _length_octets(length: int) -> bytes:
    if length < 0x80:
        return bytes([length])
    raw = length.to_bytes((length.bit_length() + 7) // 8, "big")
    return bytes([0x80 | len(raw)]) + raw


def _tlv(tag: int, content: bytes) -> bytes:
    return bytes([tag]) + _length_octets(len(content)) + content


def _integer(value: int) -> bytes:
    if value < 0:
        raise ValueError("DER INTEGER encoder only handles nonnegative values")
    raw = value.to_bytes((value.bit_length() + 7) // 8, "big") or b"\x00"
    if raw[0] & 0x80:
        raw = b"\x00" + raw
    return _tlv(_TAG_INTEGER, raw)


def encode_der_spki(key: PublicKey) -> bytes:
    algorithm = _tlv(_TAG_SEQUENCE, _tlv(_TAG_OID, _RSA_OID) + _tlv(_TAG_NULL, b""))
    rsa_key = _tlv(_TAG_SEQUENCE, _integer(key.n) + _integer(key.e))
    return _tlv(_TAG_SEQUENCE, algorithm + _tlv(_TAG_BIT_STRING, b"\x00" + rsa_key))


_PEM_BEGIN = "-----BEGIN PUBLIC KEY-----"
_PEM_END = "-----END PUBLIC KEY-----"


def parse_pem(text: str) -> list[PublicKey]:
    """Extract every PUBLIC KEY block, in order. Zero blocks is fine."""
    keys = []
    pos = 0
    index = 0
    while True:
        begin = text.find(_PEM_BEGIN, pos)
        stray_end = text.find(_PEM_END, pos)
        if begin == -1 and stray_end == -1:
            return keys
        if begin == -1 or (stray_end != -1 and stray_end < begin):
            raise PemError(f"block {index}: END delimiter without matching BEGIN")
        body_start = begin + len(_PEM_BEGIN)
        end = text.find(_PEM_END, body_start)
        if end == -1:
            raise PemError(f"block {index}: BEGIN delimiter without matching END")
        next_begin = text.find(_PEM_BEGIN, body_start)
        if next_begin != -1 and next_begin < end:
            raise PemError(f"block {index}: BEGIN delimiter inside an open block")
        body = "".join(text[body_start:end].split())
        try:
            der = base64.b64decode(body, validate=True)
        except binascii.Error as exc:
            raise PemError(f"block {index}: invalid base64: {exc}") from exc
        try:
            keys.append(parse_der_spki(der))
        except DerError as exc:
            raise type(exc)(f"block {index}: {exc}") from exc
        pos = end + len(_PEM_END)
        index += 1


def encode_pem(key: PublicKey) -> str:
    body = base64.b64encode(encode_der_spki(key)).decode("ascii")
    lines = [body[i : i + 64] for i in range(0, len(body), 64)]
    return "\n".join([_PEM_BEGIN, *lines, _PEM_END]) + "\n"


def _ssh_string(payload: bytes, pos: int) -> tuple[bytes, int]:
    if pos + 4 > len(payload):
        raise SshKeyError("truncated length prefix")
    length = int.from_bytes(payload[pos : pos + 4], "big")
    pos += 4
    if pos + length > len(payload):
        raise SshKeyError("field runs past end of payload")
    return payload[pos : pos + length], pos + length


def _mpint_value(raw: bytes, name: str) -> int:
    if not raw:
        return 0
    if raw[0] & 0x80:
        raise SshKeyError(f"negative mpint for {name}")
    if raw[0] == 0 and (len(raw) == 1 or raw[1] < 0x80):
        raise SshKeyError(f"non-minimal mpint for {name}: unnecessary leading zero")
    return int.from_bytes(raw, "big")


def parse_ssh_rsa(line: str) -> PublicKey:
    """Parse one "ssh-rsa <base64> [comment]" public key line."""
    parts = line.split(None, 2)
    if not parts:
        raise SshKeyError("empty line")
    if parts[0] != "ssh-rsa":
        raise SshKeyError(f"key type is {parts[0]!r}, expected 'ssh-rsa'")
    if len(parts) < 2:
        raise SshKeyError("missing base64 payload")
    try:
        payload = base64.b64decode(parts[1], validate=True)
    except binascii.Error as exc:
        raise SshKeyError(f"invalid base64: {exc}") from exc

    kind, pos = _ssh_string(payload, 0)
    if kind != b"ssh-rsa":
        raise SshKeyError(f"payload type is {kind!r}, expected b'ssh-rsa'")
    e_raw, pos = _ssh_string(payload, pos)
    n_raw, pos = _ssh_string(payload, pos)
    if pos != len(payload):
        raise SshKeyError(f"{len(payload) - pos} trailing byte(s) in payload")
    return PublicKey(n=_mpint_value(n_raw, "n"), e=_mpint_value(e_raw, "e"))


def _mpint_bytes(value: int) -> bytes:
    if value == 0:
        return b""
    raw = value.to_bytes((value.bit_length() + 7) // 8, "big")
    if raw[0] & 0x80:
        raw = b"\x00" + raw
    return raw


def encode_ssh_rsa(key: PublicKey, comment: str | None = None) -> str:
    payload = b"".join(
        len(part).to_bytes(4, "big") + part
        for part in (b"ssh-rsa", _mpint_bytes(key.e), _mpint_bytes(key.n))
    )
    line = "ssh-rsa " + base64.b64encode(payload).decode("ascii")
    return line + (f" {comment}" if comment else "")


_HEX_RE = re.compile(r"[0-9a-f]+")

_CORPUS_FIELDS = {"id", "tag", "n", "e"}


def _hex_field(obj: dict, name: str, lineno: int) -> int:
    value = obj.get(name)
    if not isinstance(value, str) or not _HEX_RE.fullmatch(value):
        raise CorpusError(
            f"line {lineno}: field {name!r} must be lowercase hex with no prefix"
        )
    return int(value, 16)


def read_corpus(stream) -> list[KeyRecord]:
    """Read JSON-lines records {id, tag?, n, e}; n and e are lowercase hex.

    Blank lines are skipped. Duplicate ids and malformed lines raise
    CorpusError naming the offending line.
    """
    source_name = getattr(stream, "name", None) or "<corpus>"
    records = []
    first_seen: dict[str, int] = {}
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise CorpusError(f"line {lineno}: record must be an object")
        unknown = set(obj) - _CORPUS_FIELDS
        if unknown:
            raise CorpusError(f"line {lineno}: unknown field(s) {sorted(unknown)}")
        key_id = obj.get("id")
        if not isinstance(key_id, str) or not key_id:
            raise CorpusError(f"line {lineno}: field 'id' must be a nonempty string")
        if key_id in first_seen:
            raise CorpusError(
                f"line {lineno}: duplicate id {key_id!r} "
                f"(first seen on line {first_seen[key_id]})"
            )
        first_seen[key_id] = lineno
        tag = obj.get("tag")
        if tag is not None and not isinstance(tag, str):
            raise CorpusError(f"line {lineno}: field 'tag' must be a string")
        n = _hex_field(obj, "n", lineno)
        e = _hex_field(obj, "e", lineno)
        records.append(
            KeyRecord(
                id=key_id,
                key=PublicKey(n, e),
                tag=tag,
                source=f"{source_name}:{lineno}",
            )
        )
    return records


def write_corpus(records, stream) -> None:
    seen = set()
    for record in records:
        if record.id in seen:
            raise CorpusError(f"duplicate id {record.id!r} in corpus being written")
        seen.add(record.id)
        obj = {"id": record.id}
        if record.tag is not None:
            obj["tag"] = record.tag
        obj["n"] = format(record.key.n, "x")
        obj["e"] = format(record.key.e, "x")
        stream.write(json.dumps(obj) + "\n")
