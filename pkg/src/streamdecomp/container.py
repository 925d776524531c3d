"""Self-describing binary container for synthetic datasets.

Layout (all integers little-endian)::

    offset 0        8 bytes   magic b"SDSTRM\\x00\\x01"
    offset 8        u32       header length H
    offset 12       H bytes   UTF-8 JSON header (sorted keys)
    offset 12+H     u32       CRC32 of the header bytes
    offset 16+H     payload   arrays listed in the header, float64, C order
    then            u32 * B   CRC32 of each payload block of ``block_size`` bytes
    then            8 bytes   end marker b"SDSEND\\x00\\x01"

The header holds ``format_version``, generation ``params`` (including seeds),
``block_size`` and an ``arrays`` list of ``{"name", "shape"}`` records.  Every
decoding error reports the byte offset where the problem was found.
"""

import json
import struct
import zlib

import numpy as np

from .errors import ContainerError

MAGIC = b"SDSTRM\x00\x01"
END = b"SDSEND\x00\x01"
FORMAT_VERSION = 1
BLOCK_SIZE = 4096


def encode(arrays, params):
    """Serialize named float arrays plus parameters; returns bytes."""
    names = list(arrays)
    mats = [np.ascontiguousarray(arrays[k], dtype="<f8") for k in names]
    header = dict(
        format_version=FORMAT_VERSION,
        params=params,
        block_size=BLOCK_SIZE,
        arrays=[dict(name=k, shape=list(a.shape)) for k, a in zip(names, mats)],
    )
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(a.tobytes() for a in mats)
    crcs = [zlib.crc32(payload[i:i + BLOCK_SIZE]) for i in range(0, len(payload), BLOCK_SIZE)]
    return b"".join([
        MAGIC, struct.pack("<I", len(hbytes)), hbytes, struct.pack("<I", zlib.crc32(hbytes)),
        payload, struct.pack(f"<{len(crcs)}I", *crcs), END,
    ])


def _need(buf, offset, size, what):
    if offset + size > len(buf):
        raise ContainerError(f"truncated file while reading {what}", len(buf))


def decode(buf):
    """Inverse of :func:`encode`; returns ``(arrays, params)``."""
    _need(buf, 0, len(MAGIC), "magic")
    if buf[:len(MAGIC)] != MAGIC:
        raise ContainerError("bad magic number; not a dataset container", 0)
    _need(buf, 8, 4, "header length")
    (hlen,) = struct.unpack_from("<I", buf, 8)
    _need(buf, 12, hlen + 4, "header")
    hbytes = bytes(buf[12:12 + hlen])
    (hcrc,) = struct.unpack_from("<I", buf, 12 + hlen)
    if zlib.crc32(hbytes) != hcrc:
        raise ContainerError("header checksum mismatch", 12)
    try:
        header = json.loads(hbytes.decode("utf-8"))
        version = header["format_version"]
        block = int(header["block_size"])
        specs = [(a["name"], tuple(int(s) for s in a["shape"])) for a in header["arrays"]]
        params = header["params"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ContainerError(f"malformed header: {exc}", 12) from exc
    if version != FORMAT_VERSION:
        raise ContainerError(f"unsupported format version {version}", 12)
    if block <= 0 or any(s < 0 for _, shape in specs for s in shape):
        raise ContainerError("header declares invalid sizes", 12)

    start = 16 + hlen
    nbytes = sum(8 * int(np.prod(shape)) for _, shape in specs)
    _need(buf, start, nbytes, "payload")
    nblocks = -(-nbytes // block)
    crc_at = start + nbytes
    _need(buf, crc_at, 4 * nblocks + len(END), "block checksums")
    crcs = struct.unpack_from(f"<{nblocks}I", buf, crc_at)
    for b, expected in enumerate(crcs):
        lo = start + b * block
        hi = min(lo + block, crc_at)
        if zlib.crc32(buf[lo:hi]) != expected:
            raise ContainerError(f"payload checksum mismatch in block {b}", lo)
    end_at = crc_at + 4 * nblocks
    if buf[end_at:end_at + len(END)] != END:
        raise ContainerError("missing end marker", end_at)
    if len(buf) != end_at + len(END):
        raise ContainerError("unexpected trailing bytes", end_at + len(END))

    arrays = {}
    pos = start
    for name, shape in specs:
        size = 8 * int(np.prod(shape))
        arrays[name] = np.frombuffer(buf, dtype="<f8", count=size // 8, offset=pos).reshape(shape).copy()
        pos += size
    return arrays, params


def save(path, arrays, params):
    data = encode(arrays, params)
    with open(path, "wb") as fh:
        fh.write(data)


def load(path):
    with open(path, "rb") as fh:
        return decode(fh.read())
