"""Packet wire format and the file <-> source-block codec.

Packet layout, all big-endian::

    [esi: u64][k: u32][symbol_size: u32][payload: symbol_size bytes]

A file is framed as ``data || zero padding || pad_len (u32)`` and split into
``k`` equal symbols, so the trailer always travels in the last symbol.
"""

import struct

from ..errors import CorruptPacketError
from .codec import EncodedPacket, SourceBlock

HEADER = struct.Struct(">QII")
TRAILER = struct.Struct(">I")


def pack_packet(packet):
    return HEADER.pack(packet.esi, packet.k, packet.symbol_size) + packet.payload


def unpack_packet(buf, offset=0):
    """Parse one packet at ``offset``; returns ``(packet, next_offset)``."""
    end = offset + HEADER.size
    if end > len(buf):
        raise CorruptPacketError(f"truncated header at byte {offset}")
    esi, k, size = HEADER.unpack_from(buf, offset)
    if k == 0 or size == 0:
        raise CorruptPacketError(f"packet at byte {offset} has k={k}, symbol_size={size}")
    if end + size > len(buf):
        raise CorruptPacketError(f"truncated payload at byte {end}")
    return EncodedPacket(esi, k, bytes(buf[end:end + size])), end + size


def write_packets(packets):
    return b"".join(pack_packet(p) for p in packets)


def read_packets(buf):
    packets = []
    offset = 0
    while offset < len(buf):
        p, offset = unpack_packet(buf, offset)
        if packets and (p.k, p.symbol_size) != (packets[0].k, packets[0].symbol_size):
            raise CorruptPacketError("packets disagree on k or symbol size")
        packets.append(p)
    return packets


def split_file(data, k):
    """Frame ``data`` and cut it into ``k`` symbols of equal size."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    framed_min = len(data) + TRAILER.size
    size = max(1, -(-framed_min // k))
    pad = size * k - framed_min
    framed = bytes(data) + bytes(pad) + TRAILER.pack(pad)
    return SourceBlock(tuple(framed[i * size:(i + 1) * size] for i in range(k)))


def join_symbols(symbols):
    """Inverse of :func:`split_file` for a fully recovered block."""
    framed = b"".join(symbols)
    if len(framed) < TRAILER.size:
        raise CorruptPacketError("recovered block too short for its trailer")
    (pad,) = TRAILER.unpack_from(framed, len(framed) - TRAILER.size)
    body = len(framed) - TRAILER.size - pad
    if body < 0 or any(framed[body:len(framed) - TRAILER.size]):
        raise CorruptPacketError("inconsistent padding trailer")
    return framed[:body]
