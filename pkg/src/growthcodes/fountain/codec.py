"""XOR encoding and the two peeling decoders.

Payloads are XOR-ed as Python ints internally; conversion to ``bytes``
happens only at the boundaries.
"""

from collections import deque
from dataclasses import dataclass, field

from ..errors import CorruptPacketError
from ..prng import SplitMix64, sample_distinct

MODES = ("D", "S")


def make_esi(stream_id, seq):
    """Pack a 32-bit stream id and a 32-bit sequence number into an ESI."""
    if not 0 <= seq < 1 << 32:
        raise ValueError(f"sequence number out of range: {seq}")
    return ((stream_id & 0xFFFFFFFF) << 32) | seq


def regenerate(esi, code, k):
    """Degree and neighbor indices for ``esi``, identical on both ends."""
    rng = SplitMix64(esi)
    d = code.draw_degree(rng.random(), esi)
    if not 1 <= d <= k:
        raise CorruptPacketError(f"esi {esi:#x} regenerates degree {d} for k={k}")
    return d, sample_distinct(rng, k, d)


@dataclass(frozen=True)
class SourceBlock:
    symbols: tuple
    _ints: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        symbols = tuple(bytes(s) for s in self.symbols)
        if not symbols:
            raise ValueError("a source block needs at least one symbol")
        size = len(symbols[0])
        if size == 0 or any(len(s) != size for s in symbols):
            raise ValueError("source symbols must be non-empty and of equal length")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_ints", tuple(int.from_bytes(s, "big") for s in symbols))

    @property
    def k(self):
        return len(self.symbols)

    @property
    def symbol_size(self):
        return len(self.symbols[0])


@dataclass(frozen=True)
class EncodedPacket:
    esi: int
    k: int
    payload: bytes

    @property
    def symbol_size(self):
        return len(self.payload)


def encode(block, code, esi):
    """One encoded packet: XOR of the neighbor set regenerated from ``esi``."""
    if code.k != block.k:
        raise ValueError(f"code built for k={code.k}, block has k={block.k}")
    _, nbrs = regenerate(esi, code, block.k)
    acc = 0
    for i in nbrs:
        acc ^= block._ints[i]
    return EncodedPacket(esi, block.k, acc.to_bytes(block.symbol_size, "big"))


def packet_stream(block, code, count, stream_id=0, start=0):
    """``count`` consecutive packets of one stream."""
    return [encode(block, code, make_esi(stream_id, start + n)) for n in range(count)]


@dataclass
class DecoderStats:
    received: int = 0
    discarded: int = 0
    decoded: int = 0
    buffered: int = 0


class DecoderState:
    """Growth-code decoder.

    Mode ``D`` keeps only packets that are instantaneously decodable on
    arrival and drops the rest. Mode ``S`` buffers packets with two or more
    unknown neighbors and reduces them as recoveries happen, which reaches
    the full peeling fixed point.
    """

    def __init__(self, k, code, mode="D"):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        if code.k != k:
            raise ValueError(f"code built for k={code.k}, decoder has k={k}")
        self.k = k
        self.code = code
        self.mode = mode
        self.symbol_size = None
        self.stats = DecoderStats()
        self.ripple = deque()
        self._values = {}
        # pending entries are [unknown index set, reduced value]; None once spent
        self._pending = []
        self._watch = {}

    @property
    def recovered(self):
        return {i: v.to_bytes(self.symbol_size, "big") for i, v in sorted(self._values.items())}

    @property
    def n_recovered(self):
        return len(self._values)

    @property
    def pending(self):
        return [entry for entry in self._pending if entry is not None]

    @property
    def complete(self):
        return len(self._values) == self.k

    def push(self, packet):
        """Feed one packet; returns how many symbols it let us recover."""
        if packet.k != self.k:
            raise CorruptPacketError(f"packet for k={packet.k} fed to decoder with k={self.k}")
        if self.symbol_size is None:
            if packet.symbol_size == 0:
                raise CorruptPacketError("empty payload")
            self.symbol_size = packet.symbol_size
        elif packet.symbol_size != self.symbol_size:
            raise CorruptPacketError(
                f"payload has {packet.symbol_size} bytes, expected {self.symbol_size}"
            )
        _, nbrs = regenerate(packet.esi, self.code, self.k)
        self.stats.received += 1
        value = int.from_bytes(packet.payload, "big")
        known = self._values
        unknown = []
        for i in nbrs:
            v = known.get(i)
            if v is None:
                unknown.append(i)
            else:
                value ^= v
        if len(unknown) == 1:
            self.ripple.append((unknown[0], value))
            return self._drain()
        if len(unknown) >= 2 and self.mode == "S":
            pid = len(self._pending)
            self._pending.append([set(unknown), value])
            for i in unknown:
                self._watch.setdefault(i, []).append(pid)
            self.stats.buffered += 1
        else:
            self.stats.discarded += 1
        return 0

    def _drain(self):
        before = len(self._values)
        while self.ripple:
            i, value = self.ripple.popleft()
            if i in self._values:
                self.stats.discarded += 1
                continue
            self._values[i] = value
            self.stats.decoded += 1
            for pid in self._watch.pop(i, ()):
                entry = self._pending[pid]
                if entry is None:
                    continue
                entry[0].discard(i)
                entry[1] ^= value
                if len(entry[0]) == 1:
                    self.ripple.append((entry[0].pop(), entry[1]))
                    self._pending[pid] = None
                    self.stats.buffered -= 1
        return len(self._values) - before

    def symbols(self):
        """Recovered symbols by index; ``None`` where still unknown."""
        return [
            None if (v := self._values.get(i)) is None else v.to_bytes(self.symbol_size, "big")
            for i in range(self.k)
        ]


def decoder_push(state, packet):
    state.push(packet)
    return state


def decode_stream(state, packets):
    """Push every packet; returns the cumulative recovered count after each."""
    trace = []
    for p in packets:
        state.push(p)
        trace.append(state.n_recovered)
    return trace
