"""Growth-code construction, encoding and peeling decoders."""

from .codec import (
    DecoderState,
    DecoderStats,
    EncodedPacket,
    SourceBlock,
    decode_stream,
    decoder_push,
    encode,
    make_esi,
    packet_stream,
    regenerate,
)
from .distribution import (
    DegreeDistribution,
    GrowthSchedule,
    expected_receptions,
    growth_distribution,
)
from .probability import symbol_decoding_probability
from .wire import join_symbols, pack_packet, read_packets, split_file, unpack_packet, write_packets
