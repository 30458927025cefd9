#pragma once

#include <cstdint>
#include <vector>

#include "esia/attack.hpp"
#include "esia/bayer.hpp"
#include "esia/image.hpp"

namespace esia {

/// A camera frame on the wire: one packet per CFA row.
struct PacketStream {
    int width = 0;
    int height = 0;  // expected packet count at reassembly
    BayerPattern pattern = BayerPattern::RGGB;
    std::vector<std::vector<std::uint8_t>> packets;
};

/// Rows whose displayed content is misaligned after a lost packet.
struct LossEvent {
    StripSpec strip;
};

PacketStream to_packets(const CfaImage& cfa);

/// Drops one packet per event: within strip [s, e) the packets shift up by
/// one (row k shows row k+1), and the stream realigns at row e-1, whose
/// content ends up displayed twice. Events must be disjoint and in range.
PacketStream inject_loss(const PacketStream& stream,
                         const std::vector<LossEvent>& events);

/// Packets back into a frame. The receiver interprets row k under row k's
/// original Bayer parity - this is what turns a one-row shift into channel
/// swaps. Throws PacketCountMismatch if the stream is short or long.
CfaImage reassemble(const PacketStream& stream);

/// Faithful mechanism end to end:
/// demosaic(reassemble(inject_loss(to_packets(mosaic(img))))).
/// Serves as the independent oracle for apply_swap.
RgbImage simulate_packet_loss(const RgbImage& img, const AttackPlan& plan,
                              BayerPattern pattern = BayerPattern::RGGB);

}  // namespace esia
