#include "esia/packet.hpp"

#include <algorithm>

#include "esia/error.hpp"

namespace esia {

PacketStream to_packets(const CfaImage& cfa) {
    PacketStream stream;
    stream.width = cfa.width();
    stream.height = cfa.height();
    stream.pattern = cfa.pattern();
    stream.packets.reserve(cfa.height());
    const std::uint8_t* base = cfa.data().data();
    for (int r = 0; r < cfa.height(); ++r) {
        stream.packets.emplace_back(base + static_cast<std::size_t>(r) * cfa.width(),
                                    base + static_cast<std::size_t>(r + 1) * cfa.width());
    }
    return stream;
}

PacketStream inject_loss(const PacketStream& stream,
                         const std::vector<LossEvent>& events) {
    std::vector<StripSpec> strips;
    strips.reserve(events.size());
    for (const LossEvent& e : events) strips.push_back(e.strip);
    std::sort(strips.begin(), strips.end(),
              [](const StripSpec& a, const StripSpec& b) {
                  return a.start_row < b.start_row;
              });
    for (std::size_t i = 0; i < strips.size(); ++i) {
        if (strips[i].start_row < 0 || strips[i].end_row > stream.height ||
            strips[i].start_row >= strips[i].end_row) {
            raise(ErrorKind::OutOfRange, "loss event outside the stream");
        }
        if (i > 0 && strips[i].start_row < strips[i - 1].end_row) {
            raise(ErrorKind::OverlappingEvents, "loss events overlap");
        }
    }

    PacketStream out = stream;
    for (const StripSpec& strip : strips) {
        // One packet lost: rows [s, e-1) show the next row's payload, the
        // resync boundary at e-1 shows its own payload again.
        for (int k = strip.start_row; k < strip.end_row - 1; ++k) {
            out.packets[k] = stream.packets[k + 1];
        }
    }
    return out;
}

CfaImage reassemble(const PacketStream& stream) {
    if (static_cast<int>(stream.packets.size()) != stream.height) {
        raise(ErrorKind::PacketCountMismatch,
              "expected " + std::to_string(stream.height) + " packets, got " +
                  std::to_string(stream.packets.size()));
    }
    CfaImage cfa(stream.width, stream.height, stream.pattern);
    for (int r = 0; r < stream.height; ++r) {
        if (static_cast<int>(stream.packets[r].size()) != stream.width) {
            raise(ErrorKind::PacketCountMismatch,
                  "packet " + std::to_string(r) + " has wrong length");
        }
        std::copy(stream.packets[r].begin(), stream.packets[r].end(),
                  cfa.data().begin() + static_cast<std::size_t>(r) * stream.width);
    }
    return cfa;
}

RgbImage simulate_packet_loss(const RgbImage& img, const AttackPlan& plan,
                              BayerPattern pattern) {
    if (plan.image_width != img.width() || plan.image_height != img.height()) {
        raise(ErrorKind::DimensionMismatch,
              "plan dimensions do not match the image");
    }
    validate_strips(plan.strips, img.height());
    if (plan.strips.empty()) {
        return img;
    }
    std::vector<LossEvent> events;
    events.reserve(plan.strips.size());
    for (const StripSpec& s : plan.strips) events.push_back(LossEvent{s});
    return demosaic(reassemble(inject_loss(to_packets(mosaic(img, pattern)), events)));
}

}  // namespace esia
