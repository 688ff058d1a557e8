#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace hydroloop::netsim {

enum class FrameKind : std::uint8_t { measurement = 0, command = 1 };

/// Wire record: kind(1) | sequence(8) | timestamp(8) | value(8), little-endian.
struct Frame {
    FrameKind kind = FrameKind::measurement;
    std::uint64_t sequence = 0;
    double timestamp = 0.0;  // [s]
    double value = 0.0;

    static constexpr std::size_t wire_size = 25;

    friend bool operator==(const Frame&, const Frame&) = default;
};

std::array<std::byte, Frame::wire_size> encode(const Frame& f);
// Throws ValidationError on a short buffer or an unknown kind byte.
Frame decode(std::span<const std::byte> bytes);

}  // namespace hydroloop::netsim
