#include "hydroloop/frame.hpp"

#include <bit>

#include "hydroloop/error.hpp"

namespace hydroloop::netsim {

namespace {

void put_u64(std::byte* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::byte>((v >> (8 * i)) & 0xffu);
}

std::uint64_t get_u64(const std::byte* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

}  // namespace

std::array<std::byte, Frame::wire_size> encode(const Frame& f) {
    std::array<std::byte, Frame::wire_size> out{};
    out[0] = static_cast<std::byte>(f.kind);
    put_u64(out.data() + 1, f.sequence);
    put_u64(out.data() + 9, std::bit_cast<std::uint64_t>(f.timestamp));
    put_u64(out.data() + 17, std::bit_cast<std::uint64_t>(f.value));
    return out;
}

Frame decode(std::span<const std::byte> bytes) {
    if (bytes.size() < Frame::wire_size) throw ValidationError("frame: short buffer");
    const auto kind = static_cast<std::uint8_t>(bytes[0]);
    if (kind > 1) throw ValidationError("frame: unknown kind byte");
    Frame f;
    f.kind = static_cast<FrameKind>(kind);
    f.sequence = get_u64(bytes.data() + 1);
    f.timestamp = std::bit_cast<double>(get_u64(bytes.data() + 9));
    f.value = std::bit_cast<double>(get_u64(bytes.data() + 17));
    return f;
}

}  // namespace hydroloop::netsim
