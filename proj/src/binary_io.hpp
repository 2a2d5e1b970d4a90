#pragma once

// Little-endian scalar encoding shared by the cube and dictionary formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace ssr::detail {

template <typename U>
U to_little(U v) {
    if constexpr (std::endian::native == std::endian::big) {
        U out = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            out = static_cast<U>((out << 8) | (v & 0xFF));
            v = static_cast<U>(v >> 8);
        }
        return out;
    } else {
        return v;
    }
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_f32(std::ostream& os, float f) {
    put_u32(os, std::bit_cast<std::uint32_t>(f));
}

inline void put_f64(std::ostream& os, double d) {
    auto v = to_little(std::bit_cast<std::uint64_t>(d));
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline bool get_u32(std::istream& is, std::uint32_t& v) {
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) return false;
    v = to_little(v);
    return true;
}

inline bool get_f32(std::istream& is, float& f) {
    std::uint32_t v = 0;
    if (!get_u32(is, v)) return false;
    f = std::bit_cast<float>(v);
    return true;
}

inline bool get_f64(std::istream& is, double& d) {
    std::uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) return false;
    d = std::bit_cast<double>(to_little(v));
    return true;
}

}  // namespace ssr::detail
