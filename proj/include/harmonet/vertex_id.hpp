#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace harmonet {

/// Canonical vertex encoding: an integer, an integer pair (level, index), or
/// an integer triple (lattice coordinate). The rank is fixed per model, so
/// vertices of one network always compare within the same rank.
///
/// Total order: (rank, lexicographic coordinates). Textual form round-trips:
/// "5", "(2,3)", "(1,-2,3)".
class VertexId {
public:
    VertexId() = default;

    static VertexId of(std::int64_t a) { return VertexId(1, {a, 0, 0}); }
    static VertexId of(std::int64_t a, std::int64_t b) { return VertexId(2, {a, b, 0}); }
    static VertexId of(std::int64_t a, std::int64_t b, std::int64_t c) {
        return VertexId(3, {a, b, c});
    }

    int rank() const { return rank_; }
    std::int64_t operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }

    friend auto operator<=>(const VertexId&, const VertexId&) = default;

    std::string to_string() const;
    /// Parses the textual form produced by to_string(). Throws SpecError.
    static VertexId parse(std::string_view text);

private:
    VertexId(std::int8_t rank, std::array<std::int64_t, 3> c) : rank_(rank), c_(c) {}

    std::int8_t rank_ = 1;
    std::array<std::int64_t, 3> c_{0, 0, 0};
};

struct VertexIdHash {
    std::size_t operator()(const VertexId& v) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(v.rank());
        for (int k = 0; k < v.rank(); ++k) {
            std::uint64_t x = static_cast<std::uint64_t>(v[k]);
            x *= 0xbf58476d1ce4e5b9ull;
            x ^= x >> 31;
            h = (h ^ x) * 0x94d049bb133111ebull;
        }
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

}  // namespace harmonet
