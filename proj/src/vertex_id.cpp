#include "harmonet/vertex_id.hpp"

#include <charconv>

#include "harmonet/common.hpp"

namespace harmonet {

std::string VertexId::to_string() const {
    if (rank_ == 1) return std::to_string(c_[0]);
    std::string s = "(";
    for (int k = 0; k < rank_; ++k) {
        if (k) s += ',';
        s += std::to_string(c_[static_cast<std::size_t>(k)]);
    }
    s += ')';
    return s;
}

VertexId VertexId::parse(std::string_view text) {
    auto parse_int = [&](std::string_view s) -> std::int64_t {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw SpecError("bad vertex encoding: '" + std::string(text) + "'");
        return v;
    };
    if (text.empty()) throw SpecError("empty vertex encoding");
    if (text.front() != '(') return of(parse_int(text));
    if (text.back() != ')') throw SpecError("bad vertex encoding: '" + std::string(text) + "'");
    std::string_view body = text.substr(1, text.size() - 2);
    std::array<std::int64_t, 3> c{0, 0, 0};
    int n = 0;
    while (!body.empty()) {
        if (n == 3) throw SpecError("vertex encoding has too many coordinates");
        auto comma = body.find(',');
        std::string_view piece = body.substr(0, comma);
        c[static_cast<std::size_t>(n++)] = parse_int(piece);
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
        if (body.empty()) throw SpecError("trailing comma in vertex encoding");
    }
    if (n < 2) throw SpecError("parenthesized vertex encoding needs 2 or 3 coordinates");
    return n == 2 ? of(c[0], c[1]) : of(c[0], c[1], c[2]);
}

}  // namespace harmonet
