#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "crs/error.hpp"

namespace crs {

// The six analyte codes in canonical order: B < T < E < X < N < I.
inline constexpr std::array<char, 6> kAnalyteCodes{'B', 'T', 'E', 'X', 'N', 'I'};
inline constexpr std::size_t kAnalyteCount = 6;

inline int analyte_index(char code) {
    for (std::size_t i = 0; i < kAnalyteCodes.size(); ++i)
        if (kAnalyteCodes[i] == code) return static_cast<int>(i);
    return -1;
}

// A set of analytes present in a mixture. Canonical string form
// concatenates codes in the fixed B,T,E,X,N,I order; the empty set
// prints as "NONE".
class MixtureLabel {
public:
    MixtureLabel() = default;

    static MixtureLabel from_mask(std::uint8_t mask) {
        if (mask >= (1u << kAnalyteCount))
            throw Error(ErrorCode::Parameter, "mixture mask out of range");
        MixtureLabel l;
        l.mask_ = mask;
        return l;
    }

    static MixtureLabel parse(std::string_view s) {
        if (s == "NONE") return {};
        std::uint8_t mask = 0;
        int last = -1;
        for (char c : s) {
            int idx = analyte_index(c);
            if (idx < 0)
                throw Error(ErrorCode::Parse,
                            "invalid analyte code '" + std::string(1, c) + "' in label");
            if (idx <= last)
                throw Error(ErrorCode::Parse,
                            "label '" + std::string(s) + "' is not in canonical order");
            mask |= static_cast<std::uint8_t>(1u << idx);
            last = idx;
        }
        if (mask == 0)
            throw Error(ErrorCode::Parse, "empty label string");
        return from_mask(mask);
    }

    std::string canonical() const {
        if (mask_ == 0) return "NONE";
        std::string s;
        for (std::size_t i = 0; i < kAnalyteCount; ++i)
            if (mask_ & (1u << i)) s += kAnalyteCodes[i];
        return s;
    }

    bool contains(std::size_t analyte) const { return (mask_ >> analyte) & 1u; }
    std::uint8_t mask() const { return mask_; }
    bool empty() const { return mask_ == 0; }

    bool operator==(const MixtureLabel&) const = default;
    // Sorting order is lexicographic on the canonical string so that
    // report class lists read naturally.
    bool operator<(const MixtureLabel& o) const { return canonical() < o.canonical(); }

private:
    std::uint8_t mask_ = 0;
};

} // namespace crs
