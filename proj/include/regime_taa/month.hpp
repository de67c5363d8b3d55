// month.hpp
// Calendar month used as the time index of every panel.

#pragma once

#include <charconv>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace regime_taa {

struct Month {
    int year = 1970;
    int month = 1;  // 1..12

    /// Months since year 0; consecutive months differ by exactly one.
    constexpr int ordinal() const { return year * 12 + (month - 1); }
    static constexpr Month from_ordinal(int ord) { return Month{ord / 12, ord % 12 + 1}; }

    constexpr Month next() const { return from_ordinal(ordinal() + 1); }

    friend constexpr bool operator==(const Month&, const Month&) = default;
    friend constexpr auto operator<=>(const Month& a, const Month& b) {
        return a.ordinal() <=> b.ordinal();
    }

    /// ISO form with the day pinned to the first of the month.
    std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d-01", year, month);
        return buf;
    }
};

namespace detail {

inline std::optional<int> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace detail

/// Accepts m/d/yyyy (FRED-MD), yyyy-mm-dd and yyyy-mm.
inline std::optional<Month> parse_month(std::string_view text) {
    auto valid = [](int y, int m, int d) -> std::optional<Month> {
        if (y < 1000 || y > 9999 || m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
        return Month{y, m};
    };
    if (auto s1 = text.find('/'); s1 != std::string_view::npos) {
        auto s2 = text.find('/', s1 + 1);
        if (s2 == std::string_view::npos) return std::nullopt;
        auto m = detail::parse_int(text.substr(0, s1));
        auto d = detail::parse_int(text.substr(s1 + 1, s2 - s1 - 1));
        auto y = detail::parse_int(text.substr(s2 + 1));
        if (!m || !d || !y) return std::nullopt;
        return valid(*y, *m, *d);
    }
    if (text.size() >= 7 && text[4] == '-') {
        auto y = detail::parse_int(text.substr(0, 4));
        auto rest = text.substr(5);
        auto dash = rest.find('-');
        auto m = detail::parse_int(rest.substr(0, dash));
        int d = 1;
        if (dash != std::string_view::npos) {
            auto dd = detail::parse_int(rest.substr(dash + 1));
            if (!dd) return std::nullopt;
            d = *dd;
        }
        if (!y || !m) return std::nullopt;
        return valid(*y, *m, d);
    }
    return std::nullopt;
}

}  // namespace regime_taa
