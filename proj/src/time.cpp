#include "footprint/time.hpp"

#include <array>
#include <cstdio>

namespace footprint {

bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return lengths[m - 1];
}

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

static void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

CivilDateTime civil_from_utc(UtcTime t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    CivilDateTime c;
    civil_from_days(days, c.year, c.month, c.day);
    c.hour = static_cast<int>(rem / 3600);
    c.minute = static_cast<int>((rem % 3600) / 60);
    c.second = static_cast<int>(rem % 60);
    return c;
}

UtcTime utc_from_civil(const CivilDateTime& c) {
    return days_from_civil(c.year, c.month, c.day) * 86400 + c.hour * 3600 +
           c.minute * 60 + c.second;
}

UtcTime make_utc(int y, int mo, int d, int h, int mi, int s) {
    return utc_from_civil(CivilDateTime{y, mo, d, h, mi, s});
}

UtcTime add_months(UtcTime t, int months) {
    CivilDateTime c = civil_from_utc(t);
    int total = (c.year * 12 + (c.month - 1)) + months;
    int y = total / 12;
    int m = total % 12;
    if (m < 0) {
        m += 12;
        y -= 1;
    }
    c.year = y;
    c.month = m + 1;
    int max_day = days_in_month(c.year, c.month);
    if (c.day > max_day) c.day = max_day;
    return utc_from_civil(c);
}

std::optional<UtcTime> parse_time(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char tail = 0;
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d%n", &y, &mo, &d, &consumed) == 3) {
        if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo)) return std::nullopt;
        std::string rest = s.substr(static_cast<std::size_t>(consumed));
        if (rest.empty()) return make_utc(y, mo, d);
        char sep = rest[0];
        if (sep != ' ' && sep != 'T') return std::nullopt;
        std::string tod = rest.substr(1);
        if (sep == 'T' && !tod.empty() && tod.back() == 'Z') tod.pop_back();
        int n = std::sscanf(tod.c_str(), "%d:%d:%d%c", &h, &mi, &sec, &tail);
        if (n == 4 || n < 2) return std::nullopt;
        if (n == 2) {
            if (std::sscanf(tod.c_str(), "%d:%d%c", &h, &mi, &tail) == 3) return std::nullopt;
            sec = 0;
        }
        if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) return std::nullopt;
        return make_utc(y, mo, d, h, mi, sec);
    }
    // US-style "M/D/YYYY H:MM"
    int n = std::sscanf(s.c_str(), "%d/%d/%d %d:%d", &mo, &d, &y, &h, &mi);
    if (n >= 3) {
        if (mo < 1 || mo > 12 || y < 1000 || d < 1 || d > days_in_month(y, mo)) return std::nullopt;
        if (h < 0 || h > 23 || mi < 0 || mi > 59) return std::nullopt;
        return make_utc(y, mo, d, h, mi, 0);
    }
    return std::nullopt;
}

std::string format_time(UtcTime t) {
    CivilDateTime c = civil_from_utc(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", c.year,
                  c.month, c.day, c.hour, c.minute, c.second);
    return buf;
}

}  // namespace footprint
