#include <doctest.h>

#include "footprint/time.hpp"

using namespace footprint;

TEST_CASE("days_from_civil anchors to the epoch") {
    CHECK(days_from_civil(1970, 1, 1) == 0);
    CHECK(days_from_civil(1970, 1, 2) == 1);
    CHECK(days_from_civil(1969, 12, 31) == -1);
    CHECK(days_from_civil(2000, 3, 1) == 11017);
}

TEST_CASE("civil/utc conversions round-trip") {
    for (UtcTime t : {UtcTime{0}, UtcTime{1}, UtcTime{-1}, UtcTime{86399}, UtcTime{86400},
                      UtcTime{-86400}, make_utc(2016, 2, 29, 23, 59, 59),
                      make_utc(1900, 1, 1), make_utc(2100, 12, 31, 12, 30, 15)}) {
        CHECK(utc_from_civil(civil_from_utc(t)) == t);
    }
    CivilDateTime c = civil_from_utc(make_utc(2018, 5, 17, 6, 7, 8));
    CHECK(c.year == 2018);
    CHECK(c.month == 5);
    CHECK(c.day == 17);
    CHECK(c.hour == 6);
    CHECK(c.minute == 7);
    CHECK(c.second == 8);
}

TEST_CASE("leap years and month lengths") {
    CHECK(is_leap_year(2000));
    CHECK(is_leap_year(2016));
    CHECK_FALSE(is_leap_year(1900));
    CHECK_FALSE(is_leap_year(2015));
    CHECK(days_in_month(2016, 2) == 29);
    CHECK(days_in_month(2015, 2) == 28);
    CHECK(days_in_month(2015, 4) == 30);
    CHECK(days_in_month(2015, 12) == 31);
}

TEST_CASE("add_months clamps day-of-month and keeps the time of day") {
    CHECK(add_months(make_utc(2015, 1, 31, 10, 30, 0), 1) == make_utc(2015, 2, 28, 10, 30, 0));
    CHECK(add_months(make_utc(2016, 1, 31), 1) == make_utc(2016, 2, 29));
    CHECK(add_months(make_utc(2015, 1, 1), 6) == make_utc(2015, 7, 1));
    CHECK(add_months(make_utc(2015, 7, 1), 6) == make_utc(2016, 1, 1));
    CHECK(add_months(make_utc(2015, 3, 15), -3) == make_utc(2014, 12, 15));
    CHECK(add_months(make_utc(2015, 6, 1), 24) == make_utc(2017, 6, 1));
}

TEST_CASE("parse_time accepts each documented layout") {
    CHECK(parse_time("2015-01-02") == make_utc(2015, 1, 2));
    CHECK(parse_time("2015-01-02 03:04") == make_utc(2015, 1, 2, 3, 4, 0));
    CHECK(parse_time("2015-01-02 03:04:05") == make_utc(2015, 1, 2, 3, 4, 5));
    CHECK(parse_time("2015-01-02T03:04:05") == make_utc(2015, 1, 2, 3, 4, 5));
    CHECK(parse_time("2015-01-02T03:04:05Z") == make_utc(2015, 1, 2, 3, 4, 5));
    CHECK(parse_time("2015-01-02T03:04") == make_utc(2015, 1, 2, 3, 4, 0));
    CHECK(parse_time("10/1/2017 22:43") == make_utc(2017, 10, 1, 22, 43, 0));
    CHECK(parse_time("1/9/2015 0:05") == make_utc(2015, 1, 9, 0, 5, 0));
}

TEST_CASE("parse_time rejects malformed input") {
    CHECK_FALSE(parse_time("").has_value());
    CHECK_FALSE(parse_time("not a date").has_value());
    CHECK_FALSE(parse_time("2015-13-01").has_value());
    CHECK_FALSE(parse_time("2015-02-29").has_value());
    CHECK_FALSE(parse_time("2015-01-02 25:00").has_value());
    CHECK_FALSE(parse_time("2015-01-02 03").has_value());
    CHECK_FALSE(parse_time("2015-01-02junk").has_value());
    CHECK_FALSE(parse_time("2015-01-02 03:04x").has_value());
    CHECK_FALSE(parse_time("2015-01-02T03:04:05X").has_value());
    CHECK_FALSE(parse_time("13/1/2017 10:00").has_value());
}

TEST_CASE("format_time round-trips through parse_time") {
    for (UtcTime t : {make_utc(2009, 11, 5, 1, 2, 3), make_utc(2018, 5, 31, 23, 59, 59),
                      UtcTime{0}}) {
        std::string s = format_time(t);
        REQUIRE(parse_time(s).has_value());
        CHECK(*parse_time(s) == t);
    }
    CHECK(format_time(make_utc(2015, 1, 2, 3, 4, 5)) == "2015-01-02 03:04:05");
}
