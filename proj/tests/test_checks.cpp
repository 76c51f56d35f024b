#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>

#include "hjmm/checks.hpp"

using namespace hjmm;

TEST_CASE("the invariant suite passes end to end", "[checks]") {
    const auto results = run_all_checks();
    REQUIRE(results.size() >= 12);
    std::set<std::string> ids;
    for (const auto& r : results) {
        INFO(r.id << ": got=" << r.got << " tolerance=" << r.tolerance << " (" << r.detail
                  << ")");
        REQUIRE(r.pass);
        REQUIRE(!r.id.empty());
        REQUIRE(!r.detail.empty());
        REQUIRE(r.runtime_ms >= 0.0);
        ids.insert(r.id);
    }
    REQUIRE(ids.size() == results.size());
}

TEST_CASE("checks report measured values against their tolerances", "[checks]") {
    const auto norm = check_series_norm_closed_form();
    REQUIRE(norm.pass);
    REQUIRE(norm.tolerance == 1e-10);
    REQUIRE(norm.got <= norm.tolerance);

    const auto doob = check_doob();
    REQUIRE(doob.pass);
    REQUIRE(doob.got > 1.0);
    REQUIRE(doob.got < 4.0);

    const auto slope = check_g_rate_ramp_slope();
    REQUIRE(slope.pass);
    REQUIRE(slope.expected == -0.5);
    REQUIRE(std::abs(slope.got - slope.expected) <= slope.tolerance);
}
