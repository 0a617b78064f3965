#include "doctest.h"

#include <random>

#include "fleetagg/marginals.hpp"
#include "oracles.hpp"

using namespace fleetagg;

namespace {

QuantileGrid quartiles() { return QuantileGrid({0.25, 0.5, 0.75}); }

}  // namespace

TEST_CASE("quantile grid validation") {
    CHECK_THROWS_AS(QuantileGrid({0.5}), std::invalid_argument);
    CHECK_THROWS_AS(QuantileGrid({0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(QuantileGrid({0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(QuantileGrid({0.3, 0.3}), std::invalid_argument);
    CHECK_THROWS_AS(QuantileGrid({0.6, 0.3}), std::invalid_argument);

    const auto pct = QuantileGrid::percentiles();
    REQUIRE(pct.size() == 99);
    CHECK(pct.front() == doctest::Approx(0.01));
    CHECK(pct.back() == doctest::Approx(0.99));
}

TEST_CASE("grid segment lookup agrees with a linear scan") {
    const auto uniform = QuantileGrid::percentiles();
    const QuantileGrid uneven({0.01, 0.02, 0.1, 0.3, 0.31, 0.9, 0.95});
    std::mt19937_64 rng(3);
    for (const auto* grid : {&uniform, &uneven}) {
        std::uniform_real_distribution<double> u(grid->front(), grid->back());
        for (int rep = 0; rep < 5000; ++rep) {
            const double x = rep < 10 ? (*grid)[std::size_t(rep) % grid->size()] : u(rng);
            std::size_t expect = 0;
            for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
                if ((*grid)[k] <= x) expect = k;
            }
            CHECK(grid->segment(x) == expect);
        }
    }
}

TEST_CASE("repair_monotone is a running maximum") {
    using V = std::vector<double>;
    CHECK(repair_monotone<double>(V{1, 2, 3}) == V{1, 2, 3});
    CHECK(repair_monotone<double>(V{1, 3, 2}) == V{1, 3, 3});
    CHECK(repair_monotone<double>(V{5, 4, 4, 6}) == V{5, 5, 5, 6});
    CHECK_THROWS_AS(repair_monotone<double>(V{}), std::invalid_argument);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    for (int rep = 0; rep < 200; ++rep) {
        V v(1 + rep % 17);
        for (auto& x : v) x = n(rng);
        const V once = repair_monotone<double>(v);
        CHECK(std::is_sorted(once.begin(), once.end()));
        CHECK(repair_monotone<double>(once) == once);
        for (std::size_t k = 0; k < v.size(); ++k) CHECK(once[k] >= v[k]);
    }
}

TEST_CASE("forecast construction repairs crossings and defaults the support") {
    const QuantileForecast f(quartiles(), std::vector<double>{10, 30, 20});
    CHECK(f.values()[2] == 30);
    CHECK(f.support_lo() == 0);
    CHECK(f.support_hi() == doctest::Approx(30 + 20 * 0.05));
    CHECK_THROWS_AS(QuantileForecast(quartiles(), std::vector<double>{10, 20}), std::invalid_argument);
    CHECK_THROWS_AS(QuantileForecast(quartiles(), std::vector<double>{10, 20, 30}, 15.0), std::invalid_argument);
    CHECK_THROWS_AS(QuantileForecast(quartiles(), std::vector<double>{10, 20, 30}, 0.0, 25.0), std::invalid_argument);
}

TEST_CASE("cdf_eval examples") {
    const QuantileForecast f(quartiles(), std::vector<double>{10, 20, 30}, 0.0, 40.0);
    CHECK(cdf_eval(f, 20.0) == 0.5);
    CHECK(cdf_eval(f, 15.0) == doctest::Approx(0.375).epsilon(1e-15));
    // upper tail: straight line from (30, 0.75) to (40, 1)
    CHECK(cdf_eval(f, 35.0) == doctest::Approx(oracle::lerp_through(30, 0.75, 40, 1.0, 35)).epsilon(1e-15));
    CHECK(cdf_eval(f, 35.0) == doctest::Approx(0.875));
    CHECK(cdf_eval(f, 5.0) == doctest::Approx(oracle::lerp_through(0, 0, 10, 0.25, 5)));
    CHECK(cdf_eval(f, 0.0) == 0.0);
    CHECK(cdf_eval(f, -1.0) == 0.0);
    CHECK(cdf_eval(f, 40.0) == 1.0);
    CHECK(cdf_eval(f, 1e9) == 1.0);
    CHECK_THROWS_AS(cdf_eval(f, std::nan("")), std::invalid_argument);
}

TEST_CASE("cdf_eval splits jumps at their midpoint") {
    const QuantileGrid grid({0.2, 0.4, 0.6, 0.8});
    // repeated interior knots
    const QuantileForecast flat(grid, std::vector<double>{1, 5, 5, 9}, 0.0, 10.0);
    CHECK(cdf_eval(flat, 5.0) == doctest::Approx(0.5));
    // mass at the lower support endpoint (night-time zeros)
    const QuantileForecast zeros(grid, std::vector<double>{0, 0, 0, 4}, 0.0, 10.0);
    CHECK(cdf_eval(zeros, 0.0) == doctest::Approx(0.3));
    // a fully degenerate forecast
    const QuantileForecast point(grid, std::vector<double>{0, 0, 0, 0}, 0.0, 0.0);
    CHECK(cdf_eval(point, 0.0) == doctest::Approx(0.5));
    // infinite support: flat tails
    const QuantileForecast open(grid, std::vector<double>{1, 2, 3, 4}, -std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity());
    CHECK(cdf_eval(open, 0.0) == 0.0);
    CHECK(cdf_eval(open, 5.0) == 1.0);
    CHECK(quantile_eval(open, 0.05) == 1.0);
    CHECK(quantile_eval(open, 0.95) == 4.0);
}

TEST_CASE("quantile_eval examples") {
    const QuantileForecast f(quartiles(), std::vector<double>{10, 20, 30}, 0.0, 40.0);
    CHECK(quantile_eval(f, 0.5) == 20.0);
    CHECK(quantile_eval(f, 0.375) == doctest::Approx(15.0).epsilon(1e-15));
    CHECK(quantile_eval(f, 1.0) == 40.0);
    CHECK(quantile_eval(f, 0.0) == 0.0);
    CHECK(quantile_eval(f, 0.125) == doctest::Approx(5.0));
    CHECK_THROWS_AS(quantile_eval(f, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(quantile_eval(f, 1.1), std::invalid_argument);
    CHECK_THROWS_AS(quantile_eval(f, std::nan("")), std::invalid_argument);
}

TEST_CASE("property: roundtrip, monotonicity and range on random forecasts") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto grid = QuantileGrid::percentiles();
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> v(grid.size());
        double level = 5.0 * unit(rng);
        for (auto& x : v) {
            // occasional flat runs
            level += unit(rng) < 0.1 ? 0.0 : unit(rng);
            x = level;
        }
        const double lo = v.front() * unit(rng);
        const double hi = v.back() + 3.0 * unit(rng);
        const QuantileForecast f(grid, v, lo, hi);

        double prev_q = -1e300;
        double prev_c = -1.0;
        for (int k = 0; k <= 400; ++k) {
            const double u = k / 400.0;
            const double q = quantile_eval(f, u);
            CHECK(q >= prev_q);
            CHECK(q >= lo);
            CHECK(q <= hi);
            prev_q = q;

            const double x = lo - 1.0 + (hi - lo + 2.0) * k / 400.0;
            const double c = cdf_eval(f, x);
            CHECK(c >= prev_c);
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
            prev_c = c;
        }
        for (int k = 0; k < 200; ++k) {
            const double u = grid.front() + (grid.back() - grid.front()) * unit(rng);
            const std::size_t seg = grid.segment(u);
            if (v[seg + 1] > v[seg] && u > grid[seg] && u < grid[seg + 1]) {
                CHECK(std::abs(cdf_eval(f, quantile_eval(f, u)) - u) <= 1e-12);
            }
        }
    }
}
