#include <doctest.h>

#include <cmath>

#include "../support/properties.hpp"
#include "sitepath/grid_map.hpp"

using namespace sitepath;

namespace {

Layer uniform_layer(const char* name, int w, int h, double v) {
    return Layer{name, 1.0, std::vector<double>(static_cast<std::size_t>(w * h), v)};
}

int parse_error_line(const std::string& text) {
    try {
        parse_map(text);
    } catch (const MapParseError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("parse a one-row roughness map") {
    const auto m = parse_map("map 3 1 10\nlayer roughness 1\n1 5 9\n");
    CHECK(m.width() == 3);
    CHECK(m.height() == 1);
    REQUIRE(m.layers().size() == 1);
    CHECK(m.layers()[0].weights == std::vector<double>{1, 5, 9});
    CHECK(m.obstacles().empty());
}

TEST_CASE("parse errors carry line numbers") {
    SUBCASE("empty text") {
        CHECK_THROWS_WITH_AS(parse_map(""), doctest::Contains("missing header"), MapParseError);
    }
    SUBCASE("row wider than the header") { CHECK(parse_error_line("map 3 2 10\nlayer roughness 1\n1 1 1\n1 1 1 1\n") == 4); }
    SUBCASE("negative weight") { CHECK(parse_error_line("map 2 1 10\nlayer slope 1\n1 -2\n") == 3); }
    SUBCASE("unknown layer") { CHECK(parse_error_line("map 1 1 10\nlayer colour 1\n1\n") == 2); }
    SUBCASE("danger object outside") { CHECK(parse_error_line("map 2 2 10\nlayer roughness 1\n1 1\n1 1\ndanger 5 0 3\n") == 5); }
    SUBCASE("too few rows") { CHECK(parse_error_line("map 2 3 10\nlayer roughness 1\n1 1\n1 1\n") > 0); }
}

TEST_CASE("file row 0 is the top row") {
    const auto m = parse_map("map 2 2 10\nlayer roughness 1\n9 #\n1 ?\n");
    CHECK(*m.cell_cost({0, 0}) == 1.0);
    CHECK(*m.cell_cost({0, 1}) == 9.0);
    CHECK(m.is_obstacle({1, 1}));
    CHECK(m.is_unknown({1, 0}));
    CHECK_FALSE(m.is_passable({1, 0}));
}

TEST_CASE("cell cost sums layers and danger") {
    SUBCASE("three unit layers") {
        WeightedGridMap m(2, 2, {uniform_layer("roughness", 2, 2, 1), uniform_layer("slope", 2, 2, 1), uniform_layer("safety", 2, 2, 1)});
        CHECK(*m.cell_cost({1, 1}) == 3.0);
    }
    SUBCASE("worst terrain levels") {
        WeightedGridMap m(1, 1, {uniform_layer("roughness", 1, 1, 9), uniform_layer("slope", 1, 1, 5), uniform_layer("safety", 1, 1, 15)});
        CHECK(*m.cell_cost({0, 0}) == 29.0);
    }
    SUBCASE("obstacle") {
        WeightedGridMap m(2, 1, {uniform_layer("roughness", 2, 1, 1)}, {{1, 0}});
        CHECK_FALSE(m.cell_cost({1, 0}).has_value());
        CHECK(m.cell_cost_units(Cell{1, 0}) == kImpassable);
    }
    SUBCASE("layer weights scale") {
        Layer l = uniform_layer("roughness", 1, 1, 5);
        l.layer_weight = 0.5;
        WeightedGridMap m(1, 1, {l});
        CHECK(*m.cell_cost({0, 0}) == 2.5);
    }
    SUBCASE("out of bounds") {
        WeightedGridMap m(1, 1, {uniform_layer("roughness", 1, 1, 1)});
        CHECK_THROWS_AS(m.cell_cost({1, 0}), std::out_of_range);
    }
}

TEST_CASE("danger penalty") {
    SUBCASE("no objects") {
        WeightedGridMap m(3, 3, {uniform_layer("roughness", 3, 3, 1)});
        CHECK(m.danger_penalty({1, 1}) == 0.0);
    }
    SUBCASE("one object two cells away") {
        WeightedGridMap m(10, 10, {uniform_layer("roughness", 10, 10, 1)}, {}, {{{5, 5}, 4.0}});
        CHECK(m.danger_penalty({5, 7}) == doctest::Approx(2.0));
        CHECK(*m.cell_cost({5, 7}) == doctest::Approx(3.0));
    }
    SUBCASE("two objects either side") {
        WeightedGridMap m(3, 1, {uniform_layer("roughness", 3, 1, 1)}, {}, {{{0, 0}, 2.0}, {{2, 0}, 2.0}});
        CHECK(m.danger_penalty({1, 0}) == doctest::Approx(4.0));
    }
    SUBCASE("the object's own cell is clamped") {
        WeightedGridMap m(3, 1, {uniform_layer("roughness", 3, 1, 1)}, {}, {{{0, 0}, 6.0}});
        CHECK(m.danger_penalty({0, 0}) == doctest::Approx(6.0));
    }
}

TEST_CASE("neighbours") {
    WeightedGridMap open(5, 5, {uniform_layer("roughness", 5, 5, 1)});
    CHECK(open.neighbors({2, 2}).size() == 5);
    CHECK(open.neighbors({0, 0}).size() == 3);
    WeightedGridMap boxed(3, 3, {uniform_layer("roughness", 3, 3, 1)}, {{1, 0}, {0, 1}, {2, 1}, {1, 2}});
    const auto moves = boxed.neighbors({1, 1});
    REQUIRE(moves.size() == 1);
    CHECK(moves[0] == Cell{1, 1});
}

TEST_CASE("constructor rejects invalid maps") {
    CHECK_THROWS_AS(WeightedGridMap(2, 2, {}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedGridMap(2, 2, {uniform_layer("roughness", 2, 1, 1)}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedGridMap(2, 2, {uniform_layer("roughness", 2, 2, -1)}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedGridMap(2, 2, {uniform_layer("roughness", 2, 2, 1)}, {{2, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedGridMap(2, 2, {uniform_layer("roughness", 2, 2, 1)}, {}, {{{0, 0}, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedGridMap(2, 2, {uniform_layer("roughness", 2, 2, 1)}, {}, {}, 0.0), std::invalid_argument);
}

TEST_CASE("map properties") {
    CHECK(sitepath::props::map_cost_lower_bound(101, 100).empty());
    CHECK(sitepath::props::danger_monotonic(102, 100).empty());
    CHECK(sitepath::props::map_round_trip(103, 100).empty());
    CHECK(sitepath::props::neighbours_passable(104, 100).empty());
}
