#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sitepath {

// Costs are carried as fixed-point integers (micro cost units) so that sums
// along a path are exact and independent of summation order.
using CostUnits = std::int64_t;
inline constexpr double kCostScale = 1'000'000.0;
inline constexpr CostUnits kImpassable = -1;

inline CostUnits to_units(double cost) { return static_cast<CostUnits>(cost * kCostScale + (cost >= 0 ? 0.5 : -0.5)); }
inline double from_units(CostUnits units) { return static_cast<double>(units) / kCostScale; }

/// Grid coordinate. x is the column, y the row; (0,0) is the bottom-left cell.
struct Cell {
    int x = 0;
    int y = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

/// Orders cells by (y, x); used wherever ties are broken "by lower (y, x)".
struct RowMajorLess {
    bool operator()(Cell a, Cell b) const { return a.y != b.y ? a.y < b.y : a.x < b.x; }
};

struct CellHash {
    std::size_t operator()(Cell c) const noexcept {
        return std::hash<std::int64_t>{}((static_cast<std::int64_t>(c.x) << 32) ^ static_cast<std::uint32_t>(c.y));
    }
};

/// A weight layer. Entries are row-major (index = y * width + x); a NaN entry
/// marks an unknown cell, which is treated as an obstacle.
struct Layer {
    std::string name;
    double layer_weight = 1.0;
    std::vector<double> weights;
};

struct DangerObject {
    Cell position;
    double intensity = 0.0;
};

class MapParseError : public std::runtime_error {
public:
    MapParseError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

/// Layer names accepted by the map parser.
std::span<const std::string_view> known_layer_names();

/// Up to five moves from a cell: passable orthogonal neighbours, then wait.
class MoveList {
public:
    void push(Cell c) { cells_[size_++] = c; }
    std::size_t size() const { return size_; }
    const Cell* begin() const { return cells_; }
    const Cell* end() const { return cells_ + size_; }
    Cell operator[](std::size_t i) const { return cells_[i]; }

private:
    Cell cells_[5];
    std::size_t size_ = 0;
};

/// Multi-layer weighted grid. Immutable after construction; the constructor
/// validates every invariant and throws std::invalid_argument on violation.
class WeightedGridMap {
public:
    WeightedGridMap(int width, int height, std::vector<Layer> layers, std::vector<Cell> obstacles = {},
                    std::vector<DangerObject> danger_objects = {}, double cell_size_m = 10.0);

    int width() const { return width_; }
    int height() const { return height_; }
    int cell_count() const { return width_ * height_; }
    double cell_size_m() const { return cell_size_m_; }
    const std::vector<Layer>& layers() const { return layers_; }
    const std::vector<Cell>& obstacles() const { return obstacles_; }
    const std::vector<DangerObject>& danger_objects() const { return danger_objects_; }

    bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
    int index(Cell c) const { return c.y * width_ + c.x; }
    Cell cell_at(int index) const { return {index % width_, index / width_}; }

    bool is_obstacle(Cell c) const;
    bool is_unknown(Cell c) const;
    /// False for obstacle or unknown cells; throws std::out_of_range off the map.
    bool is_passable(Cell c) const;

    /// Sum of layer_weight * layer value plus the danger penalty; nullopt when impassable.
    std::optional<double> cell_cost(Cell c) const;
    /// Fixed-point cell cost for search; kImpassable for blocked cells.
    CostUnits cell_cost_units(Cell c) const;
    CostUnits cell_cost_units(int index) const { return unit_costs_[static_cast<std::size_t>(index)]; }
    /// Smallest passable cell cost; the per-step scale of the heuristic.
    CostUnits min_cell_cost_units() const { return min_cost_units_; }

    /// Sum over danger objects of C_o / max(1, manhattan distance).
    double danger_penalty(Cell c) const;

    MoveList neighbors(Cell c) const;

    /// Copy with extra obstacle cells.
    WeightedGridMap with_obstacles(std::span<const Cell> cells) const;
    /// Copy where `c` is made passable and set to the given per-layer values.
    WeightedGridMap with_cell_values(Cell c, std::span<const double> values) const;

    friend bool operator==(const WeightedGridMap& a, const WeightedGridMap& b);

private:
    void check_in_bounds(Cell c) const;
    void rebuild_cost_table();

    int width_;
    int height_;
    double cell_size_m_;
    std::vector<Layer> layers_;
    std::vector<Cell> obstacles_;
    std::vector<DangerObject> danger_objects_;
    std::vector<char> blocked_;
    std::vector<CostUnits> unit_costs_;
    CostUnits min_cost_units_ = 0;
};

WeightedGridMap parse_map(std::string_view text);
std::string serialize_map(const WeightedGridMap& map);
WeightedGridMap load_map(const std::string& path);

}  // namespace sitepath
