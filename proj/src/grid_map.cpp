#include "sitepath/grid_map.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace sitepath {

namespace {

constexpr std::array<std::string_view, 5> kLayerNames = {"roughness", "slope", "safety", "resistance", "grade"};

bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_double(std::string_view tok, int line, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw MapParseError(line, std::string("invalid ") + what + " '" + std::string(tok) + "'");
    return v;
}

int parse_int(std::string_view tok, int line, const char* what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw MapParseError(line, std::string("invalid ") + what + " '" + std::string(tok) + "'");
    return v;
}

}  // namespace

MapParseError::MapParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::span<const std::string_view> known_layer_names() { return kLayerNames; }

WeightedGridMap::WeightedGridMap(int width, int height, std::vector<Layer> layers, std::vector<Cell> obstacles,
                                 std::vector<DangerObject> danger_objects, double cell_size_m)
    : width_(width),
      height_(height),
      cell_size_m_(cell_size_m),
      layers_(std::move(layers)),
      obstacles_(std::move(obstacles)),
      danger_objects_(std::move(danger_objects)) {
    if (width_ <= 0 || height_ <= 0) throw std::invalid_argument("map dimensions must be positive");
    if (!(cell_size_m_ > 0.0) || !std::isfinite(cell_size_m_)) throw std::invalid_argument("cell_size_m must be positive");
    if (layers_.empty()) throw std::invalid_argument("map needs at least one layer");
    const auto n = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    for (const auto& layer : layers_) {
        if (layer.weights.size() != n)
            throw std::invalid_argument("layer '" + layer.name + "' does not match map dimensions");
        if (!(layer.layer_weight >= 0.0) || !std::isfinite(layer.layer_weight))
            throw std::invalid_argument("layer '" + layer.name + "' has an invalid layer weight");
        for (double w : layer.weights)
            if (!std::isnan(w) && (!std::isfinite(w) || w < 0.0))
                throw std::invalid_argument("layer '" + layer.name + "' has a negative or infinite weight");
    }
    std::sort(obstacles_.begin(), obstacles_.end(), RowMajorLess{});
    obstacles_.erase(std::unique(obstacles_.begin(), obstacles_.end()), obstacles_.end());
    blocked_.assign(n, 0);
    for (Cell c : obstacles_) {
        if (!in_bounds(c)) throw std::invalid_argument("obstacle outside map bounds");
        blocked_[static_cast<std::size_t>(index(c))] = 1;
        // Obstacle cells carry no terrain values; canonicalise them to zero.
        for (auto& layer : layers_) layer.weights[static_cast<std::size_t>(index(c))] = 0.0;
    }
    for (const auto& d : danger_objects_) {
        if (!in_bounds(d.position)) throw std::invalid_argument("danger object outside map bounds");
        if (!(d.intensity > 0.0) || !std::isfinite(d.intensity))
            throw std::invalid_argument("danger object intensity must be positive");
    }
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& layer : layers_)
            if (std::isnan(layer.weights[i])) blocked_[i] = 1;
    rebuild_cost_table();
}

void WeightedGridMap::rebuild_cost_table() {
    const auto n = static_cast<std::size_t>(cell_count());
    unit_costs_.assign(n, kImpassable);
    min_cost_units_ = std::numeric_limits<CostUnits>::max();
    for (std::size_t i = 0; i < n; ++i) {
        if (blocked_[i]) continue;
        Cell c = cell_at(static_cast<int>(i));
        double cost = 0.0;
        for (const auto& layer : layers_) cost += layer.layer_weight * layer.weights[i];
        cost += danger_penalty(c);
        unit_costs_[i] = to_units(cost);
        min_cost_units_ = std::min(min_cost_units_, unit_costs_[i]);
    }
    if (min_cost_units_ == std::numeric_limits<CostUnits>::max()) min_cost_units_ = 0;
}

void WeightedGridMap::check_in_bounds(Cell c) const {
    if (!in_bounds(c))
        throw std::out_of_range("cell (" + std::to_string(c.x) + "," + std::to_string(c.y) + ") outside map");
}

bool WeightedGridMap::is_obstacle(Cell c) const {
    check_in_bounds(c);
    return std::binary_search(obstacles_.begin(), obstacles_.end(), c, RowMajorLess{});
}

bool WeightedGridMap::is_unknown(Cell c) const {
    check_in_bounds(c);
    const auto i = static_cast<std::size_t>(index(c));
    return std::any_of(layers_.begin(), layers_.end(), [i](const Layer& l) { return std::isnan(l.weights[i]); });
}

bool WeightedGridMap::is_passable(Cell c) const {
    check_in_bounds(c);
    return blocked_[static_cast<std::size_t>(index(c))] == 0;
}

std::optional<double> WeightedGridMap::cell_cost(Cell c) const {
    if (!is_passable(c)) return std::nullopt;
    const auto i = static_cast<std::size_t>(index(c));
    double cost = 0.0;
    for (const auto& layer : layers_) cost += layer.layer_weight * layer.weights[i];
    return cost + danger_penalty(c);
}

CostUnits WeightedGridMap::cell_cost_units(Cell c) const {
    check_in_bounds(c);
    return unit_costs_[static_cast<std::size_t>(index(c))];
}

double WeightedGridMap::danger_penalty(Cell c) const {
    check_in_bounds(c);
    double penalty = 0.0;
    for (const auto& d : danger_objects_)
        penalty += d.intensity / static_cast<double>(std::max(1, manhattan(c, d.position)));
    return penalty;
}

MoveList WeightedGridMap::neighbors(Cell c) const {
    check_in_bounds(c);
    MoveList moves;
    static constexpr int dx[4] = {1, -1, 0, 0};
    static constexpr int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
        Cell n{c.x + dx[k], c.y + dy[k]};
        if (in_bounds(n) && !blocked_[static_cast<std::size_t>(index(n))]) moves.push(n);
    }
    moves.push(c);
    return moves;
}

WeightedGridMap WeightedGridMap::with_obstacles(std::span<const Cell> cells) const {
    std::vector<Cell> obstacles = obstacles_;
    obstacles.insert(obstacles.end(), cells.begin(), cells.end());
    return WeightedGridMap(width_, height_, layers_, std::move(obstacles), danger_objects_, cell_size_m_);
}

WeightedGridMap WeightedGridMap::with_cell_values(Cell c, std::span<const double> values) const {
    check_in_bounds(c);
    if (values.size() != layers_.size()) throw std::invalid_argument("one value per layer required");
    std::vector<Layer> layers = layers_;
    for (std::size_t l = 0; l < layers.size(); ++l) layers[l].weights[static_cast<std::size_t>(index(c))] = values[l];
    std::vector<Cell> obstacles;
    std::copy_if(obstacles_.begin(), obstacles_.end(), std::back_inserter(obstacles), [c](Cell o) { return o != c; });
    return WeightedGridMap(width_, height_, std::move(layers), std::move(obstacles), danger_objects_, cell_size_m_);
}

bool operator==(const WeightedGridMap& a, const WeightedGridMap& b) {
    if (a.width_ != b.width_ || a.height_ != b.height_ || a.cell_size_m_ != b.cell_size_m_) return false;
    if (a.obstacles_ != b.obstacles_ || a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t l = 0; l < a.layers_.size(); ++l) {
        const auto& la = a.layers_[l];
        const auto& lb = b.layers_[l];
        if (la.name != lb.name || la.layer_weight != lb.layer_weight) return false;
        if (!std::equal(la.weights.begin(), la.weights.end(), lb.weights.begin(), same_value)) return false;
    }
    if (a.danger_objects_.size() != b.danger_objects_.size()) return false;
    for (std::size_t i = 0; i < a.danger_objects_.size(); ++i) {
        if (a.danger_objects_[i].position != b.danger_objects_[i].position ||
            a.danger_objects_[i].intensity != b.danger_objects_[i].intensity)
            return false;
    }
    return true;
}

WeightedGridMap parse_map(std::string_view text) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }

    std::size_t li = 0;
    auto next_nonblank = [&]() -> bool {
        while (li < lines.size() && split_ws(lines[li]).empty()) ++li;
        return li < lines.size();
    };
    auto line_no = [&]() { return static_cast<int>(li) + 1; };

    if (!next_nonblank()) throw MapParseError(1, "missing header");
    auto header = split_ws(lines[li]);
    if (header[0] != "map") throw MapParseError(line_no(), "missing header");
    if (header.size() != 4) throw MapParseError(line_no(), "header must be 'map <width> <height> <cell_size_m>'");
    const int width = parse_int(header[1], line_no(), "width");
    const int height = parse_int(header[2], line_no(), "height");
    const double cell_size = parse_double(header[3], line_no(), "cell size");
    if (width <= 0 || height <= 0) throw MapParseError(line_no(), "map dimensions must be positive");
    if (!(cell_size > 0.0)) throw MapParseError(line_no(), "cell size must be positive");
    ++li;

    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<Layer> layers;
    std::vector<Cell> obstacles;
    std::vector<DangerObject> dangers;

    while (next_nonblank()) {
        auto toks = split_ws(lines[li]);
        if (toks[0] == "layer") {
            if (!dangers.empty()) throw MapParseError(line_no(), "layer block after danger objects");
            if (toks.size() != 3) throw MapParseError(line_no(), "layer line must be 'layer <name> <layer_weight>'");
            const auto names = known_layer_names();
            if (std::find(names.begin(), names.end(), toks[1]) == names.end())
                throw MapParseError(line_no(), "unknown layer name '" + std::string(toks[1]) + "'");
            for (const auto& l : layers)
                if (l.name == toks[1]) throw MapParseError(line_no(), "duplicate layer '" + std::string(toks[1]) + "'");
            Layer layer;
            layer.name = std::string(toks[1]);
            layer.layer_weight = parse_double(toks[2], line_no(), "layer weight");
            if (layer.layer_weight < 0.0) throw MapParseError(line_no(), "negative layer weight");
            layer.weights.assign(n, 0.0);
            ++li;
            for (int row = 0; row < height; ++row) {
                if (!next_nonblank()) throw MapParseError(line_no(), "expected " + std::to_string(height) + " grid rows");
                auto vals = split_ws(lines[li]);
                if (vals[0] == "layer" || vals[0] == "danger" || vals.size() != static_cast<std::size_t>(width))
                    throw MapParseError(line_no(), "row has " + std::to_string(vals.size()) + " values, expected " +
                                                       std::to_string(width));
                const int y = height - 1 - row;
                for (int x = 0; x < width; ++x) {
                    const auto idx = static_cast<std::size_t>(y * width + x);
                    if (vals[x] == "#") {
                        obstacles.push_back({x, y});
                    } else if (vals[x] == "?") {
                        layer.weights[idx] = std::numeric_limits<double>::quiet_NaN();
                    } else {
                        double w = parse_double(vals[x], line_no(), "weight");
                        if (w < 0.0) throw MapParseError(line_no(), "negative weight");
                        layer.weights[idx] = w;
                    }
                }
                ++li;
            }
            layers.push_back(std::move(layer));
        } else if (toks[0] == "danger") {
            if (toks.size() != 4) throw MapParseError(line_no(), "danger line must be 'danger <x> <y> <intensity>'");
            DangerObject d;
            d.position = {parse_int(toks[1], line_no(), "x"), parse_int(toks[2], line_no(), "y")};
            d.intensity = parse_double(toks[3], line_no(), "intensity");
            if (d.position.x < 0 || d.position.y < 0 || d.position.x >= width || d.position.y >= height)
                throw MapParseError(line_no(), "danger object out of bounds");
            if (!(d.intensity > 0.0)) throw MapParseError(line_no(), "danger intensity must be positive");
            dangers.push_back(d);
            ++li;
        } else {
            throw MapParseError(line_no(), "unexpected line '" + std::string(lines[li]) + "'");
        }
    }
    if (layers.empty()) throw MapParseError(line_no(), "map has no layers");
    return WeightedGridMap(width, height, std::move(layers), std::move(obstacles), std::move(dangers), cell_size);
}

std::string serialize_map(const WeightedGridMap& map) {
    std::ostringstream out;
    out << "map " << map.width() << ' ' << map.height() << ' ' << format_number(map.cell_size_m()) << '\n';
    for (const auto& layer : map.layers()) {
        out << "layer " << layer.name << ' ' << format_number(layer.layer_weight) << '\n';
        for (int y = map.height() - 1; y >= 0; --y) {
            for (int x = 0; x < map.width(); ++x) {
                if (x) out << ' ';
                const double w = layer.weights[static_cast<std::size_t>(map.index({x, y}))];
                if (map.is_obstacle({x, y}))
                    out << '#';
                else if (std::isnan(w))
                    out << '?';
                else
                    out << format_number(w);
            }
            out << '\n';
        }
    }
    for (const auto& d : map.danger_objects())
        out << "danger " << d.position.x << ' ' << d.position.y << ' ' << format_number(d.intensity) << '\n';
    return out.str();
}

WeightedGridMap load_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open map file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_map(buf.str());
}

}  // namespace sitepath
