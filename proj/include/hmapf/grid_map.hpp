#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hmapf {

// Moves on the 4-connected grid, in fixed expansion order.
enum Dir : int { DIR_RIGHT = 0, DIR_LEFT = 1, DIR_DOWN = 2, DIR_UP = 3 };
constexpr int kNumDirs = 4;

constexpr int dir_dx(int d) { return d == DIR_RIGHT ? 1 : d == DIR_LEFT ? -1 : 0; }
constexpr int dir_dy(int d) { return d == DIR_DOWN ? 1 : d == DIR_UP ? -1 : 0; }
char dir_char(int d);
int char_dir(char ch);  // -1 if not an arrow

// 4-connected grid graph with free/obstacle cells. Edges exist between
// orthogonally adjacent free cells; individual directed edges may be
// blocked (strict highway restriction), otherwise the edge relation is
// symmetric.
class GridMap {
public:
    GridMap() = default;
    GridMap(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    int size() const { return width_ * height_; }
    int index(int x, int y) const { return y * width_ + x; }
    int x_of(int loc) const { return loc % width_; }
    int y_of(int loc) const { return loc / width_; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

    bool free_at(int loc) const { return free_[loc] != 0; }
    bool free_xy(int x, int y) const { return in_bounds(x, y) && free_at(index(x, y)); }
    void set_free(int loc, bool f) { free_[loc] = f ? 1 : 0; }
    int num_free() const;
    std::vector<int> free_cells() const;

    // Neighbor cell in direction d, or -1 when out of bounds.
    int neighbor(int loc, int d) const;

    // True when from and its d-neighbor are free and the directed edge is not blocked.
    bool move_allowed(int from, int d) const;
    bool adjacent_free(int from, int to) const;

    // Free-neighbor degree on the base undirected grid (blocks ignored).
    int degree(int loc) const;

    void block_edge(int from, int to);
    bool edge_blocked(int from, int to) const;
    std::size_t blocked_edge_count() const { return blocked_count_; }
    std::vector<std::pair<int, int>> blocked_edges() const;

    std::size_t undirected_edge_count() const;
    std::size_t directed_edge_count() const;

    std::string name;

private:
    int dir_between(int from, int to) const;  // -1 if not adjacent

    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> free_;
    std::vector<uint8_t> blocked_;  // per-cell bitmask of blocked outgoing directions
    std::size_t blocked_count_ = 0;
};

// A maximal chain of degree-2 free cells, bounded by intersections
// (degree >= 3) or dead ends, or closing on itself as a loop. direction
// is the travel orientation: forward runs cells.front() -> cells.back().
struct Corridor {
    std::vector<int> cells;
    bool is_loop = false;
    bool forward = true;
};

// One direction per corridor. with-edges follow the travel direction,
// against-edges are their reversals. Boundary edges to intersections are
// included; edges touching dead-end cells are not.
class Highway {
public:
    Highway() = default;
    Highway(const GridMap& map, std::vector<Corridor> corridors);

    const std::vector<Corridor>& corridors() const { return corridors_; }
    int corridor_at(int loc) const { return corridor_id_.empty() ? -1 : corridor_id_[loc]; }

    bool with_edge(int from, int to) const;
    bool against_edge(int from, int to) const;
    // Edge whose tail has a unique strict successor, so H_S drops by
    // exactly 1 along it (tails are corridor cells; entry edges from
    // intersections do not qualify).
    bool unit_flow_edge(int from, int to) const {
        return with_edge(from, to) && corridor_at(from) >= 0;
    }

    std::vector<std::pair<int, int>> with_edges() const;
    std::vector<std::pair<int, int>> against_edges() const;
    std::size_t with_edge_count() const { return with_count_; }

    int map_width() const { return width_; }
    int map_height() const { return height_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Corridor> corridors_;
    std::vector<int32_t> corridor_id_;
    std::vector<uint8_t> with_mask_;     // outgoing with-direction edges per cell
    std::vector<uint8_t> against_mask_;  // outgoing against-direction edges per cell
    std::size_t with_count_ = 0;
};

// Map file parsing (movingai grid format: type/height/width/map header).
GridMap parse_map(const std::string& text);
GridMap load_map_file(const std::string& path);
std::string map_to_text(const GridMap& map);
void write_map_file(const GridMap& map, const std::string& path);

// n x n blocks of 10x2 pods separated and surrounded by single-row
// corridors; width = 11n+1, height = 3n+1. n must be odd and >= 1.
GridMap generate_warehouse(int blocks);

std::vector<Corridor> extract_corridors(const GridMap& map);

// Alternating counterflow: horizontal corridors get rightward/leftward by
// row rank parity, vertical ones downward/upward by column rank parity.
Highway assign_highway_alternating(const GridMap& map);
// Explicit orientation per corridor, in extract_corridors order.
Highway assign_highway(const GridMap& map, const std::vector<bool>& forward);

// Copy of map with every against-direction edge blocked (E_S = E - E_H').
GridMap strict_subgraph(const GridMap& map, const Highway& hw);

// Every free cell reaches every free cell under the directed edge relation.
bool strongly_connected(const GridMap& map);

// Highway overlay files: H lines of W chars, corridor cells carry the
// travel arrow ('>','<','v','^'), everything else '.'.
std::string overlay_to_text(const GridMap& map, const Highway& hw);
Highway overlay_from_text(const GridMap& map, const std::string& text);
Highway load_overlay_file(const GridMap& map, const std::string& path);
void write_overlay_file(const GridMap& map, const Highway& hw, const std::string& path);

}  // namespace hmapf
