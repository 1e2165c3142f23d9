#include "hmapf/grid_map.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hmapf {

char dir_char(int d) {
    switch (d) {
        case DIR_RIGHT: return '>';
        case DIR_LEFT: return '<';
        case DIR_DOWN: return 'v';
        default: return '^';
    }
}

int char_dir(char ch) {
    switch (ch) {
        case '>': return DIR_RIGHT;
        case '<': return DIR_LEFT;
        case 'v': return DIR_DOWN;
        case '^': return DIR_UP;
        default: return -1;
    }
}

GridMap::GridMap(int width, int height)
    : width_(width), height_(height),
      free_(static_cast<std::size_t>(width) * height, 0),
      blocked_(static_cast<std::size_t>(width) * height, 0) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("grid dimensions must be positive");
}

int GridMap::num_free() const {
    int n = 0;
    for (uint8_t f : free_) n += f;
    return n;
}

std::vector<int> GridMap::free_cells() const {
    std::vector<int> out;
    out.reserve(free_.size());
    for (int loc = 0; loc < size(); ++loc)
        if (free_[loc]) out.push_back(loc);
    return out;
}

int GridMap::neighbor(int loc, int d) const {
    int x = x_of(loc) + dir_dx(d);
    int y = y_of(loc) + dir_dy(d);
    return in_bounds(x, y) ? index(x, y) : -1;
}

bool GridMap::move_allowed(int from, int d) const {
    if (!free_at(from)) return false;
    int to = neighbor(from, d);
    if (to < 0 || !free_at(to)) return false;
    return (blocked_[from] & (1u << d)) == 0;
}

bool GridMap::adjacent_free(int from, int to) const {
    return free_at(from) && free_at(to) && dir_between(from, to) >= 0;
}

int GridMap::degree(int loc) const {
    int deg = 0;
    for (int d = 0; d < kNumDirs; ++d) {
        int to = neighbor(loc, d);
        if (to >= 0 && free_at(to)) ++deg;
    }
    return free_at(loc) ? deg : 0;
}

int GridMap::dir_between(int from, int to) const {
    for (int d = 0; d < kNumDirs; ++d)
        if (neighbor(from, d) == to) return d;
    return -1;
}

void GridMap::block_edge(int from, int to) {
    int d = dir_between(from, to);
    if (d < 0 || !free_at(from) || !free_at(to))
        throw std::invalid_argument("block_edge: not an edge between free cells");
    if ((blocked_[from] & (1u << d)) == 0) {
        blocked_[from] |= (1u << d);
        ++blocked_count_;
    }
}

bool GridMap::edge_blocked(int from, int to) const {
    int d = dir_between(from, to);
    return d >= 0 && (blocked_[from] & (1u << d)) != 0;
}

std::vector<std::pair<int, int>> GridMap::blocked_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int loc = 0; loc < size(); ++loc)
        for (int d = 0; d < kNumDirs; ++d)
            if (blocked_[loc] & (1u << d)) out.emplace_back(loc, neighbor(loc, d));
    return out;
}

std::size_t GridMap::undirected_edge_count() const {
    std::size_t n = 0;
    for (int loc = 0; loc < size(); ++loc) {
        if (!free_at(loc)) continue;
        for (int d : {DIR_RIGHT, DIR_DOWN}) {
            int to = neighbor(loc, d);
            if (to >= 0 && free_at(to)) ++n;
        }
    }
    return n;
}

std::size_t GridMap::directed_edge_count() const {
    return 2 * undirected_edge_count() - blocked_count_;
}

// ---------------------------------------------------------------------------
// map files

GridMap parse_map(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw std::runtime_error(std::string("map: missing ") + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };
    next_line("type line");
    if (line.rfind("type", 0) != 0) throw std::runtime_error("map: expected 'type' header");
    next_line("height line");
    int height = 0, width = 0;
    if (sscanf(line.c_str(), "height %d", &height) != 1)
        throw std::runtime_error("map: expected 'height H'");
    next_line("width line");
    if (sscanf(line.c_str(), "width %d", &width) != 1)
        throw std::runtime_error("map: expected 'width W'");
    next_line("map line");
    if (line != "map") throw std::runtime_error("map: expected 'map' header");
    if (height <= 0 || width <= 0) throw std::runtime_error("map: empty map");

    GridMap map(width, height);
    for (int y = 0; y < height; ++y) {
        next_line("map row");
        if (static_cast<int>(line.size()) != width)
            throw std::runtime_error("map: row width mismatch at row " + std::to_string(y));
        for (int x = 0; x < width; ++x) {
            char ch = line[x];
            if (ch == '.')
                map.set_free(map.index(x, y), true);
            else if (ch == '@' || ch == 'T')
                map.set_free(map.index(x, y), false);
            else
                throw std::runtime_error(std::string("map: unknown cell character '") + ch + "'");
        }
    }
    return map;
}

GridMap load_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open map file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    GridMap map = parse_map(buf.str());
    auto slash = path.find_last_of('/');
    map.name = slash == std::string::npos ? path : path.substr(slash + 1);
    return map;
}

std::string map_to_text(const GridMap& map) {
    std::ostringstream out;
    out << "type octile\n"
        << "height " << map.height() << "\n"
        << "width " << map.width() << "\n"
        << "map\n";
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x)
            out << (map.free_xy(x, y) ? '.' : '@');
        out << '\n';
    }
    return out.str();
}

void write_map_file(const GridMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write map file: " + path);
    out << map_to_text(map);
}

GridMap generate_warehouse(int blocks) {
    if (blocks < 1 || blocks % 2 == 0)
        throw std::invalid_argument("warehouse block count must be odd and >= 1");
    const int width = 11 * blocks + 1;
    const int height = 3 * blocks + 1;
    GridMap map(width, height);
    for (int loc = 0; loc < map.size(); ++loc) map.set_free(loc, true);
    for (int by = 0; by < blocks; ++by)
        for (int bx = 0; bx < blocks; ++bx)
            for (int y = 0; y < 2; ++y)
                for (int x = 0; x < 10; ++x)
                    map.set_free(map.index(1 + 11 * bx + x, 1 + 3 * by + y), false);
    map.name = "warehouse" + std::to_string(blocks);
    return map;
}

// ---------------------------------------------------------------------------
// corridors and highways

std::vector<Corridor> extract_corridors(const GridMap& map) {
    if (map.blocked_edge_count() != 0)
        throw std::invalid_argument("extract_corridors: map already carries directed restrictions");
    const int n = map.size();
    std::vector<uint8_t> is_chain(n, 0);
    for (int loc = 0; loc < n; ++loc)
        if (map.free_at(loc) && map.degree(loc) == 2) is_chain[loc] = 1;

    auto chain_neighbors = [&](int loc) {
        std::vector<int> out;
        for (int d = 0; d < kNumDirs; ++d) {
            int to = map.neighbor(loc, d);
            if (to >= 0 && map.free_at(to)) out.push_back(to);
        }
        return out;  // exactly two for chain cells
    };

    std::vector<uint8_t> visited(n, 0);
    std::vector<Corridor> corridors;
    for (int seed = 0; seed < n; ++seed) {
        if (!is_chain[seed] || visited[seed]) continue;
        // Walk to one end of the chain (or back to the seed for loops).
        int start = seed, prev = -1;
        bool loop = false;
        while (true) {
            auto nb = chain_neighbors(start);
            int next = -1;
            for (int cand : nb)
                if (cand != prev && is_chain[cand]) { next = cand; break; }
            if (next < 0) break;
            if (next == seed) { loop = true; break; }
            prev = start;
            start = next;
        }
        Corridor c;
        c.is_loop = loop;
        int cur = start, from = -1;
        while (cur >= 0 && is_chain[cur] && !visited[cur]) {
            visited[cur] = 1;
            c.cells.push_back(cur);
            auto nb = chain_neighbors(cur);
            int next = -1;
            for (int cand : nb)
                if (cand != from && is_chain[cand] && !visited[cand]) { next = cand; break; }
            from = cur;
            cur = next;
        }
        if (loop && c.cells.size() >= 2) {
            // Canonical rotation: min-index cell first, smaller neighbor second.
            auto& cells = c.cells;
            auto it = std::min_element(cells.begin(), cells.end());
            std::rotate(cells.begin(), it, cells.end());
            if (cells.size() > 2 && cells.back() < cells[1])
                std::reverse(cells.begin() + 1, cells.end());
        } else if (!loop && c.cells.size() >= 2 && c.cells.back() < c.cells.front()) {
            std::reverse(c.cells.begin(), c.cells.end());
        }
        corridors.push_back(std::move(c));
    }
    std::sort(corridors.begin(), corridors.end(),
              [](const Corridor& a, const Corridor& b) { return a.cells.front() < b.cells.front(); });
    return corridors;
}

Highway::Highway(const GridMap& map, std::vector<Corridor> corridors)
    : width_(map.width()), height_(map.height()), corridors_(std::move(corridors)),
      corridor_id_(map.size(), -1), with_mask_(map.size(), 0), against_mask_(map.size(), 0) {
    for (std::size_t ci = 0; ci < corridors_.size(); ++ci) {
        for (int cell : corridors_[ci].cells) {
            if (corridor_id_[cell] != -1)
                throw std::invalid_argument("highway: corridor cell sets overlap");
            corridor_id_[cell] = static_cast<int32_t>(ci);
        }
    }
    auto dir_between = [&](int from, int to) {
        for (int d = 0; d < kNumDirs; ++d)
            if (map.neighbor(from, d) == to) return d;
        throw std::invalid_argument("highway: corridor cells not adjacent");
    };
    auto add_edge = [&](int a, int b) {  // travel direction a -> b
        int d = dir_between(a, b);
        with_mask_[a] |= (1u << d);
        against_mask_[b] |= (1u << dir_between(b, a));
        ++with_count_;
    };
    for (const Corridor& c : corridors_) {
        std::vector<int> seq = c.cells;
        if (!c.forward) std::reverse(seq.begin(), seq.end());
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) add_edge(seq[i], seq[i + 1]);
        if (c.is_loop) {
            if (seq.size() >= 2) add_edge(seq.back(), seq.front());
            continue;
        }
        // Boundary edges: directed only toward/from intersections.
        auto boundary = [&](int tip, int inner) {
            for (int d = 0; d < kNumDirs; ++d) {
                int to = map.neighbor(tip, d);
                if (to >= 0 && map.free_at(to) && to != inner) return to;
            }
            return -1;
        };
        int front_b = boundary(seq.front(), seq.size() > 1 ? seq[1] : -1);
        int back_b = boundary(seq.back(), seq.size() > 1 ? seq[seq.size() - 2] : -1);
        if (seq.size() == 1) {
            // A single chain cell has two boundary cells; orientation fixes entry/exit.
            auto nb = std::vector<int>{};
            for (int d = 0; d < kNumDirs; ++d) {
                int to = map.neighbor(seq[0], d);
                if (to >= 0 && map.free_at(to)) nb.push_back(to);
            }
            front_b = c.forward ? nb[0] : nb[1];
            back_b = c.forward ? nb[1] : nb[0];
        }
        if (front_b >= 0 && map.degree(front_b) >= 3) add_edge(front_b, seq.front());
        if (back_b >= 0 && map.degree(back_b) >= 3) add_edge(seq.back(), back_b);
    }
}

namespace {

int packed_dir(int width, int from, int to) {
    int dx = to % width - from % width;
    int dy = to / width - from / width;
    for (int d = 0; d < kNumDirs; ++d)
        if (dir_dx(d) == dx && dir_dy(d) == dy) return d;
    return -1;
}

}  // namespace

bool Highway::with_edge(int from, int to) const {
    if (with_mask_.empty() || from < 0 || to < 0) return false;
    int d = packed_dir(width_, from, to);
    return d >= 0 && (with_mask_[from] & (1u << d)) != 0;
}

bool Highway::against_edge(int from, int to) const {
    if (against_mask_.empty() || from < 0 || to < 0) return false;
    int d = packed_dir(width_, from, to);
    return d >= 0 && (against_mask_[from] & (1u << d)) != 0;
}

std::vector<std::pair<int, int>> Highway::with_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int loc = 0; loc < static_cast<int>(with_mask_.size()); ++loc)
        for (int d = 0; d < kNumDirs; ++d)
            if (with_mask_[loc] & (1u << d))
                out.emplace_back(loc, loc + dir_dx(d) + dir_dy(d) * width_);
    return out;
}

std::vector<std::pair<int, int>> Highway::against_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int loc = 0; loc < static_cast<int>(against_mask_.size()); ++loc)
        for (int d = 0; d < kNumDirs; ++d)
            if (against_mask_[loc] & (1u << d))
                out.emplace_back(loc, loc + dir_dx(d) + dir_dy(d) * width_);
    return out;
}

namespace {

// Orientation bookkeeping for the alternating scheme.
struct CorridorClass {
    bool horizontal = true;
    int rep = 0;  // representative row (horizontal) or column (vertical)
};

CorridorClass classify(const GridMap& map, const Corridor& c) {
    int h_edges = 0, v_edges = 0;
    auto count = [&](int a, int b) {
        if (map.y_of(a) == map.y_of(b)) ++h_edges; else ++v_edges;
    };
    for (std::size_t i = 0; i + 1 < c.cells.size(); ++i) count(c.cells[i], c.cells[i + 1]);
    if (c.is_loop && c.cells.size() >= 2) count(c.cells.back(), c.cells.front());
    CorridorClass cc;
    cc.horizontal = h_edges >= v_edges;
    std::map<int, int> freq;
    for (int cell : c.cells) ++freq[cc.horizontal ? map.y_of(cell) : map.x_of(cell)];
    int best = -1, best_n = -1;
    for (auto& [coord, n] : freq)
        if (n > best_n) { best = coord; best_n = n; }
    cc.rep = best;
    return cc;
}

// True when the stored cyclic order of a loop runs clockwise.
bool loop_clockwise(const GridMap& map, const std::vector<int>& cells) {
    std::size_t top = 0;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        int a = cells[i], b = cells[top];
        if (map.y_of(a) < map.y_of(b) || (map.y_of(a) == map.y_of(b) && map.x_of(a) < map.x_of(b)))
            top = i;
    }
    int t = cells[top];
    int succ = cells[(top + 1) % cells.size()];
    // The cycle neighbors of the topmost-leftmost cell are its right and
    // down neighbors; successor to the right means clockwise.
    return succ == map.neighbor(t, DIR_RIGHT);
}

}  // namespace

Highway assign_highway_alternating(const GridMap& map) {
    std::vector<Corridor> corridors = extract_corridors(map);
    std::vector<CorridorClass> cls(corridors.size());
    std::vector<int> h_reps, v_reps;
    for (std::size_t i = 0; i < corridors.size(); ++i) {
        cls[i] = classify(map, corridors[i]);
        (cls[i].horizontal ? h_reps : v_reps).push_back(cls[i].rep);
    }
    std::sort(h_reps.begin(), h_reps.end());
    h_reps.erase(std::unique(h_reps.begin(), h_reps.end()), h_reps.end());
    std::sort(v_reps.begin(), v_reps.end());
    v_reps.erase(std::unique(v_reps.begin(), v_reps.end()), v_reps.end());

    for (std::size_t i = 0; i < corridors.size(); ++i) {
        Corridor& c = corridors[i];
        const CorridorClass& cc = cls[i];
        auto& reps = cc.horizontal ? h_reps : v_reps;
        int rank = static_cast<int>(std::lower_bound(reps.begin(), reps.end(), cc.rep) - reps.begin());
        bool desired_positive = rank % 2 == 0;  // rightward / downward
        if (c.is_loop) {
            // Rightward tops and downward right flanks are both clockwise.
            bool cw = loop_clockwise(map, c.cells);
            c.forward = (cw == desired_positive);
        } else {
            long balance = 0;
            for (std::size_t k = 0; k + 1 < c.cells.size(); ++k)
                balance += cc.horizontal ? map.x_of(c.cells[k + 1]) - map.x_of(c.cells[k])
                                         : map.y_of(c.cells[k + 1]) - map.y_of(c.cells[k]);
            c.forward = (balance >= 0) == desired_positive;
        }
    }
    return Highway(map, std::move(corridors));
}

Highway assign_highway(const GridMap& map, const std::vector<bool>& forward) {
    std::vector<Corridor> corridors = extract_corridors(map);
    if (forward.size() != corridors.size())
        throw std::invalid_argument("assign_highway: direction list length " +
                                    std::to_string(forward.size()) + " != corridor count " +
                                    std::to_string(corridors.size()));
    for (std::size_t i = 0; i < corridors.size(); ++i) corridors[i].forward = forward[i];
    return Highway(map, std::move(corridors));
}

GridMap strict_subgraph(const GridMap& map, const Highway& hw) {
    if (hw.map_width() != map.width() || hw.map_height() != map.height())
        throw std::invalid_argument("strict_subgraph: highway was built for a different map");
    GridMap out = map;
    for (auto [from, to] : hw.against_edges()) {
        if (!map.free_at(from) || !map.free_at(to))
            throw std::invalid_argument("strict_subgraph: highway cell not free in map");
        out.block_edge(from, to);
    }
    return out;
}

bool strongly_connected(const GridMap& map) {
    std::vector<int> frees = map.free_cells();
    if (frees.size() <= 1) return true;
    auto reach = [&](bool forward) {
        std::vector<uint8_t> seen(map.size(), 0);
        std::vector<int> stack{frees[0]};
        seen[frees[0]] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            for (int d = 0; d < kNumDirs; ++d) {
                int to = map.neighbor(cur, d);
                if (to < 0 || !map.free_at(to) || seen[to]) continue;
                bool allowed = forward ? map.move_allowed(cur, d) : !map.edge_blocked(to, cur);
                if (!forward && !map.adjacent_free(to, cur)) allowed = false;
                if (!allowed) continue;
                seen[to] = 1;
                ++count;
                stack.push_back(to);
            }
        }
        return count == frees.size();
    };
    return reach(true) && reach(false);
}

// ---------------------------------------------------------------------------
// overlay files

namespace {

// Arrow each corridor cell carries in an overlay: the direction of travel
// leaving the cell. The last chain cell points at its exit boundary.
std::vector<std::pair<int, char>> corridor_arrows(const GridMap& map, const Corridor& c) {
    std::vector<int> seq = c.cells;
    if (!c.forward) std::reverse(seq.begin(), seq.end());
    auto dir_between = [&](int a, int b) {
        for (int d = 0; d < kNumDirs; ++d)
            if (map.neighbor(a, d) == b) return d;
        return -1;
    };
    std::vector<std::pair<int, char>> out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        int next = -1;
        if (i + 1 < seq.size()) {
            next = seq[i + 1];
        } else if (c.is_loop) {
            next = seq.front();
        } else if (seq.size() == 1) {
            std::vector<int> nb;
            for (int d = 0; d < kNumDirs; ++d) {
                int to = map.neighbor(seq[0], d);
                if (to >= 0 && map.free_at(to)) nb.push_back(to);
            }
            next = c.forward ? nb[1] : nb[0];
        } else {
            for (int d = 0; d < kNumDirs; ++d) {
                int to = map.neighbor(seq[i], d);
                if (to >= 0 && map.free_at(to) && to != seq[i - 1]) next = to;
            }
        }
        out.emplace_back(seq[i], dir_char(dir_between(seq[i], next)));
    }
    return out;
}

}  // namespace

std::string overlay_to_text(const GridMap& map, const Highway& hw) {
    std::vector<char> grid(map.size(), '.');
    for (const Corridor& c : hw.corridors())
        for (auto [cell, ch] : corridor_arrows(map, c)) grid[cell] = ch;
    std::ostringstream out;
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) out << grid[map.index(x, y)];
        out << '\n';
    }
    return out.str();
}

Highway overlay_from_text(const GridMap& map, const std::string& text) {
    std::istringstream in(text);
    std::vector<int> arrow(map.size(), -1);
    std::string line;
    for (int y = 0; y < map.height(); ++y) {
        if (!std::getline(in, line)) throw std::runtime_error("overlay: missing row " + std::to_string(y));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (static_cast<int>(line.size()) != map.width())
            throw std::runtime_error("overlay: row width mismatch at row " + std::to_string(y));
        for (int x = 0; x < map.width(); ++x) {
            char ch = line[x];
            if (ch == '.') continue;
            int d = char_dir(ch);
            if (d < 0) throw std::runtime_error(std::string("overlay: unknown character '") + ch + "'");
            arrow[map.index(x, y)] = d;
        }
    }

    std::vector<Corridor> corridors = extract_corridors(map);
    std::vector<uint8_t> on_corridor(map.size(), 0);
    for (const Corridor& c : corridors)
        for (int cell : c.cells) on_corridor[cell] = 1;
    for (int loc = 0; loc < map.size(); ++loc) {
        if (arrow[loc] >= 0 && !on_corridor[loc])
            throw std::runtime_error("overlay: arrow on non-corridor cell " + std::to_string(loc));
        if (arrow[loc] < 0 && on_corridor[loc])
            throw std::runtime_error("overlay: corridor cell without arrow at " + std::to_string(loc));
    }

    for (Corridor& c : corridors) {
        auto matches = [&](bool forward) {
            Corridor probe = c;
            probe.forward = forward;
            for (auto [cell, ch] : corridor_arrows(map, probe))
                if (arrow[cell] != char_dir(ch)) return false;
            return true;
        };
        bool fwd_ok = matches(true);
        bool rev_ok = matches(false);
        if (fwd_ok == rev_ok)
            throw std::runtime_error("overlay: inconsistent arrows along a corridor");
        c.forward = fwd_ok;
    }
    return Highway(map, std::move(corridors));
}

Highway load_overlay_file(const GridMap& map, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open overlay file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return overlay_from_text(map, buf.str());
}

void write_overlay_file(const GridMap& map, const Highway& hw, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write overlay file: " + path);
    out << overlay_to_text(map, hw);
}

}  // namespace hmapf
