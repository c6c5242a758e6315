#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>

namespace amoebot {

// Axial coordinates on the triangular grid. Node (a, b) sits at the
// Euclidean position a*(1,0) + b*(1/2, sqrt(3)/2). The implicit third
// coordinate is z = -a - b, so every grid line is one of three axes.
struct NodeCoord {
    int32_t a = 0;
    int32_t b = 0;

    friend bool operator==(const NodeCoord&, const NodeCoord&) = default;
    friend auto operator<=>(const NodeCoord&, const NodeCoord&) = default;
};

// The six edge directions in counterclockwise order starting at east.
// Index arithmetic relies on this order: opposite(d) == (d+3)%6 and the
// next counterclockwise direction is (d+1)%6.
enum class Direction : uint8_t { E = 0, NE = 1, NW = 2, W = 3, SW = 4, SE = 5 };

enum class Axis : uint8_t { X = 0, Y = 1, Z = 2 };

inline constexpr int kNumDirs = 6;
inline constexpr std::array<Direction, 6> kAllDirs = {
    Direction::E,  Direction::NE, Direction::NW,
    Direction::W,  Direction::SW, Direction::SE};
inline constexpr std::array<Axis, 3> kAllAxes = {Axis::X, Axis::Y, Axis::Z};

constexpr int dir_index(Direction d) { return static_cast<int>(d); }
constexpr Direction direction_from_index(int i) {
    return static_cast<Direction>(((i % 6) + 6) % 6);
}

constexpr Direction opposite(Direction d) {
    return direction_from_index(dir_index(d) + 3);
}

// Next direction counterclockwise (E -> NE -> NW -> W -> SW -> SE -> E).
constexpr Direction ccw_next(Direction d) {
    return direction_from_index(dir_index(d) + 1);
}

constexpr Axis axis_of(Direction d) {
    switch (d) {
        case Direction::E:
        case Direction::W:
            return Axis::X;
        case Direction::NE:
        case Direction::SW:
            return Axis::Y;
        default:
            return Axis::Z;
    }
}

// Positive direction of an axis: the one whose Euclidean x-step is largest
// (E for X, NE for Y, SE^-1... for Z the positive run direction is SE so
// that walking "positive" never decreases the Euclidean x-coordinate).
constexpr Direction axis_positive_dir(Axis ax) {
    switch (ax) {
        case Axis::X: return Direction::E;
        case Axis::Y: return Direction::NE;
        default:      return Direction::SE;
    }
}

constexpr std::array<int32_t, 2> dir_step(Direction d) {
    switch (d) {
        case Direction::E:  return {1, 0};
        case Direction::NE: return {0, 1};
        case Direction::NW: return {-1, 1};
        case Direction::W:  return {-1, 0};
        case Direction::SW: return {0, -1};
        default:            return {1, -1};  // SE
    }
}

constexpr NodeCoord step(NodeCoord u, Direction d) {
    auto s = dir_step(d);
    return {u.a + s[0], u.b + s[1]};
}

// Euclidean embedding. Exact in halves: returns 2*x to stay integral.
constexpr int64_t euclid_x2(NodeCoord u) { return 2 * int64_t(u.a) + int64_t(u.b); }
// Euclidean y is b * sqrt(3)/2; comparisons only need b.
constexpr int64_t euclid_row(NodeCoord u) { return u.b; }

// Lexicographic (Euclidean-x, Euclidean-y) order used for canonical picks.
constexpr bool euclid_less(NodeCoord u, NodeCoord v) {
    if (euclid_x2(u) != euclid_x2(v)) return euclid_x2(u) < euclid_x2(v);
    return u.b < v.b;
}

// Exact graph distance between two grid nodes (on the full grid).
constexpr int64_t grid_distance(NodeCoord u, NodeCoord v) {
    int64_t da = int64_t(v.a) - u.a;
    int64_t db = int64_t(v.b) - u.b;
    if ((da >= 0) == (db >= 0)) {
        int64_t s = (da >= 0) ? da + db : -(da + db);
        return s;
    }
    return (da >= 0 ? da : -da) > (db >= 0 ? db : -db) ? (da >= 0 ? da : -da)
                                                       : (db >= 0 ? db : -db);
}

const char* direction_name(Direction d);
const char* axis_name(Axis ax);
// Parses "E", "NE", ... ; returns false on unknown name.
bool parse_direction(const std::string& name, Direction& out);

struct NodeCoordHash {
    size_t operator()(const NodeCoord& u) const {
        uint64_t h = (uint64_t(uint32_t(u.a)) << 32) | uint32_t(u.b);
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        return size_t(h);
    }
};

}  // namespace amoebot
