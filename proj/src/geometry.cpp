#include "amoebot/geometry.hpp"

namespace amoebot {

const char* direction_name(Direction d) {
    switch (d) {
        case Direction::E:  return "E";
        case Direction::NE: return "NE";
        case Direction::NW: return "NW";
        case Direction::W:  return "W";
        case Direction::SW: return "SW";
        default:            return "SE";
    }
}

const char* axis_name(Axis ax) {
    switch (ax) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        default:      return "z";
    }
}

bool parse_direction(const std::string& name, Direction& out) {
    for (Direction d : kAllDirs) {
        if (name == direction_name(d)) {
            out = d;
            return true;
        }
    }
    return false;
}

}  // namespace amoebot
