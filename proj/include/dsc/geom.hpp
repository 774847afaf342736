#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace dsc {

struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord&, const Coord&) = default;
  Coord operator+(Coord o) const { return {x + o.x, y + o.y}; }
  Coord operator-(Coord o) const { return {x - o.x, y - o.y}; }
  std::string str() const;  // "(x,y)"
};

struct CoordHash {
  size_t operator()(const Coord& c) const {
    return std::hash<int64_t>()((int64_t(c.x) << 32) ^ uint32_t(c.y));
  }
};

// Compass labels for the four diagonal couplers of a qubit. The page is
// rotated 45 degrees relative to the coordinate axes; this orientation makes
// the default interaction orders spread ancilla faults perpendicular to the
// matching logical string in both bases (no hook-error distance loss).
enum class Dir : uint8_t { N = 0, E = 1, S = 2, W = 3 };  // clockwise

inline Coord delta(Dir d) {
  switch (d) {
    case Dir::N: return {1, -1};
    case Dir::E: return {1, 1};
    case Dir::S: return {-1, 1};
    case Dir::W: return {-1, -1};
  }
  throw std::logic_error("bad dir");
}

char dir_char(Dir d);
Dir dir_from_char(char c);
inline Dir opposite(Dir d) { return Dir((uint8_t(d) + 2) & 3); }

// One of the 8 symmetries of the compass: optional east/west mirror followed
// by a number of quarter turns clockwise.
struct Frame {
  uint8_t rot = 0;
  bool mirror = false;
  Dir map(Dir d) const {
    uint8_t a = uint8_t(d);
    if (mirror) a = (4 - a) & 3;
    return Dir((a + rot) & 3);
  }
  Coord map(Coord off) const {
    if (mirror) off = {-off.y, -off.x};  // swap east and west, fix north/south
    for (int i = 0; i < rot; ++i) off = {-off.y, off.x};
    return off;
  }
  Frame then_rot180() const { return {uint8_t((rot + 2) & 3), mirror}; }
  friend bool operator==(const Frame&, const Frame&) = default;
};

std::array<Frame, 8> all_frames();

// Direction sequence followed by Z ancillas within a round. X ancillas use
// the same sequence with the middle two entries swapped.
struct ZOrder {
  std::array<Dir, 4> seq{Dir::N, Dir::E, Dir::W, Dir::S};
  bool valid() const;
  std::string str() const;
  static ZOrder parse(const std::string& s);
  static ZOrder news() { return {}; }
  ZOrder reversed() const { return ZOrder{{seq[3], seq[2], seq[1], seq[0]}}; }
  friend bool operator==(const ZOrder&, const ZOrder&) = default;
};

ZOrder x_order_from_z_order(const ZOrder& z);
ZOrder order_of_frame(const Frame& f);
std::optional<Frame> frame_of_order(const ZOrder& z);

}  // namespace dsc
