#include "dsc/geom.hpp"

namespace dsc {

std::string Coord::str() const {
  return "(" + std::to_string(x) + "," + std::to_string(y) + ")";
}

char dir_char(Dir d) {
  switch (d) {
    case Dir::N: return 'N';
    case Dir::E: return 'E';
    case Dir::S: return 'S';
    case Dir::W: return 'W';
  }
  throw std::logic_error("bad dir");
}

Dir dir_from_char(char c) {
  switch (c) {
    case 'N': return Dir::N;
    case 'E': return Dir::E;
    case 'S': return Dir::S;
    case 'W': return Dir::W;
  }
  throw std::invalid_argument(std::string("bad direction char: ") + c);
}

std::array<Frame, 8> all_frames() {
  std::array<Frame, 8> out;
  int k = 0;
  for (int m = 0; m < 2; ++m)
    for (int r = 0; r < 4; ++r) out[k++] = Frame{uint8_t(r), m == 1};
  return out;
}

bool ZOrder::valid() const {
  uint8_t mask = 0;
  for (Dir d : seq) mask |= uint8_t(1u << uint8_t(d));
  return mask == 0xF;
}

std::string ZOrder::str() const {
  std::string s;
  for (Dir d : seq) s += dir_char(d);
  return s;
}

ZOrder ZOrder::parse(const std::string& s) {
  if (s.size() != 4) throw std::invalid_argument("z-order must have 4 letters: " + s);
  ZOrder z;
  for (int i = 0; i < 4; ++i) z.seq[i] = dir_from_char(s[i]);
  if (!z.valid()) throw std::invalid_argument("z-order must be a permutation of NEWS: " + s);
  return z;
}

ZOrder x_order_from_z_order(const ZOrder& z) {
  ZOrder x = z;
  std::swap(x.seq[1], x.seq[2]);
  return x;
}

ZOrder order_of_frame(const Frame& f) {
  ZOrder base;  // NEWS
  ZOrder out;
  for (int i = 0; i < 4; ++i) out.seq[i] = f.map(base.seq[i]);
  return out;
}

std::optional<Frame> frame_of_order(const ZOrder& z) {
  for (const Frame& f : all_frames())
    if (order_of_frame(f) == z) return f;
  return std::nullopt;
}

}  // namespace dsc
