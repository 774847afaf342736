#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace dsc {

// Counter-based RNG. Hashing (seed, counters...) gives a stream that does not
// depend on evaluation order, so shots can run in parallel.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// uniform in [0,1)
inline double u01(uint64_t h) { return double(h >> 11) * 0x1.0p-53; }

// Symmetric difference of two sorted id vectors.
template <typename T>
std::vector<T> xor_sorted(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) out.push_back(a[i++]);
    else if (b[j] < a[i]) out.push_back(b[j++]);
    else { ++i; ++j; }
  }
  out.insert(out.end(), a.begin() + i, a.end());
  out.insert(out.end(), b.begin() + j, b.end());
  return out;
}

template <typename T>
void xor_into(std::vector<T>& a, const std::vector<T>& b) {
  a = xor_sorted(a, b);
}

// Dense GF(2) row vector.
struct BitRow {
  std::vector<uint64_t> w;
  explicit BitRow(size_t nbits = 0) : w((nbits + 63) / 64, 0) {}
  void set(size_t i) { w[i / 64] |= 1ULL << (i % 64); }
  bool get(size_t i) const { return (w[i / 64] >> (i % 64)) & 1; }
  void operator^=(const BitRow& o) {
    for (size_t i = 0; i < w.size() && i < o.w.size(); ++i) w[i] ^= o.w[i];
  }
  bool any() const {
    for (uint64_t x : w) if (x) return true;
    return false;
  }
  int lowest() const {
    for (size_t i = 0; i < w.size(); ++i)
      if (w[i]) return int(i * 64 + __builtin_ctzll(w[i]));
    return -1;
  }
  int popcount() const {
    int n = 0;
    for (uint64_t x : w) n += __builtin_popcountll(x);
    return n;
  }
};

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

}  // namespace dsc
