#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace urbm {

// Computational-basis configuration of n spin-1/2 sites. Site 0 is the
// least-significant bit of `bits`; bit value 0 is the +1 eigenstate of
// sigma^z, so the Ising variable is z_i = 1 - 2*bit_i.
struct BasisConfig {
  std::uint32_t bits{0};
  int n{0};

  BasisConfig() = default;
  BasisConfig(std::uint32_t bits_, int n_) : bits(bits_), n(n_) {
    if (n_ < 0 || n_ > 24) throw std::invalid_argument("BasisConfig: n out of range");
    if (n_ < 32 && (bits_ >> n_) != 0) throw std::invalid_argument("BasisConfig: bits exceed n sites");
  }

  int bit(int i) const { return static_cast<int>((bits >> i) & 1u); }
  // Ising eigenvalue z_i = +1 for bit 0, -1 for bit 1.
  int z(int i) const { return 1 - 2 * bit(i); }
  BasisConfig flipped(int i) const { return BasisConfig(bits ^ (1u << i), n); }

  std::vector<int> bit_vector() const {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = bit(i);
    return v;
  }

  // Site-0-first string, e.g. bits=0b001, n=3 -> "100".
  std::string to_string() const {
    std::string s(n, '0');
    for (int i = 0; i < n; ++i) s[i] = bit(i) ? '1' : '0';
    return s;
  }

  static BasisConfig from_string(const std::string& s) {
    std::uint32_t b = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] == '1') b |= (1u << i);
    return BasisConfig(b, static_cast<int>(s.size()));
  }
};

inline int parity(std::uint32_t x) { return std::popcount(x) & 1; }
inline double parity_sign(std::uint32_t x) { return parity(x) ? -1.0 : 1.0; }

}  // namespace urbm
