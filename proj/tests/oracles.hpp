#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

namespace oracle {

// Modular arithmetic over the Mersenne prime 2^61 - 1.
inline constexpr std::uint64_t kP = (std::uint64_t(1) << 61) - 1;

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::uint64_t>((unsigned __int128)a * b % kP);
}

inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e) {
    if (e & 1) r = mulmod(r, a);
    a = mulmod(a, a);
    e >>= 1;
  }
  return r;
}

inline std::size_t rank_mod_p(std::vector<std::vector<std::uint64_t>> m) {
  std::size_t rank = 0;
  std::size_t cols = m.empty() ? 0 : m[0].size();
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t piv = rank;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    std::uint64_t inv = powmod(m[rank][c], kP - 2);
    for (std::size_t r = rank + 1; r < m.size(); ++r) {
      if (m[r][c] == 0) continue;
      std::uint64_t f = mulmod(m[r][c], inv);
      for (std::size_t k = c; k < cols; ++k) m[r][k] = (m[r][k] + kP - mulmod(f, m[rank][k])) % kP;
    }
    ++rank;
  }
  return rank;
}

inline void monomials(int d, int k, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == d - 1) {
    cur.push_back(k);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int e = k; e >= 0; --e) {
    cur.push_back(e);
    monomials(d, k - e, cur, out);
    cur.pop_back();
  }
}

// dim P_k - rank(Laplacian : P_k -> P_{k-2}) from the monomial basis. The
// Laplacian preserves the parity of every exponent, so the matrix is split
// into blocks by parity pattern before elimination. A rank found mod p is a
// lower bound on the rational rank; full row rank mod p is therefore exact.
inline std::uint64_t harmonic_dim_bruteforce(int d, int k) {
  std::vector<std::vector<int>> src, dst;
  std::vector<int> cur;
  monomials(d, k, cur, src);
  if (k >= 2) monomials(d, k - 2, cur, dst);
  auto parity = [](const std::vector<int>& e) {
    unsigned key = 0;
    for (std::size_t i = 0; i < e.size(); ++i) key |= unsigned(e[i] & 1) << i;
    return key;
  };
  std::map<unsigned, std::vector<std::size_t>> sblk, dblk;
  for (std::size_t i = 0; i < src.size(); ++i) sblk[parity(src[i])].push_back(i);
  for (std::size_t i = 0; i < dst.size(); ++i) dblk[parity(dst[i])].push_back(i);
  std::size_t rank = 0;
  for (auto& [key, rows] : dblk) {
    auto& cols = sblk[key];
    std::map<std::vector<int>, std::size_t> col_of;
    for (std::size_t c = 0; c < cols.size(); ++c) col_of[src[cols[c]]] = c;
    // row r = coefficient of target monomial dst[r] in Lap(src[c])
    std::vector<std::vector<std::uint64_t>> m(rows.size(), std::vector<std::uint64_t>(cols.size(), 0));
    std::map<std::vector<int>, std::size_t> row_of;
    for (std::size_t r = 0; r < rows.size(); ++r) row_of[dst[rows[r]]] = r;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& e = src[cols[c]];
      for (int i = 0; i < d; ++i) {
        if (e[i] < 2) continue;
        auto t = e;
        t[i] -= 2;
        m[row_of.at(t)][c] = (m[row_of.at(t)][c] + std::uint64_t(e[i]) * (e[i] - 1)) % kP;
      }
    }
    rank += rank_mod_p(std::move(m));
  }
  return src.size() - rank;
}

}  // namespace oracle
