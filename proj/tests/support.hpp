#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "k3/k3.hpp"
#include "oracle/grassmann.hpp"

namespace support {

inline constexpr std::uint32_t kSeed = 20240229;

inline oracle::Mat to_mat(const k3::Subspace& K) {
  oracle::Mat M;
  for (std::size_t i = 0; i < K.dim(); ++i) {
    const auto row = K.basis().row(i);
    M.emplace_back(row.begin(), row.end());
  }
  return M;
}

template <class Range>
std::vector<oracle::Mat> to_mats(const Range& subs) {
  std::vector<oracle::Mat> out;
  for (const auto& K : subs) {
    if constexpr (std::is_same_v<std::decay_t<decltype(K)>, k3::Subspace>)
      out.push_back(to_mat(K));
    else
      out.push_back(to_mat(K.subspace()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<int> gram_of(const k3::BilinearSpace& V) {
  std::vector<int> g;
  for (std::size_t i = 0; i < V.dim(); ++i)
    for (std::size_t j = 0; j < V.dim(); ++j) g.push_back(V.gram(i, j));
  return g;
}

inline k3::Subspace random_subspace(std::mt19937& rng, const k3::BilinearSpace& V, const k3::Field& F,
                                    std::size_t rows) {
  std::uniform_int_distribution<std::uint64_t> pick(0, F->order() - 1);
  k3::FieldMatrix M(0, V.dim());
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<k3::code_t> v(V.dim());
    for (auto& c : v) c = static_cast<k3::code_t>(pick(rng));
    M.append_row(v);
  }
  return {V, F, std::move(M)};
}

}  // namespace support
