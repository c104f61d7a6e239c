#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "regseg/matrix.hpp"

namespace regseg {

// N x p observations with a strictly increasing time index.
//
// Series derived by lag embedding or permutation carry the positional index
// 1..N' in `time_index`; the timestamps they came from are kept in
// `source_index` (empty for series read straight from a file).
struct MultiSeries {
  Matrix values;
  std::vector<std::string> time_index;
  std::vector<std::string> dim_names;
  std::vector<std::string> source_index;

  std::size_t length() const noexcept { return values.rows(); }
  std::size_t dims() const noexcept { return values.cols(); }
  std::vector<double> column(std::size_t c) const { return values.column(c); }

  bool operator==(const MultiSeries&) const = default;
};

// Positional labels "1".."n".
std::vector<std::string> positional_index(std::size_t n);

// Wraps a matrix with a positional time index and default names x1..xp.
MultiSeries make_series(Matrix values, std::vector<std::string> dim_names = {});

// Throws ValidationError unless N >= 2, p >= 1, all values finite and the
// time index is strictly increasing (numeric comparison when both labels are
// numbers, lexicographic otherwise).
void validate(const MultiSeries& s);

MultiSeries load_csv(const std::filesystem::path& path, bool has_header);

// Writes header "time,<dim names>". digits == 0 keeps values bit-exact.
void save_csv(const MultiSeries& s, const std::filesystem::path& path, int digits = 0);

// Column-wise z-scores with the sample (n-1) standard deviation.
MultiSeries standardize(const MultiSeries& s);

// Couples each point with its next r values: row t = (X_t, ..., X_{t+r}).
MultiSeries embed_lags(const MultiSeries& s, std::size_t r);

// Output row i holds input row mapping[i]. mapping only shuffles inside
// consecutive windows of `window` rows; the last window may be shorter.
struct Permutation {
  std::vector<std::size_t> mapping;
  std::size_t window = 1;

  std::vector<std::size_t> inverse() const;
};

std::pair<MultiSeries, Permutation> block_permute(const MultiSeries& s, std::size_t window,
                                                  std::uint64_t seed);

// Rows of `permuted` put back in their original order, time index restored
// from `source_index`. Bit-exact inverse of block_permute for series without
// source metadata of their own.
MultiSeries unpermute(const MultiSeries& permuted, const Permutation& perm);

// Reorders a per-row sequence from permuted order back to original order.
template <typename T>
std::vector<T> unpermute_values(std::span<const T> permuted, const Permutation& perm) {
  std::vector<T> out(permuted.size());
  for (std::size_t i = 0; i < permuted.size(); ++i) out[perm.mapping[i]] = permuted[i];
  return out;
}

}  // namespace regseg
