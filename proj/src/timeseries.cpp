#include "regseg/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "regseg/error.hpp"
#include "regseg/format.hpp"

namespace regseg {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool as_number(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first < last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return first != last && res.ec == std::errc{} && res.ptr == last;
}

// a < b for time labels.
bool label_less(const std::string& a, const std::string& b) {
  double x = 0.0;
  double y = 0.0;
  if (as_number(a, x) && as_number(b, y)) return x < y;
  return a < b;
}

}  // namespace

std::vector<std::string> positional_index(std::size_t n) {
  std::vector<std::string> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = std::to_string(i + 1);
  return idx;
}

MultiSeries make_series(Matrix values, std::vector<std::string> dim_names) {
  MultiSeries s;
  s.time_index = positional_index(values.rows());
  if (dim_names.empty()) {
    for (std::size_t c = 0; c < values.cols(); ++c) dim_names.push_back("x" + std::to_string(c + 1));
  }
  s.dim_names = std::move(dim_names);
  s.values = std::move(values);
  return s;
}

void validate(const MultiSeries& s) {
  if (s.length() < 2) throw ValidationError("series needs at least 2 rows, got " + std::to_string(s.length()));
  if (s.dims() < 1) throw ValidationError("series needs at least 1 value column");
  if (s.time_index.size() != s.length()) throw ValidationError("time index length does not match row count");
  if (s.dim_names.size() != s.dims()) throw ValidationError("dimension names do not match column count");
  for (double v : s.values.data()) {
    if (!std::isfinite(v)) throw ValidationError("series contains a non-finite value");
  }
  for (std::size_t i = 1; i < s.time_index.size(); ++i) {
    if (!label_less(s.time_index[i - 1], s.time_index[i])) {
      throw ValidationError("time index not strictly increasing at row " + std::to_string(i + 1) + " ('" +
                            s.time_index[i - 1] + "' then '" + s.time_index[i] + "')");
    }
  }
}

MultiSeries load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());

  MultiSeries s;
  std::vector<double> flat;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1 && has_header) {
      if (fields.size() < 2) throw ParseError("header needs a time column and at least one value column", line_no);
      for (std::size_t c = 1; c < fields.size(); ++c) s.dim_names.push_back(trim(fields[c]));
      width = fields.size();
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() < 2) throw ParseError("row needs a time column and at least one value column", line_no);
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    }
    s.time_index.push_back(trim(fields[0]));
    for (std::size_t c = 1; c < fields.size(); ++c) flat.push_back(parse_real(fields[c], line_no));
  }
  if (width < 2) throw ValidationError(path.string() + " holds no data rows");
  const std::size_t p = width - 1;
  const std::size_t n = s.time_index.size();
  s.values = Matrix(n, p);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) s.values(r, c) = flat[r * p + c];
  if (s.dim_names.empty()) {
    for (std::size_t c = 0; c < p; ++c) s.dim_names.push_back("x" + std::to_string(c + 1));
  }
  validate(s);
  return s;
}

void save_csv(const MultiSeries& s, const std::filesystem::path& path, int digits) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "time";
  for (const auto& name : s.dim_names) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < s.length(); ++r) {
    out << s.time_index[r];
    for (std::size_t c = 0; c < s.dims(); ++c) out << ',' << format_real(s.values(r, c), digits);
    out << '\n';
  }
}

MultiSeries standardize(const MultiSeries& s) {
  const std::size_t n = s.length();
  if (n < 2) throw ValidationError("standardize needs at least 2 rows");
  MultiSeries out = s;
  for (std::size_t c = 0; c < s.dims(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += s.values(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (s.values(r, c) - mean) * (s.values(r, c) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      const std::string name = c < s.dim_names.size() ? s.dim_names[c] : std::to_string(c + 1);
      throw DegenerateInputError("column '" + name + "' has zero standard deviation");
    }
    for (std::size_t r = 0; r < n; ++r) out.values(r, c) = (s.values(r, c) - mean) / sd;
  }
  return out;
}

MultiSeries embed_lags(const MultiSeries& s, std::size_t r) {
  if (s.dims() != 1) throw ValidationError("lag embedding needs a univariate series");
  if (r < 1) throw ParameterError("lag count must be at least 1");
  const std::size_t n = s.length();
  if (r >= n) throw SizeError("lag count " + std::to_string(r) + " must be below series length " + std::to_string(n));

  const std::size_t rows = n - r;
  Matrix m(rows, r + 1);
  for (std::size_t t = 0; t < rows; ++t)
    for (std::size_t j = 0; j <= r; ++j) m(t, j) = s.values(t + j, 0);

  const std::string base = s.dim_names.empty() ? "x" : s.dim_names.front();
  std::vector<std::string> names{base};
  for (std::size_t j = 1; j <= r; ++j) names.push_back(base + "_lead" + std::to_string(j));
  MultiSeries out = make_series(std::move(m), std::move(names));
  out.source_index.assign(s.time_index.begin(), s.time_index.begin() + static_cast<std::ptrdiff_t>(rows));
  return out;
}

std::vector<std::size_t> Permutation::inverse() const {
  std::vector<std::size_t> inv(mapping.size());
  for (std::size_t i = 0; i < mapping.size(); ++i) inv[mapping[i]] = i;
  return inv;
}

std::pair<MultiSeries, Permutation> block_permute(const MultiSeries& s, std::size_t window, std::uint64_t seed) {
  const std::size_t n = s.length();
  if (window < 1 || window > n) {
    throw ParameterError("window length must lie in [1, " + std::to_string(n) + "], got " + std::to_string(window));
  }
  Permutation perm;
  perm.window = window;
  perm.mapping.resize(n);
  std::iota(perm.mapping.begin(), perm.mapping.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t start = 0; start < n; start += window) {
    const std::size_t stop = std::min(n, start + window);
    std::shuffle(perm.mapping.begin() + static_cast<std::ptrdiff_t>(start),
                 perm.mapping.begin() + static_cast<std::ptrdiff_t>(stop), rng);
  }

  MultiSeries out;
  out.values = Matrix(n, s.dims());
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = s.values.row(perm.mapping[i]);
    std::copy(src.begin(), src.end(), out.values.row(i).begin());
  }
  out.dim_names = s.dim_names;
  out.time_index = positional_index(n);
  out.source_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.source_index[i] = s.time_index[perm.mapping[i]];
  return {std::move(out), std::move(perm)};
}

MultiSeries unpermute(const MultiSeries& permuted, const Permutation& perm) {
  const std::size_t n = permuted.length();
  if (perm.mapping.size() != n) throw SizeError("permutation length does not match series");
  if (permuted.source_index.size() != n) throw ValidationError("permuted series lacks its source index");
  MultiSeries out;
  out.values = Matrix(n, permuted.dims());
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = permuted.values.row(i);
    std::copy(src.begin(), src.end(), out.values.row(perm.mapping[i]).begin());
  }
  out.dim_names = permuted.dim_names;
  out.time_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.time_index[perm.mapping[i]] = permuted.source_index[i];
  return out;
}

}  // namespace regseg
