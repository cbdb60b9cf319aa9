#include <bit>
#include <cstring>
#include <fstream>

#include "sve/errors.hpp"
#include "sve/gaussian.hpp"

namespace sve::gaussian {

namespace {

constexpr std::uint64_t kMagic = 0x31564F4346455653ull;  // "SVEFCOV1" read little-endian

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw DomainError("factor cache: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace

void save_factor(const std::filesystem::path& path, const FactorizedCovariance& f,
                 const kernel::KernelParams& p, std::size_t n) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DomainError("factor cache: cannot open " + path.string() + " for writing");
  put_u64(os, kMagic);
  put_u64(os, kFactorCacheVersion);
  put_f64(os, p.H);
  put_u64(os, n);
  put_f64(os, p.T);
  put_u64(os, f.rows());
  put_u64(os, f.cols());
  put_u64(os, f.active_columns);
  put_u64(os, f.effective_rank);
  put_f64(os, f.regularization_used);
  put_f64(os, f.jitter_level);
  put_u64(os, f.lower_triangular ? 1 : 0);
  for (double v : f.data()) put_f64(os, v);
  if (!os) throw DomainError("factor cache: write failed for " + path.string());
}

FactorizedCovariance load_factor(const std::filesystem::path& path, const kernel::KernelParams& p,
                                 std::size_t n) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("factor cache: cannot open " + path.string());
  if (get_u64(is) != kMagic) throw DomainError("factor cache: bad magic in " + path.string());
  if (get_u64(is) != kFactorCacheVersion) throw DomainError("factor cache: unsupported version");
  const double H = get_f64(is);
  const std::uint64_t cached_n = get_u64(is);
  const double T = get_f64(is);
  if (H != p.H || cached_n != n || T != p.T) {
    throw DomainError("factor cache: key (H, n, T) does not match the request");
  }
  const std::uint64_t rows = get_u64(is);
  const std::uint64_t cols = get_u64(is);
  if (rows != n + 1 || cols == 0 || cols > rows) throw DomainError("factor cache: bad shape");
  const std::uint64_t active = get_u64(is);
  const std::uint64_t rank = get_u64(is);
  const double reg = get_f64(is);
  const double level = get_f64(is);
  const bool lower = get_u64(is) != 0;
  std::vector<double> data(rows * cols);
  for (double& v : data) v = get_f64(is);
  FactorizedCovariance f(rows, cols, std::move(data));
  f.active_columns = active;
  f.effective_rank = rank;
  f.regularization_used = reg;
  f.jitter_level = level;
  f.lower_triangular = lower;
  return f;
}

}  // namespace sve::gaussian
