#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsnt {

/// Base error type; every failure in the library is reported with one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// Worker count for the parallel kernels: DSNT_THREADS if set and positive,
/// otherwise the OpenMP default.
int worker_threads();

/// Uniform double in [0, 1) built from the raw 53 high bits of the engine, so
/// sequences do not depend on the standard library's distribution code.
double uniform01(Rng& rng);

/// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Fisher-Yates on top of uniform_index.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

/// 64-bit FNV-1a, with a seed folded into the offset basis.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0);

namespace io {

/// Every input file opened by the library passes through here. Tests use the
/// log to prove that a command never touched a given path.
void record_access(const std::filesystem::path& path);
std::vector<std::string> accessed_paths();
void clear_access_log();

/// Reads a whole text file; throws Error naming the path if it is missing.
std::string read_file(const std::filesystem::path& path);

/// Reads a file line by line, invoking `fn(line, line_number)` (1-based).
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(const std::string&, std::size_t)>& fn);

/// Writes to `<path>.tmp` then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace io
}  // namespace dsnt

namespace dsnt {

/// Runs fn(i) for i in [0, n) on worker_threads() OpenMP threads. The first
/// exception thrown by any iteration is rethrown after the loop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dsnt
