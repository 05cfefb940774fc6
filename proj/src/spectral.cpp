#include "spectral.hpp"

#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace elsim::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

const SpectralEngine& SpectralEngine::get(const Grid& grid) {
  using Key = std::tuple<int, int, int, int, double, double, double>;
  static std::map<Key, std::unique_ptr<SpectralEngine>> cache;
  static std::mutex cache_mutex;

  const Key key{grid.dims, grid.n[0], grid.n[1], grid.n[2],
                grid.extent[0], grid.extent[1], grid.extent[2]};
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<SpectralEngine>(grid)).first;
  return *it->second;
}

SpectralEngine::SpectralEngine(const Grid& grid) {
  const int rank = grid.dims;
  int shape[3] = {grid.n[0], grid.n[1], grid.n[2]};
  real_size_ = grid.size();
  std::size_t outer = 1;
  for (int a = 0; a + 1 < rank; ++a) outer *= static_cast<std::size_t>(shape[a]);
  const int last = shape[rank - 1];
  const std::size_t half = static_cast<std::size_t>(last / 2 + 1);
  spec_size_ = outer * half;

  {
    AlignedBuffer<double> r(real_size_);
    AlignedBuffer<cplx> c(spec_size_);
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c(rank, shape, r.data(), reinterpret_cast<fftw_complex*>(c.data()),
                             FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r(rank, shape, reinterpret_cast<fftw_complex*>(c.data()), r.data(),
                             FFTW_ESTIMATE);
  }

  for (int a = 0; a < 3; ++a) {
    k_[a].assign(spec_size_, 0.0);
    mode_[a].assign(spec_size_, 0);
  }

  // Spectral index: row-major over (shape[0], ..., half).
  for (std::size_t s = 0; s < spec_size_; ++s) {
    std::size_t rem = s;
    int idx[3] = {0, 0, 0};
    idx[rank - 1] = static_cast<int>(rem % half);
    rem /= half;
    for (int a = rank - 2; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % static_cast<std::size_t>(shape[a]));
      rem /= static_cast<std::size_t>(shape[a]);
    }
    for (int a = 0; a < rank; ++a) {
      const int N = shape[a];
      const int m = idx[a] <= N / 2 ? idx[a] : idx[a] - N;
      mode_[a][s] = m;
      const bool nyquist = (N % 2 == 0) && (idx[a] == N / 2);
      k_[a][s] = nyquist ? 0.0 : 2.0 * std::numbers::pi / grid.extent[a] * m;
    }
  }
}

SpectralEngine::~SpectralEngine() {
  std::lock_guard lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(fwd_);
  if (inv_) fftw_destroy_plan(inv_);
}

Spectrum SpectralEngine::forward(const std::vector<double>& in) const {
  AlignedBuffer<double> r(real_size_);
  std::memcpy(r.data(), in.data(), sizeof(double) * real_size_);
  Spectrum out(spec_size_);
  fftw_execute_dft_r2c(fwd_, r.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

void SpectralEngine::inverse(const Spectrum& in, std::vector<double>& out) const {
  Spectrum scratch(spec_size_);
  std::memcpy(scratch.data(), in.data(), sizeof(cplx) * spec_size_);
  AlignedBuffer<double> r(real_size_);
  fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(scratch.data()), r.data());
  out.resize(real_size_);
  const double scale = 1.0 / static_cast<double>(real_size_);
  for (std::size_t i = 0; i < real_size_; ++i) out[i] = r[i] * scale;
}

}  // namespace elsim::detail
