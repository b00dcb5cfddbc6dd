#include "kuramoto/fft.hpp"

#include <cstring>
#include <map>
#include <new>
#include <mutex>
#include <stdexcept>
#include <utility>

#include <fftw3.h>

namespace kuramoto::fft {
namespace {

class AlignedBuffer {
 public:
  AlignedBuffer() = default;
  explicit AlignedBuffer(std::size_t n) { resize(n); }
  AlignedBuffer(const AlignedBuffer&) = delete;
  AlignedBuffer& operator=(const AlignedBuffer&) = delete;
  ~AlignedBuffer() { fftw_free(data_); }

  void resize(std::size_t n) {
    if (n <= size_) return;
    fftw_free(data_);
    data_ = fftw_alloc_complex(n);
    if (data_ == nullptr) throw std::bad_alloc();
    size_ = n;
  }
  fftw_complex* data() { return data_; }

 private:
  fftw_complex* data_ = nullptr;
  std::size_t size_ = 0;
};

bool aligned(const void* p) { return fftw_alignment_of(static_cast<double*>(const_cast<void*>(p))) == 0; }

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, Sign sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    AlignedBuffer a(n), b(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), a.data(), b.data(),
                                      sign == Sign::Plus ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    if (plan == nullptr) throw std::runtime_error("fftw plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, Sign>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void transform(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, Sign sign) {
  if (in.size() != out.size()) throw std::invalid_argument("fft: input and output sizes differ");
  if (in.empty()) return;
  if (in.data() == out.data()) throw std::invalid_argument("fft: in-place transform not supported");
  const std::size_t n = in.size();
  fftw_plan plan = cache().get(n, sign);
  // Plans are made for aligned arrays; misaligned spans go through scratch.
  if (aligned(in.data()) && aligned(out.data())) {
    // Out-of-place complex transforms leave the input untouched.
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return;
  }
  thread_local AlignedBuffer src, dst;
  src.resize(n);
  dst.resize(n);
  std::memcpy(src.data(), in.data(), n * sizeof(fftw_complex));
  fftw_execute_dft(plan, src.data(), dst.data());
  std::memcpy(static_cast<void*>(out.data()), dst.data(), n * sizeof(fftw_complex));
}

}  // namespace kuramoto::fft
