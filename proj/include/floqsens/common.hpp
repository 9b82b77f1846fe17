#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace floqsens {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cxd iu{0.0, 1.0};

// Fold x into [-w/2, w/2).
inline double fold_interval(double x, double w) {
  return x - w * std::floor(x / w + 0.5);
}

// Distance on the circle of circumference w.
inline double circle_dist(double a, double b, double w) {
  return std::abs(fold_interval(a - b, w));
}

inline int default_threads() {
  if (const char* env = std::getenv("FLOQSENS_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static block partition over [0, n). Each index is visited exactly once and
// writes only its own output slots, so results do not depend on the thread count.
inline void parallel_for(long n, int threads, const std::function<void(long)>& body) {
  if (threads <= 1 || n < 2 * threads) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    long lo = n * t / threads, hi = n * (t + 1) / threads;
    pool.emplace_back([lo, hi, &body] {
      for (long i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

// splitmix64, used to derive independent per-trajectory RNG seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace floqsens
