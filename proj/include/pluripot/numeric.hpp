#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace pluripot {

using cplx = std::complex<double>;

// Neumaier variant of Kahan summation; order-dependent but deterministic.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

template <class Range>
double compensated_sum(const Range& r) {
    CompensatedSum s;
    for (double x : r) s.add(x);
    return s.value();
}

// Branch of the inverse Joukowski map with |h| >= 1.
inline cplx joukowski_inverse(cplx z) {
    cplx r = std::sqrt(z * z - 1.0);
    cplx a = z + r, b = z - r;
    return std::abs(a) >= std::abs(b) ? a : b;
}

inline double log_abs_joukowski_inverse(cplx z) {
    if (z.imag() == 0.0 && std::abs(z.real()) <= 1.0) return 0.0;
    return std::log(std::abs(joukowski_inverse(z)));
}

inline unsigned thread_count() {
    if (const char* env = std::getenv("PLURIPOT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

// Static block partition; each index is processed by exactly one worker, so
// per-index results do not depend on the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    unsigned t = thread_count();
    if (t <= 1 || n < 2 * t) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(t);
    std::size_t chunk = (n + t - 1) / t;
    for (unsigned w = 0; w < t; ++w) {
        std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, w, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace pluripot
