#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace isokit {

// Raised for malformed input files; the CLI maps it to exit code 3.
class input_error : public std::runtime_error {
public:
    input_error(const std::string& path, long line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          path_(path), line_(line) {}
    const std::string& path() const { return path_; }
    long line() const { return line_; }

private:
    std::string path_;
    long line_;
};

class unsupported_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Legendre nodes/weights on [-1,1], Newton on the Legendre recurrence.
struct GaussRule {
    std::vector<double> x, w;
};

inline GaussRule gauss_legendre(int n) {
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = z; p0 = 1.0; }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        g.x[i] = -z;
        g.x[n - 1 - i] = z;
        g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return g;
}

inline const GaussRule& gauss_rule(int n) {
    static const GaussRule g5 = gauss_legendre(5);
    static const GaussRule g16 = gauss_legendre(16);
    static const GaussRule g32 = gauss_legendre(32);
    if (n == 5) return g5;
    if (n == 16) return g16;
    if (n == 32) return g32;
    throw std::invalid_argument("gauss_rule: unsupported order");
}

template <class F>
double gauss_integrate(F&& f, double a, double b, int order = 16) {
    const GaussRule& g = gauss_rule(order);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a), s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(mid + half * g.x[i]);
    return s * half;
}

// Integral over [a,b] of a function that may blow up (integrably or not) at
// either end. Each half is cut into geometric layers toward its endpoint; a
// layer sequence that has not died out after `max_layers` is reported as
// divergent (returns +inf).
template <class F>
double integrate_endpoint_singular(F&& f, double a, double b, double ratio = 0.5,
                                   int max_layers = 2000, double rel_tol = 1e-13) {
    if (!(b > a)) return 0.0;
    double mid = 0.5 * (a + b);
    auto half = [&](double end, double inner, int dir) -> double {
        // layers: [end + dir*L*ratio^{k+1}, end + dir*L*ratio^k]
        double L = std::abs(inner - end);
        double total = 0.0;
        double hi = L;
        for (int k = 0; k < max_layers; ++k) {
            double lo = hi * ratio;
            // integrate in log variable u = log(distance)
            double piece = gauss_integrate(
                [&](double u) {
                    double d = std::exp(u);
                    return f(end + dir * d) * d;
                },
                std::log(lo), std::log(hi), 16);
            if (!std::isfinite(piece)) return kInf;
            total += piece;
            if (std::abs(piece) <= rel_tol * std::abs(total) && k > 8) return total;
            if (lo < 1e-300) break;
            hi = lo;
        }
        return kInf;
    };
    double left = half(a, mid, +1);
    if (!std::isfinite(left)) return kInf;
    double right = half(b, mid, -1);
    if (!std::isfinite(right)) return kInf;
    return left + right;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    if (n == 1) { g[0] = lo; return g; }
    double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * double(i) / double(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

inline unsigned worker_count() {
    if (const char* env = std::getenv("ISOKIT_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return unsigned(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Runs body(i) for i in [0,n). Results must be written to per-index slots so
// that output never depends on the number of workers.
namespace detail {
inline thread_local bool in_pool = false;
}

// Nested calls run serially inside the calling worker.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    unsigned w = std::min<std::size_t>(worker_count(), n == 0 ? 1 : n);
    if (w <= 1 || detail::in_pool) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errs(w);
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < w; ++k) {
        pool.emplace_back([&, k] {
            detail::in_pool = true;
            try {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
            } catch (...) {
                errs[k] = std::current_exception();
                next = n;
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

// Small deterministic generator; uniform doubles are built from raw bits so
// streams do not depend on the standard library's distribution code.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return eng_() % n; }
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::acos(-1.0) * u2);
    }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace isokit
