#pragma once
// Brute-force reference computations used by the tests. Deliberately naive:
// nothing here calls into the library's rearrangement or norm code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// mu{f > lam}
inline double dist(const std::vector<double>& v, const std::vector<double>& w, double lam) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] > lam) s += w[i];
    return s;
}

// f*(s) = inf{lam : mu{f>lam} <= s}, scanning the data values
inline double fstar(const std::vector<double>& v, const std::vector<double>& w, double s) {
    double best = std::numeric_limits<double>::infinity();
    for (double lam : v)
        if (dist(v, w, lam) <= s && lam < best) best = lam;
    return best;
}

// integral of f* over [0,t] by greedy selection of the largest cells
inline double fstar_integral(std::vector<double> v, std::vector<double> w, double t) {
    double acc = 0.0, used = 0.0;
    while (used < t) {
        std::size_t k = v.size();
        for (std::size_t i = 0; i < v.size(); ++i)
            if (w[i] > 0 && (k == v.size() || v[i] > v[k])) k = i;
        if (k == v.size()) break;
        double take = std::min(w[k], t - used);
        acc += take * v[k];
        used += take;
        w[k] = 0.0;
    }
    return acc;
}

inline double fss(const std::vector<double>& v, const std::vector<double>& w, double t) {
    return fstar_integral(v, w, t) / t;
}

// smallest data value m with mu{f>m} <= mu(Q)/2 over the masked set
inline double median(const std::vector<double>& v, const std::vector<double>& w, const std::vector<bool>& Q) {
    std::vector<double> qv, qw;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (Q[i]) {
            qv.push_back(v[i]);
            qw.push_back(w[i]);
        }
    double half = 0.0;
    for (double x : qw) half += x;
    half /= 2.0;
    double best = std::numeric_limits<double>::infinity();
    for (double c : qv)
        if (dist(qv, qw, c) <= half * (1 + 1e-12) && c < best) best = c;
    return best;
}

inline double lp(const std::vector<double>& v, const std::vector<double>& w, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (w[i] > 0) m = std::max(m, std::abs(v[i]));
        return m;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::pow(std::abs(v[i]), p);
    return std::pow(s, 1.0 / p);
}

// sup over contiguous runs [i,j] of the mean oscillation (1D cells in order)
inline double bmo_subintervals(const std::vector<double>& v, const std::vector<double>& w) {
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i; j < v.size(); ++j) {
            double m = 0.0, s = 0.0;
            for (std::size_t k = i; k <= j; ++k) {
                m += w[k];
                s += w[k] * v[k];
            }
            double avg = s / m, o = 0.0;
            for (std::size_t k = i; k <= j; ++k) o += w[k] * std::abs(v[k] - avg);
            best = std::max(best, o / m);
        }
    return best;
}

// ((1/delta) double integral over |x-y|<delta of |f(x)-f(y)|^p)^{1/p} for a
// step function on n equal cells of [0,1], by sub-cell midpoint sums
inline double garsia_qp(const std::vector<double>& v, double p, double delta, int sub = 16) {
    std::size_t n = v.size();
    std::size_t m = n * std::size_t(sub);
    double h = 1.0 / double(m);
    double s = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            double x = (a + 0.5) * h, y = (b + 0.5) * h;
            if (std::abs(x - y) >= delta) continue;
            s += std::pow(std::abs(v[a / sub] - v[b / sub]), p) * h * h;
        }
    return std::pow(s / delta, 1.0 / p);
}

// sup over h in (0, t] of ||f(.+h) - f||_{L1} on equal cells, continuous h
inline double l1_modulus_1d(const std::vector<double>& v, double t, int steps = 2000) {
    std::size_t n = v.size();
    auto val = [&](double x) {
        std::size_t k = std::min(n - 1, std::size_t(x * n));
        return v[k];
    };
    double best = 0.0;
    for (int j = 1; j <= steps; ++j) {
        double h = t * j / steps;
        int q = 4000;
        double s = 0.0;
        for (int i = 0; i < q; ++i) {
            double x = (1.0 - h) * (i + 0.5) / q;
            s += std::abs(val(x + h) - val(x)) * (1.0 - h) / q;
        }
        best = std::max(best, s);
    }
    return best;
}

inline std::vector<double> random_values(std::mt19937_64& g, std::size_t n, int levels = 0) {
    std::vector<double> v(n);
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_int_distribution<int> U(0, std::max(1, levels) - 1);
    for (auto& x : v) x = levels > 0 ? double(U(g)) : N(g);
    return v;
}

}  // namespace oracle
