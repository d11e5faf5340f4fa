#pragma once

#include <numeric>

#include "domain.hpp"

namespace isokit {

// Right-continuous piecewise constant function on [0, total_measure).
// breakpoints has values.size()+1 entries, from 0 to total_measure.
struct StepFunction {
    std::vector<double> breakpoints;
    std::vector<double> values;
    double total_measure = 0.0;

    std::size_t segments() const { return values.size(); }

    std::size_t segment_of(double t) const {
        if (values.empty()) throw std::logic_error("empty StepFunction");
        if (t <= breakpoints.front()) return 0;
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
        std::size_t k = std::size_t(it - breakpoints.begin()) - 1;
        return std::min(k, values.size() - 1);
    }

    double operator()(double t) const { return values[segment_of(t)]; }

    // integral over [0, t]
    double integral_to(double t) const {
        double s = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            double a = breakpoints[k], b = breakpoints[k + 1];
            if (t <= a) break;
            s += values[k] * (std::min(b, t) - a);
        }
        return s;
    }

    double integral() const { return integral_to(total_measure); }

    bool non_increasing() const {
        for (std::size_t k = 1; k < values.size(); ++k)
            if (values[k] > values[k - 1]) return false;
        return true;
    }

    // |f| rearranged; segments are reordered so that |values| decrease
    StepFunction abs_rearranged() const {
        std::vector<std::size_t> idx(values.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return std::abs(values[a]) > std::abs(values[b]); });
        StepFunction r;
        r.total_measure = total_measure;
        r.breakpoints.push_back(0.0);
        double acc = 0.0;
        for (std::size_t k : idx) {
            double len = breakpoints[k + 1] - breakpoints[k];
            double v = std::abs(values[k]);
            acc += len;
            if (!r.values.empty() && r.values.back() == v) {
                r.breakpoints.back() = acc;
            } else {
                r.values.push_back(v);
                r.breakpoints.push_back(acc);
            }
        }
        return r;
    }
};

inline nlohmann::json to_json(const StepFunction& f) {
    return {{"breakpoints", f.breakpoints}, {"values", f.values}, {"total_measure", f.total_measure}};
}

inline StepFunction step_from_json(const nlohmann::json& j) {
    StepFunction f;
    f.breakpoints = j.at("breakpoints").get<std::vector<double>>();
    f.values = j.at("values").get<std::vector<double>>();
    f.total_measure = j.at("total_measure").get<double>();
    if (f.breakpoints.size() != f.values.size() + 1) throw std::invalid_argument("StepFunction: size mismatch");
    return f;
}

// piecewise constant data given by (value, length) pairs, sorted decreasingly
inline StepFunction rearrange_weighted(const std::vector<double>& vals, const std::vector<double>& weights) {
    std::vector<std::size_t> idx;
    idx.reserve(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (weights[i] > 0.0) idx.push_back(i);
    if (idx.empty()) throw std::invalid_argument("rearrangement of an empty or null set");
    // ties broken by index
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return vals[a] != vals[b] ? vals[a] > vals[b] : a < b;
    });
    StepFunction r;
    r.breakpoints.push_back(0.0);
    double acc = 0.0;
    for (std::size_t i : idx) {
        acc += weights[i];
        if (!r.values.empty() && r.values.back() == vals[i]) {
            r.breakpoints.back() = acc;
        } else {
            r.values.push_back(vals[i]);
            r.breakpoints.push_back(acc);
        }
    }
    r.total_measure = acc;
    return r;
}

inline double distribution(const DiscreteSpace& S, const GridFunction& f, double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] > t) s += S.measures[i];
    return s;
}

inline StepFunction decreasing_rearrangement(const DiscreteSpace& S, const GridFunction& f) {
    if (f.size() != S.size()) throw std::invalid_argument("decreasing_rearrangement: length mismatch");
    return rearrange_weighted(f, S.measures);
}

inline StepFunction abs_rearrangement(const DiscreteSpace& S, const GridFunction& f) {
    GridFunction a(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::abs(f[i]);
    return decreasing_rearrangement(S, a);
}

inline double maximal_average(const StepFunction& r, double t) {
    if (!(t > 0.0) || t > r.total_measure * (1.0 + 1e-12))
        throw std::invalid_argument("maximal_average: t outside (0, total]");
    return r.integral_to(t) / t;
}

// Median over Q: (f restricted to Q)* at mu(Q)/2, right-continuous.
inline double median(const DiscreteSpace& S, const GridFunction& f, const SubsetMask& Q) {
    std::vector<double> v, w;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (Q[i]) {
            v.push_back(f[i]);
            w.push_back(S.measures[i]);
        }
    if (v.empty()) throw std::invalid_argument("median: empty set");
    StepFunction r = rearrange_weighted(v, w);
    return r(r.total_measure / 2.0);
}

struct OscillationCurve {
    std::vector<double> t_grid;
    std::vector<double> osc;
    double total_measure = 0.0;
};

inline OscillationCurve oscillation_curve(const StepFunction& r, const std::vector<double>& t_grid) {
    OscillationCurve c;
    c.total_measure = r.total_measure;
    c.t_grid = t_grid;
    c.osc.resize(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        double t = t_grid[i];
        if (!(t > 0.0) || !(t < r.total_measure)) throw std::invalid_argument("oscillation_curve: t outside (0, total)");
        if (i > 0 && !(t > t_grid[i - 1])) throw std::invalid_argument("oscillation_curve: grid must increase");
        c.osc[i] = std::max(0.0, maximal_average(r, t) - r(t));
    }
    return c;
}

inline OscillationCurve oscillation_curve(const DiscreteSpace& S, const GridFunction& f,
                                          const std::vector<double>& t_grid) {
    return oscillation_curve(decreasing_rearrangement(S, f), t_grid);
}

// Log-uniform grid on [total*tmin_ratio, total) with the interior breakpoints
// of r merged in, so that t*(f**-f*) is resolved exactly.
inline std::vector<double> default_t_grid(const StepFunction& r, std::size_t n = 512, double tmin_ratio = 1e-5) {
    double m = r.total_measure;
    std::vector<double> g = log_grid(m * tmin_ratio, m * (1.0 - 1e-9), n);
    for (std::size_t k = 1; k + 1 < r.breakpoints.size(); ++k)
        if (r.breakpoints[k] > g.front()) g.push_back(r.breakpoints[k]);
    std::sort(g.begin(), g.end());
    std::vector<double> out;
    for (double t : g)
        if (out.empty() || t > out.back() * (1.0 + 1e-14)) out.push_back(t);
    while (!out.empty() && !(out.back() < m)) out.pop_back();
    return out;
}

}  // namespace isokit
