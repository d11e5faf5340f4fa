#pragma once

#include <unordered_map>

#include "rearrange.hpp"

namespace isokit {

struct BallFamily {
    std::vector<std::vector<std::uint32_t>> members;
    std::vector<double> radii;
    std::vector<std::size_t> centers;
    std::size_t space_size = 0;

    std::size_t size() const { return members.size(); }
    SubsetMask mask(std::size_t b) const {
        SubsetMask m(space_size, false);
        for (auto i : members[b]) m[i] = true;
        return m;
    }
};

namespace detail {

inline double point_distance(const DiscreteSpace& S, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (int d = 0; d < S.dim; ++d) {
        double u = S.points[i][d] - S.points[j][d];
        s += u * u;
    }
    return std::sqrt(s);
}

inline void add_unique(BallFamily& F, std::unordered_map<std::uint64_t, std::vector<std::size_t>>& seen,
                       std::vector<std::uint32_t>&& m, double r, std::size_t c) {
    std::uint64_t hsh = 1469598103934665603ull;
    for (auto i : m) hsh = (hsh ^ i) * 1099511628211ull;
    hsh ^= m.size() * 0x9e3779b97f4a7c15ull;
    auto& bucket = seen[hsh];
    for (std::size_t b : bucket)
        if (F.members[b] == m) return;
    bucket.push_back(F.members.size());
    F.members.push_back(std::move(m));
    F.radii.push_back(r);
    F.centers.push_back(c);
}

}  // namespace detail

// Closed metric balls around every point, radii on a geometric ladder from
// one spacing to the diameter. Duplicate point sets are kept once.
inline BallFamily metric_ball_family(const DiscreteSpace& S, int ladder = 16) {
    BallFamily F;
    F.space_size = S.size();
    std::array<double, 3> lo{kInf, kInf, kInf}, hi{-kInf, -kInf, -kInf};
    for (const Point& p : S.points)
        for (int d = 0; d < S.dim; ++d) {
            lo[d] = std::min(lo[d], p[d]);
            hi[d] = std::max(hi[d], p[d]);
        }
    double diam = 0.0;
    for (int d = 0; d < S.dim; ++d) diam += (hi[d] - lo[d]) * (hi[d] - lo[d]);
    diam = std::sqrt(diam);
    double h = S.spacing();
    if (!std::isfinite(h) || diam <= h) diam = std::max(diam, h);
    std::vector<double> radii = ladder > 1 ? log_grid(h, std::max(diam, h * 1.0000001), ladder) : std::vector<double>{h};
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> seen;
    std::vector<double> dist(S.size());
    for (std::size_t c = 0; c < S.size(); ++c) {
        for (std::size_t j = 0; j < S.size(); ++j) dist[j] = detail::point_distance(S, c, j);
        for (double r : radii) {
            std::vector<std::uint32_t> m;
            for (std::size_t j = 0; j < S.size(); ++j)
                if (dist[j] <= r * (1.0 + 1e-12)) m.push_back(std::uint32_t(j));
            detail::add_unique(F, seen, std::move(m), r, c);
        }
    }
    return F;
}

// Every contiguous run of points along the (1D) coordinate.
inline BallFamily interval_family(const DiscreteSpace& S) {
    if (S.dim != 1) throw std::invalid_argument("interval_family: 1D spaces only");
    std::vector<std::uint32_t> order(S.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return S.points[a][0] < S.points[b][0]; });
    BallFamily F;
    F.space_size = S.size();
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i; j < order.size(); ++j) {
            std::vector<std::uint32_t> m(order.begin() + i, order.begin() + j + 1);
            std::sort(m.begin(), m.end());
            F.members.push_back(std::move(m));
            F.radii.push_back(0.5 * (S.points[order[j]][0] - S.points[order[i]][0]));
            F.centers.push_back(order[(i + j) / 2]);
        }
    return F;
}

inline double mean_oscillation(const DiscreteSpace& S, const GridFunction& f, const std::vector<std::uint32_t>& B) {
    double w = 0.0, s = 0.0;
    for (auto i : B) {
        w += S.measures[i];
        s += S.measures[i] * f[i];
    }
    if (!(w > 0.0)) return 0.0;
    double mean = s / w, dev = 0.0;
    for (auto i : B) dev += S.measures[i] * std::abs(f[i] - mean);
    return dev / w;
}

inline double bmo_norm(const DiscreteSpace& S, const GridFunction& f, const BallFamily& balls) {
    if (balls.size() == 0) throw std::invalid_argument("bmo_norm: empty ball family");
    std::vector<double> osc(balls.size());
    parallel_for(balls.size(), [&](std::size_t b) { osc[b] = mean_oscillation(S, f, balls.members[b]); });
    return *std::max_element(osc.begin(), osc.end());
}

inline GridFunction sharp_maximal(const DiscreteSpace& S, const GridFunction& f, const BallFamily& balls) {
    if (balls.size() == 0) throw std::invalid_argument("sharp_maximal: empty ball family");
    std::vector<double> osc(balls.size());
    parallel_for(balls.size(), [&](std::size_t b) { osc[b] = mean_oscillation(S, f, balls.members[b]); });
    GridFunction out(S.size(), -1.0);
    for (std::size_t b = 0; b < balls.size(); ++b)
        for (auto i : balls.members[b]) out[i] = std::max(out[i], osc[b]);
    for (double v : out)
        if (v < 0.0) throw std::invalid_argument("sharp_maximal: a point is covered by no ball");
    return out;
}

inline StepFunction rearrangement_on(const DiscreteSpace& S, const GridFunction& f, const SubsetMask& B) {
    std::vector<double> v, w;
    for (std::size_t i = 0; i < S.size(); ++i)
        if (B[i]) {
            v.push_back(f[i]);
            w.push_back(S.measures[i]);
        }
    if (v.empty()) throw std::invalid_argument("empty set");
    return rearrange_weighted(v, w);
}

// (f chi_B)** - (f chi_B)* at mu(B)/2, rearranged with respect to mu|B
inline double john_stromberg_gap(const DiscreteSpace& S, const GridFunction& f, const SubsetMask& B) {
    StepFunction r = rearrangement_on(S, f, B);
    double t = r.total_measure / 2.0;
    return std::max(0.0, maximal_average(r, t) - r(t));
}

}  // namespace isokit
