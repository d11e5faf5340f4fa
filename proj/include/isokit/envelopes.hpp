#pragma once

#include "kfun.hpp"

namespace isokit {

struct EnvelopeCurve {
    std::vector<double> t_grid, values;
    std::string family_id;
};

struct Family {
    std::string id;
    std::vector<GridFunction> members;
    std::vector<std::string> labels;
};

namespace detail {

inline std::vector<double> centre_distance(const DiscreteSpace& S) {
    std::vector<double> dist(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
        double s = 0.0;
        for (int d = 0; d < S.dim; ++d) s += (S.points[i][d] - 0.5) * (S.points[i][d] - 0.5);
        dist[i] = std::sqrt(s);
    }
    return dist;
}

inline void require_euclidean(const DiscreteSpace& S, const char* who) {
    if (!(S.kind == SpaceKind::cube || S.kind == SpaceKind::interval))
        throw std::invalid_argument(std::string(who) + ": Euclidean grid required");
}

// max(0, min(L, log(rho/|x - x0|))) around the centre, L on a 0.25 ladder
// until the plateau shrinks below half a cell
inline void add_truncated_logs(const DiscreteSpace& S, const std::vector<double>& dist, Family& F) {
    char buf[64];
    double h = S.spacing();
    for (double rho : {0.5, 0.25}) {
        double top = std::log(rho / (0.5 * h));
        for (double L = 0.25; L <= top + 1e-9; L += 0.25) {
            GridFunction f(S.size());
            for (std::size_t i = 0; i < S.size(); ++i)
                f[i] = std::max(0.0, std::min(L, std::log(rho / std::max(dist[i], 1e-300))));
            std::snprintf(buf, sizeof buf, "log_rho%g_L%g", rho, L);
            F.members.push_back(std::move(f));
            F.labels.push_back(buf);
        }
    }
}

}  // namespace detail

// sup over the family of |f|*(t)
inline EnvelopeCurve growth_envelope(const DiscreteSpace& S, const std::vector<GridFunction>& family,
                                     const std::vector<double>& t_grid, const std::string& id = "") {
    if (family.empty()) throw std::invalid_argument("growth_envelope: empty family");
    EnvelopeCurve E{t_grid, std::vector<double>(t_grid.size(), 0.0), id};
    std::vector<std::vector<double>> rows(family.size());
    parallel_for(family.size(), [&](std::size_t k) {
        StepFunction r = abs_rearrangement(S, family[k]);
        rows[k].resize(t_grid.size());
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            rows[k][i] = t_grid[i] < r.total_measure ? r(t_grid[i]) : 0.0;
    });
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) E.values[i] = std::max(E.values[i], row[i]);
    return E;
}

inline EnvelopeCurve growth_envelope(const DiscreteSpace& S, const Family& F, const std::vector<double>& t_grid) {
    return growth_envelope(S, F.members, t_grid, F.id);
}

// sup over the family of w(t, f; L^inf)/t
inline EnvelopeCurve continuity_envelope(const DiscreteSpace& S, const std::vector<GridFunction>& family,
                                         const std::vector<double>& t_grid, const std::string& id = "") {
    if (family.empty()) throw std::invalid_argument("continuity_envelope: empty family");
    detail::require_euclidean(S, "continuity_envelope");
    SpaceDescriptor Linf = SpaceDescriptor::lp(kInf);
    EnvelopeCurve E{t_grid, std::vector<double>(t_grid.size(), 0.0), id};
    std::vector<std::vector<double>> rows(family.size(), std::vector<double>(t_grid.size()));
    parallel_for(family.size(), [&](std::size_t k) {
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            rows[k][i] = modulus_euclidean(S, family[k], Linf, t_grid[i]) / t_grid[i];
    });
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) E.values[i] = std::max(E.values[i], row[i]);
    return E;
}

inline EnvelopeCurve continuity_envelope(const DiscreteSpace& S, const Family& F, const std::vector<double>& t_grid) {
    return continuity_envelope(S, F.members, t_grid, F.id);
}

// ||f||_X + || |grad f| ||_X
inline double sobolev_norm(const DiscreteSpace& S, const GridFunction& f, const SpaceDescriptor& X) {
    GridNorm N(X, S.measures);
    return N.value(f) + N.value(gradient_modulus(S, f));
}

// Rescales each member to unit W^1_X norm; zero functions are dropped.
inline Family normalize_family(const DiscreteSpace& S, Family F, const SpaceDescriptor& X) {
    Family out;
    out.id = F.id;
    std::vector<double> nrm(F.members.size());
    parallel_for(F.members.size(), [&](std::size_t k) { nrm[k] = sobolev_norm(S, F.members[k], X); });
    for (std::size_t k = 0; k < F.members.size(); ++k) {
        if (!(nrm[k] > 0.0) || !std::isfinite(nrm[k])) continue;
        for (double& v : F.members[k]) v /= nrm[k];
        out.members.push_back(std::move(F.members[k]));
        out.labels.push_back(F.labels[k]);
    }
    return out;
}

// The truncated-logarithm candidates alone: these carry the limiting
// growth rate; constants and ramps only add an O(1) floor.
inline Family truncated_log_family(const DiscreteSpace& S, const SpaceDescriptor& X) {
    detail::require_euclidean(S, "truncated_log_family");
    Family F;
    F.id = "truncated_logs[" + X.text + "]";
    detail::add_truncated_logs(S, detail::centre_distance(S), F);
    return normalize_family(S, std::move(F), X);
}

// Hard-coded extremal candidates on a cube or interval grid: truncated
// logarithms, clipped power spikes, ball indicators and affine ramps, all
// centred at the cube centre (a corner of four cells on even grids).
inline Family extremal_family(const DiscreteSpace& S, const SpaceDescriptor& X) {
    detail::require_euclidean(S, "extremal_family");
    Family F;
    F.id = "extremal[" + X.text + "]";
    std::size_t n = S.size();
    std::vector<double> dist = detail::centre_distance(S);
    detail::add_truncated_logs(S, dist, F);
    char buf[64];
    for (double beta : {0.1, 0.25, 0.5}) {
        for (double cap : {2.0, 8.0, 32.0}) {
            GridFunction f(n);
            for (std::size_t i = 0; i < n; ++i)
                f[i] = std::min(cap, std::pow(std::max(dist[i], 1e-300), -beta)) - std::min(cap, std::pow(0.5, -beta));
            for (double& v : f) v = std::max(v, 0.0);
            std::snprintf(buf, sizeof buf, "spike_b%g_c%g", beta, cap);
            F.members.push_back(std::move(f));
            F.labels.push_back(buf);
        }
    }
    for (double r : {0.05, 0.1, 0.2, 0.4}) {
        GridFunction f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = dist[i] <= r ? 1.0 : 0.0;
        std::snprintf(buf, sizeof buf, "ball_r%g", r);
        F.members.push_back(std::move(f));
        F.labels.push_back(buf);
    }
    {
        GridFunction f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = S.points[i][0];
        F.members.push_back(std::move(f));
        F.labels.push_back("ramp");
    }
    return normalize_family(S, std::move(F), X);
}

// Cone bumps r^{1-n/p} (1-|x-x0|/r)_+ at several scales, for the
// continuity envelope of W^1_X.
inline Family bump_family(const DiscreteSpace& S, const SpaceDescriptor& X, int scales = 16) {
    Family F;
    F.id = "bumps[" + X.text + "]";
    double h = S.spacing();
    char buf[48];
    for (double r : log_grid(2.0 * h, 0.5, std::size_t(scales))) {
        GridFunction f(S.size());
        for (std::size_t i = 0; i < S.size(); ++i) {
            double s = 0.0;
            for (int d = 0; d < S.dim; ++d) s += (S.points[i][d] - 0.5) * (S.points[i][d] - 0.5);
            f[i] = std::max(0.0, 1.0 - std::sqrt(s) / r);
        }
        std::snprintf(buf, sizeof buf, "cone_r%.4g", r);
        F.members.push_back(std::move(f));
        F.labels.push_back(buf);
    }
    return normalize_family(S, std::move(F), X);
}

// ---- closed-form upper bounds ----------------------------------------------

struct EnvelopeParams {
    double n = 2.0, p = 2.0, q = 2.0, theta = 0.5;
    SpaceDescriptor X = SpaceDescriptor::lp(2.0);
    std::optional<Profile> I;  // general_profile
    double total = 1.0;
};

inline const std::vector<std::string>& envelope_kinds() {
    static const std::vector<std::string> k{"sobolev_lp", "sobolev_ri",  "limiting_lp",    "limiting_lorentz",
                                            "besov",      "general_profile", "gaussian_besov"};
    return k;
}

namespace detail {

// int_t^b F(s) ds over 16 geometric panels with 16 Gauss nodes each
inline double log_quadrature(const std::function<double(double)>& F, double t, double b) {
    if (!(b > t)) return 0.0;
    double lt = std::log(t), lb = std::log(b), s = 0.0;
    for (int j = 0; j < 16; ++j) {
        double u0 = lt + (lb - lt) * j / 16.0, u1 = lt + (lb - lt) * (j + 1) / 16.0;
        s += gauss_integrate([&](double u) { double x = std::exp(u); return F(x) * x; }, u0, u1, 16);
    }
    return s;
}

}  // namespace detail

inline double envelope_bound(const std::string& kind, const EnvelopeParams& P, double t) {
    if (!(t > 0.0 && t < 0.5)) throw std::invalid_argument("envelope_bound: t must lie in (0, 1/2)");
    double n = P.n, lg = std::log(1.0 / t);
    if (kind == "sobolev_lp") return std::pow(t, 1.0 / n - 1.0 / P.p);
    if (kind == "sobolev_ri") {
        // int_t^1 s^{1/n-1} phi_{X'}(s) ds/s with phi_{X'}(s) = s/phi_X(s)
        return detail::log_quadrature(
            [&](double s) { return std::pow(s, 1.0 / n - 1.0) / fundamental_function(P.X, s); }, t, 1.0);
    }
    if (kind == "limiting_lp") {
        double np = conjugate_exponent(n);
        return std::isinf(np) ? 1.0 : std::pow(lg, 1.0 / np);
    }
    if (kind == "limiting_lorentz" || kind == "besov") {
        double qp = conjugate_exponent(P.q);
        return std::isinf(qp) ? 1.0 : std::pow(lg, 1.0 / qp);
    }
    if (kind == "gaussian_besov") return std::pow(lg, 1.0 - P.theta / 2.0) / fundamental_function(P.X, t);
    if (kind == "general_profile") {
        if (!P.I) throw std::invalid_argument("envelope_bound: general_profile needs a profile");
        const Profile& I = *P.I;
        double top = 0.5 * I.total;
        if (!(t < top)) return 0.0;
        double qp = conjugate_exponent(P.q);
        if (!(P.q > 1.0) || std::isinf(P.q)) throw std::invalid_argument("envelope_bound: needs 1 < q < inf");
        auto g = [&](double s) { return s / I(s); };
        auto F = [&](double s) {
            double e = 1e-5 * s;
            double gp = (g(s + e) - g(s - e)) / (2.0 * e);
            if (!(gp > 0.0)) return kInf;
            double w = std::pow(g(s), P.theta) * std::pow(g(s) / gp, 1.0 / P.q);
            return std::pow(w / (s * fundamental_function(P.X, s)), qp);
        };
        double v = detail::log_quadrature(F, t, top * (1.0 - 1e-6));
        return std::isfinite(v) ? std::pow(v, 1.0 / qp) : kInf;
    }
    throw std::invalid_argument("envelope_bound: unknown kind '" + kind + "'");
}

// ---- fits ------------------------------------------------------------------

namespace detail {

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2) throw std::invalid_argument("fit: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace detail

// slope of log E against log log(1/t) over t in [lo, hi]
inline double fit_log_exponent(const EnvelopeCurve& E, double lo, double hi) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < E.t_grid.size(); ++i) {
        double t = E.t_grid[i];
        if (t < lo || t > hi || !(E.values[i] > 0.0)) continue;
        x.push_back(std::log(std::log(1.0 / t)));
        y.push_back(std::log(E.values[i]));
    }
    return detail::ls_slope(x, y);
}

// slope of log E against log t over [lo, hi]
inline double fit_power_exponent(const EnvelopeCurve& E, double lo, double hi) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < E.t_grid.size(); ++i) {
        double t = E.t_grid[i];
        if (t < lo || t > hi || !(E.values[i] > 0.0)) continue;
        x.push_back(std::log(t));
        y.push_back(std::log(E.values[i]));
    }
    return detail::ls_slope(x, y);
}

// max over t of E(t) / int_{t^{1/n}} E_C(s) ds, the integral running over
// the continuity grid (trapezoid, E_C held constant below its first node)
inline double envelope_relation_constant(const EnvelopeCurve& growth, const EnvelopeCurve& cont, double n) {
    const auto& s = cont.t_grid;
    const auto& v = cont.values;
    double worst = 0.0;
    for (std::size_t i = 0; i < growth.t_grid.size(); ++i) {
        double a = std::pow(growth.t_grid[i], 1.0 / n), integ = 0.0;
        for (std::size_t j = 0; j + 1 < s.size(); ++j) {
            double lo = std::max(a, s[j]), hi = s[j + 1];
            if (!(hi > lo)) continue;
            double w = (lo - s[j]) / (hi - s[j]);
            double vlo = v[j] + w * (v[j + 1] - v[j]);
            integ += 0.5 * (vlo + v[j + 1]) * (hi - lo);
        }
        if (!s.empty() && a < s.front()) integ += v.front() * (s.front() - a);
        if (integ > 0.0) worst = std::max(worst, growth.values[i] / integ);
    }
    return worst;
}

inline std::string envelope_csv(const EnvelopeCurve& E, const std::vector<double>& bound) {
    std::string out = "t,envelope,bound\n";
    for (std::size_t i = 0; i < E.t_grid.size(); ++i)
        out += format_double(E.t_grid[i]) + "," + format_double(E.values[i]) + "," +
               (i < bound.size() ? format_double(bound[i]) : std::string("nan")) + "\n";
    return out;
}

}  // namespace isokit
