#pragma once

#include "profiles.hpp"

namespace isokit {

enum class NormTag { Lp, Lorentz, Bracket, Orlicz, Marcinkiewicz, Lambda };

struct SpaceDescriptor {
    NormTag tag = NormTag::Lp;
    double p = 1.0;                       // Lp, Lorentz
    double q = 1.0;                       // Lorentz, Bracket
    double s = 1.0;                       // Bracket
    std::function<double(double)> young;  // Orlicz: A
    std::function<double(double)> young_inv;
    std::function<double(double)> phi;    // Marcinkiewicz, Lambda
    std::string text;

    static SpaceDescriptor lp(double p) {
        if (!(p >= 1.0)) throw std::invalid_argument("Lp requires p >= 1");
        SpaceDescriptor d;
        d.tag = NormTag::Lp;
        d.p = p;
        d.text = std::isinf(p) ? "lp:inf" : "lp:" + format_double(p);
        return d;
    }
    static SpaceDescriptor lorentz(double p, double q) {
        if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("Lorentz requires 1 <= p < inf");
        if (!(q > 0.0)) throw std::invalid_argument("Lorentz requires q > 0");
        SpaceDescriptor d;
        d.tag = NormTag::Lorentz;
        d.p = p;
        d.q = q;
        d.text = "lorentz:" + format_double(p) + ":" + (std::isinf(q) ? std::string("inf") : format_double(q));
        return d;
    }
    static SpaceDescriptor bracket(double s, double q) {
        if (s == 0.0) throw std::invalid_argument("bracket index s must be nonzero");
        if (!(q > 0.0)) throw std::invalid_argument("bracket requires q > 0");
        SpaceDescriptor d;
        d.tag = NormTag::Bracket;
        d.s = s;
        d.q = q;
        d.text = "bracket:" + format_double(s) + ":" + (std::isinf(q) ? std::string("inf") : format_double(q));
        return d;
    }
    static SpaceDescriptor marcinkiewicz(std::function<double(double)> phi, std::string text) {
        SpaceDescriptor d;
        d.tag = NormTag::Marcinkiewicz;
        d.phi = std::move(phi);
        d.text = std::move(text);
        return d;
    }
    static SpaceDescriptor lambda(std::function<double(double)> phi, std::string text) {
        SpaceDescriptor d;
        d.tag = NormTag::Lambda;
        d.phi = std::move(phi);
        d.text = std::move(text);
        return d;
    }
    static SpaceDescriptor orlicz(std::function<double(double)> A, std::function<double(double)> Ainv,
                                  std::string text) {
        SpaceDescriptor d;
        d.tag = NormTag::Orlicz;
        d.young = std::move(A);
        d.young_inv = std::move(Ainv);
        d.text = std::move(text);
        return d;
    }
};

namespace detail {

inline double parse_real(const std::string& s) {
    if (s == "inf" || s == "infinity") return kInf;
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("not a number: " + s);
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// two-column numeric table "x,y" (comma or whitespace separated)
inline std::pair<std::vector<double>, std::vector<double>> read_table(const std::string& path) {
    std::string text = read_text(path);
    std::istringstream in(text);
    std::string line;
    long ln = 0;
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        ++ln;
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a)) continue;
        if (a[0] == '#') continue;
        if (!(ls >> b) || (ls >> extra)) throw input_error(path, ln, "expected two columns");
        char* e1 = nullptr;
        char* e2 = nullptr;
        double x = std::strtod(a.c_str(), &e1), y = std::strtod(b.c_str(), &e2);
        if (*e1 != '\0' || *e2 != '\0' || !std::isfinite(x) || !std::isfinite(y))
            throw input_error(path, ln, "not a number");
        if (!xs.empty() && !(x > xs.back())) throw input_error(path, ln, "abscissae must increase");
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.size() < 2) throw input_error(path, ln, "table needs at least two rows");
    return {xs, ys};
}

// piecewise linear through the table, linear extrapolation at the right end
inline std::function<double(double)> interpolant(std::vector<double> xs, std::vector<double> ys, bool hold_right) {
    return [xs = std::move(xs), ys = std::move(ys), hold_right](double x) {
        if (x <= xs.front()) return ys.front() * (xs.front() > 0.0 ? x / xs.front() : 1.0);
        if (x >= xs.back()) {
            if (hold_right) return ys.back();
            std::size_t n = xs.size();
            double slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
            return ys.back() + slope * (x - xs.back());
        }
        std::size_t k = std::size_t(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
        double w = (x - xs[k]) / (xs[k + 1] - xs[k]);
        return ys[k] + w * (ys[k + 1] - ys[k]);
    };
}

// inverse of an increasing function by bisection
inline double invert_increasing(const std::function<double(double)>& F, double y) {
    if (y <= 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (F(hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) return kInf;
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (F(mid) < y)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

inline SpaceDescriptor young_table_descriptor(const std::string& path, const std::string& text) {
    auto [u, A] = read_table(path);
    if (u.front() != 0.0 || A.front() != 0.0) throw input_error(path, 1, "Young table must start at (0,0)");
    for (std::size_t k = 1; k < u.size(); ++k) {
        if (!(A[k] > A[k - 1])) throw input_error(path, long(k) + 1, "Young table must increase");
        if (k + 1 < u.size()) {
            double s0 = (A[k] - A[k - 1]) / (u[k] - u[k - 1]), s1 = (A[k + 1] - A[k]) / (u[k + 1] - u[k]);
            if (s1 < s0 * (1.0 - 1e-12)) throw input_error(path, long(k) + 2, "Young table must be convex");
        }
    }
    auto F = interpolant(u, A, false);
    if (std::abs(F(1.0) - 1.0) > 1e-9) throw input_error(path, 1, "Young table must satisfy A(1)=1");
    return SpaceDescriptor::orlicz(F, [F](double y) { return invert_increasing(F, y); }, text);
}

inline std::function<double(double)> phi_from_spec(const std::vector<std::string>& parts, std::size_t at,
                                                    const std::string& text) {
    if (at < parts.size() && parts[at] == "pow") {
        if (at + 1 >= parts.size()) throw std::invalid_argument("pow needs an exponent: " + text);
        double a = parse_real(parts[at + 1]);
        if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("phi exponent must be in (0,1]");
        return [a](double t) { return t <= 0.0 ? 0.0 : std::pow(t, a); };
    }
    std::string path;
    for (std::size_t k = at; k < parts.size(); ++k) path += (k > at ? ":" : "") + parts[k];
    auto [t, v] = read_table(path);
    if (t.front() != 0.0 || v.front() != 0.0) throw input_error(path, 1, "phi table must start at (0,0)");
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (v[k] < v[k - 1]) throw input_error(path, long(k) + 1, "phi table must be non-decreasing");
        if (k + 1 < t.size()) {
            double s0 = (v[k] - v[k - 1]) / (t[k] - t[k - 1]), s1 = (v[k + 1] - v[k]) / (t[k + 1] - t[k]);
            if (s1 > s0 * (1.0 + 1e-12) + 1e-15) throw input_error(path, long(k) + 2, "phi table must be concave");
        }
    }
    return interpolant(t, v, true);
}

}  // namespace detail

inline SpaceDescriptor parse_descriptor(const std::string& text) {
    auto parts = detail::split(text, ':');
    const std::string& tag = parts[0];
    auto need = [&](std::size_t n) {
        if (parts.size() != n) throw std::invalid_argument("malformed space descriptor: " + text);
    };
    if (tag == "lp") {
        need(2);
        return SpaceDescriptor::lp(detail::parse_real(parts[1]));
    }
    if (tag == "lorentz") {
        need(3);
        return SpaceDescriptor::lorentz(detail::parse_real(parts[1]), detail::parse_real(parts[2]));
    }
    if (tag == "bracket") {
        need(3);
        return SpaceDescriptor::bracket(detail::parse_real(parts[1]), detail::parse_real(parts[2]));
    }
    if (tag == "orlicz") {
        if (parts.size() < 2) throw std::invalid_argument("malformed space descriptor: " + text);
        if (parts[1] == "expL2")
            return SpaceDescriptor::orlicz([](double u) { return std::expm1(u * u); },
                                           [](double y) { return std::sqrt(std::log1p(y)); }, text);
        if (parts[1] == "expL")
            return SpaceDescriptor::orlicz([](double u) { return std::expm1(u); },
                                           [](double y) { return std::log1p(y); }, text);
        std::string path = text.substr(7);
        return detail::young_table_descriptor(path, text);
    }
    if (tag == "marcinkiewicz" || tag == "lambda") {
        if (parts.size() < 2) throw std::invalid_argument("malformed space descriptor: " + text);
        auto phi = detail::phi_from_spec(parts, 1, text);
        return tag == "lambda" ? SpaceDescriptor::lambda(phi, text) : SpaceDescriptor::marcinkiewicz(phi, text);
    }
    throw std::invalid_argument("unknown space descriptor: " + text);
}

namespace detail {

// Exact value of int_0^m (D(t) t^{1/s})^q dt/t * ... for a decreasing step
// function g, where D(t) = t (g**(t) - g*(t)) is constant on each segment.
inline double bracket_exact(const StepFunction& g, double s, double q) {
    double F = 0.0;  // int_0^{b_k} g
    if (std::isinf(q)) {
        double best = 0.0;
        double e = 1.0 / s - 1.0;
        for (std::size_t k = 0; k < g.segments(); ++k) {
            double a = g.breakpoints[k], b = g.breakpoints[k + 1];
            double D = F - g.values[k] * a;
            F += g.values[k] * (b - a);
            if (k == 0 || D <= 0.0) continue;
            best = std::max({best, D * std::pow(a, e), D * std::pow(b, e)});
        }
        return best;
    }
    double beta = q / s - q - 1.0, sum = 0.0;
    for (std::size_t k = 0; k < g.segments(); ++k) {
        double a = g.breakpoints[k], b = g.breakpoints[k + 1];
        double D = F - g.values[k] * a;
        F += g.values[k] * (b - a);
        if (k == 0 || D <= 0.0) continue;
        double w = std::abs(beta + 1.0) < 1e-14 ? std::log(b / a)
                                                : (std::pow(b, beta + 1.0) - std::pow(a, beta + 1.0)) / (beta + 1.0);
        sum += std::pow(D, q) * w;
    }
    return std::pow(sum, 1.0 / q);
}

inline double luxemburg(const std::function<double(double)>& A, const StepFunction& f) {
    double vmax = 0.0;
    for (std::size_t k = 0; k < f.segments(); ++k)
        if (f.breakpoints[k + 1] > f.breakpoints[k]) vmax = std::max(vmax, std::abs(f.values[k]));
    if (vmax == 0.0) return 0.0;
    if (!std::isfinite(vmax)) throw std::invalid_argument("Orlicz norm requires bounded f");
    auto G = [&](double lam) {
        double s = 0.0;
        for (std::size_t k = 0; k < f.segments(); ++k) {
            double len = f.breakpoints[k + 1] - f.breakpoints[k];
            if (len > 0.0 && f.values[k] != 0.0) s += len * A(std::abs(f.values[k]) / lam);
        }
        return s;
    };
    double lo = vmax * 1e-3, hi = vmax * 1e3;
    int guard = 0;
    while (!(G(lo) > 1.0) && guard++ < 200) lo *= 0.5;
    guard = 0;
    while (!(G(hi) <= 1.0) && guard++ < 200) hi *= 2.0;
    if (!(G(lo) > 1.0) || !(G(hi) <= 1.0)) throw std::runtime_error("Orlicz bisection failed to bracket");
    while (hi - lo > 1e-11 * hi) {
        double mid = std::sqrt(lo * hi);
        if (G(mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

inline const StepFunction& require_monotone(const StepFunction& f, const char* who) {
    if (!f.non_increasing()) throw std::invalid_argument(std::string(who) + ": input must be non-increasing");
    return f;
}

}  // namespace detail

inline double ri_norm(const SpaceDescriptor& d, const StepFunction& f) {
    switch (d.tag) {
        case NormTag::Lp: {
            if (std::isinf(d.p)) {
                double m = 0.0;
                for (std::size_t k = 0; k < f.segments(); ++k)
                    if (f.breakpoints[k + 1] > f.breakpoints[k]) m = std::max(m, std::abs(f.values[k]));
                return m;
            }
            double s = 0.0;
            for (std::size_t k = 0; k < f.segments(); ++k)
                s += std::pow(std::abs(f.values[k]), d.p) * (f.breakpoints[k + 1] - f.breakpoints[k]);
            return std::pow(s, 1.0 / d.p);
        }
        case NormTag::Orlicz:
            return detail::luxemburg(d.young, f);
        case NormTag::Lorentz: {
            StepFunction g = detail::require_monotone(f, "Lorentz norm").abs_rearranged();
            if (std::isinf(d.q)) {
                double m = 0.0;
                for (std::size_t k = 0; k < g.segments(); ++k)
                    m = std::max(m, g.values[k] * std::pow(g.breakpoints[k + 1], 1.0 / d.p));
                return m;
            }
            double s = 0.0, e = d.q / d.p;
            for (std::size_t k = 0; k < g.segments(); ++k)
                s += std::pow(g.values[k], d.q) * (d.p / d.q) *
                     (std::pow(g.breakpoints[k + 1], e) - std::pow(g.breakpoints[k], e));
            return std::pow(s, 1.0 / d.q);
        }
        case NormTag::Bracket: {
            StepFunction g = detail::require_monotone(f, "bracket norm").abs_rearranged();
            return detail::bracket_exact(g, d.s, d.q);
        }
        case NormTag::Marcinkiewicz: {
            StepFunction g = detail::require_monotone(f, "Marcinkiewicz norm").abs_rearranged();
            double m = 0.0;
            for (std::size_t k = 0; k < g.segments(); ++k) m = std::max(m, g.values[k] * d.phi(g.breakpoints[k + 1]));
            return m;
        }
        case NormTag::Lambda: {
            StepFunction g = detail::require_monotone(f, "Lambda norm").abs_rearranged();
            double s = 0.0;
            for (std::size_t k = 0; k < g.segments(); ++k)
                s += g.values[k] * (d.phi(g.breakpoints[k + 1]) - d.phi(g.breakpoints[k]));
            return s;
        }
    }
    return 0.0;
}

inline StepFunction indicator_step(double a, double total) {
    StepFunction f;
    f.total_measure = total;
    if (a >= total) {
        f.breakpoints = {0.0, total};
        f.values = {1.0};
    } else if (a <= 0.0) {
        f.breakpoints = {0.0, total};
        f.values = {0.0};
    } else {
        f.breakpoints = {0.0, a, total};
        f.values = {1.0, 0.0};
    }
    return f;
}

// norm of the indicator of a set of measure t
inline double fundamental_function(const SpaceDescriptor& d, double t) {
    if (t < 0.0) throw std::invalid_argument("fundamental_function: t < 0");
    if (t == 0.0) return 0.0;
    switch (d.tag) {
        case NormTag::Lp:
            return std::isinf(d.p) ? 1.0 : std::pow(t, 1.0 / d.p);
        case NormTag::Lorentz:
            return std::isinf(d.q) ? std::pow(t, 1.0 / d.p) : std::pow(d.p / d.q, 1.0 / d.q) * std::pow(t, 1.0 / d.p);
        case NormTag::Orlicz:
            return 1.0 / d.young_inv(1.0 / t);
        case NormTag::Marcinkiewicz:
        case NormTag::Lambda:
            return d.phi(t);
        case NormTag::Bracket:
            // on a probability space
            return ri_norm(d, indicator_step(t, std::max(1.0, t)));
    }
    return 0.0;
}

inline double conjugate_exponent(double p) {
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

// Closed-form associate-space catalog.
inline SpaceDescriptor associate_descriptor(const SpaceDescriptor& d) {
    switch (d.tag) {
        case NormTag::Lp:
            return SpaceDescriptor::lp(conjugate_exponent(d.p));
        case NormTag::Lorentz: {
            if (d.p == 1.0) {
                if (d.q == 1.0) return SpaceDescriptor::lp(kInf);
                throw unsupported_error("associate of lorentz:1:q (q != 1) is not in the catalog");
            }
            double qq = d.q < 1.0 ? kInf : conjugate_exponent(d.q);
            return SpaceDescriptor::lorentz(conjugate_exponent(d.p), qq);
        }
        case NormTag::Marcinkiewicz: {
            auto phi = d.phi;
            return SpaceDescriptor::lambda([phi](double t) { return t <= 0.0 ? 0.0 : t / phi(t); },
                                           "lambda:t/phi[" + d.text + "]");
        }
        case NormTag::Lambda: {
            auto phi = d.phi;
            return SpaceDescriptor::marcinkiewicz([phi](double t) { return t <= 0.0 ? 0.0 : t / phi(t); },
                                                  "marcinkiewicz:t/phi[" + d.text + "]");
        }
        case NormTag::Bracket:
        case NormTag::Orlicz:
            break;
    }
    throw unsupported_error("associate space of " + d.text + " is not in the closed-form catalog");
}

inline double associate_norm(const SpaceDescriptor& d, const StepFunction& g) {
    return ri_norm(associate_descriptor(d), g);
}

// Lambda(X) and M(X) built on the fundamental function of X
inline SpaceDescriptor lambda_of(const SpaceDescriptor& d) {
    SpaceDescriptor x = d;
    return SpaceDescriptor::lambda([x](double t) { return fundamental_function(x, t); }, "lambda[" + d.text + "]");
}
inline SpaceDescriptor marcinkiewicz_of(const SpaceDescriptor& d) {
    SpaceDescriptor x = d;
    return SpaceDescriptor::marcinkiewicz([x](double t) { return fundamental_function(x, t); },
                                          "marcinkiewicz[" + d.text + "]");
}

// int_0^m f*(s) g*(s) ds for two step functions
inline double pairing(const StepFunction& f, const StepFunction& g) {
    std::vector<double> cuts = f.breakpoints;
    cuts.insert(cuts.end(), g.breakpoints.begin(), g.breakpoints.end());
    std::sort(cuts.begin(), cuts.end());
    double m = std::min(f.total_measure, g.total_measure), s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double a = cuts[k], b = std::min(cuts[k + 1], m);
        if (!(b > a)) continue;
        double mid = 0.5 * (a + b);
        s += f(mid) * g(mid) * (b - a);
    }
    return s;
}

// Oscillation-curve quadrature: D(t) = t*osc(t) is taken constant from each
// grid point to the next (exact when the grid contains the breakpoints of
// the rearrangement); D is taken as 0 below the first grid point.
inline double bracket_norm(double s, double q, const OscillationCurve& osc) {
    if (s == 0.0) throw std::invalid_argument("bracket_norm: s must be nonzero");
    if (!(q > 0.0)) throw std::invalid_argument("bracket_norm: q must be > 0");
    const auto& t = osc.t_grid;
    double m = osc.total_measure;
    if (std::isinf(q)) {
        double best = 0.0, e = 1.0 / s - 1.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            double D = t[i] * osc.osc[i];
            if (D <= 0.0) continue;
            double b = i + 1 < t.size() ? t[i + 1] : m;
            best = std::max({best, D * std::pow(t[i], e), D * std::pow(b, e)});
        }
        return best;
    }
    double beta = q / s - q - 1.0, sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double D = t[i] * osc.osc[i];
        if (D <= 0.0) continue;
        double a = t[i], b = i + 1 < t.size() ? t[i + 1] : m;
        double w = std::abs(beta + 1.0) < 1e-14 ? std::log(b / a)
                                                : (std::pow(b, beta + 1.0) - std::pow(a, beta + 1.0)) / (beta + 1.0);
        sum += std::pow(D, q) * w;
    }
    return std::pow(sum, 1.0 / q);
}

// L^{[p,q]} functional written with osc(t) t^{1/p} over each grid cell
inline double lpq_bracket_quadrature(double p, double q, const OscillationCurve& osc) {
    const auto& t = osc.t_grid;
    double sum = 0.0, e = q / p - q;  // (osc * t^{1/p})^q / t with osc = D/t
    for (std::size_t i = 0; i < t.size(); ++i) {
        double od = osc.osc[i] * t[i];
        if (od <= 0.0) continue;
        double a = t[i], b = i + 1 < t.size() ? t[i + 1] : osc.total_measure;
        double ex = e;  // integrate t^{ex-1}
        double w = std::abs(ex) < 1e-14 ? std::log(b / a) : (std::pow(b, ex) - std::pow(a, ex)) / ex;
        sum += std::pow(od, q) * w;
    }
    return std::pow(sum, 1.0 / q);
}

// ---- norms of explicit functions on (0,t) -------------------------------

namespace detail {

// Cells refined geometrically toward both ends of (0,t); used to rearrange
// an explicit function numerically.
inline StepFunction sample_rearranged(const std::function<double(double)>& g, double t, int per_side = 2048) {
    std::vector<double> cuts{0.0};
    double half = 0.5 * t;
    for (int k = per_side; k >= 1; --k) cuts.push_back(half * std::pow(1e-12, double(k) / per_side));
    cuts.push_back(half);
    for (int k = 1; k <= per_side; ++k) cuts.push_back(t - half * std::pow(1e-12, double(k) / per_side));
    cuts.push_back(t);
    std::vector<double> vals, lens;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double a = cuts[k], b = cuts[k + 1];
        if (!(b > a)) continue;
        // the cell touching 0 is sampled at its right end: a midpoint there
        // inflates singular g by a fixed factor however fine the grid is
        double v = std::abs(g(k == 0 ? b : 0.5 * (a + b)));
        vals.push_back(std::isfinite(v) ? v : 1e300);
        lens.push_back(b - a);
    }
    return rearrange_weighted(vals, lens);
}

}  // namespace detail

// ||g chi_(0,t)||_X for an explicit nonnegative function g. Lp uses direct
// quadrature (with divergence detection), L-infinity uses dense sampling
// including the right end; the rest go through a numeric rearrangement.
inline double explicit_norm(const SpaceDescriptor& d, const std::function<double(double)>& g, double t) {
    if (d.tag == NormTag::Lp && !std::isinf(d.p)) {
        double p = d.p;
        double v = integrate_endpoint_singular([&](double s) { return std::pow(std::abs(g(s)), p); }, 0.0, t);
        return std::isfinite(v) ? std::pow(v, 1.0 / p) : kInf;
    }
    if (d.tag == NormTag::Lp) {
        double best = std::abs(g(t));
        for (int i = 1; i <= 1000; ++i) best = std::max(best, std::abs(g(t * i / 1000.0)));
        double prev = std::abs(g(t * std::ldexp(1.0, -1)));
        for (int k = 1; k <= 60; ++k) {
            double cur = std::abs(g(t * std::ldexp(1.0, -k)));
            best = std::max(best, cur);
            if (k == 60 && cur > prev * (1.0 + 1e-3) && cur >= best) return kInf;
            prev = cur;
        }
        return best;
    }
    StepFunction r = detail::sample_rearranged(g, t);
    r.total_measure = t;
    return ri_norm(d, r);
}

struct PsiValues {
    double psi = 0.0;
    double Psi = 0.0;
};

inline PsiValues psi_functions(const SpaceDescriptor& d, const Profile& I, double t) {
    if (!(t > 0.0) || !(t <= I.total)) throw std::invalid_argument("psi_functions: t outside (0, total]");
    SpaceDescriptor a = associate_descriptor(d);
    double phi = fundamental_function(d, t);
    PsiValues out;
    double n1 = explicit_norm(a, [&](double s) { return s / I(s); }, t);
    double n2 = explicit_norm(a, [&](double s) { return 1.0 / I(s); }, t);
    // rescale the catalog associate so that phi_X * phi_X' = t; only the
    // Lorentz entries need it (lorentz:2:1 with lorentz:2:inf gives 2t)
    double c = t / (phi * fundamental_function(a, t));
    out.psi = phi / t * n1 * c;
    out.Psi = std::isfinite(n2) ? phi * n2 * c : kInf;
    return out;
}

// ---- Hardy operators ----------------------------------------------------

enum class HardyKind { P, Q, QI };

inline double hardy_apply(HardyKind which, const StepFunction& f, const Profile* I, double t) {
    double m = f.total_measure;
    if (which == HardyKind::P) return f.integral_to(t) / t;
    if (which == HardyKind::QI && I == nullptr) throw std::invalid_argument("Q_I requires a profile");
    double s = 0.0;
    for (std::size_t k = 0; k < f.segments(); ++k) {
        double a = std::max(f.breakpoints[k], t), b = std::min(f.breakpoints[k + 1], m);
        if (!(b > a) || f.values[k] == 0.0) continue;
        if (which == HardyKind::Q)
            s += f.values[k] * std::log(b / a);
        else
            s += f.values[k] * integrate_endpoint_singular([&](double u) { return 1.0 / (*I)(u); }, a, b);
    }
    return s;
}

// Values at the grid points, held constant up to the next grid point.
inline StepFunction hardy_operators(HardyKind which, const StepFunction& f, const Profile* I,
                                    const std::vector<double>& grid) {
    StepFunction r;
    r.total_measure = f.total_measure;
    r.breakpoints.push_back(0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double b = i + 1 < grid.size() ? grid[i + 1] : f.total_measure;
        r.values.push_back(hardy_apply(which, f, I, grid[i]));
        r.breakpoints.push_back(b);
    }
    if (!grid.empty()) r.breakpoints[0] = 0.0;
    return r;
}

// ---- Boyd indices -------------------------------------------------------

// (E_s f)(t) = f*(t/s), cut at the total measure
inline StepFunction dilate(const StepFunction& f, double s) {
    StepFunction r;
    double m = f.total_measure;
    r.total_measure = m;
    r.breakpoints.push_back(0.0);
    for (std::size_t k = 0; k < f.segments(); ++k) {
        double b = std::min(m, s * f.breakpoints[k + 1]);
        if (!(b > r.breakpoints.back())) continue;
        r.values.push_back(f.values[k]);
        r.breakpoints.push_back(b);
        if (b >= m) break;
    }
    if (r.breakpoints.back() < m) {
        r.values.push_back(0.0);
        r.breakpoints.push_back(m);
    }
    return r;
}

struct BoydEstimate {
    double lower = 0.0, upper = 0.0;
    std::vector<double> s;
    std::vector<double> h;
};

inline BoydEstimate boyd_estimate(const SpaceDescriptor& d, double total = 1.0) {
    // test family: indicators at dyadic scales and decreasing power-type steps
    std::vector<StepFunction> fam;
    for (int j = 0; j <= 14; ++j) fam.push_back(indicator_step(total * std::ldexp(1.0, -j), total));
    for (double beta : {0.25, 0.5}) {
        StepFunction f;
        f.total_measure = total;
        f.breakpoints.push_back(0.0);
        for (int k = 40; k >= 0; --k) {
            double b = total * std::pow(2.0, -k / 2.0);
            if (b <= f.breakpoints.back()) continue;
            f.values.push_back(std::pow(b / total, -beta));
            f.breakpoints.push_back(b);
        }
        fam.push_back(f);
    }
    BoydEstimate out;
    double up = kInf, lo = -kInf;
    for (int k = -10; k <= 10; ++k) {
        if (k == 0) continue;
        double s = std::ldexp(1.0, k);
        double h = 0.0;
        for (const auto& f : fam) {
            double nf = ri_norm(d, f);
            if (nf > 0.0) h = std::max(h, ri_norm(d, dilate(f, s)) / nf);
        }
        out.s.push_back(s);
        out.h.push_back(h);
        double ratio = std::log(h) / std::log(s);
        if (k > 0)
            up = std::min(up, ratio);
        else
            lo = std::max(lo, ratio);
    }
    out.lower = lo;
    out.upper = up;
    return out;
}

}  // namespace isokit
