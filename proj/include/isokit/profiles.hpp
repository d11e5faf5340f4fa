#pragma once

#include "rearrange.hpp"

namespace isokit {

struct Profile {
    std::function<double(double)> evaluator;
    double total = 1.0;
    bool symmetric = false, concave = false, vanishing_at_zero = false;
    std::string kind;
    std::map<std::string, double> params;

    double operator()(double t) const { return evaluator(t); }
};

inline Profile lipschitz_profile(int n, double total = 1.0, double c = 1.0) {
    if (n < 1) throw std::invalid_argument("lipschitz_profile: n must be >= 1");
    Profile P;
    P.kind = "lipschitz";
    P.total = total;
    P.params = {{"n", double(n)}, {"c", c}};
    double e = double(n - 1) / n;
    P.evaluator = [=](double t) {
        double u = std::min(t, total - t);
        if (u <= 0.0) return n == 1 ? c : 0.0;
        return n == 1 ? c : c * std::pow(u, e);
    };
    P.symmetric = P.concave = true;
    P.vanishing_at_zero = n > 1;
    return P;
}

inline Profile mazya_estimator(double alpha, double total = 1.0, double c = 1.0) {
    if (!(alpha >= 0.0) || alpha >= 1.0) throw std::invalid_argument("mazya_estimator: alpha must be in [0,1)");
    Profile P;
    P.kind = "mazya";
    P.total = total;
    P.params = {{"alpha", alpha}, {"c", c}};
    P.evaluator = [=](double t) {
        double u = std::max(0.0, std::min(t, total - t));
        return alpha == 0.0 ? c : c * std::pow(u, alpha);
    };
    P.symmetric = P.concave = true;
    P.vanishing_at_zero = alpha > 0.0;
    return P;
}

inline Profile ahlfors_estimator(double k, double total = 1.0, double D = 1.0) {
    if (!(k > 1.0)) throw std::invalid_argument("ahlfors_estimator: k must be > 1");
    if (!(D > 0.0)) throw std::invalid_argument("ahlfors_estimator: D must be > 0");
    Profile P;
    P.kind = "ahlfors";
    P.total = total;
    P.params = {{"k", k}, {"D", D}};
    double e = (k - 1.0) / k, scale = std::pow(D, -e);
    P.evaluator = [=](double t) { return scale * std::pow(std::max(0.0, std::min(t, total - t)), e); };
    P.symmetric = P.concave = P.vanishing_at_zero = true;
    return P;
}

inline Profile gaussian_type_profile(double r, double alpha = 0.0, double c = 1.0) {
    if (!(r >= 1.0 && r <= 2.0)) throw std::invalid_argument("gaussian_type_profile: r outside [1,2]");
    if (alpha < 0.0) throw std::invalid_argument("gaussian_type_profile: alpha must be >= 0");
    if (r == 2.0 && alpha != 0.0) throw std::invalid_argument("gaussian_type_profile: alpha must be 0 when r = 2");
    Profile P;
    P.kind = "gaussian_type";
    P.total = 1.0;
    P.params = {{"r", r}, {"alpha", alpha}, {"c", c}};
    double e1 = 1.0 - 1.0 / r, e2 = alpha / r;
    P.evaluator = [=](double t) {
        double u = std::min(t, 1.0 - t);
        if (u <= 0.0) return 0.0;
        double v = u;
        if (e1 != 0.0) v *= std::pow(std::log(1.0 / u), e1);
        if (e2 != 0.0) v *= std::pow(std::log(std::log(std::exp(1.0) + 1.0 / u)), e2);
        return c * v;
    };
    P.symmetric = P.concave = P.vanishing_at_zero = true;
    return P;
}

inline Profile relative_estimator(const Profile& I, double m_G, double C = 1.0) {
    if (!(m_G > 0.0) || m_G > I.total * (1.0 + 1e-12))
        throw std::invalid_argument("relative_estimator: m_G must be in (0, total]");
    Profile P;
    P.kind = "relative";
    P.total = m_G;
    P.params = I.params;
    P.params["m_G"] = m_G;
    P.params["C"] = C;
    auto base = I.evaluator;
    P.evaluator = [=](double s) { return C * std::min(base(s), base(m_G - s)); };
    P.symmetric = true;
    P.concave = I.concave;
    P.vanishing_at_zero = I.vanishing_at_zero;
    return P;
}

// Per-bin minimum perimeter over candidate sets. Empty bins carry +inf
// (no information); sets of measure 0 or total are skipped.
inline Profile empirical_profile(const DiscreteSpace& S, const std::vector<SubsetMask>& candidates, int bins = 32) {
    if (candidates.empty()) throw std::invalid_argument("empirical_profile: no candidates");
    if (bins < 1) throw std::invalid_argument("empirical_profile: bins must be >= 1");
    double m = S.total_measure;
    std::vector<double> vals(candidates.size()), meas(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t i) {
        meas[i] = S.measure_of(candidates[i]);
        vals[i] = perimeter(S, candidates[i]);
    });
    auto best = std::make_shared<std::vector<double>>(bins, kInf);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!(meas[i] > 0.0) || !(meas[i] < m * (1.0 - 1e-12))) continue;
        int b = std::min(bins - 1, int(meas[i] / m * bins));
        (*best)[b] = std::min((*best)[b], vals[i]);
    }
    Profile P;
    P.kind = "empirical";
    P.total = m;
    P.params = {{"bins", double(bins)}};
    P.evaluator = [best, m, bins](double t) {
        int b = std::clamp(int(t / m * bins), 0, bins - 1);
        return (*best)[b];
    };
    return P;
}

inline nlohmann::json to_json(const Profile& P, int samples = 256) {
    nlohmann::json j;
    j["kind"] = P.kind;
    j["params"] = P.params;
    j["total"] = P.total;
    nlohmann::json s = nlohmann::json::array();
    for (int i = 0; i < samples; ++i) {
        double t = P.total * (i + 0.5) / samples;
        double v = P(t);
        s.push_back(nlohmann::json::array({t, std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr)}));
    }
    j["samples"] = s;
    return j;
}

}  // namespace isokit
