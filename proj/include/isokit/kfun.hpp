#pragma once

#include "bmo.hpp"
#include "ri_norms.hpp"

namespace isokit {

// X-norm of a grid function with respect to the cell measures.
class GridNorm {
public:
    GridNorm(const SpaceDescriptor& d, const std::vector<double>& mu) : d_(d), mu_(&mu) {}

    const SpaceDescriptor& descriptor() const { return d_; }

    bool smooth_supported() const {
        if (d_.tag == NormTag::Lp) return true;
        return d_.tag == NormTag::Lorentz && d_.q <= d_.p;
    }

    double value(const std::vector<double>& u) const {
        const auto& mu = *mu_;
        if (d_.tag == NormTag::Lp) {
            if (std::isinf(d_.p)) {
                double m = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i)
                    if (mu[i] > 0.0) m = std::max(m, std::abs(u[i]));
                return m;
            }
            double s = 0.0;
            if (d_.p == 1.0) {
                for (std::size_t i = 0; i < u.size(); ++i) s += mu[i] * std::abs(u[i]);
                return s;
            }
            if (d_.p == 2.0) {
                for (std::size_t i = 0; i < u.size(); ++i) s += mu[i] * u[i] * u[i];
                return std::sqrt(s);
            }
            for (std::size_t i = 0; i < u.size(); ++i) s += mu[i] * std::pow(std::abs(u[i]), d_.p);
            return std::pow(s, 1.0 / d_.p);
        }
        std::vector<double> a(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) a[i] = std::abs(u[i]);
        return ri_norm(d_, rearrange_weighted(a, mu));
    }

    // Smoothed norm with |u| replaced by sqrt(u^2+eps^2); gradient wrt u.
    double smooth(const std::vector<double>& u, double eps, std::vector<double>& grad) const {
        const auto& mu = *mu_;
        std::size_t n = u.size();
        grad.assign(n, 0.0);
        a_.resize(n);
        for (std::size_t i = 0; i < n; ++i) a_[i] = std::sqrt(u[i] * u[i] + eps * eps);
        if (d_.tag == NormTag::Lp && std::isinf(d_.p)) {
            double M = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (mu[i] > 0.0) M = std::max(M, a_[i]);
            double Z = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (mu[i] > 0.0) {
                    grad[i] = std::exp((a_[i] - M) / eps);
                    Z += grad[i];
                }
            for (std::size_t i = 0; i < n; ++i) grad[i] = a_[i] > 0.0 ? grad[i] * u[i] / (a_[i] * Z) : 0.0;
            return M + eps * std::log(Z);
        }
        if (d_.tag == NormTag::Lp) {
            double p = d_.p, S = 0.0;
            if (p == 1.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    S += mu[i] * a_[i];
                    grad[i] = a_[i] > 0.0 ? mu[i] * u[i] / a_[i] : 0.0;
                }
                return S;
            }
            if (p == 2.0) {
                for (std::size_t i = 0; i < n; ++i) S += mu[i] * a_[i] * a_[i];
                double N = std::sqrt(S);
                for (std::size_t i = 0; i < n; ++i) grad[i] = N > 0.0 ? mu[i] * u[i] / N : 0.0;
                return N;
            }
            for (std::size_t i = 0; i < n; ++i) S += mu[i] * std::pow(a_[i], p);
            if (!(S > 0.0)) return 0.0;
            double N = std::pow(S, 1.0 / p), c = std::pow(S, 1.0 / p - 1.0);
            for (std::size_t i = 0; i < n; ++i) grad[i] = a_[i] > 0.0 ? c * mu[i] * std::pow(a_[i], p - 2.0) * u[i] : 0.0;
            return N;
        }
        if (d_.tag == NormTag::Lorentz) {
            double p = d_.p, q = d_.q;
            order_.resize(n);
            std::iota(order_.begin(), order_.end(), std::size_t(0));
            std::sort(order_.begin(), order_.end(), [&](std::size_t x, std::size_t y) {
                return a_[x] != a_[y] ? a_[x] > a_[y] : x < y;
            });
            double S = 0.0, prev = 0.0;
            if (std::isinf(q)) {
                // soft maximum of a_(k) * S_k^{1/p}
                std::vector<double> c(n), sk(n);
                double M = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    S += mu[order_[k]];
                    sk[k] = std::pow(S, 1.0 / p);
                    c[k] = a_[order_[k]] * sk[k];
                    M = std::max(M, c[k]);
                }
                double Z = 0.0;
                for (std::size_t k = 0; k < n; ++k) Z += std::exp((c[k] - M) / eps);
                for (std::size_t k = 0; k < n; ++k) {
                    std::size_t i = order_[k];
                    grad[i] = a_[i] > 0.0 ? std::exp((c[k] - M) / eps) / Z * sk[k] * u[i] / a_[i] : 0.0;
                }
                return M + eps * std::log(Z);
            }
            double T = 0.0;
            w_.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                S += mu[order_[k]];
                double cur = std::pow(S, q / p);
                w_[k] = (p / q) * (cur - prev);
                prev = cur;
                T += w_[k] * std::pow(a_[order_[k]], q);
            }
            if (!(T > 0.0)) return 0.0;
            double c = std::pow(T, 1.0 / q - 1.0);
            for (std::size_t k = 0; k < n; ++k) {
                std::size_t i = order_[k];
                grad[i] = a_[i] > 0.0 ? c * w_[k] * std::pow(a_[i], q - 2.0) * u[i] : 0.0;
            }
            return std::pow(T, 1.0 / q);
        }
        throw unsupported_error("smoothed norm not available for " + d_.text);
    }

private:
    SpaceDescriptor d_;
    const std::vector<double>* mu_;
    mutable std::vector<double> a_, w_;
    mutable std::vector<std::size_t> order_;
};

inline double grid_norm(const DiscreteSpace& S, const SpaceDescriptor& d, const GridFunction& u) {
    return GridNorm(d, S.measures).value(u);
}

// Constant c minimizing ||f - c||_X.
inline double best_constant(const DiscreteSpace& S, const GridFunction& f, const SpaceDescriptor& d) {
    double lo = *std::min_element(f.begin(), f.end()), hi = *std::max_element(f.begin(), f.end());
    if (lo == hi) return lo;
    if (d.tag == NormTag::Lp && d.p == 2.0) {
        double s = 0.0, w = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            s += S.measures[i] * f[i];
            w += S.measures[i];
        }
        return s / w;
    }
    if (d.tag == NormTag::Lp && std::isinf(d.p)) return 0.5 * (lo + hi);
    if (d.tag == NormTag::Lp && d.p == 1.0) {
        SubsetMask all(f.size(), true);
        return median(S, f, all);
    }
    GridNorm N(d, S.measures);
    std::vector<double> u(f.size());
    auto F = [&](double c) {
        for (std::size_t i = 0; i < f.size(); ++i) u[i] = f[i] - c;
        return N.value(u);
    };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi, x1 = b - g * (b - a), x2 = a + g * (b - a), f1 = F(x1), f2 = F(x2);
    for (int it = 0; it < 200 && b - a > 1e-13 * (std::abs(a) + std::abs(b) + 1e-300); ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = F(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = F(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

// mu-weighted averages over lattice boxes of half-width r cells; falls back
// to repeated neighbour averaging when the space is not a lattice.
inline GridFunction local_average(const DiscreteSpace& S, const GridFunction& f, long r) {
    Lattice L;
    GridFunction out(f.size());
    if (lattice_view(S, L)) {
        std::vector<double> W(L.sites(), 0.0), V(L.sites(), 0.0);
        for (std::size_t i = 0; i < S.size(); ++i) {
            W[L.site[i]] = S.measures[i];
            V[L.site[i]] = S.measures[i] * f[i];
        }
        std::vector<double> tmpW(L.sites()), tmpV(L.sites());
        long stride = 1;
        for (int d = 0; d < L.dim; ++d) {
            long ext = L.extent[d];
            std::size_t lines = L.sites() / std::size_t(ext);
            std::vector<double> cw(ext + 1), cv(ext + 1);
            for (std::size_t line = 0; line < lines; ++line) {
                long base = long(line % std::size_t(stride)) + long(line / std::size_t(stride)) * stride * ext;
                cw[0] = cv[0] = 0.0;
                for (long k = 0; k < ext; ++k) {
                    cw[k + 1] = cw[k] + W[base + k * stride];
                    cv[k + 1] = cv[k] + V[base + k * stride];
                }
                for (long k = 0; k < ext; ++k) {
                    long a = std::max(0L, k - r), b = std::min(ext, k + r + 1);
                    tmpW[base + k * stride] = cw[b] - cw[a];
                    tmpV[base + k * stride] = cv[b] - cv[a];
                }
            }
            W.swap(tmpW);
            V.swap(tmpV);
            stride *= ext;
        }
        for (std::size_t i = 0; i < S.size(); ++i) out[i] = W[L.site[i]] > 0.0 ? V[L.site[i]] / W[L.site[i]] : f[i];
        return out;
    }
    out = f;
    GridFunction nxt(f.size());
    for (long it = 0; it < r * r; ++it) {
        for (std::size_t i = 0; i < S.size(); ++i) {
            double w = S.measures[i], s = S.measures[i] * out[i];
            for (std::size_t k = S.adj_start[i]; k < S.adj_start[i + 1]; ++k) {
                std::size_t j = S.adj[k].first;
                w += S.measures[j];
                s += S.measures[j] * out[j];
            }
            nxt[i] = w > 0.0 ? s / w : out[i];
        }
        out.swap(nxt);
    }
    return out;
}

struct KOptions {
    int max_iter = 20000;
    int stall_window = 50;
    double stall_rel = 1e-8;
    bool run_solver = true;
    std::vector<GridFunction> extra_candidates;
};

struct KResult {
    double value = 0.0;
    GridFunction witness;
    double residual_norm = 0.0;   // ||f - h||_X
    double gradient_norm = 0.0;   // || |grad h| ||_X
    int iterations = 0;
    long evaluations = 0;
};

namespace detail {

struct KProblem {
    const DiscreteSpace& S;
    const GridFunction& f;
    GridNorm N;
    double t;

    KProblem(const DiscreteSpace& S_, const GridFunction& f_, const SpaceDescriptor& d, double t_)
        : S(S_), f(f_), N(d, S_.measures), t(t_) {}

    std::pair<double, double> parts(const GridFunction& h) const {
        std::vector<double> r(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) r[i] = f[i] - h[i];
        return {N.value(r), N.value(gradient_modulus(S, h))};
    }
    double objective(const GridFunction& h) const {
        auto [a, b] = parts(h);
        return a + t * b;
    }

    // smoothed objective and gradient
    double smooth(const GridFunction& h, double eps_v, double eps_g, GridFunction& grad) const {
        ++evaluations;
        std::size_t n = f.size();
        r_.resize(n);
        for (std::size_t i = 0; i < n; ++i) r_[i] = h[i] - f[i];
        double A = N.smooth(r_, eps_v, gr_);
        // soft maximum over incident edges of sqrt(delta^2 + eps_g^2)
        g_.assign(n, 0.0);
        dv_.resize(S.adj.size());
        sw_.resize(S.adj.size());
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t a = S.adj_start[i], b = S.adj_start[i + 1];
            if (a == b) continue;
            double M = 0.0;
            for (std::size_t k = a; k < b; ++k) {
                double dlt = (h[i] - h[S.adj[k].first]) / S.adj[k].second;
                dv_[k] = dlt;
                sw_[k] = std::sqrt(dlt * dlt + eps_g * eps_g);
                M = std::max(M, sw_[k]);
            }
            double Z = 0.0;
            for (std::size_t k = a; k < b; ++k) {
                double e = std::exp((sw_[k] - M) / eps_g);
                Z += e;
                dv_[k] = e * dv_[k] / sw_[k];  // d g_i / d delta_k, before 1/Z
            }
            double iz = 1.0 / Z;
            for (std::size_t k = a; k < b; ++k) dv_[k] *= iz;
            g_[i] = M + eps_g * std::log(Z);
        }
        double B = N.smooth(g_, 0.0, gg_);
        grad = gr_;
        for (std::size_t i = 0; i < n; ++i) {
            if (gg_[i] == 0.0) continue;
            double c = t * gg_[i];
            for (std::size_t k = S.adj_start[i]; k < S.adj_start[i + 1]; ++k) {
                double v = c * dv_[k] / S.adj[k].second;
                grad[i] += v;
                grad[S.adj[k].first] -= v;
            }
        }
        return A + t * B;
    }

    mutable long evaluations = 0;

private:
    mutable std::vector<double> r_, gr_, gg_, g_, sw_, dv_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace detail

// Family of feasible decompositions used both as candidates and as the
// solver's starting point.
inline std::vector<GridFunction> k_candidate_family(const DiscreteSpace& S, const GridFunction& f,
                                                    const SpaceDescriptor& d) {
    std::vector<GridFunction> fam;
    fam.push_back(f);
    fam.push_back(GridFunction(f.size(), best_constant(S, f, d)));
    long extent = 1;
    Lattice L;
    if (lattice_view(S, L))
        for (int k = 0; k < L.dim; ++k) extent = std::max(extent, L.extent[k]);
    else
        extent = long(std::sqrt(double(S.size()))) + 1;
    long last = -1;
    for (int j = 0; j < 16; ++j) {
        long r = std::lround(std::exp(std::log(double(extent)) * j / 15.0));
        r = std::max(1L, r);
        if (r == last) continue;
        last = r;
        fam.push_back(local_average(S, f, r));
    }
    return fam;
}

// Certified upper bound on inf_h ||f-h||_X + t || |grad h| ||_X.
inline KResult k_functional(const DiscreteSpace& S, const GridFunction& f, const SpaceDescriptor& d, double t,
                            const KOptions& opt = {}, const std::vector<GridFunction>* family = nullptr) {
    if (!(t > 0.0)) throw std::invalid_argument("k_functional: t must be > 0");
    if (f.size() != S.size()) throw std::invalid_argument("k_functional: length mismatch");
    detail::KProblem P(S, f, d, t);
    if (opt.run_solver && !P.N.smooth_supported())
        throw unsupported_error("k_functional: descriptor " + d.text + " is outside the convex catalog");

    std::vector<GridFunction> own;
    if (!family) {
        own = k_candidate_family(S, f, d);
        family = &own;
    }
    KResult best;
    best.value = kInf;
    auto consider = [&](const GridFunction& h) {
        auto [a, b] = P.parts(h);
        double v = a + t * b;
        if (v < best.value) {
            best.value = v;
            best.witness = h;
            best.residual_norm = a;
            best.gradient_norm = b;
        }
    };
    for (const auto& h : *family) consider(h);
    for (const auto& h : opt.extra_candidates) consider(h);

    double lo = *std::min_element(f.begin(), f.end()), hi = *std::max_element(f.begin(), f.end());
    double range = hi - lo;
    if (range == 0.0 || !opt.run_solver || best.value == 0.0) return best;

    // L-BFGS on the smoothed objective with Armijo backtracking, so the
    // smoothed value decreases monotonically at fixed smoothing. Every
    // iterate is a feasible decomposition; the best true objective seen is
    // reported. The smoothing level is lowered when progress stalls.
    double gscale = std::max(range, grid_norm(S, SpaceDescriptor::lp(kInf), gradient_modulus(S, f)));
    double eps = 1e-2;
    const double eps_min = 1e-7;
    GridFunction h = best.witness, g, hn, gn;
    double Fs = P.smooth(h, eps * range, eps * gscale, g);
    const int mem = 8;
    std::vector<GridFunction> sv, yv;
    std::vector<double> rho;
    std::vector<double> hist{Fs};
    int it = 0;
    std::size_t n = f.size();
    GridFunction dir(n);
    auto steepest = [&] {
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        for (std::size_t i = 0; i < n; ++i) dir[i] = gmax > 0.0 ? -g[i] * 0.1 * range / gmax : 0.0;
    };
    auto reset_memory = [&] {
        sv.clear();
        yv.clear();
        rho.clear();
    };
    while (it < opt.max_iter) {
        ++it;
        if (sv.empty()) {
            steepest();
        } else {
            dir = g;
            std::vector<double> alpha(sv.size());
            for (int k = int(sv.size()) - 1; k >= 0; --k) {
                alpha[k] = rho[k] * detail::dot(sv[k], dir);
                for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * yv[k][i];
            }
            double gamma = detail::dot(sv.back(), yv.back()) / detail::dot(yv.back(), yv.back());
            for (double& v : dir) v *= gamma;
            for (int k = 0; k < int(sv.size()); ++k) {
                double bk = rho[k] * detail::dot(yv[k], dir);
                for (std::size_t i = 0; i < n; ++i) dir[i] += sv[k][i] * (alpha[k] - bk);
            }
            for (double& v : dir) v = -v;
        }
        double slope = detail::dot(g, dir);
        if (!(slope < 0.0)) {
            reset_memory();
            steepest();
            slope = detail::dot(g, dir);
        }
        bool ok = false;
        double Fsn = 0.0;
        if (slope < 0.0) {
            double step = 1.0;
            hn.resize(n);
            for (int ls = 0; ls < 24; ++ls) {
                for (std::size_t i = 0; i < n; ++i) hn[i] = h[i] + step * dir[i];
                Fsn = P.smooth(hn, eps * range, eps * gscale, gn);
                if (!std::isfinite(Fsn)) throw std::runtime_error("k_functional: objective became non-finite");
                if (Fsn <= Fs + 1e-4 * step * slope) {
                    ok = true;
                    break;
                }
                step *= 0.5;
            }
        }
        bool stalled = !ok;
        if (ok) {
            if (Fsn > Fs) throw std::runtime_error("k_functional: objective increased");
            GridFunction sk(n), yk(n);
            for (std::size_t i = 0; i < n; ++i) {
                sk[i] = hn[i] - h[i];
                yk[i] = gn[i] - g[i];
            }
            double sy = detail::dot(sk, yk);
            if (sy > 1e-300) {
                sv.push_back(std::move(sk));
                yv.push_back(std::move(yk));
                rho.push_back(1.0 / sy);
                if (int(sv.size()) > mem) {
                    sv.erase(sv.begin());
                    yv.erase(yv.begin());
                    rho.erase(rho.begin());
                }
            }
            h.swap(hn);
            g.swap(gn);
            Fs = Fsn;
            auto [a, b] = P.parts(h);
            if (a + t * b < best.value) {
                best.value = a + t * b;
                best.witness = h;
                best.residual_norm = a;
                best.gradient_norm = b;
            }
            hist.push_back(Fs);
            int W = opt.stall_window;
            if (int(hist.size()) > W && hist[hist.size() - 1 - W] - Fs <= opt.stall_rel * std::abs(Fs)) stalled = true;
        }
        if (stalled) {
            if (eps <= eps_min) break;
            eps *= 0.1;
            reset_memory();
            Fs = P.smooth(h, eps * range, eps * gscale, g);
            hist.assign(1, Fs);
        }
    }
    best.iterations = it;
    best.evaluations = P.evaluations;
    return best;
}

// K sampled on a t-grid. Every witness h_i is kept as the line
// ||f-h_i|| + t || |grad h_i| ||, so K can be bounded at any t by the lower
// envelope of these lines (concave, non-decreasing).
struct KCurve {
    std::string couple = "sobolev";
    std::vector<double> t_grid;
    std::vector<double> values;
    std::vector<GridFunction> witnesses;
    std::vector<double> line_a, line_b;

    double operator()(double t) const {
        double v = kInf;
        for (std::size_t i = 0; i < line_a.size(); ++i) {
            if (std::isinf(t) && line_b[i] > 0.0) continue;
            v = std::min(v, line_a[i] + (line_b[i] > 0.0 ? t * line_b[i] : 0.0));
        }
        return v;
    }
    void add_line(double a, double b) {
        line_a.push_back(a);
        line_b.push_back(b);
    }
};

inline nlohmann::json to_json(const KCurve& K) {
    return {{"couple", K.couple}, {"t_grid", K.t_grid}, {"values", K.values}};
}

inline KCurve k_curve(const DiscreteSpace& S, const GridFunction& f, const SpaceDescriptor& d,
                      const std::vector<double>& t_grid, const KOptions& opt = {}, bool keep_witnesses = false) {
    KCurve K;
    K.t_grid = t_grid;
    std::vector<GridFunction> fam = k_candidate_family(S, f, d);
    GridNorm N(d, S.measures);
    for (const auto& h : fam) {
        std::vector<double> r(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) r[i] = f[i] - h[i];
        K.add_line(N.value(r), N.value(gradient_modulus(S, h)));
    }
    std::vector<KResult> res(t_grid.size());
    parallel_for(t_grid.size(), [&](std::size_t i) { res[i] = k_functional(S, f, d, t_grid[i], opt, &fam); });
    for (auto& r : res) {
        K.add_line(r.residual_norm, r.gradient_norm);
        if (keep_witnesses) K.witnesses.push_back(r.witness);
    }
    for (double t : t_grid) K.values.push_back(K(t));
    return K;
}

// ---- moduli --------------------------------------------------------------

inline double modulus_euclidean(const DiscreteSpace& S, const GridFunction& f, const SpaceDescriptor& d, double t) {
    if (!(S.kind == SpaceKind::cube || S.kind == SpaceKind::interval))
        throw std::invalid_argument("modulus_euclidean: cube or interval grids only");
    Lattice L;
    if (!lattice_view(S, L)) throw std::invalid_argument("modulus_euclidean: not a lattice");
    double h = L.h;
    if (t < h * (1.0 - 1e-12)) throw std::invalid_argument("modulus_euclidean: t below one spacing");
    long R = long(std::floor(t / h + 1e-9));
    GridNorm N(d, S.measures);
    double best = 0.0;
    std::vector<double> diff(S.size());
    long ry = L.dim >= 2 ? R : 0, rz = L.dim >= 3 ? R : 0;
    for (long vz = -rz; vz <= rz; ++vz)
        for (long vy = -ry; vy <= ry; ++vy)
            for (long vx = -R; vx <= R; ++vx) {
                // half of the shifts; the other half give equal norms on a uniform grid
                std::array<long, 3> v{vx, vy, vz};
                bool positive = vz > 0 || (vz == 0 && (vy > 0 || (vy == 0 && vx > 0)));
                if (!positive) continue;
                double len2 = double(vx * vx + vy * vy + vz * vz);
                if (len2 * h * h > t * t * (1.0 + 1e-12)) continue;
                for (std::size_t i = 0; i < S.size(); ++i) {
                    auto c = L.coords(L.site[i]);
                    bool in = true;
                    for (int k = 0; k < 3; ++k) {
                        c[k] += v[k];
                        if (c[k] < 0 || c[k] >= L.extent[k]) in = false;
                    }
                    long j = in ? L.point_at[L.index(c)] : -1;
                    diff[i] = j >= 0 ? f[std::size_t(j)] - f[i] : 0.0;
                }
                best = std::max(best, N.value(diff));
            }
    return best;
}

// Garsia moduli on a 1D uniform grid. Differences of offset k are
// precomputed; the double integral over |x-y|<delta is exact for
// piecewise constant data.
class GarsiaModulus {
public:
    GarsiaModulus(const DiscreteSpace& S, const GridFunction& f) {
        if (S.dim != 1) throw std::invalid_argument("garsia_modulus: 1D spaces only");
        std::vector<std::size_t> order(S.size());
        std::iota(order.begin(), order.end(), std::size_t(0));
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return S.points[a][0] < S.points[b][0]; });
        for (auto i : order) v_.push_back(f[i]);
        h_ = S.spacing();
    }

    double spacing() const { return h_; }

    // int_{-delta}^{delta} of the triangle max(0, h - |u - k h|)
    double overlap(long k, double delta) const {
        auto F = [&](double x) {  // int_{-inf}^{x} of the triangle centred at kh
            double c = k * h_, u = x - c;
            if (u <= -h_) return 0.0;
            if (u >= h_) return h_ * h_;
            if (u <= 0.0) return 0.5 * (h_ + u) * (h_ + u);
            return h_ * h_ - 0.5 * (h_ - u) * (h_ - u);
        };
        return F(delta) - F(-delta);
    }

    double q_p(double p, double delta) const {
        const auto& D = differences(p);
        long n = long(v_.size());
        long kmax = std::min(n - 1, long(std::ceil(delta / h_)) + 1);
        double s = 0.0;
        for (long k = 1; k <= kmax; ++k) s += 2.0 * D[k] * overlap(k, delta);
        return std::pow(s / delta, 1.0 / p);
    }

    double q_young(const std::function<double(double)>& A, double delta) const {
        long n = long(v_.size());
        long kmax = std::min(n - 1, long(std::ceil(delta / h_)) + 1);
        std::vector<double> w(kmax + 1);
        double dmax = 0.0;
        for (long k = 1; k <= kmax; ++k) {
            w[k] = 2.0 * overlap(k, delta) / delta;
            for (long i = 0; i + k < n; ++i) dmax = std::max(dmax, std::abs(v_[i] - v_[i + k]));
        }
        if (dmax == 0.0) return 0.0;
        auto G = [&](double lam) {
            double s = 0.0;
            for (long k = 1; k <= kmax; ++k) {
                if (w[k] == 0.0) continue;
                double sk = 0.0;
                for (long i = 0; i + k < n; ++i) sk += A(std::abs(v_[i] - v_[i + k]) / lam);
                s += w[k] * sk;
            }
            return s;
        };
        double lo = dmax * 1e-6, hi = dmax;
        while (G(hi) > 1.0) hi *= 2.0;
        while (G(lo) <= 1.0 && lo > 1e-300) lo *= 0.5;
        while (hi - lo > 1e-11 * hi) {
            double mid = std::sqrt(lo * hi);
            if (G(mid) > 1.0) lo = mid;
            else hi = mid;
        }
        return hi;
    }

private:
    const std::vector<double>& differences(double p) const {
        auto it = cache_.find(p);
        if (it != cache_.end()) return it->second;
        long n = long(v_.size());
        std::vector<double> D(n, 0.0);
        for (long k = 1; k < n; ++k) {
            double s = 0.0;
            for (long i = 0; i + k < n; ++i) s += std::pow(std::abs(v_[i] - v_[i + k]), p);
            D[k] = s;
        }
        return cache_.emplace(p, std::move(D)).first->second;
    }

    std::vector<double> v_;
    double h_ = 0.0;
    mutable std::map<double, std::vector<double>> cache_;
};

inline double garsia_modulus(const DiscreteSpace& S, const GridFunction& f, double p, double delta) {
    GarsiaModulus G(S, f);
    if (delta < G.spacing() * (1.0 - 1e-12)) throw std::invalid_argument("garsia_modulus: delta below one spacing");
    return G.q_p(p, delta);
}

inline double garsia_modulus(const DiscreteSpace& S, const GridFunction& f, const SpaceDescriptor& young,
                             double delta) {
    if (young.tag != NormTag::Orlicz) throw std::invalid_argument("garsia_modulus: Orlicz descriptor expected");
    GarsiaModulus G(S, f);
    if (delta < G.spacing() * (1.0 - 1e-12)) throw std::invalid_argument("garsia_modulus: delta below one spacing");
    return G.q_young(young.young, delta);
}

enum class ProfileMode { plain_t, t_over_I };

// Besov-type functional from a K curve: (int (t^{-theta} K(arg(t)))^q dt/t)^{1/q}
// on a log grid over (m*1e-5, m).
inline double besov_from_curve(const KCurve& K, double m, double theta, double q,
                               ProfileMode mode = ProfileMode::plain_t, const Profile* I = nullptr,
                               int points = 64) {
    std::vector<double> tg = log_grid(m * 1e-5, m, points);
    std::vector<double> y(tg.size());
    for (std::size_t i = 0; i < tg.size(); ++i) {
        double a = tg[i];
        if (mode == ProfileMode::t_over_I) {
            double t = std::min(a, 0.5 * m);
            a = t / (*I)(t);
        }
        y[i] = std::pow(tg[i], -theta) * K(a);
    }
    if (std::isinf(q)) return *std::max_element(y.begin(), y.end());
    // trapezoid in log t
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < tg.size(); ++i)
        s += 0.5 * (std::pow(y[i], q) + std::pow(y[i + 1], q)) * std::log(tg[i + 1] / tg[i]);
    return std::pow(s, 1.0 / q);
}

inline double besov_seminorm(const DiscreteSpace& S, const GridFunction& f, const SpaceDescriptor& d, double theta,
                             double q, ProfileMode mode = ProfileMode::plain_t, const Profile* I = nullptr,
                             int points = 64, const KOptions& opt = {}, int solves = 12) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("besov_seminorm: theta must be in (0,1)");
    if (mode == ProfileMode::t_over_I && !I) throw std::invalid_argument("besov_seminorm: profile required");
    double m = S.total_measure;
    double lo = m * 1e-5, hi = m;
    if (mode == ProfileMode::t_over_I) {
        lo = lo / (*I)(lo);
        hi = 0.5 * m / (*I)(0.5 * m);
        if (hi < lo) std::swap(lo, hi);
    }
    KCurve K = k_curve(S, f, d, log_grid(lo, hi, std::max(2, solves)), opt);
    return besov_from_curve(K, m, theta, q, mode, I, points);
}

// Median of f over the lattice box of half-width rad around every point.
inline GridFunction local_median(const DiscreteSpace& S, const GridFunction& f, long rad) {
    Lattice L;
    GridFunction out(f.size());
    if (!lattice_view(S, L)) {
        for (std::size_t i = 0; i < S.size(); ++i) {
            SubsetMask Q(S.size(), false);
            for (std::size_t k = 0; k < S.size(); ++k)
                Q[k] = detail::point_distance(S, i, k) <= (rad + 0.5) * S.spacing();
            out[i] = median(S, f, Q);
        }
        return out;
    }
    std::vector<double> v, w;
    for (std::size_t i = 0; i < S.size(); ++i) {
        auto c = L.coords(L.site[i]);
        v.clear();
        w.clear();
        std::array<long, 3> lo{}, hi{};
        for (int k = 0; k < 3; ++k) {
            long r = k < L.dim ? rad : 0;
            lo[k] = std::max(0L, c[k] - r);
            hi[k] = std::min(L.extent[k] - 1, c[k] + r);
        }
        for (long z = lo[2]; z <= hi[2]; ++z)
            for (long y = lo[1]; y <= hi[1]; ++y)
                for (long x = lo[0]; x <= hi[0]; ++x) {
                    long j = L.point_at[L.index({x, y, z})];
                    if (j < 0) continue;
                    v.push_back(f[std::size_t(j)]);
                    w.push_back(S.measures[std::size_t(j)]);
                }
        StepFunction r = rearrange_weighted(v, w);
        out[i] = r(0.5 * r.total_measure);
    }
    return out;
}

// Lines (||f-h||_X, ||h||_BMO) for truncations, local medians and
// constants; K(t, f; X, BMO) is bounded by their lower envelope.
inline KCurve k_bmo_curve(const DiscreteSpace& S, const GridFunction& f, const SpaceDescriptor& d,
                          const BallFamily& balls) {
    GridNorm N(d, S.measures);
    std::vector<GridFunction> cand;
    cand.push_back(f);
    cand.push_back(GridFunction(f.size(), best_constant(S, f, d)));
    StepFunction r = decreasing_rearrangement(S, f);
    double m = S.total_measure;
    for (int j = 1; j <= 16; ++j) {
        double tau = 0.5 * std::pow(1e-3, double(j - 1) / 15.0);
        double hi = r(m * tau * (1.0 - 1e-12)), lo = r(m * (1.0 - tau));
        GridFunction h(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) h[i] = std::clamp(f[i], std::min(lo, hi), std::max(lo, hi));
        cand.push_back(std::move(h));
    }
    Lattice L;
    long extent = lattice_view(S, L) ? std::max({L.extent[0], L.extent[1], L.extent[2]}) : long(S.size());
    long last = 0;
    for (int j = 0; j < 8; ++j) {
        long rad = std::max(1L, std::lround(std::pow(double(extent), j / 7.0) / 2.0));
        if (rad == last) continue;
        last = rad;
        cand.push_back(local_median(S, f, rad));
    }
    KCurve K;
    K.couple = "bmo";
    std::vector<double> res(f.size());
    for (const auto& h : cand) {
        for (std::size_t i = 0; i < f.size(); ++i) res[i] = f[i] - h[i];
        K.add_line(N.value(res), bmo_norm(S, h, balls));
    }
    return K;
}

inline double k_bmo(const DiscreteSpace& S, const GridFunction& f, const SpaceDescriptor& d, double t,
                    const BallFamily& balls) {
    if (!(t > 0.0)) throw std::invalid_argument("k_bmo: t must be > 0");
    return k_bmo_curve(S, f, d, balls)(t);
}

// Three-term Ditzian-Totik expression for the 1D Gaussian grid.
inline double ditzian_totik_1d(const DiscreteSpace& S, const GridFunction& f, double p, double t) {
    if (S.kind != SpaceKind::gaussian || S.dim != 1) throw std::invalid_argument("ditzian_totik_1d: 1D gaussian grid required");
    double h0 = S.spacing();
    std::size_t n = S.size();
    auto lp = [&](const std::vector<double>& u, const std::vector<double>& w) {
        double s = 0.0;
        if (std::isinf(p)) {
            for (std::size_t i = 0; i < u.size(); ++i)
                if (w[i] > 0.0) s = std::max(s, std::abs(u[i]));
            return s;
        }
        for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * std::pow(std::abs(u[i]), p);
        return std::pow(s, 1.0 / p);
    };
    double mod = 0.0;
    long kmax = std::max(1L, long(std::floor(t / h0 + 1e-9)));
    for (long k = 1; k <= kmax; ++k) {
        double shift = k * h0, cut = 1.0 / (2.0 * shift);
        std::vector<double> u(n, 0.0), w(n, 0.0);
        for (std::size_t i = 0; i + k < n; ++i)
            if (std::abs(S.points[i][0]) < cut) {
                u[i] = f[i + k] - f[i];
                w[i] = S.measures[i];
            }
        mod = std::max(mod, lp(u, w));
    }
    double cut = 1.0 / (2.0 * t);
    auto tail = [&](bool right) {
        std::vector<double> v, w;
        for (std::size_t i = 0; i < n; ++i) {
            double x = S.points[i][0];
            if (right ? x > cut : x < -cut) {
                v.push_back(f[i]);
                w.push_back(S.measures[i]);
            }
        }
        if (v.empty()) return 0.0;
        auto F = [&](double c) {
            std::vector<double> u(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] - c;
            return lp(u, w);
        };
        double a = *std::min_element(v.begin(), v.end()), b = *std::max_element(v.begin(), v.end());
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
            double x1 = b - g * (b - a), x2 = a + g * (b - a);
            if (F(x1) <= F(x2)) b = x2;
            else a = x1;
        }
        return F(0.5 * (a + b));
    };
    return mod + tail(true) + tail(false);
}

}  // namespace isokit
